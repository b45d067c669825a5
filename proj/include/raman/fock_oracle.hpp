#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <array>
#include <functional>
#include <vector>

#include "raman/core_model.hpp"
#include "raman/distributions.hpp"

namespace raman {

using SparseOp = Eigen::SparseMatrix<cplx>;

// Truncated set of three-mode Fock states |n_S, n_A, n_V>.
class FockBasis {
public:
    static FockBasis product(int dim_s, int dim_a, int dim_v);
    // States with n_S - n_A - n_V = charge inside the per-mode caps.
    static FockBasis sector(int charge, int dim_s, int dim_a, int dim_v);

    int size() const { return static_cast<int>(states_.size()); }
    const std::array<int, 3>& state(int i) const { return states_[static_cast<std::size_t>(i)]; }
    // -1 when the state lies outside the basis.
    int index(int n_s, int n_a, int n_v) const;
    std::array<int, 3> dims() const { return dims_; }

private:
    std::array<int, 3> dims_{};
    std::vector<std::array<int, 3>> states_;
    std::vector<int> lookup_;
};

enum class FockMethod { Auto, PureSectors, DensityMatrix };

struct FockConfig {
    int dim_s = 14;
    int dim_a = 14;
    int dim_v = 14;
    RamanParams params;
    int steps = 100;          // initial step count hint over [0, 1]
    double tol = 1e-8;        // accepted boundary leakage
    double rk_tol = 1e-11;    // integrator relative tolerance
    int max_basis = 14 * 14 * 14;
    FockMethod method = FockMethod::Auto;
    double zfrac = 1.0;
};

// One block of a block-diagonal state: a pure vector or a density matrix on its basis.
struct FockComponent {
    FockBasis basis;
    double weight = 1.0;
    bool pure = true;
    Eigen::VectorXcd psi;
    Eigen::MatrixXcd rho;
};

struct FockState {
    std::vector<FockComponent> components;
    double leakage = 0.0;        // largest population on a truncation boundary
    double initial_tail = 0.0;   // thermal weight dropped from the initial V state
    int basis_size = 0;          // largest component basis
    bool leakage_flag = false;

    double trace() const;
    // Expectation of a function diagonal in the Fock basis.
    double expect_diagonal(const std::function<double(int, int, int)>& f) const;
};

// Interaction generator on the basis; K is Hermitian.
SparseOp build_generator(const RamanParams& p, const FockBasis& basis);

FockState evolve(const FockConfig& config);
// Evolution with intermediate snapshots at the requested z fractions (sorted).
std::vector<FockState> evolve_trajectory(const FockConfig& config, const std::vector<double>& zfracs);

TwoModeMoments extract_moments(const FockState& state);
JointPND extract_pnd(const FockState& state, int n_max);
double extract_parity(const FockState& state, cplx beta_s, cplx beta_a);

// Checks that d<a_S>/dz = g_S <a_V^dag> at z = 0 for the chosen sign of dρ/dz.
bool generator_sign_self_test();

}  // namespace raman
