#pragma once

#include <Eigen/Dense>
#include <array>
#include <map>
#include <vector>

#include "raman/core_model.hpp"

namespace raman {

struct JointPND {
    Eigen::MatrixXd probs;  // probs(n_S, n_A), 0..n_max
    int n_max = 0;
    double tail_mass = 0.0;

    double mean_s() const;
    double mean_a() const;
    // <dn_S dn_A>
    double cross_covariance() const;
    // Noise-reduction factor from direct moment sums.
    double nrf() const;
};

// Smallest n with (B/(1+B))^n < tol, using the larger of the two means.
int pnd_truncation(double b_s, double b_a, double tol = 1e-10);

JointPND pnd_ideal_paired(double B, int n_max);
JointPND pnd_nv0(const TwoModeMoments& m, int n_max);
JointPND pnd_general(const TwoModeMoments& m, int n_max);

inline constexpr int kPndGeneralMaxN = 60;

struct QuasiGrid {
    std::vector<double> w_s;
    std::vector<double> w_a;
};

// 101 x 101 over [0, 5(1+B_S)] x [0, 5(1+B_A)].
QuasiGrid default_quasi_grid(double b_s, double b_a, int points = 101);

enum class DivergencePolicy { Throw, Report };

struct NegativeRegion {
    double min_value = 0.0;
    double argmin_w_s = 0.0;
    double argmin_w_a = 0.0;
    double area_fraction = 0.0;  // fraction of grid points below -1e-6
};

struct QuasiDistribution {
    double s = 0.0;
    QuasiGrid grid;
    Eigen::MatrixXd values;  // values(i, j) at (w_s[i], w_a[j])
    int n_max = 0;
    // Largest magnitude among the last few truncation shells, relative to max|P|.
    double tail_estimate = 0.0;
    bool divergent = false;

    double integral() const;
    NegativeRegion negative_region() const;
};

QuasiDistribution quasi_distribution(const JointPND& pnd, double s, const QuasiGrid& grid,
                                     DivergencePolicy policy = DivergencePolicy::Throw);

// Standard Laguerre polynomials L_0..L_n at x by upward recurrence.
std::vector<double> laguerre_sequence(int n, double x);

double multimode_nrf_closed(double epsilon, double delta);
// Quadrature of per-mode moments over |alpha_L| in alpha_1 [1 - delta/2, 1 + delta/2].
double multimode_nrf_numeric(const RamanParams& p, double delta, int n_quad = 96);

struct RhoElements {
    std::map<std::array<int, 4>, double> elements;  // (m_S, m_A, n_S, n_A)
    double at(int m_s, int m_a, int n_s, int n_a) const;
    double trace() const;
};

RhoElements rho_balanced(double epsilon, int n_max);

}  // namespace raman
