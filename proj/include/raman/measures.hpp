#pragma once

#include <Eigen/Dense>
#include <limits>
#include <utility>

#include "raman/core_model.hpp"

namespace raman {

// Quadrature covariance (x_S, p_S, x_A, p_A), vacuum = identity.
using CovarianceMatrix = Eigen::Matrix4d;

struct BellConfig {
    double j = 0.0;  // squared displacement magnitude
    double q = 0.0;  // displacement ratio
};

struct BellResult {
    BellConfig config;
    double value = 0.0;
    bool converged = false;
    bool nonlocal() const { return value > 2.0; }
};

struct MeasureReport {
    static constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    double g2 = nan;
    bool cs_violated = false;
    double nrf = nan;
    double lambda_sq = nan;
    double log_neg = nan;
    double purity = nan;
    double tau = nan;
    double steer_s_to_a = nan;
    double steer_a_to_s = nan;
    double bell = nan;
};

double g2(const TwoModeMoments& m);
double g2_cross(double b_s, double b_a, cplx d_sa);
inline bool cs_violated(double g2_value) { return g2_value > 2.0; }

double nrf(const TwoModeMoments& m);
double squeezing_variance(const TwoModeMoments& m);

CovarianceMatrix covariance(const TwoModeMoments& m);
// Symplectic eigenvalues (xi_-, xi_+) of the partially transposed covariance,
// from the numerical spectrum of i*Omega*sigma.
std::pair<double, double> symplectic_eigs(const CovarianceMatrix& cov);
// Closed form of the same pair for a phase-rotated (real) D.
std::pair<double, double> symplectic_eigs_closed(const TwoModeMoments& m);

double log_negativity(const TwoModeMoments& m);
double purity(const TwoModeMoments& m);
double nonclassicality_depth(const TwoModeMoments& m);
// (S_{S->A}, S_{A->S})
std::pair<double, double> steering(const TwoModeMoments& m);

// Joint displaced parity, pi^2/4 times the Wigner function.
double parity_expectation(const TwoModeMoments& m, cplx beta_s, cplx beta_a);

double bell_parameter(const TwoModeMoments& m, const BellConfig& c);
// Optimum over (J, q) after rotating D onto the negative real axis; config refers to that frame.
BellResult bell_optimize(const TwoModeMoments& m);

// All generic measures; Bell is optimized only when with_bell is set.
MeasureReport measure_report(const TwoModeMoments& m, bool with_bell = false);

MeasureReport balanced_point_report(double epsilon);
// Closed-form Bell functional at a balanced point for given (J, q).
double balanced_bell_closed(double epsilon, const BellConfig& c);

MeasureReport asymptotic_report(double epsilon, double n_T);
// <n_A>/<n_S> of the asymptotic state.
double asymptotic_ratio(double epsilon, double n_T);

}  // namespace raman
