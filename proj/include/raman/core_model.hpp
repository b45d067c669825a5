#pragma once

#include <complex>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

namespace raman {

using cplx = std::complex<double>;

// Physical inputs in normalized units. pump_amp is the product of the Stokes
// coupling, the pump amplitude and the medium length; gamma_n is gamma*L.
struct RamanParams {
    double epsilon = 4.0;
    double pump_amp = 0.0;
    double gamma_n = 0.0;
    double n_V = 0.0;
    double n_T = 0.0;
    double phi_L = -std::numbers::pi / 2.0;

    void validate() const;
};

// Coefficients of the normally ordered two-mode Gaussian characteristic
// function. b_v is the mean phonon number where a closed form exists.
struct TwoModeMoments {
    double b_s = 0.0;
    double b_a = 0.0;
    cplx d_sa{0.0, 0.0};
    std::optional<double> b_v;

    // |D|^2 <= B_S(B_A+1) and |D|^2 <= B_A(B_S+1) within tol.
    bool physical(double tol = 1e-10) const;
};

enum class Regime { Exponential, Oscillatory };

Regime regime_of(double epsilon);
const char* regime_name(Regime r);

// Envelope convention for the anti-Stokes field. With the generator taken
// literally, <a_S a_A> is positive at phi_L = -pi/2; the closed-form moments use
// the opposite anti-Stokes envelope sign, giving D_SA < 0 at balanced points.
inline constexpr double kAntiStokesEnvelopeSign = -1.0;

struct SolutionCoefficients {
    cplx f1, f2_s, f2_a, f3_s, f3_a, f4_s, f4_a;
    // Reservoir sums: sum_l |f2_l|^2, sum_l |f3_l|^2, sum_l f2_l f3_l.
    double sum_f2l_sq = 0.0;
    double sum_f3l_sq = 0.0;
    cplx sum_f2l_f3l{0.0, 0.0};
};

SolutionCoefficients solution_coefficients(const RamanParams& p, double zfrac);

TwoModeMoments moments_lossless(const RamanParams& p, double zfrac = 1.0);
TwoModeMoments moments_thermal(const RamanParams& p, double zfrac = 1.0);
TwoModeMoments moments_general(const RamanParams& p, double zfrac = 1.0);
TwoModeMoments moments_asymptotic(double epsilon, double n_T);

// d_SA(z_S, z_A) for a zero-temperature reservoir.
cplx cross_position_correlator(const RamanParams& p, double z_s, double z_a);

// (2m-1)pi/sqrt(eps-1) and 2m pi/sqrt(eps-1) for m = 1..m_max.
std::vector<std::pair<double, double>> balanced_pump_amplitudes(double epsilon, int m_max);

// (B_S - B_A - B_V) + n_V; zero without a reservoir.
double conservation_residual(const TwoModeMoments& m, double n_V);

// Inverts R = r_a + r_b |alpha|^2 for (epsilon, n_V).
std::pair<double, double> fit_epsilon_nv(double r_a, double r_b);

// Leading Taylor coefficients (r_a, r_b) of B_A/B_S in the pump intensity.
std::pair<double, double> ratio_taylor_coefficients(double epsilon, double n_V);

double epsilon_from_asymptotic_ratio(double r_asym);

namespace detail {
// sinh(z)/z with a series near the origin.
cplx sinhc(cplx z);
// Second divided difference of exp on three complex nodes.
cplx exp_divdiff2(cplx x0, cplx x1, cplx x2);
}  // namespace detail

}  // namespace raman
