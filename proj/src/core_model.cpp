#include "raman/core_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "raman/errors.hpp"

namespace raman {

namespace {

constexpr double kImagTol = 1e-10;

cplx pump_phase(const RamanParams& p) { return std::polar(1.0, p.phi_L + std::numbers::pi / 2.0); }

double real_checked(cplx v, const char* what) {
    const double scale = std::max(1.0, std::abs(v.real()));
    if (std::abs(v.imag()) > kImagTol * scale) {
        throw DomainError(std::string(what) + " acquired an imaginary part " + std::to_string(v.imag()));
    }
    return v.real();
}

void check_zfrac(double zfrac) {
    if (!(zfrac >= 0.0 && zfrac <= 1.0)) throw DomainError("zfrac must lie in [0,1]");
}

void require_lossless(const RamanParams& p, bool allow_nv) {
    if (p.gamma_n != 0.0 || p.n_T != 0.0) throw DomainError("closed form requires gamma_n = 0 and n_T = 0");
    if (!allow_nv && p.n_V != 0.0) throw DomainError("closed form requires n_V = 0");
}

}  // namespace

void RamanParams::validate() const {
    if (!(std::isfinite(epsilon) && epsilon > 0.0)) throw DomainError("epsilon must be finite and positive");
    if (!(pump_amp >= 0.0) || !std::isfinite(pump_amp)) throw DomainError("pump_amp must be >= 0");
    if (!(gamma_n >= 0.0) || !std::isfinite(gamma_n)) throw DomainError("gamma_n must be >= 0");
    if (!(n_V >= 0.0) || !std::isfinite(n_V)) throw DomainError("n_V must be >= 0");
    if (!(n_T >= 0.0) || !std::isfinite(n_T)) throw DomainError("n_T must be >= 0");
    if (!std::isfinite(phi_L)) throw DomainError("phi_L must be finite");
}

bool TwoModeMoments::physical(double tol) const {
    const double d2 = std::norm(d_sa);
    const double scale = std::max({1.0, b_s * b_a, d2});
    return b_s >= -tol && b_a >= -tol && d2 <= b_s * (b_a + 1.0) + tol * scale &&
           d2 <= b_a * (b_s + 1.0) + tol * scale;
}

Regime regime_of(double epsilon) { return epsilon > 1.0 ? Regime::Oscillatory : Regime::Exponential; }

const char* regime_name(Regime r) { return r == Regime::Oscillatory ? "oscillatory" : "exponential"; }

namespace detail {

cplx sinhc(cplx z) {
    if (std::abs(z) < 1e-3) {
        const cplx z2 = z * z;
        return 1.0 + z2 / 6.0 * (1.0 + z2 / 20.0 * (1.0 + z2 / 42.0));
    }
    return std::sinh(z) / z;
}

namespace {
// exp[a, b] = e^{(a+b)/2} sinhc((a-b)/2)
cplx exp_divdiff1(cplx a, cplx b) { return std::exp(0.5 * (a + b)) * sinhc(0.5 * (a - b)); }
}  // namespace

cplx exp_divdiff2(cplx x0, cplx x1, cplx x2) {
    const std::array<cplx, 3> x{x0, x1, x2};
    const double d01 = std::abs(x0 - x1), d02 = std::abs(x0 - x2), d12 = std::abs(x1 - x2);
    const double spread = std::max({d01, d02, d12});
    if (spread < 1.0) {
        // exp[x] = e^m sum_k h_k(y)/(k+2)!, y = x - m, h_k complete homogeneous.
        const cplx m = (x0 + x1 + x2) / 3.0;
        constexpr int K = 40;
        std::array<cplx, K + 1> h{};
        for (int k = 0; k <= K; ++k) h[k] = std::pow(x[0] - m, k);
        for (int v = 1; v < 3; ++v) {
            const cplx y = x[v] - m;
            for (int k = 1; k <= K; ++k) h[k] += y * h[k - 1];
        }
        cplx sum = 0.0;
        double fact = 2.0;  // (k+2)!
        // No early exit: odd h_k vanish for symmetric nodes.
        for (int k = 0; k <= K; ++k) {
            sum += h[k] / fact;
            fact *= static_cast<double>(k + 3);
        }
        return std::exp(m) * sum;
    }
    int i = 0, j = 1, k = 2;
    if (d02 >= d01 && d02 >= d12) {
        i = 0; j = 2; k = 1;
    } else if (d12 >= d01 && d12 >= d02) {
        i = 1; j = 2; k = 0;
    }
    return (exp_divdiff1(x[i], x[k]) - exp_divdiff1(x[k], x[j])) / (x[i] - x[j]);
}

}  // namespace detail

SolutionCoefficients solution_coefficients(const RamanParams& p, double zfrac) {
    p.validate();
    check_zfrac(zfrac);
    const double a = p.pump_amp * zfrac;
    const cplx e = pump_phase(p);
    const cplx gs = a * e;
    const cplx ga = std::sqrt(p.epsilon) * gs;
    const double c = p.gamma_n * zfrac / 4.0;
    const double omega2 = (p.epsilon - 1.0) * a * a;
    // Gamma z / 4 = sqrt(c^2 - Omega^2 z^2); both characteristic roots are -c +- u.
    const cplx u = std::sqrt(cplx(c * c - omega2, 0.0));
    const double h = std::exp(-c);

    const cplx w = h * detail::sinhc(u);
    const cplx W = detail::exp_divdiff2(0.0, -c + u, -c - u);

    SolutionCoefficients s;
    s.f1 = h * (std::cosh(u) - c * detail::sinhc(u));
    s.f2_s = gs * w;
    s.f2_a = -ga * w;
    s.f3_s = 1.0 + a * a * W;
    s.f3_a = p.epsilon * a * a * W - 1.0;
    s.f4_s = gs * ga * W;
    s.f4_a = s.f4_s;

    s.sum_f2l_sq = -1.0 - std::norm(s.f2_s) + std::norm(s.f3_s) - std::norm(s.f4_s);
    s.sum_f3l_sq = 1.0 - std::norm(s.f2_a) - std::norm(s.f3_a) + std::norm(s.f4_a);
    s.sum_f2l_f3l = -s.f2_s * s.f2_a - s.f3_s * s.f4_a + s.f4_s * s.f3_a;
    return s;
}

TwoModeMoments moments_lossless(const RamanParams& p, double zfrac) {
    p.validate();
    check_zfrac(zfrac);
    require_lossless(p, false);
    const double a = p.pump_amp * zfrac;
    const double a2 = a * a;
    const cplx x = a * std::sqrt(cplx(1.0 - p.epsilon, 0.0));
    const cplx S2 = std::pow(detail::sinhc(0.5 * x), 2);
    const cplx sx2 = std::pow(detail::sinhc(x), 2);

    TwoModeMoments m;
    m.b_a = real_checked(p.epsilon * a2 * a2 * S2 * S2 / 4.0, "B_A");
    m.b_s = m.b_a + real_checked(a2 * sx2, "B_S");
    const double d = real_checked(-std::sqrt(p.epsilon) * (a2 / 2.0) * S2 * (1.0 + (a2 / 2.0) * S2), "D_SA");
    m.d_sa = d * pump_phase(p) * pump_phase(p);
    m.b_v = m.b_s - m.b_a;
    return m;
}

TwoModeMoments moments_thermal(const RamanParams& p, double zfrac) {
    p.validate();
    check_zfrac(zfrac);
    require_lossless(p, true);
    if (p.epsilon <= 1.0) throw UnsupportedError("thermal closed form is available only for epsilon > 1");
    RamanParams ideal = p;
    ideal.n_V = 0.0;
    TwoModeMoments m = moments_lossless(ideal, zfrac);
    const double y = p.pump_amp * zfrac * std::sqrt(p.epsilon - 1.0);
    const double beta = std::pow(std::sin(y), 2) / (p.epsilon - 1.0);
    m.b_s += p.n_V * beta;
    m.b_a += p.epsilon * p.n_V * beta;
    m.d_sa -= std::sqrt(p.epsilon) * p.n_V * beta * pump_phase(p) * pump_phase(p);
    m.b_v = p.n_V * std::pow(std::cos(y), 2) + beta;
    return m;
}

TwoModeMoments moments_general(const RamanParams& p, double zfrac) {
    const SolutionCoefficients s = solution_coefficients(p, zfrac);
    TwoModeMoments m;
    m.b_s = std::norm(s.f2_s) * (p.n_V + 1.0) + std::norm(s.f4_s) + s.sum_f2l_sq * (p.n_T + 1.0);
    m.b_a = std::norm(s.f2_a) * p.n_V + std::norm(s.f4_a) + s.sum_f3l_sq * p.n_T;
    m.d_sa = s.f2_s * s.f2_a * p.n_V - s.f3_s * s.f4_a + s.sum_f2l_f3l * p.n_T;
    if (p.gamma_n == 0.0) m.b_v = std::norm(s.f1) * p.n_V + std::norm(s.f2_s);
    return m;
}

TwoModeMoments moments_asymptotic(double epsilon, double n_T) {
    if (!(epsilon > 1.0) || !std::isfinite(epsilon)) throw DomainError("asymptotic state requires epsilon > 1");
    if (!(n_T >= 0.0)) throw DomainError("n_T must be >= 0");
    const double nt = (epsilon - 1.0) * n_T;
    const double den = (epsilon - 1.0) * (epsilon - 1.0);
    TwoModeMoments m;
    m.b_a = (epsilon * nt + epsilon) / den;
    m.b_s = (nt + 2.0 * epsilon - 1.0) / den;
    m.d_sa = -std::sqrt(epsilon) * (nt + epsilon) / den;
    return m;
}

cplx cross_position_correlator(const RamanParams& p, double z_s, double z_a) {
    p.validate();
    if (p.n_T != 0.0) {
        throw UnsupportedError("cross-position reservoir sums are unknown for n_T > 0");
    }
    const SolutionCoefficients s = solution_coefficients(p, z_s);
    const SolutionCoefficients a = solution_coefficients(p, z_a);
    return s.f2_s * a.f2_a * p.n_V - s.f3_s * a.f4_a;
}

std::vector<std::pair<double, double>> balanced_pump_amplitudes(double epsilon, int m_max) {
    if (!(epsilon > 1.0)) throw DomainError("balanced points exist only for epsilon > 1");
    if (m_max < 1) throw DomainError("m_max must be >= 1");
    const double unit = std::numbers::pi / std::sqrt(epsilon - 1.0);
    std::vector<std::pair<double, double>> out;
    out.reserve(static_cast<std::size_t>(m_max));
    for (int m = 1; m <= m_max; ++m) out.emplace_back((2 * m - 1) * unit, 2 * m * unit);
    return out;
}

double conservation_residual(const TwoModeMoments& m, double n_V) {
    if (!m.b_v) throw ContractError("conservation residual needs B_V");
    return (m.b_s - m.b_a - *m.b_v) + n_V;
}

std::pair<double, double> fit_epsilon_nv(double r_a, double r_b) {
    if (r_a == 1.0 || r_b == 0.0) throw DomainError("singular ratio fit: r_a = 1 or r_b = 0");
    return {r_a + 4.0 * r_b / (1.0 - r_a), r_a * (1.0 - r_a) / (4.0 * r_b)};
}

std::pair<double, double> ratio_taylor_coefficients(double epsilon, double n_V) {
    const double r_a = epsilon * n_V / (n_V + 1.0);
    const double r_b = epsilon / (4.0 * (n_V + 1.0)) * (1.0 - r_a);
    return {r_a, r_b};
}

double epsilon_from_asymptotic_ratio(double r_asym) {
    if (!(r_asym > 0.5) || r_asym > 1.0) throw DomainError("asymptotic ratio must lie in (1/2, 1]");
    return r_asym / (2.0 * r_asym - 1.0);
}

}  // namespace raman
