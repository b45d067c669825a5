#include "raman/measures.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "nelder_mead.hpp"
#include "raman/errors.hpp"

namespace raman {

namespace {

void require_physical(const TwoModeMoments& m) {
    if (!m.physical(1e-9)) throw DomainError("moments violate two-mode Gaussian positivity");
}

}  // namespace

double g2_cross(double b_s, double b_a, cplx d_sa) {
    if (!(b_s > 0.0) || !(b_a > 0.0)) throw DomainError("g2 undefined for zero mean photon number");
    return 1.0 + std::norm(d_sa) / (b_s * b_a);
}

double g2(const TwoModeMoments& m) { return g2_cross(m.b_s, m.b_a, m.d_sa); }

double nrf(const TwoModeMoments& m) {
    const double tot = m.b_s + m.b_a;
    if (!(tot > 0.0)) throw DomainError("noise-reduction factor undefined for zero total intensity");
    return 1.0 + (m.b_s * m.b_s + m.b_a * m.b_a - 2.0 * std::norm(m.d_sa)) / tot;
}

double squeezing_variance(const TwoModeMoments& m) { return 1.0 + m.b_s + m.b_a - 2.0 * std::abs(m.d_sa); }

CovarianceMatrix covariance(const TwoModeMoments& m) {
    CovarianceMatrix c = CovarianceMatrix::Zero();
    c(0, 0) = c(1, 1) = 1.0 + 2.0 * m.b_s;
    c(2, 2) = c(3, 3) = 1.0 + 2.0 * m.b_a;
    const double re = m.d_sa.real(), im = m.d_sa.imag();
    Eigen::Matrix2d x;
    x << 2.0 * re, 2.0 * im, 2.0 * im, -2.0 * re;
    c.block<2, 2>(0, 2) = x;
    c.block<2, 2>(2, 0) = x.transpose();
    return c;
}

std::pair<double, double> symplectic_eigs(const CovarianceMatrix& cov) {
    CovarianceMatrix pt = cov;
    // Partial transpose: p_A -> -p_A.
    pt.row(3) *= -1.0;
    pt.col(3) *= -1.0;
    Eigen::Matrix4d omega = Eigen::Matrix4d::Zero();
    omega(0, 1) = omega(2, 3) = 1.0;
    omega(1, 0) = omega(3, 2) = -1.0;
    const Eigen::Matrix4cd a = cplx(0.0, 1.0) * (omega * pt).cast<cplx>();
    Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(a, false);
    std::array<double, 4> ev{};
    for (int i = 0; i < 4; ++i) ev[static_cast<std::size_t>(i)] = std::abs(es.eigenvalues()(i).real());
    std::sort(ev.begin(), ev.end());
    return {0.5 * (ev[0] + ev[1]), 0.5 * (ev[2] + ev[3])};
}

std::pair<double, double> symplectic_eigs_closed(const TwoModeMoments& m) {
    // Rotate D onto the real axis so Re{D^2} = |D|^2.
    const double d2 = std::norm(m.d_sa);
    const double ss = std::pow(1.0 + 2.0 * m.b_s, 2) + std::pow(1.0 + 2.0 * m.b_a, 2) + 8.0 * d2;
    const double root =
        4.0 * (1.0 + m.b_s + m.b_a) * std::sqrt(std::pow(m.b_s - m.b_a, 2) + 4.0 * d2);
    return {std::sqrt(std::max(0.0, (ss - root) / 2.0)), std::sqrt((ss + root) / 2.0)};
}

double log_negativity(const TwoModeMoments& m) {
    require_physical(m);
    return std::max(0.0, -std::log(symplectic_eigs_closed(m).first));
}

double purity(const TwoModeMoments& m) {
    require_physical(m);
    return 1.0 / ((1.0 + 2.0 * m.b_s) * (1.0 + 2.0 * m.b_a) - 4.0 * std::norm(m.d_sa));
}

double nonclassicality_depth(const TwoModeMoments& m) {
    const double r = std::sqrt(std::pow(m.b_s - m.b_a, 2) + 4.0 * std::norm(m.d_sa));
    return std::max(0.0, -(m.b_s + m.b_a) / 2.0 + r / 2.0);
}

std::pair<double, double> steering(const TwoModeMoments& m) {
    require_physical(m);
    const double sqrt_det = (1.0 + 2.0 * m.b_s) * (1.0 + 2.0 * m.b_a) - 4.0 * std::norm(m.d_sa);
    const double det = sqrt_det * sqrt_det;
    const double ds = std::pow(1.0 + 2.0 * m.b_s, 2);
    const double da = std::pow(1.0 + 2.0 * m.b_a, 2);
    return {std::max(0.0, std::log(ds / det) / 2.0), std::max(0.0, std::log(da / det) / 2.0)};
}

double parity_expectation(const TwoModeMoments& m, cplx beta_s, cplx beta_a) {
    require_physical(m);
    // Symmetric ordering: B -> B + 1/2.
    const double a = m.b_s + 0.5, b = m.b_a + 0.5;
    const double det = a * b - std::norm(m.d_sa);
    const double q = b * std::norm(beta_s) + a * std::norm(beta_a) - 2.0 * (std::conj(m.d_sa) * beta_s * beta_a).real();
    return std::exp(-q / det) / (4.0 * det);
}

double bell_parameter(const TwoModeMoments& m, const BellConfig& c) {
    if (c.j < 0.0 || c.q < 0.0) throw DomainError("Bell configuration needs j >= 0 and q >= 0");
    const cplx s1 = cplx(0.0, std::sqrt(c.j));
    const cplx a1 = -s1;
    const cplx s2 = -c.q * s1;
    const cplx a2 = -s2;
    return parity_expectation(m, s1, a1) + parity_expectation(m, s2, a1) + parity_expectation(m, s1, a2) -
           parity_expectation(m, s2, a2);
}

BellResult bell_optimize(const TwoModeMoments& m_in) {
    require_physical(m_in);
    // The displacement family assumes D < 0; a local phase on mode A puts D there.
    TwoModeMoments m = m_in;
    m.d_sa = -std::abs(m_in.d_sa);
    constexpr int n = 64;
    constexpr double j_hi = 0.05, q_lo = 0.5, q_hi = 6.0;
    const double dj = j_hi / (n - 1), dq = (q_hi - q_lo) / (n - 1);
    BellResult best;
    best.value = -1.0;
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            const BellConfig c{i * dj, q_lo + k * dq};
            const double v = bell_parameter(m, c);
            if (v > best.value) {
                best.value = v;
                best.config = c;
            }
        }
    }
    auto neg = [&](const std::array<double, 2>& x) {
        return -bell_parameter(m, BellConfig{std::abs(x[0]), std::abs(x[1])});
    };
    const auto r = detail::nelder_mead<2>(neg, {best.config.j, best.config.q}, {0.5 * dj, 0.5 * dq});
    if (-r.f >= best.value) {
        best.value = -r.f;
        best.config = BellConfig{std::abs(r.x[0]), std::abs(r.x[1])};
    }
    best.converged = r.converged;
    return best;
}

MeasureReport measure_report(const TwoModeMoments& m, bool with_bell) {
    MeasureReport r;
    if (m.b_s > 0.0 && m.b_a > 0.0) {
        r.g2 = g2(m);
        r.cs_violated = cs_violated(r.g2);
    }
    if (m.b_s + m.b_a > 0.0) r.nrf = nrf(m);
    r.lambda_sq = squeezing_variance(m);
    r.log_neg = log_negativity(m);
    r.purity = purity(m);
    r.tau = nonclassicality_depth(m);
    std::tie(r.steer_s_to_a, r.steer_a_to_s) = steering(m);
    if (with_bell) r.bell = bell_optimize(m).value;
    return r;
}

double balanced_bell_closed(double epsilon, const BellConfig& c) {
    const double se = std::sqrt(epsilon);
    const double lam = std::pow(se - 1.0, 2) / std::pow(se + 1.0, 2);
    const double k = epsilon * epsilon + 6.0 * epsilon + 1.0;
    const double q2 = c.q * c.q;
    return std::exp(-4.0 * c.j / lam) - std::exp(-4.0 * q2 * c.j / lam) +
           2.0 * std::exp(-2.0 * c.j * ((q2 + 1.0) * k - 8.0 * c.q * se * (epsilon + 1.0)) /
                          std::pow(epsilon - 1.0, 2));
}

MeasureReport balanced_point_report(double epsilon) {
    if (!(epsilon > 1.0)) throw DomainError("balanced points exist only for epsilon > 1");
    const double se = std::sqrt(epsilon);
    const double k = epsilon * epsilon + 6.0 * epsilon + 1.0;
    MeasureReport r;
    r.g2 = k / (4.0 * epsilon);
    r.cs_violated = cs_violated(r.g2);
    r.nrf = 0.0;
    r.lambda_sq = std::pow(se - 1.0, 2) / std::pow(se + 1.0, 2);
    r.log_neg = std::max(0.0, -std::log(r.lambda_sq));
    r.tau = std::max(0.0, (1.0 - r.lambda_sq) / 2.0);
    r.purity = 1.0;
    r.steer_s_to_a = r.steer_a_to_s = std::max(0.0, std::log(k / std::pow(epsilon - 1.0, 2)));

    // The closed-form functional is maximized from the generic optimizer's start.
    RamanParams p;
    p.epsilon = epsilon;
    p.pump_amp = balanced_pump_amplitudes(epsilon, 1).front().first;
    const BellResult start = bell_optimize(moments_lossless(p));
    auto neg = [&](const std::array<double, 2>& x) {
        return -balanced_bell_closed(epsilon, BellConfig{std::abs(x[0]), std::abs(x[1])});
    };
    const auto opt = detail::nelder_mead<2>(neg, {start.config.j, start.config.q},
                                            {0.1 * start.config.j + 1e-5, 0.05});
    r.bell = -opt.f;
    return r;
}

MeasureReport asymptotic_report(double epsilon, double n_T) {
    if (!(epsilon > 1.0)) throw DomainError("asymptotic report requires epsilon > 1");
    if (!(n_T >= 0.0)) throw DomainError("n_T must be >= 0");
    const double e = epsilon, nt = (e - 1.0) * n_T, em1 = e - 1.0;
    MeasureReport r;
    r.purity = em1 * em1 / ((e + 1.0) * (em1 + 2.0 * nt));

    const double s1 = 2.0 * (e + 1.0) *
                      ((e * e * e + 5.0 * e * e - 3.0 * e + 1.0) + 2.0 * (e * e + 4.0 * e - 1.0) * nt +
                       2.0 * (e + 1.0) * nt * nt) /
                      std::pow(em1, 4);
    const double s2 = (e + 1.0) * (e + nt) / (em1 * em1);
    const double s3 = ((4.0 * e * e * e + e * e - 2.0 * e + 1.0) + 2.0 * (e + 1.0) * (3.0 * e - 1.0) * nt +
                       (e + 1.0) * (e + 1.0) * nt * nt) /
                      std::pow(em1, 4);
    r.log_neg = std::max(0.0, -std::log((s1 - 4.0 * s2 * std::sqrt(s3)) / 2.0) / 2.0);
    r.tau = std::max(0.0, (1.0 - s2 + std::sqrt(s3)) / 2.0);

    r.g2 = (e * e + 2.0 * e - 1.0 + 4.0 * e * nt + 2.0 * nt * nt) / ((nt + 1.0) * (nt + 2.0 * e - 1.0));
    r.cs_violated = cs_violated(r.g2);
    r.nrf = (e + em1 * nt + nt * nt) / (3.0 * e - 1.0 + (e + 1.0) * nt);
    r.lambda_sq = (e + nt) / std::pow(std::sqrt(e) + 1.0, 2);

    const double den = (e + 1.0) * (em1 + 2.0 * nt);
    r.steer_s_to_a = std::max(0.0, std::log((e * e + 2.0 * e - 1.0 + 2.0 * nt) / den));
    r.steer_a_to_s = std::max(0.0, std::log((e * e + 1.0 + 2.0 * e * nt) / den));

    r.bell = bell_optimize(moments_asymptotic(epsilon, n_T)).value;
    return r;
}

double asymptotic_ratio(double epsilon, double n_T) {
    if (!(epsilon > 1.0)) throw DomainError("asymptotic ratio requires epsilon > 1");
    return (epsilon + epsilon * (epsilon - 1.0) * n_T) / (2.0 * epsilon - 1.0 + (epsilon - 1.0) * n_T);
}

}  // namespace raman
