#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "raman/core_model.hpp"
#include "raman/errors.hpp"
#include "raman/measures.hpp"

using namespace raman;
using doctest::Approx;

namespace {

constexpr double pi = std::numbers::pi;

TwoModeMoments mom(double bs, double ba, cplx d) {
    TwoModeMoments m;
    m.b_s = bs;
    m.b_a = ba;
    m.d_sa = d;
    return m;
}

// Covariance built from symmetrized quadratures x = a + a^dag, p = -i(a - a^dag).
Eigen::Matrix4d sigma_oracle(const TwoModeMoments& m) {
    Eigen::Matrix4d s = Eigen::Matrix4d::Zero();
    s(0, 0) = s(1, 1) = 1.0 + 2.0 * m.b_s;
    s(2, 2) = s(3, 3) = 1.0 + 2.0 * m.b_a;
    const double re = m.d_sa.real(), im = m.d_sa.imag();
    s(0, 2) = s(2, 0) = 2.0 * re;    // <x_S x_A>
    s(0, 3) = s(3, 0) = 2.0 * im;    // <x_S p_A>
    s(1, 2) = s(2, 1) = 2.0 * im;    // <p_S x_A>
    s(1, 3) = s(3, 1) = -2.0 * re;   // <p_S p_A>
    return s;
}

// Displaced parity from the Gaussian Wigner function on quadratures.
double parity_oracle(const TwoModeMoments& m, cplx bs, cplx ba) {
    const Eigen::Matrix4d s = sigma_oracle(m);
    const Eigen::Vector4d xi(2.0 * bs.real(), 2.0 * bs.imag(), 2.0 * ba.real(), 2.0 * ba.imag());
    return std::exp(-0.5 * xi.dot(s.inverse() * xi)) / std::sqrt(s.determinant());
}

TwoModeMoments random_physical(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> b(0.0, 4.0), f(0.0, 1.0), ph(-pi, pi);
    const double bs = b(rng), ba = b(rng);
    const double dmax = std::sqrt(std::min(bs * (ba + 1.0), ba * (bs + 1.0)));
    return mom(bs, ba, std::polar(f(rng) * dmax, ph(rng)));
}

MeasureReport generic_balanced(double eps) {
    RamanParams p;
    p.epsilon = eps;
    p.pump_amp = balanced_pump_amplitudes(eps, 1).front().first;
    return measure_report(moments_lossless(p), true);
}

}  // namespace

TEST_CASE("balanced point values at epsilon = 4") {
    const auto r = balanced_point_report(4.0);
    CHECK(r.g2 == Approx(2.5625).epsilon(1e-12));
    CHECK(r.cs_violated);
    CHECK(r.nrf == 0.0);
    CHECK(r.lambda_sq == Approx(1.0 / 9.0).epsilon(1e-12));
    CHECK(r.log_neg == Approx(2.19722457734).epsilon(1e-10));
    CHECK(r.tau == Approx(4.0 / 9.0).epsilon(1e-12));
    CHECK(r.purity == 1.0);
    CHECK(r.steer_s_to_a == Approx(1.51634748937).epsilon(1e-10));
    CHECK(r.steer_a_to_s == Approx(1.51634748937).epsilon(1e-10));
    CHECK(r.bell == Approx(2.31294321965).epsilon(1e-8));
}

TEST_CASE("balanced closed forms equal the generic pipeline") {
    for (double eps : {1.5, 2.5, 4.0, 7.0}) {
        CAPTURE(eps);
        const auto c = balanced_point_report(eps);
        const auto g = generic_balanced(eps);
        CHECK(g.g2 == Approx(c.g2).epsilon(1e-9));
        CHECK(std::abs(g.nrf) < 1e-9);
        CHECK(g.lambda_sq == Approx(c.lambda_sq).epsilon(1e-9));
        CHECK(g.log_neg == Approx(c.log_neg).epsilon(1e-9));
        CHECK(g.tau == Approx(c.tau).epsilon(1e-9));
        CHECK(g.purity == Approx(1.0).epsilon(1e-9));
        CHECK(g.steer_s_to_a == Approx(c.steer_s_to_a).epsilon(1e-9));
        CHECK(g.steer_a_to_s == Approx(c.steer_a_to_s).epsilon(1e-9));
        CHECK(g.bell == Approx(c.bell).epsilon(1e-6));
    }
}

TEST_CASE("balanced Bell functional matches the parity sum") {
    RamanParams p;
    p.epsilon = 4.0;
    p.pump_amp = pi / std::sqrt(3.0);
    const auto m = moments_lossless(p);
    for (const BellConfig c : {BellConfig{0.0035148, 3.08604}, BellConfig{0.01, 1.0}, BellConfig{0.002, 5.0}}) {
        CHECK(bell_parameter(m, c) == Approx(balanced_bell_closed(4.0, c)).epsilon(1e-10));
    }
    const auto best = bell_optimize(m);
    CHECK(best.nonlocal());
    CHECK(best.config.j == Approx(0.0035148).epsilon(1e-3));
    CHECK(best.config.q == Approx(3.08604).epsilon(1e-3));
}

TEST_CASE("asymptotic values at epsilon = 4") {
    const auto r = asymptotic_report(4.0, 0.0);
    CHECK(r.g2 == Approx(23.0 / 7.0).epsilon(1e-12));
    CHECK(r.nrf == Approx(4.0 / 11.0).epsilon(1e-12));
    CHECK(r.lambda_sq == Approx(4.0 / 9.0).epsilon(1e-12));
    CHECK(r.log_neg == Approx(0.88318391524).epsilon(1e-10));
    CHECK(r.purity == Approx(0.6).epsilon(1e-12));
    CHECK(r.tau == Approx(0.293267810894).epsilon(1e-10));
    CHECK(r.steer_s_to_a == Approx(0.427444014827).epsilon(1e-10));
    CHECK(r.steer_a_to_s == Approx(0.125163142954).epsilon(1e-10));
    CHECK(r.bell == Approx(1.34217552539).epsilon(1e-8));
    CHECK(asymptotic_ratio(4.0, 0.0) == Approx(4.0 / 7.0));
}

TEST_CASE("asymptotic closed forms equal the generic pipeline") {
    for (double eps : {1.3, 2.0, 4.0, 9.0}) {
        for (double nt : {0.0, 0.1, 0.7}) {
            CAPTURE(eps);
            CAPTURE(nt);
            const auto m = moments_asymptotic(eps, nt);
            const auto c = asymptotic_report(eps, nt);
            const auto g = measure_report(m, false);
            CHECK(g.g2 == Approx(c.g2).epsilon(1e-10));
            CHECK(g.nrf == Approx(c.nrf).epsilon(1e-10));
            CHECK(g.lambda_sq == Approx(c.lambda_sq).epsilon(1e-10));
            CHECK(g.log_neg == Approx(c.log_neg).epsilon(1e-9));
            CHECK(g.purity == Approx(c.purity).epsilon(1e-10));
            CHECK(g.tau == Approx(c.tau).epsilon(1e-9));
            CHECK(g.steer_s_to_a == Approx(c.steer_s_to_a).epsilon(1e-9));
            CHECK(g.steer_a_to_s == Approx(c.steer_a_to_s).epsilon(1e-9));
            CHECK(asymptotic_ratio(eps, nt) == Approx(m.b_a / m.b_s).epsilon(1e-12));
        }
    }
}

TEST_CASE("asymptotic windows") {
    // Nonclassical correlations survive for any detuning at zero temperature.
    for (double eps : {1.1, 2.0, 4.0, 20.0}) {
        const auto r = asymptotic_report(eps, 0.0);
        CHECK(r.cs_violated);
        CHECK(r.nrf < 1.0);
        CHECK(r.log_neg > 0.0);
        CHECK(r.steer_s_to_a > 0.0);
        CHECK(r.steer_s_to_a >= r.steer_a_to_s);
    }
    // A hot reservoir weakens the entanglement roughly as 1/n_T without removing it.
    const double e50 = asymptotic_report(4.0, 50.0).log_neg, e100 = asymptotic_report(4.0, 100.0).log_neg;
    CHECK(e100 > 0.0);
    CHECK(e50 / e100 == Approx(2.0).epsilon(0.01));
}

TEST_CASE("asymptotic measures degrade monotonically with reservoir temperature") {
    double prev_en = 1e300, prev_g2 = 1e300, prev_pur = 1e300, prev_ratio = -1.0;
    for (int i = 0; i <= 20; ++i) {
        const double nt = 0.05 * i;
        const auto r = asymptotic_report(4.0, nt);
        CHECK(r.log_neg <= prev_en + 1e-14);
        CHECK(r.g2 < prev_g2);
        CHECK(r.purity < prev_pur);
        const double ratio = asymptotic_ratio(4.0, nt);
        CHECK(ratio > prev_ratio);
        prev_en = r.log_neg;
        prev_g2 = r.g2;
        prev_pur = r.purity;
        prev_ratio = ratio;
    }
}

TEST_CASE("symplectic eigenvalues: closed form against the numerical spectrum") {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 300; ++i) {
        const auto m = random_physical(rng);
        const auto [a, b] = symplectic_eigs(covariance(m));
        const auto [ca, cb] = symplectic_eigs_closed(m);
        CHECK(a == Approx(ca).epsilon(1e-8));
        CHECK(b == Approx(cb).epsilon(1e-8));
        CHECK(covariance(m).isApprox(sigma_oracle(m), 1e-14));
    }
}

TEST_CASE("purity, steering and parity against covariance oracles") {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const auto m = random_physical(rng);
        const Eigen::Matrix4d s = sigma_oracle(m);
        const double det = s.determinant();
        CHECK(purity(m) == Approx(1.0 / std::sqrt(det)).epsilon(1e-9));
        const auto [sa, as] = steering(m);
        const double ds = s.topLeftCorner<2, 2>().determinant(), da = s.bottomRightCorner<2, 2>().determinant();
        CHECK(sa == Approx(std::max(0.0, 0.5 * std::log(ds / det))).epsilon(1e-9));
        CHECK(as == Approx(std::max(0.0, 0.5 * std::log(da / det))).epsilon(1e-9));
        const cplx bs(u(rng), u(rng)), ba(u(rng), u(rng));
        const double par = parity_expectation(m, bs, ba);
        CHECK(par == Approx(parity_oracle(m, bs, ba)).epsilon(1e-9));
        CHECK(std::abs(par) <= 1.0 + 1e-12);
    }
}

TEST_CASE("vacuum and classical states") {
    const auto vac = mom(0.0, 0.0, 0.0);
    CHECK(log_negativity(vac) == 0.0);
    CHECK(purity(vac) == Approx(1.0));
    CHECK(nonclassicality_depth(vac) == 0.0);
    CHECK(steering(vac).first == 0.0);
    CHECK(squeezing_variance(vac) == Approx(1.0));
    CHECK(parity_expectation(vac, 0.0, 0.0) == Approx(1.0));
    CHECK_THROWS_AS(g2(vac), DomainError);
    CHECK_THROWS_AS(nrf(vac), DomainError);
    const auto rv = measure_report(vac);
    CHECK(std::isnan(rv.g2));
    CHECK(std::isnan(rv.nrf));

    // Product thermal states: no entanglement, steering or Bell violation.
    const auto th = mom(0.8, 0.3, 0.0);
    CHECK(log_negativity(th) == 0.0);
    CHECK(nonclassicality_depth(th) == 0.0);
    CHECK(steering(th).first == 0.0);
    CHECK(steering(th).second == 0.0);
    CHECK(g2(th) == Approx(1.0));
    CHECK(bell_optimize(th).value <= 2.0);
}

TEST_CASE("unphysical moments are rejected") {
    const auto bad = mom(0.1, 0.1, 1.0);
    CHECK_THROWS_AS(log_negativity(bad), DomainError);
    CHECK_THROWS_AS(purity(bad), DomainError);
    CHECK_THROWS_AS(parity_expectation(bad, 0.0, 0.0), DomainError);
    CHECK_THROWS_AS(bell_parameter(mom(0.1, 0.1, 0.0), BellConfig{-1.0, 1.0}), DomainError);
    CHECK_THROWS_AS(balanced_point_report(1.0), DomainError);
    CHECK_THROWS_AS(asymptotic_report(0.9, 0.0), DomainError);
}

TEST_CASE("lossless states violate Cauchy-Schwarz; purity only at balanced points") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> eps(0.1, 8.0), pump(0.05, 3.0);
    for (int i = 0; i < 200; ++i) {
        RamanParams p;
        p.epsilon = eps(rng);
        p.pump_amp = pump(rng);
        const auto m = moments_lossless(p);
        if (m.b_a < 1e-8) continue;
        const auto r = measure_report(m);
        CHECK(r.cs_violated);
        // The phonon carries the missing purity: the two-mode state is mixed unless B_S = B_A.
        CHECK(r.purity <= 1.0 + 1e-9);
        CHECK(r.log_neg > 0.0);
        CHECK(r.g2 == Approx(1.0 + (1.0 + m.b_s) / m.b_s).epsilon(1e-8));
    }
    for (double eps : {2.0, 4.0}) {
        for (const auto& [a, at] : balanced_pump_amplitudes(eps, 2)) {
            RamanParams p;
            p.epsilon = eps;
            p.pump_amp = a;
            CHECK(purity(moments_lossless(p)) == Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("entanglement grows with twin-beam gain") {
    double prev = -1.0;
    for (int i = 1; i <= 30; ++i) {
        const double b = 0.1 * i;
        const auto m = mom(b, b, -std::sqrt(b * (b + 1.0)));
        const double en = log_negativity(m);
        CHECK(en > prev);
        CHECK(en == Approx(2.0 * std::asinh(std::sqrt(b))).epsilon(1e-9));
        prev = en;
    }
}

TEST_CASE("measures are invariant under local phase rotations") {
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> ph(-pi, pi);
    for (int i = 0; i < 20; ++i) {
        const auto m = random_physical(rng);
        auto r = m;
        r.d_sa = m.d_sa * std::polar(1.0, ph(rng));
        const auto a = measure_report(m, true), b = measure_report(r, true);
        CHECK(b.log_neg == Approx(a.log_neg).epsilon(1e-10));
        CHECK(b.purity == Approx(a.purity).epsilon(1e-12));
        CHECK(b.tau == Approx(a.tau).epsilon(1e-10));
        CHECK(b.steer_s_to_a == Approx(a.steer_s_to_a).epsilon(1e-10));
        CHECK(b.bell == Approx(a.bell).epsilon(1e-9));
    }
}
