#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "raman/core_model.hpp"
#include "raman/distributions.hpp"
#include "raman/errors.hpp"
#include "raman/measures.hpp"

using namespace raman;
using doctest::Approx;

namespace {

constexpr double pi = std::numbers::pi;

TwoModeMoments lossless_at(double eps, double pump) {
    RamanParams p;
    p.epsilon = eps;
    p.pump_amp = pump;
    return moments_lossless(p);
}

TwoModeMoments thermal_at(double eps, double pump, double nv) {
    RamanParams p;
    p.epsilon = eps;
    p.pump_amp = pump;
    p.n_V = nv;
    return moments_general(p);
}

double thermal_prob(double b, int n) { return std::pow(b / (1.0 + b), n) / (1.0 + b); }

// s-ordered intensity distribution of a single thermal mode.
double thermal_quasi(double b, double s, double w) {
    const double c = b + (1.0 - s) / 2.0;
    return std::exp(-w / c) / c;
}

long double laguerre_direct(int n, long double x) {
    long double sum = 0.0L, binom = 1.0L, fact = 1.0L;
    for (int k = 0; k <= n; ++k) {
        if (k > 0) {
            binom = binom * (n - k + 1) / k;
            fact *= k;
        }
        sum += binom * std::pow(-x, k) / fact;
    }
    return sum;
}

}  // namespace

TEST_CASE("truncation rule") {
    CHECK(pnd_truncation(0.0, 0.0) == 1);
    const int n = pnd_truncation(16.0 / 9.0, 1.0);
    const double r = (16.0 / 9.0) / (25.0 / 9.0);
    CHECK(std::pow(r, n) < 1e-10);
    CHECK(std::pow(r, n - 1) >= 1e-10);
}

TEST_CASE("ideal paired distribution is diagonal and thermal") {
    const double B = 16.0 / 9.0;
    const auto p = pnd_ideal_paired(B, 80);
    for (int i = 0; i <= 10; ++i) {
        for (int j = 0; j <= 10; ++j) {
            CHECK(p.probs(i, j) == Approx(i == j ? thermal_prob(B, i) : 0.0).epsilon(1e-14));
        }
    }
    CHECK(p.tail_mass == Approx(std::pow(B / (1.0 + B), 81)).epsilon(1e-9));
    CHECK(p.mean_s() == Approx(B).epsilon(1e-6));
    CHECK(p.nrf() == 0.0);
    CHECK_THROWS_AS(pnd_ideal_paired(-1.0, 4), DomainError);
}

TEST_CASE("PND routes agree where they overlap") {
    SUBCASE("balanced point: ideal, nv0 and general") {
        const auto m = lossless_at(4.0, pi / std::sqrt(3.0));
        const auto a = pnd_ideal_paired(m.b_s, 30);
        const auto b = pnd_nv0(m, 30);
        const auto c = pnd_general(m, 30);
        CHECK((a.probs - b.probs).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((a.probs - c.probs).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("lossless: nv0 equals general") {
        for (double pump : {0.3, 1.0, 1.5}) {
            for (double eps : {0.25, 2.0, 6.0}) {
                const auto m = lossless_at(eps, pump);
                const auto b = pnd_nv0(m, 40);
                const auto c = pnd_general(m, 40);
                CHECK((b.probs - c.probs).cwiseAbs().maxCoeff() < 1e-10);
            }
        }
    }
    SUBCASE("nv0 rejects states off the pairing manifold") {
        CHECK_THROWS_AS(pnd_nv0(thermal_at(4.0, 0.5, 0.5), 10), DomainError);
    }
}

TEST_CASE("asymptotic joint probability") {
    const auto p = pnd_general(moments_asymptotic(4.0, 0.0), 4);
    CHECK(p.probs(1, 0) == Approx(27.0 / 256.0).epsilon(1e-12));
    CHECK(p.probs(0, 0) == Approx(81.0 / 144.0).epsilon(1e-12));
}

TEST_CASE("PND moments reproduce the Gaussian moments") {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> eps(0.3, 8.0), pump(0.1, 1.5), nv(0.0, 1.0);
    for (int i = 0; i < 40; ++i) {
        const auto m = thermal_at(eps(rng), pump(rng), nv(rng));
        const int n = pnd_truncation(m.b_s, m.b_a, 1e-14);
        if (n > kPndGeneralMaxN) continue;
        const auto p = pnd_general(m, n);
        CAPTURE(m.b_s);
        CAPTURE(m.b_a);
        CHECK(std::abs(p.tail_mass) < 1e-9);
        CHECK(p.mean_s() == Approx(m.b_s).epsilon(1e-7));
        CHECK(p.mean_a() == Approx(m.b_a).epsilon(1e-7));
        CHECK(p.cross_covariance() == Approx(std::norm(m.d_sa)).epsilon(1e-6));
        CHECK(p.nrf() == Approx(nrf(m)).epsilon(1e-6));
        CHECK(p.probs.minCoeff() >= -1e-14);
        // Marginals are thermal.
        for (int k = 0; k <= std::min(n, 6); ++k) {
            CHECK(p.probs.row(k).sum() == Approx(thermal_prob(m.b_s, k)).epsilon(1e-9));
            CHECK(p.probs.col(k).sum() == Approx(thermal_prob(m.b_a, k)).epsilon(1e-9));
        }
    }
}

TEST_CASE("general PND truncation guard") {
    CHECK_THROWS_AS(pnd_general(lossless_at(4.0, 0.5), kPndGeneralMaxN + 1), TruncationError);
    TwoModeMoments bad;
    bad.b_s = bad.b_a = 0.1;
    bad.d_sa = 1.0;
    CHECK_THROWS_AS(pnd_general(bad, 5), DomainError);
}

TEST_CASE("Laguerre recurrence against the explicit sum") {
    for (double x : {0.0, 0.5, 3.0, 12.0}) {
        const auto L = laguerre_sequence(20, x);
        for (int n = 0; n <= 20; ++n) {
            const auto expect = static_cast<double>(laguerre_direct(n, x));
            CHECK(std::abs(L[static_cast<std::size_t>(n)] - expect) < 1e-9 * std::max(1.0, std::abs(expect)));
        }
    }
}

TEST_CASE("quasi-distribution of product thermal states") {
    // Convergent while (1+s)/(1-s) * B/(1+B) < 1.
    for (double s : {0.1, 0.3, 0.6}) {
        const double bs = 0.2, ba = 0.1;
        JointPND p;
        p.n_max = 70;
        p.probs.resize(71, 71);
        for (int i = 0; i <= 70; ++i)
            for (int j = 0; j <= 70; ++j) p.probs(i, j) = thermal_prob(bs, i) * thermal_prob(ba, j);
        const auto grid = default_quasi_grid(bs, ba, 41);
        const auto q = quasi_distribution(p, s, grid);
        CHECK_FALSE(q.divergent);
        for (std::size_t i = 0; i < grid.w_s.size(); i += 5) {
            for (std::size_t j = 0; j < grid.w_a.size(); j += 5) {
                const double expect = thermal_quasi(bs, s, grid.w_s[i]) * thermal_quasi(ba, s, grid.w_a[j]);
                CHECK(q.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) ==
                      Approx(expect).epsilon(1e-8).scale(1.0));
            }
        }
        CHECK(q.negative_region().min_value > -1e-9);
    }
}

TEST_CASE("quasi-distribution of the vacuum") {
    const auto p = pnd_ideal_paired(0.0, 0);
    const auto q = quasi_distribution(p, 0.5, default_quasi_grid(0.0, 0.0, 1001));
    CHECK(q.values(0, 0) == Approx(16.0));
    CHECK(q.integral() == Approx(1.0).epsilon(1e-3));
    CHECK(q.tail_estimate < 1e-12);
}

TEST_CASE("twin-beam quasi-distribution exists only below 1 - 2 tau") {
    const double B = 16.0 / 9.0;
    const double s_max = 1.0 - 2.0 * balanced_point_report(4.0).tau;
    CHECK(s_max == Approx(1.0 / 9.0));
    // Below the threshold it is a phase-averaged Gaussian, hence nonnegative.
    const auto q = quasi_distribution(pnd_ideal_paired(B, 400), 0.08, default_quasi_grid(B, B, 401));
    CHECK_FALSE(q.divergent);
    CHECK(q.negative_region().min_value > -1e-9);
    CHECK(q.integral() == Approx(1.0).epsilon(1e-2));
    // Above it the series diverges whatever the truncation.
    for (int n : {60, 200}) {
        const auto d = quasi_distribution(pnd_ideal_paired(B, n), 0.15, default_quasi_grid(B, B),
                                          DivergencePolicy::Report);
        CHECK(d.divergent);
        CHECK(d.negative_region().min_value < 0.0);
    }
}

TEST_CASE("quasi-distribution divergence is detected") {
    const double B = 16.0 / 9.0;
    const auto p = pnd_ideal_paired(B, 12);
    CHECK_THROWS_AS(quasi_distribution(p, 0.45, default_quasi_grid(B, B)), InstabilityError);
    const auto q = quasi_distribution(p, 0.45, default_quasi_grid(B, B), DivergencePolicy::Report);
    CHECK(q.divergent);
    CHECK(q.tail_estimate > 1e-6);
    CHECK_THROWS_AS(quasi_distribution(p, 1.0, default_quasi_grid(B, B)), DomainError);
    CHECK_THROWS_AS(quasi_distribution(p, 0.0, default_quasi_grid(B, B)), DomainError);
}

TEST_CASE("phonon noise tilts the joint distribution toward Stokes") {
    const auto m0 = lossless_at(4.0, pi / std::sqrt(3.0));
    const auto m1 = thermal_at(4.0, pi / std::sqrt(3.0), 0.5);
    const auto p0 = pnd_general(m0, 20), p1 = pnd_general(m1, 20);
    CHECK(p0.probs(1, 0) == Approx(0.0).epsilon(1e-12).scale(1.0));
    CHECK(p1.probs(1, 0) > 0.0);
    CHECK(p1.probs(0, 1) > 0.0);
    CHECK(p1.nrf() > p0.nrf());
}

TEST_CASE("multimode noise reduction") {
    RamanParams p;
    p.epsilon = 4.0;
    CHECK(multimode_nrf_closed(4.0, 0.5) == Approx(0.020401003548541).epsilon(1e-12));
    for (double delta : {0.05, 0.3, 0.5, 1.0, 1.5, 1.95}) {
        CAPTURE(delta);
        CHECK(multimode_nrf_numeric(p, delta) == Approx(multimode_nrf_closed(4.0, delta)).epsilon(1e-9));
    }
    for (double eps : {2.0, 9.0}) {
        p.epsilon = eps;
        CHECK(multimode_nrf_numeric(p, 0.8) == Approx(multimode_nrf_closed(eps, 0.8)).epsilon(1e-9));
    }
    CHECK(multimode_nrf_closed(4.0, 1e-4) < 1e-8);

    p.epsilon = 4.0;
    const double frozen[] = {0.0204, 0.0284, 0.0623, 0.1085, 0.2121};
    const double nvs[] = {0.0, 0.1, 0.5, 1.0, 2.0};
    double prev = -1.0;
    for (int i = 0; i < 5; ++i) {
        p.n_V = nvs[i];
        const double r = multimode_nrf_numeric(p, 0.5);
        CHECK(r == Approx(frozen[i]).epsilon(5e-3));
        CHECK(r > prev);
        prev = r;
    }
    CHECK_THROWS_AS(multimode_nrf_closed(1.0, 0.5), DomainError);
    CHECK_THROWS_AS(multimode_nrf_closed(4.0, 2.0), DomainError);
}

TEST_CASE("balanced density matrix") {
    const auto rho = rho_balanced(4.0, 80);
    const double B = 16.0 / 9.0;
    CHECK(rho.trace() == Approx(1.0).epsilon(1e-9));
    const auto pnd = pnd_ideal_paired(B, 80);
    for (int n = 0; n <= 10; ++n) CHECK(rho.at(n, n, n, n) == Approx(pnd.probs(n, n)).epsilon(1e-12));
    CHECK(rho.at(1, 0, 1, 0) == 0.0);
    // Pure state: rho^2 = rho on the paired subspace.
    for (int m = 0; m <= 4; ++m) {
        for (int n = 0; n <= 4; ++n) {
            double sq = 0.0;
            for (int k = 0; k <= 80; ++k) sq += rho.at(m, m, k, k) * rho.at(k, k, n, n);
            CHECK(sq == Approx(rho.at(m, m, n, n)).epsilon(1e-9));
        }
    }
    // <a_S a_A> = sum_n n <n,n|rho|n-1,n-1> reproduces D.
    double d = 0.0;
    for (int n = 1; n <= 80; ++n) d += n * rho.at(n, n, n - 1, n - 1);
    CHECK(d == Approx(lossless_at(4.0, pi / std::sqrt(3.0)).d_sa.real()).epsilon(1e-9));
}
