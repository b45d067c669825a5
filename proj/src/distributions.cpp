#include "raman/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "raman/errors.hpp"

namespace raman {

namespace {

constexpr double kTailThreshold = 1e-6;  // shell size relative to max|P| flagged as unconverged
constexpr int kTailShells = 4;

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(static_cast<std::size_t>(n), 0.0);
    w.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        const auto a = static_cast<std::size_t>(i), b = static_cast<std::size_t>(n - 1 - i);
        x[a] = -z;
        x[b] = z;
        w[a] = w[b] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
}

JointPND finish(Eigen::MatrixXd probs, int n_max) {
    JointPND out;
    out.tail_mass = 1.0 - probs.sum();
    out.probs = std::move(probs);
    out.n_max = n_max;
    return out;
}

void check_n_max(int n_max) {
    if (n_max < 0) throw DomainError("n_max must be >= 0");
}

}  // namespace

double JointPND::mean_s() const {
    double m = 0.0;
    for (int i = 0; i <= n_max; ++i) m += i * probs.row(i).sum();
    return m;
}

double JointPND::mean_a() const {
    double m = 0.0;
    for (int j = 0; j <= n_max; ++j) m += j * probs.col(j).sum();
    return m;
}

double JointPND::cross_covariance() const {
    double ss = 0.0;
    for (int i = 0; i <= n_max; ++i)
        for (int j = 0; j <= n_max; ++j) ss += static_cast<double>(i) * j * probs(i, j);
    return ss - mean_s() * mean_a();
}

double JointPND::nrf() const {
    double m1 = 0.0, m2 = 0.0, tot = 0.0;
    for (int i = 0; i <= n_max; ++i) {
        for (int j = 0; j <= n_max; ++j) {
            const double d = static_cast<double>(i - j);
            m1 += d * probs(i, j);
            m2 += d * d * probs(i, j);
            tot += static_cast<double>(i + j) * probs(i, j);
        }
    }
    if (!(tot > 0.0)) throw DomainError("noise-reduction factor undefined for zero total intensity");
    return (m2 - m1 * m1) / tot;
}

int pnd_truncation(double b_s, double b_a, double tol) {
    const double b = std::max(b_s, b_a);
    if (b <= 0.0) return 1;
    const double r = b / (1.0 + b);
    return std::max(1, static_cast<int>(std::ceil(std::log(tol) / std::log(r))));
}

JointPND pnd_ideal_paired(double B, int n_max) {
    if (!(B >= 0.0)) throw DomainError("B must be >= 0");
    check_n_max(n_max);
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n_max + 1, n_max + 1);
    const double r = B / (1.0 + B);
    double v = 1.0 / (1.0 + B);
    for (int n = 0; n <= n_max; ++n) {
        p(n, n) = v;
        v *= r;
    }
    return finish(std::move(p), n_max);
}

JointPND pnd_nv0(const TwoModeMoments& m, int n_max) {
    check_n_max(n_max);
    const double pair = m.b_a * (1.0 + m.b_s);
    if (std::abs(std::norm(m.d_sa) - pair) > 1e-8 * std::max(1.0, pair)) {
        throw DomainError("pairing relation |D|^2 = B_A(1+B_S) violated; use pnd_general");
    }
    if (m.b_s < m.b_a - 1e-12) throw DomainError("pnd_nv0 requires B_S >= B_A");
    const double bs = m.b_s, ba = m.b_a, diff = std::max(0.0, bs - ba);
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n_max + 1, n_max + 1);
    for (int ns = 0; ns <= n_max; ++ns) {
        const double norm = std::pow(1.0 + bs, 1 + ns);
        double binom = 1.0;
        for (int na = 0; na <= ns; ++na) {
            p(ns, na) = binom * std::pow(ba, na) * std::pow(diff, ns - na) / norm;
            binom = binom * (ns - na) / (na + 1);
        }
    }
    return finish(std::move(p), n_max);
}

JointPND pnd_general(const TwoModeMoments& m, int n_max) {
    check_n_max(n_max);
    if (n_max > kPndGeneralMaxN) {
        throw TruncationError("pnd_general supports n_max <= " + std::to_string(kPndGeneralMaxN));
    }
    if (!m.physical(1e-9)) throw DomainError("moments violate two-mode Gaussian positivity");
    const double bs = m.b_s, ba = m.b_a, d2 = std::norm(m.d_sa);
    // Taylor coefficients of 1/Q(t_S, t_A), Q = G^{-1} at lambda = 1 - t.
    const double c00 = (1.0 + bs) * (1.0 + ba) - d2;
    const double c10 = -bs * (1.0 + ba) + d2;
    const double c01 = -ba * (1.0 + bs) + d2;
    const double c11 = bs * ba - d2;
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n_max + 1, n_max + 1);
    for (int i = 0; i <= n_max; ++i) {
        for (int j = 0; j <= n_max; ++j) {
            if (i == 0 && j == 0) {
                p(0, 0) = 1.0 / c00;
                continue;
            }
            double acc = 0.0;
            if (i > 0) acc += c10 * p(i - 1, j);
            if (j > 0) acc += c01 * p(i, j - 1);
            if (i > 0 && j > 0) acc += c11 * p(i - 1, j - 1);
            p(i, j) = -acc / c00;
        }
    }
    return finish(std::move(p), n_max);
}

QuasiGrid default_quasi_grid(double b_s, double b_a, int points) {
    if (points < 2) throw DomainError("grid needs at least two points per axis");
    QuasiGrid g;
    g.w_s.resize(static_cast<std::size_t>(points));
    g.w_a.resize(static_cast<std::size_t>(points));
    const double hs = 5.0 * (1.0 + b_s), ha = 5.0 * (1.0 + b_a);
    for (int i = 0; i < points; ++i) {
        g.w_s[static_cast<std::size_t>(i)] = hs * i / (points - 1);
        g.w_a[static_cast<std::size_t>(i)] = ha * i / (points - 1);
    }
    return g;
}

std::vector<double> laguerre_sequence(int n, double x) {
    std::vector<double> L(static_cast<std::size_t>(std::max(n, 0) + 1));
    L[0] = 1.0;
    if (n >= 1) L[1] = 1.0 - x;
    for (int k = 1; k < n; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        L[ku + 1] = ((2.0 * k + 1.0 - x) * L[ku] - k * L[ku - 1]) / (k + 1.0);
    }
    return L;
}

double QuasiDistribution::integral() const {
    auto trap = [](const std::vector<double>& x, auto&& f) {
        double acc = 0.0;
        for (std::size_t i = 1; i < x.size(); ++i) acc += 0.5 * (x[i] - x[i - 1]) * (f(i) + f(i - 1));
        return acc;
    };
    return trap(grid.w_s, [&](std::size_t i) {
        return trap(grid.w_a, [&](std::size_t j) {
            return values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        });
    });
}

NegativeRegion QuasiDistribution::negative_region() const {
    NegativeRegion r;
    Eigen::Index i = 0, j = 0;
    r.min_value = values.minCoeff(&i, &j);
    r.argmin_w_s = grid.w_s[static_cast<std::size_t>(i)];
    r.argmin_w_a = grid.w_a[static_cast<std::size_t>(j)];
    r.area_fraction = static_cast<double>((values.array() < -1e-6).count()) / static_cast<double>(values.size());
    return r;
}

QuasiDistribution quasi_distribution(const JointPND& pnd, double s, const QuasiGrid& grid,
                                     DivergencePolicy policy) {
    if (!(s > 0.0 && s < 1.0)) throw DomainError("ordering parameter s must lie in (0,1)");
    for (double w : grid.w_s)
        if (w < 0.0) throw DomainError("integrated intensities must be nonnegative");
    for (double w : grid.w_a)
        if (w < 0.0) throw DomainError("integrated intensities must be nonnegative");

    const int N = pnd.n_max;
    const auto ns = static_cast<Eigen::Index>(grid.w_s.size());
    const auto na = static_cast<Eigen::Index>(grid.w_a.size());
    const double ratio = (s + 1.0) / (s - 1.0);
    const double scale = 4.0 / (1.0 - s * s);

    // LS(n, i) = L_n(scale w_S[i]) weighted by ratio^n; likewise LA.
    Eigen::MatrixXd LS(N + 1, ns), LA(N + 1, na);
    for (Eigen::Index i = 0; i < ns; ++i) {
        const auto L = laguerre_sequence(N, scale * grid.w_s[static_cast<std::size_t>(i)]);
        double rn = 1.0;
        for (int n = 0; n <= N; ++n, rn *= ratio) LS(n, i) = rn * L[static_cast<std::size_t>(n)];
    }
    for (Eigen::Index j = 0; j < na; ++j) {
        const auto L = laguerre_sequence(N, scale * grid.w_a[static_cast<std::size_t>(j)]);
        double rn = 1.0;
        for (int n = 0; n <= N; ++n, rn *= ratio) LA(n, j) = rn * L[static_cast<std::size_t>(n)];
    }
    Eigen::MatrixXd pref(ns, na);
    for (Eigen::Index i = 0; i < ns; ++i)
        for (Eigen::Index j = 0; j < na; ++j)
            pref(i, j) = 4.0 / ((1.0 - s) * (1.0 - s)) *
                         std::exp(-2.0 * (grid.w_s[static_cast<std::size_t>(i)] +
                                          grid.w_a[static_cast<std::size_t>(j)]) /
                                  (1.0 - s));

    // Square shells k = max(n_S, n_A) are accumulated separately to monitor the tail.
    Eigen::MatrixXd total = Eigen::MatrixXd::Zero(ns, na);
    std::vector<double> shell_max(static_cast<std::size_t>(N + 1), 0.0);
    for (int k = 0; k <= N; ++k) {
        // Row n_S = k over n_A <= k, column n_A = k over n_S < k.
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(na);
        for (int j = 0; j <= k; ++j) row += pnd.probs(k, j) * LA.row(j);
        Eigen::RowVectorXd col = Eigen::RowVectorXd::Zero(ns);
        for (int i = 0; i < k; ++i) col += pnd.probs(i, k) * LS.row(i);
        Eigen::MatrixXd shell = LS.row(k).transpose() * row + col.transpose() * LA.row(k);
        shell = shell.cwiseProduct(pref);
        shell_max[static_cast<std::size_t>(k)] = shell.cwiseAbs().maxCoeff();
        total += shell;
    }

    QuasiDistribution q;
    q.s = s;
    q.grid = grid;
    q.values = std::move(total);
    q.n_max = N;
    const double peak = std::max(q.values.cwiseAbs().maxCoeff(), 1e-300);
    double tail = 0.0;
    for (int k = std::max(1, N - kTailShells + 1); k <= N; ++k)
        tail = std::max(tail, shell_max[static_cast<std::size_t>(k)]);
    q.tail_estimate = tail / peak;
    q.divergent = q.tail_estimate > kTailThreshold;
    if (q.divergent && policy == DivergencePolicy::Throw) {
        throw InstabilityError("quasi-distribution series not converged at n_max=" + std::to_string(N) +
                               " (tail/peak " + std::to_string(q.tail_estimate) +
                               "); use a smaller s or a larger n_max");
    }
    return q;
}

double multimode_nrf_closed(double epsilon, double delta) {
    if (!(epsilon > 1.0)) throw DomainError("multimode closed form requires epsilon > 1");
    if (!(delta > 0.0 && delta < 2.0)) throw DomainError("delta must lie in (0, 2)");
    const double pd = std::numbers::pi * delta;
    const double num = 2.0 * pd * (4.0 * epsilon - 1.0) - 8.0 * epsilon * std::sin(pd) + std::sin(2.0 * pd);
    const double den = 8.0 * (pd * (7.0 * epsilon - 1.0) + 16.0 * epsilon * std::sin(pd / 2.0) +
                              (epsilon + 1.0) * std::sin(pd));
    return num / den;
}

double multimode_nrf_numeric(const RamanParams& p, double delta, int n_quad) {
    if (!(p.epsilon > 1.0)) throw DomainError("multimode NRF requires epsilon > 1");
    if (!(delta > 0.0 && delta < 2.0)) throw DomainError("delta must lie in (0, 2)");
    if (n_quad < 2) throw DomainError("n_quad must be >= 2");
    const double a1 = balanced_pump_amplitudes(p.epsilon, 1).front().first;
    const double lo = a1 * (1.0 - delta / 2.0), hi = a1 * (1.0 + delta / 2.0);
    std::vector<double> x, w;
    gauss_legendre(n_quad, x, w);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        RamanParams q = p;
        q.pump_amp = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x[i];
        const TwoModeMoments m = moments_general(q, 1.0);
        num += w[i] * (m.b_s + m.b_a + m.b_s * m.b_s + m.b_a * m.b_a - 2.0 * std::norm(m.d_sa));
        den += w[i] * (m.b_s + m.b_a);
    }
    return num / den;
}

double RhoElements::at(int m_s, int m_a, int n_s, int n_a) const {
    const auto it = elements.find({m_s, m_a, n_s, n_a});
    return it == elements.end() ? 0.0 : it->second;
}

double RhoElements::trace() const {
    double t = 0.0;
    for (const auto& [k, v] : elements)
        if (k[0] == k[2] && k[1] == k[3]) t += v;
    return t;
}

RhoElements rho_balanced(double epsilon, int n_max) {
    if (!(epsilon > 1.0)) throw DomainError("balanced state requires epsilon > 1");
    check_n_max(n_max);
    const double B = 4.0 * epsilon / ((epsilon - 1.0) * (epsilon - 1.0));
    const double r = std::sqrt(B / (1.0 + B));
    RhoElements rho;
    for (int m = 0; m <= n_max; ++m) {
        for (int n = 0; n <= n_max; ++n) {
            const double sign = ((m + n) % 2 == 0) ? 1.0 : -1.0;
            rho.elements[{m, m, n, n}] = sign * std::pow(r, m + n) / (1.0 + B);
        }
    }
    return rho;
}

}  // namespace raman
