#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace raman::detail {

template <std::size_t N>
struct SimplexResult {
    std::array<double, N> x{};
    double f = 0.0;
    bool converged = false;
};

// Minimizes f with the standard reflection/expansion/contraction/shrink moves.
template <std::size_t N, class F>
SimplexResult<N> nelder_mead(F&& f, std::array<double, N> x0, std::array<double, N> step, double xtol = 1e-12,
                             double ftol = 1e-15, int max_iter = 5000) {
    std::array<std::array<double, N>, N + 1> pts{};
    std::array<double, N + 1> val{};
    pts[0] = x0;
    for (std::size_t i = 0; i < N; ++i) {
        pts[i + 1] = x0;
        pts[i + 1][i] += step[i];
    }
    for (std::size_t i = 0; i <= N; ++i) val[i] = f(pts[i]);

    SimplexResult<N> out;
    for (int it = 0; it < max_iter; ++it) {
        std::array<std::size_t, N + 1> idx{};
        for (std::size_t i = 0; i <= N; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return val[a] < val[b]; });
        const std::size_t best = idx[0], worst = idx[N], second = idx[N - 1];

        double size = 0.0;
        for (std::size_t i = 1; i <= N; ++i)
            for (std::size_t k = 0; k < N; ++k) size = std::max(size, std::abs(pts[idx[i]][k] - pts[best][k]));
        if (size < xtol || std::abs(val[worst] - val[best]) < ftol) {
            out.converged = true;
            break;
        }

        std::array<double, N> c{};
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t k = 0; k < N; ++k) c[k] += pts[idx[i]][k] / static_cast<double>(N);
        auto along = [&](double t) {
            std::array<double, N> y{};
            for (std::size_t k = 0; k < N; ++k) y[k] = c[k] + t * (pts[worst][k] - c[k]);
            return y;
        };
        const auto xr = along(-1.0);
        const double fr = f(xr);
        if (fr < val[best]) {
            const auto xe = along(-2.0);
            const double fe = f(xe);
            if (fe < fr) {
                pts[worst] = xe; val[worst] = fe;
            } else {
                pts[worst] = xr; val[worst] = fr;
            }
        } else if (fr < val[second]) {
            pts[worst] = xr; val[worst] = fr;
        } else {
            const auto xc = fr < val[worst] ? along(-0.5) : along(0.5);
            const double fc = f(xc);
            if (fc < std::min(fr, val[worst])) {
                pts[worst] = xc; val[worst] = fc;
            } else {
                for (std::size_t i = 1; i <= N; ++i) {
                    for (std::size_t k = 0; k < N; ++k)
                        pts[idx[i]][k] = pts[best][k] + 0.5 * (pts[idx[i]][k] - pts[best][k]);
                    val[idx[i]] = f(pts[idx[i]]);
                }
            }
        }
    }
    const auto it = std::min_element(val.begin(), val.end());
    out.x = pts[static_cast<std::size_t>(it - val.begin())];
    out.f = *it;
    return out;
}

}  // namespace raman::detail
