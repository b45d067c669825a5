#include "raman/fock_oracle.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

#include "dopri5.hpp"
#include "raman/errors.hpp"

namespace raman {

namespace {

constexpr double kInitialTail = 1e-13;
constexpr double kAtol = 1e-14;

cplx pump_factor(const RamanParams& p) { return std::polar(p.pump_amp, p.phi_L); }

// Lowering operator of mode `m` (0 = S, 1 = A, 2 = V) on the basis, dropping exits.
SparseOp lowering(const FockBasis& b, int mode) {
    std::vector<Eigen::Triplet<cplx>> t;
    for (int i = 0; i < b.size(); ++i) {
        auto s = b.state(i);
        const int n = s[static_cast<std::size_t>(mode)];
        if (n == 0) continue;
        s[static_cast<std::size_t>(mode)] -= 1;
        const int j = b.index(s[0], s[1], s[2]);
        if (j >= 0) t.emplace_back(j, i, std::sqrt(static_cast<double>(n)));
    }
    SparseOp op(b.size(), b.size());
    op.setFromTriplets(t.begin(), t.end());
    return op;
}

double boundary_population(const FockComponent& c) {
    const auto d = c.basis.dims();
    double pop = 0.0;
    for (int i = 0; i < c.basis.size(); ++i) {
        const auto& s = c.basis.state(i);
        if (s[0] == d[0] - 1 || s[1] == d[1] - 1 || s[2] == d[2] - 1) {
            pop += c.pure ? std::norm(c.psi(i)) : c.rho(i, i).real();
        }
    }
    return c.weight * pop;
}

// Populations of one component in its own basis.
Eigen::VectorXd populations(const FockComponent& c) {
    if (c.pure) return c.psi.cwiseAbs2();
    return c.rho.diagonal().real();
}

// Truncated D(beta) (-1)^n D(beta)^dag, built in a padded space.
Eigen::MatrixXcd displaced_parity(int dim, cplx beta) {
    const int pad = dim + 40;
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(pad, pad);
    for (int n = 1; n < pad; ++n) {
        const double s = std::sqrt(static_cast<double>(n));
        g(n, n - 1) += beta * s;              // beta a^dag
        g(n - 1, n) -= std::conj(beta) * s;   // -beta^* a
    }
    // D = exp(g) with g anti-Hermitian: g = -iH, H Hermitian.
    const Eigen::MatrixXcd h = cplx(0.0, 1.0) * g;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    Eigen::VectorXcd phase(pad);
    for (int k = 0; k < pad; ++k) phase(k) = std::exp(cplx(0.0, -es.eigenvalues()(k)));
    const Eigen::MatrixXcd D = es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
    Eigen::VectorXd par(pad);
    for (int n = 0; n < pad; ++n) par(n) = (n % 2 == 0) ? 1.0 : -1.0;
    const Eigen::MatrixXcd u = D * par.asDiagonal() * D.adjoint();
    return u.topLeftCorner(dim, dim);
}

std::vector<double> thermal_weights(double n_v, int dim_v, double& dropped) {
    std::vector<double> w;
    if (n_v == 0.0) {
        dropped = 0.0;
        return {1.0};
    }
    const double r = n_v / (1.0 + n_v);
    double v = 1.0 / (1.0 + n_v), sum = 0.0;
    for (int k = 0; k < dim_v; ++k) {
        w.push_back(v);
        sum += v;
        if (1.0 - sum < kInitialTail) break;
        v *= r;
    }
    dropped = std::max(0.0, 1.0 - sum);
    return w;
}

void check_config(const FockConfig& c) {
    c.params.validate();
    if (c.dim_s < 2 || c.dim_a < 2 || c.dim_v < 2) throw DomainError("Fock dimensions must be >= 2");
    if (c.steps < 1) throw DomainError("steps must be >= 1");
    if (!(c.zfrac >= 0.0 && c.zfrac <= 1.0)) throw DomainError("zfrac must lie in [0,1]");
}

void run_self_test_once() {
    static std::once_flag flag;
    static bool ok = false;
    std::call_once(flag, [] { ok = generator_sign_self_test(); });
    if (!ok) throw std::logic_error("generator sign self-test failed");
}

}  // namespace

FockBasis FockBasis::product(int dim_s, int dim_a, int dim_v) {
    FockBasis b;
    b.dims_ = {dim_s, dim_a, dim_v};
    b.lookup_.assign(static_cast<std::size_t>(dim_s) * dim_a * dim_v, -1);
    for (int s = 0; s < dim_s; ++s)
        for (int a = 0; a < dim_a; ++a)
            for (int v = 0; v < dim_v; ++v) {
                b.lookup_[(static_cast<std::size_t>(s) * dim_a + a) * dim_v + v] = b.size();
                b.states_.push_back({s, a, v});
            }
    return b;
}

FockBasis FockBasis::sector(int charge, int dim_s, int dim_a, int dim_v) {
    FockBasis b;
    b.dims_ = {dim_s, dim_a, dim_v};
    b.lookup_.assign(static_cast<std::size_t>(dim_s) * dim_a * dim_v, -1);
    for (int s = 0; s < dim_s; ++s)
        for (int a = 0; a < dim_a; ++a) {
            const int v = s - a - charge;
            if (v < 0 || v >= dim_v) continue;
            b.lookup_[(static_cast<std::size_t>(s) * dim_a + a) * dim_v + v] = b.size();
            b.states_.push_back({s, a, v});
        }
    return b;
}

int FockBasis::index(int n_s, int n_a, int n_v) const {
    if (n_s < 0 || n_a < 0 || n_v < 0 || n_s >= dims_[0] || n_a >= dims_[1] || n_v >= dims_[2]) return -1;
    return lookup_[(static_cast<std::size_t>(n_s) * dims_[1] + n_a) * dims_[2] + n_v];
}

double FockState::trace() const {
    double t = 0.0;
    for (const auto& c : components) t += c.weight * populations(c).sum();
    return t;
}

double FockState::expect_diagonal(const std::function<double(int, int, int)>& f) const {
    double acc = 0.0;
    for (const auto& c : components) {
        const Eigen::VectorXd pop = populations(c);
        for (int i = 0; i < c.basis.size(); ++i) {
            const auto& s = c.basis.state(i);
            acc += c.weight * pop(i) * f(s[0], s[1], s[2]);
        }
    }
    return acc;
}

SparseOp build_generator(const RamanParams& p, const FockBasis& b) {
    p.validate();
    const cplx ks = pump_factor(p);
    const cplx ka = std::sqrt(p.epsilon) * pump_factor(p);
    std::vector<Eigen::Triplet<cplx>> t;
    for (int i = 0; i < b.size(); ++i) {
        const auto& s = b.state(i);
        // e^{i phi} a_V^dag a_S^dag + h.c.
        const int j1 = b.index(s[0] + 1, s[1], s[2] + 1);
        if (j1 >= 0 && ks != 0.0) {
            const cplx v = ks * std::sqrt(static_cast<double>((s[0] + 1) * (s[2] + 1)));
            t.emplace_back(j1, i, v);
            t.emplace_back(i, j1, std::conj(v));
        }
        // e^{i phi} a_V a_A^dag + h.c.
        if (s[2] > 0) {
            const int j2 = b.index(s[0], s[1] + 1, s[2] - 1);
            if (j2 >= 0 && ka != 0.0) {
                const cplx v = ka * std::sqrt(static_cast<double>((s[1] + 1) * s[2]));
                t.emplace_back(j2, i, v);
                t.emplace_back(i, j2, std::conj(v));
            }
        }
    }
    SparseOp k(b.size(), b.size());
    k.setFromTriplets(t.begin(), t.end());
    return k;
}

bool generator_sign_self_test() {
    RamanParams p;
    p.epsilon = 2.0;
    p.pump_amp = 0.3;
    p.phi_L = 0.4;
    const FockBasis b = FockBasis::product(3, 3, 3);
    const SparseOp k = build_generator(p, b);
    const SparseOp as = lowering(b, 0), av = lowering(b, 2);
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(b.size());
    psi(b.index(0, 0, 0)) = 1.0 / std::sqrt(2.0);
    psi(b.index(0, 0, 1)) = 1.0 / std::sqrt(2.0);
    // d<a_S>/dz = <psi| a_S (iK) |psi> + c.c. part from the bra.
    const Eigen::VectorXcd dpsi = cplx(0.0, 1.0) * (k * psi);
    const cplx rate = psi.dot(as * dpsi) + dpsi.dot(as * psi);
    const cplx av_dag = psi.dot(SparseOp(av.adjoint()) * psi);
    const cplx g_s = p.pump_amp * std::polar(1.0, p.phi_L + std::numbers::pi / 2.0);
    return std::abs(rate - g_s * av_dag) < 1e-12;
}

namespace {

// Block-diagonal density matrix over charge sectors n_S - n_A - n_V = q.
// K preserves q; the jump a_V raises q by one and a_V^dag lowers it.
struct SectorBlocks {
    std::vector<FockBasis> bases;
    std::vector<SparseOp> k;
    std::vector<SparseOp> up;  // a_V from sector i to sector i+1
    std::vector<Eigen::VectorXd> n_v, aad;
    std::vector<Eigen::Index> offset;
    Eigen::Index total = 0;
};

SectorBlocks build_blocks(const RamanParams& p, int ds, int da, int dv) {
    SectorBlocks b;
    for (int q = -(da - 1) - (dv - 1); q <= ds - 1; ++q) b.bases.push_back(FockBasis::sector(q, ds, da, dv));
    for (std::size_t i = 0; i < b.bases.size(); ++i) {
        const FockBasis& bs = b.bases[i];
        b.k.push_back(build_generator(p, bs));
        Eigen::VectorXd nv(bs.size()), aad(bs.size());
        for (int j = 0; j < bs.size(); ++j) {
            const int v = bs.state(j)[2];
            nv(j) = v;
            aad(j) = v + 1 < dv ? v + 1 : 0.0;
        }
        b.n_v.push_back(nv);
        b.aad.push_back(aad);
        b.offset.push_back(b.total);
        b.total += static_cast<Eigen::Index>(bs.size()) * bs.size();
        if (i + 1 < b.bases.size()) {
            const FockBasis& to = b.bases[i + 1];
            std::vector<Eigen::Triplet<cplx>> t;
            for (int j = 0; j < bs.size(); ++j) {
                const auto& s = bs.state(j);
                if (s[2] == 0) continue;
                const int r = to.index(s[0], s[1], s[2] - 1);
                if (r >= 0) t.emplace_back(r, j, std::sqrt(static_cast<double>(s[2])));
            }
            SparseOp op(to.size(), bs.size());
            op.setFromTriplets(t.begin(), t.end());
            b.up.push_back(op);
        }
    }
    return b;
}

}  // namespace

std::vector<FockState> evolve_trajectory(const FockConfig& cfg, const std::vector<double>& zfracs) {
    check_config(cfg);
    for (double z : zfracs)
        if (!(z >= 0.0 && z <= 1.0)) throw DomainError("zfrac must lie in [0,1]");
    if (!std::is_sorted(zfracs.begin(), zfracs.end())) throw DomainError("snapshot positions must be sorted");
    run_self_test_once();
    const RamanParams& p = cfg.params;

    FockMethod method = cfg.method;
    if (method == FockMethod::Auto) method = p.gamma_n == 0.0 ? FockMethod::PureSectors : FockMethod::DensityMatrix;
    if (method == FockMethod::PureSectors && p.gamma_n != 0.0) {
        throw DomainError("pure-sector evolution requires gamma_n = 0");
    }

    double dropped = 0.0;
    const std::vector<double> weights = thermal_weights(p.n_V, cfg.dim_v, dropped);
    const double h0 = 1.0 / cfg.steps;
    // Boundary populations are sampled at least this often so transient leakage is seen.
    constexpr double kProbe = 1.0 / 64.0;

    std::vector<FockComponent> comps;
    std::vector<SparseOp> pure_k;
    SectorBlocks blocks;
    Eigen::VectorXcd packed;

    if (method == FockMethod::PureSectors) {
        for (std::size_t k = 0; k < weights.size(); ++k) {
            FockComponent c;
            c.basis = FockBasis::sector(-static_cast<int>(k), cfg.dim_s, cfg.dim_a, cfg.dim_v);
            if (c.basis.size() > cfg.max_basis) {
                throw ResourceError("sector basis of size " + std::to_string(c.basis.size()) + " exceeds budget " +
                                    std::to_string(cfg.max_basis));
            }
            c.weight = weights[k];
            c.pure = true;
            c.psi = Eigen::VectorXcd::Zero(c.basis.size());
            c.psi(c.basis.index(0, 0, static_cast<int>(k))) = 1.0;
            pure_k.push_back(build_generator(p, c.basis));
            comps.push_back(std::move(c));
        }
    } else {
        const long n_states = static_cast<long>(cfg.dim_s) * cfg.dim_a * cfg.dim_v;
        if (n_states > cfg.max_basis) {
            throw ResourceError("product basis of size " + std::to_string(n_states) + " exceeds budget " +
                                std::to_string(cfg.max_basis));
        }
        blocks = build_blocks(p, cfg.dim_s, cfg.dim_a, cfg.dim_v);
        packed = Eigen::VectorXcd::Zero(blocks.total);
        const int q0 = -(cfg.dim_a - 1) - (cfg.dim_v - 1);
        for (std::size_t k = 0; k < weights.size(); ++k) {
            const std::size_t bi = static_cast<std::size_t>(-static_cast<int>(k) - q0);
            const FockBasis& b = blocks.bases[bi];
            const int i = b.index(0, 0, static_cast<int>(k));
            packed(blocks.offset[bi] + static_cast<Eigen::Index>(i) * b.size() + i) = weights[k];
        }
        for (const auto& b : blocks.bases) {
            FockComponent c;
            c.basis = b;
            c.pure = false;
            comps.push_back(std::move(c));
        }
    }

    const double g_down = p.gamma_n * (p.n_T + 1.0);
    const double g_up = p.gamma_n * p.n_T;
    using CMap = Eigen::Map<const Eigen::MatrixXcd>;
    using Map = Eigen::Map<Eigen::MatrixXcd>;
    auto unpack = [&] {
        for (std::size_t i = 0; i < comps.size(); ++i) {
            const Eigen::Index n = comps[i].basis.size();
            comps[i].rho = CMap(packed.data() + blocks.offset[i], n, n);
        }
    };
    auto lindblad = [&](double, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
        dy.resize(y.size());
        const std::size_t nb = blocks.bases.size();
        for (std::size_t i = 0; i < nb; ++i) {
            const Eigen::Index n = blocks.bases[i].size();
            if (n == 0) continue;
            CMap r(y.data() + blocks.offset[i], n, n);
            Map d(dy.data() + blocks.offset[i], n, n);
            const Eigen::MatrixXcd x = blocks.k[i] * r;
            d = cplx(0.0, 1.0) * (x - x.adjoint());
            if (g_down != 0.0) {
                d -= 0.5 * g_down * (blocks.n_v[i].asDiagonal() * r + r * blocks.n_v[i].asDiagonal());
                if (i > 0 && blocks.bases[i - 1].size() > 0) {
                    const Eigen::Index m = blocks.bases[i - 1].size();
                    CMap rp(y.data() + blocks.offset[i - 1], m, m);
                    const Eigen::MatrixXcd t = blocks.up[i - 1] * rp;
                    d += g_down * (blocks.up[i - 1] * Eigen::MatrixXcd(t.adjoint()));
                }
            }
            if (g_up != 0.0) {
                d -= 0.5 * g_up * (blocks.aad[i].asDiagonal() * r + r * blocks.aad[i].asDiagonal());
                if (i + 1 < nb && blocks.bases[i + 1].size() > 0) {
                    const Eigen::Index m = blocks.bases[i + 1].size();
                    CMap rn(y.data() + blocks.offset[i + 1], m, m);
                    const SparseOp down = blocks.up[i].adjoint();
                    const Eigen::MatrixXcd t = down * rn;
                    d += g_up * (down * Eigen::MatrixXcd(t.adjoint()));
                }
            }
        }
    };
    auto leakage_now = [&] {
        if (method != FockMethod::PureSectors) unpack();
        double l = 0.0;
        for (const auto& c : comps) l += c.basis.size() > 0 ? boundary_population(c) : 0.0;
        return l;
    };

    std::vector<FockState> out;
    double z_prev = 0.0;
    double leak_max = 0.0;
    for (double z : zfracs) {
        while (z_prev < z) {
            const double z_next = std::min(z, z_prev + kProbe);
            if (method == FockMethod::PureSectors) {
                for (std::size_t k = 0; k < comps.size(); ++k) {
                    const SparseOp& kk = pure_k[k];
                    auto rhs = [&kk](double, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
                        dy = cplx(0.0, 1.0) * (kk * y);
                    };
                    detail::dopri5(rhs, comps[k].psi, z_prev, z_next, h0, cfg.rk_tol, kAtol);
                }
            } else {
                detail::dopri5(lindblad, packed, z_prev, z_next, h0, cfg.rk_tol, kAtol);
            }
            z_prev = z_next;
            leak_max = std::max(leak_max, leakage_now());
        }
        if (method != FockMethod::PureSectors) unpack();

        FockState st;
        st.initial_tail = dropped;
        for (const auto& c : comps) {
            if (c.basis.size() == 0) continue;
            st.components.push_back(c);
            st.basis_size = std::max(st.basis_size, c.basis.size());
        }
        if (method != FockMethod::PureSectors) st.basis_size = cfg.dim_s * cfg.dim_a * cfg.dim_v;
        st.leakage = std::max(leak_max, leakage_now());
        st.leakage_flag = st.leakage > cfg.tol;
        out.push_back(std::move(st));
    }
    return out;
}


FockState evolve(const FockConfig& cfg) {
    FockState st = evolve_trajectory(cfg, {cfg.zfrac}).back();
    if (st.leakage_flag) {
        throw InconclusiveError("boundary leakage " + std::to_string(st.leakage) + " exceeds tolerance " +
                                std::to_string(cfg.tol) + "; increase the Fock dimensions");
    }
    return st;
}

TwoModeMoments extract_moments(const FockState& state) {
    TwoModeMoments m;
    m.b_s = state.expect_diagonal([](int s, int, int) { return static_cast<double>(s); });
    m.b_a = state.expect_diagonal([](int, int a, int) { return static_cast<double>(a); });
    m.b_v = state.expect_diagonal([](int, int, int v) { return static_cast<double>(v); });
    cplx d = 0.0;
    for (const auto& c : state.components) {
        cplx acc = 0.0;
        for (int i = 0; i < c.basis.size(); ++i) {
            const auto& s = c.basis.state(i);
            if (s[0] == 0 || s[1] == 0) continue;
            const int t = c.basis.index(s[0] - 1, s[1] - 1, s[2]);
            if (t < 0) continue;
            const double amp = std::sqrt(static_cast<double>(s[0] * s[1]));
            acc += c.pure ? std::conj(c.psi(t)) * c.psi(i) * amp : c.rho(i, t) * amp;
        }
        d += c.weight * acc;
    }
    m.d_sa = kAntiStokesEnvelopeSign * d;
    return m;
}

JointPND extract_pnd(const FockState& state, int n_max) {
    if (n_max < 0) throw DomainError("n_max must be >= 0");
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n_max + 1, n_max + 1);
    for (const auto& c : state.components) {
        const Eigen::VectorXd pop = populations(c);
        for (int i = 0; i < c.basis.size(); ++i) {
            const auto& s = c.basis.state(i);
            if (s[0] <= n_max && s[1] <= n_max) p(s[0], s[1]) += c.weight * pop(i);
        }
    }
    JointPND out;
    out.tail_mass = 1.0 - p.sum();
    out.probs = std::move(p);
    out.n_max = n_max;
    return out;
}

double extract_parity(const FockState& state, cplx beta_s, cplx beta_a) {
    if (state.components.empty()) return 0.0;
    const auto dims = state.components.front().basis.dims();
    const int ds = dims[0], da = dims[1], dv = dims[2];
    const Eigen::MatrixXcd us = displaced_parity(ds, beta_s);
    // Displacements use the flipped anti-Stokes envelope convention.
    const Eigen::MatrixXcd ua = displaced_parity(da, kAntiStokesEnvelopeSign * beta_a);
    cplx total = 0.0;
    for (const auto& c : state.components) {
        if (c.pure) {
            std::vector<Eigen::MatrixXcd> mv(static_cast<std::size_t>(dv), Eigen::MatrixXcd());
            std::vector<bool> used(static_cast<std::size_t>(dv), false);
            for (int i = 0; i < c.basis.size(); ++i) {
                const auto& s = c.basis.state(i);
                auto& m = mv[static_cast<std::size_t>(s[2])];
                if (!used[static_cast<std::size_t>(s[2])]) {
                    m = Eigen::MatrixXcd::Zero(ds, da);
                    used[static_cast<std::size_t>(s[2])] = true;
                }
                m(s[0], s[1]) = c.psi(i);
            }
            cplx acc = 0.0;
            for (std::size_t v = 0; v < mv.size(); ++v) {
                if (!used[v]) continue;
                acc += (mv[v].adjoint() * us * mv[v] * ua.transpose()).trace();
            }
            total += c.weight * acc;
        } else {
            // Reduced S-A density matrix, then Tr[rho_SA (U_S x U_A)].
            Eigen::MatrixXcd rsa = Eigen::MatrixXcd::Zero(ds * da, ds * da);
            for (int i = 0; i < c.basis.size(); ++i) {
                const auto& si = c.basis.state(i);
                for (int j = 0; j < c.basis.size(); ++j) {
                    const auto& sj = c.basis.state(j);
                    if (si[2] != sj[2]) continue;
                    rsa(si[0] * da + si[1], sj[0] * da + sj[1]) += c.rho(i, j);
                }
            }
            cplx acc = 0.0;
            for (int s = 0; s < ds; ++s)
                for (int a = 0; a < da; ++a)
                    for (int s2 = 0; s2 < ds; ++s2)
                        for (int a2 = 0; a2 < da; ++a2)
                            acc += rsa(s * da + a, s2 * da + a2) * us(s2, s) * ua(a2, a);
            total += c.weight * acc;
        }
    }
    return total.real();
}

}  // namespace raman
