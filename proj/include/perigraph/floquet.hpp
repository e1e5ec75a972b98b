#pragma once

// Floquet reduction of periodic band operators: mu(tau) = a I + b sum_gamma
// M_gamma tau^gamma on the torus, fiber spectra and invertibility margins,
// and limit operators of operators with slowly oscillating data.

#include "perigraph/assemble.hpp"
#include "perigraph/section.hpp"

#include <Eigen/Eigenvalues>

#include <string>

namespace perigraph {

using TorusPoint = std::array<cplx, 2>;  // second component is 1 for rank 1

struct FiberFamily {
    int rank = 1;
    int n0 = 0;
    std::map<GroupElement, Eigen::MatrixXcd> blocks;  // M_gamma
    double tail_bound = 0.0;
    Eigen::VectorXcd a;  // a^h at the nodes
    Eigen::VectorXcd b;  // b^h at the nodes
};

/// M_gamma = A_gamma with a = 0, b = 1.
inline FiberFamily fiber_blocks(const BandOperator& A) {
    if (!A.periodic()) fail(ErrorCode::NotPeriodic, "fiber_blocks needs an alpha-independent band");
    FiberFamily F;
    F.rank = A.rank;
    F.n0 = A.n0;
    F.blocks = A.blocks;
    F.tail_bound = A.tail_bound;
    F.a = Eigen::VectorXcd::Zero(A.n0);
    F.b = Eigen::VectorXcd::Ones(A.n0);
    return F;
}

/// Family with explicit coefficient parts: mu = diag(a) + diag(b) sum M_gamma tau^gamma.
inline FiberFamily fiber_family(const BandOperator& K, Eigen::VectorXcd a, Eigen::VectorXcd b) {
    FiberFamily F = fiber_blocks(K);
    if (a.size() != K.n0 || b.size() != K.n0) fail(ErrorCode::InvalidArgument, "coefficient vectors need n0 entries");
    F.a = std::move(a);
    F.b = std::move(b);
    F.tail_bound *= F.b.cwiseAbs().maxCoeff();
    return F;
}

inline cplx torus_power(const TorusPoint& tau, const GroupElement& g) {
    cplx v = std::pow(tau[0], static_cast<int>(g[0]));
    if (g.rank == 2) v *= std::pow(tau[1], static_cast<int>(g[1]));
    return v;
}

inline Eigen::MatrixXcd fiber_at(const FiberFamily& F, const TorusPoint& tau, double tol = 1e-12) {
    for (int k = 0; k < F.rank; ++k)
        if (std::abs(std::abs(tau[static_cast<std::size_t>(k)]) - 1.0) > tol)
            fail(ErrorCode::OffTorus, "tau component off the unit circle");
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(F.n0, F.n0);
    for (const auto& [g, M] : F.blocks) sum += torus_power(tau, g) * M;
    Eigen::MatrixXcd mu = F.b.asDiagonal() * sum;
    mu.diagonal() += F.a;
    return mu;
}

/// Uniform roots of unity, m per torus dimension, lexicographic.
inline std::vector<TorusPoint> torus_grid(int rank, int m) {
    std::vector<TorusPoint> out;
    auto root = [m](int k) { return std::polar(1.0, 2.0 * std::numbers::pi * k / m); };
    if (rank == 1) {
        for (int k = 0; k < m; ++k) out.push_back({root(k), cplx(1.0)});
    } else {
        for (int k = 0; k < m; ++k)
            for (int l = 0; l < m; ++l) out.push_back({root(k), root(l)});
    }
    return out;
}

inline bool fiber_is_hermitian(const FiberFamily& F, double tol = 1e-13) {
    if (F.a.imag().cwiseAbs().maxCoeff() > 0.0) return false;
    if ((F.b.array() - F.b(0)).abs().maxCoeff() > 0.0 || F.b(0).imag() != 0.0) return false;
    double scale = 0.0;
    for (const auto& [g, M] : F.blocks) scale = std::max(scale, M.cwiseAbs().maxCoeff());
    for (const auto& [g, M] : F.blocks) {
        auto it = F.blocks.find(-g);
        const double d = it == F.blocks.end() ? M.cwiseAbs().maxCoeff() : (M - it->second.adjoint()).cwiseAbs().maxCoeff();
        if (d > tol * scale) return false;
    }
    return true;
}

inline std::vector<cplx> fiber_eigenvalues(const Eigen::MatrixXcd& mu, bool hermitian) {
    std::vector<cplx> out;
    if (hermitian) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(mu, Eigen::EigenvaluesOnly);
        for (Eigen::Index k = 0; k < mu.rows(); ++k) out.emplace_back(es.eigenvalues()(k), 0.0);
    } else {
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(mu, false);
        for (Eigen::Index k = 0; k < mu.rows(); ++k) out.push_back(es.eigenvalues()(k));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Spectrum estimates

struct SpectrumPoint {
    cplx lambda;
    int tau_index = 0;
    int family_index = 0;
};

struct SpectrumEstimate {
    std::vector<SpectrumPoint> points;
    int rank = 1;
    int grid = 0;  // points per torus dimension
    double tail_bound = 0.0;
    std::vector<std::string> family;  // limit directions the union runs over
    /// Rank 1: eigenvalue branches joined between neighbouring tau (cyclically).
    std::vector<std::pair<cplx, cplx>> segments;

    std::vector<cplx> cloud() const {
        std::vector<cplx> c;
        c.reserve(points.size());
        for (const auto& p : points) c.push_back(p.lambda);
        return c;
    }
    /// Points of the spectral curves spaced at most h apart; the plain cloud
    /// when no curves are available.
    std::vector<cplx> densified(double h = 1e-4) const {
        if (segments.empty()) return cloud();
        std::vector<cplx> out;
        for (const auto& [u, v] : segments) {
            const int n = std::max(1, static_cast<int>(std::ceil(std::abs(v - u) / h)));
            for (int k = 0; k < n; ++k) out.push_back(u + (v - u) * (static_cast<double>(k) / n));
        }
        return out;
    }
};

/// sup_{a in A} dist(a, B), with B sorted by real part for pruning.
inline double directed_hausdorff(const std::vector<cplx>& A, std::vector<cplx> B) {
    if (A.empty()) return 0.0;
    if (B.empty()) return std::numeric_limits<double>::infinity();
    std::sort(B.begin(), B.end(), [](cplx x, cplx y) { return x.real() < y.real(); });
    double worst = 0.0;
    for (cplx a : A) {
        auto it = std::lower_bound(B.begin(), B.end(), a.real(), [](cplx x, double r) { return x.real() < r; });
        double best = std::numeric_limits<double>::infinity();
        for (auto j = it; j != B.end() && j->real() - a.real() < best; ++j) best = std::min(best, std::abs(*j - a));
        for (auto j = it; j != B.begin();) {
            --j;
            if (a.real() - j->real() >= best) break;
            best = std::min(best, std::abs(*j - a));
        }
        worst = std::max(worst, best);
        if (worst == std::numeric_limits<double>::infinity()) break;
    }
    return worst;
}

inline double hausdorff(const std::vector<cplx>& A, const std::vector<cplx>& B) {
    return std::max(directed_hausdorff(A, B), directed_hausdorff(B, A));
}

/// Hausdorff distance from a cloud to a set given by its distance function and
/// a dense sample of the set.
inline double hausdorff_to_set(const std::vector<cplx>& cloud, const std::function<double(cplx)>& dist,
                               const std::vector<cplx>& set_samples) {
    double d = 0.0;
    for (cplx z : cloud) d = std::max(d, dist(z));
    return std::max(d, directed_hausdorff(set_samples, cloud));
}

inline std::vector<cplx> segment_samples(cplx a, cplx b, int n) {
    std::vector<cplx> s;
    for (int k = 0; k < n; ++k) s.push_back(a + (b - a) * (static_cast<double>(k) / (n - 1)));
    return s;
}
inline double distance_to_segment(cplx z, cplx a, cplx b) {
    const cplx d = b - a;
    const double t = std::clamp(((z - a) * std::conj(d)).real() / std::norm(d), 0.0, 1.0);
    return std::abs(z - (a + t * d));
}

struct SpectrumConfig {
    int tau_grid = 256;
    bool adaptive = false;  // double the grid until the cloud moves less than cloud_tol
    double cloud_tol = 1e-3;
    int max_grid = 4096;
};

/// Pairs each eigenvalue in `from` with a distinct one in `to`, greedily by distance.
inline std::vector<int> match_eigenvalues(const std::vector<cplx>& from, const std::vector<cplx>& to) {
    struct Cand {
        double d;
        int i, j;
    };
    std::vector<Cand> c;
    for (std::size_t i = 0; i < from.size(); ++i)
        for (std::size_t j = 0; j < to.size(); ++j)
            c.push_back({std::abs(from[i] - to[j]), static_cast<int>(i), static_cast<int>(j)});
    std::sort(c.begin(), c.end(), [](const Cand& x, const Cand& y) { return x.d < y.d; });
    std::vector<int> m(from.size(), -1);
    std::vector<char> used(to.size(), 0);
    for (const auto& x : c)
        if (m[static_cast<std::size_t>(x.i)] < 0 && !used[static_cast<std::size_t>(x.j)]) {
            m[static_cast<std::size_t>(x.i)] = x.j;
            used[static_cast<std::size_t>(x.j)] = 1;
        }
    return m;
}

inline SpectrumEstimate fiber_spectrum(const std::vector<FiberFamily>& families, int grid,
                                       const std::vector<std::string>& names = {}) {
    SpectrumEstimate est;
    est.grid = grid;
    est.family = names;
    for (std::size_t f = 0; f < families.size(); ++f) {
        const auto& F = families[f];
        est.rank = F.rank;
        est.tail_bound = std::max(est.tail_bound, F.tail_bound);
        const bool herm = fiber_is_hermitian(F);
        const auto taus = torus_grid(F.rank, grid);
        std::vector<std::vector<cplx>> per_tau;
        for (std::size_t t = 0; t < taus.size(); ++t) {
            auto ev = fiber_eigenvalues(fiber_at(F, taus[t]), herm);
            for (cplx l : ev) est.points.push_back({l, static_cast<int>(t), static_cast<int>(f)});
            if (F.rank == 1) per_tau.push_back(std::move(ev));
        }
        if (F.rank != 1) continue;
        for (std::size_t t = 0; t < per_tau.size(); ++t) {
            const auto& u = per_tau[t];
            const auto& v = per_tau[(t + 1) % per_tau.size()];
            if (herm) {
                // ordered eigenvalues are continuous in tau
                for (std::size_t k = 0; k < u.size(); ++k) est.segments.push_back({u[k], v[k]});
            } else {
                const auto m = match_eigenvalues(u, v);
                for (std::size_t k = 0; k < u.size(); ++k) est.segments.push_back({u[k], v[static_cast<std::size_t>(m[k])]});
            }
        }
    }
    return est;
}

/// Union of fiber spectra over the torus grid and over the given (limit) families.
inline SpectrumEstimate essential_spectrum(const std::vector<FiberFamily>& families, const SpectrumConfig& cfg = {},
                                           const std::vector<std::string>& names = {}) {
    SpectrumEstimate est = fiber_spectrum(families, cfg.tau_grid, names);
    if (!cfg.adaptive) return est;
    for (int m = 2 * cfg.tau_grid; m <= cfg.max_grid; m *= 2) {
        SpectrumEstimate next = fiber_spectrum(families, m, names);
        const double motion = hausdorff(est.cloud(), next.cloud());
        est = std::move(next);
        if (motion < cfg.cloud_tol) break;
    }
    return est;
}

inline SpectrumEstimate essential_spectrum(const BandOperator& A, const SpectrumConfig& cfg = {}) {
    return essential_spectrum(std::vector<FiberFamily>{fiber_blocks(A)}, cfg);
}

struct FiberMargin {
    double margin = std::numeric_limits<double>::infinity();  // min over the grid of sigma_min(mu(tau) - lambda)
    TorusPoint argmin{cplx(1.0), cplx(1.0)};
    int grid = 0;
    double tail_bound = 0.0;
    double lipschitz = 0.0;         // bound on |d sigma_min / d theta| summed over torus directions
    double certified_margin = 0.0;  // margin - lipschitz * pi / grid - tail bound: a lower bound on the torus
    bool singular_witness = false;  // an ordered Hermitian eigenvalue changes sign between grid neighbours
    TorusPoint witness{cplx(1.0), cplx(1.0)};
    bool pass = false;
};

inline double smallest_singular_value(const Eigen::MatrixXcd& M) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
    return svd.singularValues()(svd.singularValues().size() - 1);
}

/// sum_k sup_tau |d mu / d theta_k| <= |b|_inf sum_gamma |gamma|_1 |M_gamma|.
inline double fiber_lipschitz(const FiberFamily& F) {
    double L = 0.0;
    for (const auto& [g, M] : F.blocks) {
        const double w = std::abs(static_cast<double>(g[0])) + std::abs(static_cast<double>(g[1]));
        if (w > 0.0) L += w * Eigen::JacobiSVD<Eigen::MatrixXcd>(M).singularValues()(0);
    }
    return L * F.b.cwiseAbs().maxCoeff();
}

/// Margin of mu(tau) - lambda over the grid.  Passes iff the Lipschitz lower
/// bound on the whole torus is at least inv_tol.  For Hermitian fibers and real
/// lambda a sign change of an ordered eigenvalue between grid neighbours proves
/// a singular fiber on the arc between them.
inline FiberMargin fiber_invertibility_scan(const FiberFamily& F, int grid = 256, double inv_tol = 1e-6,
                                           cplx lambda = 0.0) {
    FiberMargin out;
    out.grid = grid;
    out.tail_bound = F.tail_bound;
    const auto taus = torus_grid(F.rank, grid);
    const bool herm = lambda.imag() == 0.0 && fiber_is_hermitian(F);
    std::vector<Eigen::VectorXd> ev;
    for (const auto& tau : taus) {
        Eigen::MatrixXcd mu = fiber_at(F, tau);
        mu.diagonal().array() -= lambda;
        const double s = smallest_singular_value(mu);
        if (s < out.margin) {
            out.margin = s;
            out.argmin = tau;
        }
        if (herm) ev.push_back(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(mu, Eigen::EigenvaluesOnly).eigenvalues());
    }
    if (herm) {
        const std::size_t m = static_cast<std::size_t>(grid);
        for (std::size_t t = 0; t < taus.size() && !out.singular_witness; ++t) {
            // neighbours along each torus direction, cyclically
            std::vector<std::size_t> nb;
            if (F.rank == 1) nb.push_back((t + 1) % m);
            else {
                const std::size_t k = t / m, l = t % m;
                nb.push_back(((k + 1) % m) * m + l);
                nb.push_back(k * m + (l + 1) % m);
            }
            for (std::size_t u : nb)
                for (Eigen::Index j = 0; j < ev[t].size(); ++j)
                    if (ev[t](j) * ev[u](j) < 0.0) {
                        out.singular_witness = true;
                        out.witness = std::abs(ev[t](j)) < std::abs(ev[u](j)) ? taus[t] : taus[u];
                    }
        }
    }
    out.lipschitz = fiber_lipschitz(F);
    out.certified_margin = out.margin - out.lipschitz * std::numbers::pi / grid - F.tail_bound;
    out.pass = !out.singular_witness && out.certified_margin >= inv_tol;
    return out;
}

/// tau -> sigma_min(mu(tau) - lambda) for each probe lambda (rows: probes).
inline Eigen::MatrixXd margin_map(const FiberFamily& F, int grid, const std::vector<cplx>& probes) {
    const auto taus = torus_grid(F.rank, grid);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(probes.size()), static_cast<Eigen::Index>(taus.size()));
    for (std::size_t t = 0; t < taus.size(); ++t) {
        const Eigen::MatrixXcd mu = fiber_at(F, taus[t]);
        for (std::size_t k = 0; k < probes.size(); ++k) {
            Eigen::MatrixXcd m = mu;
            m.diagonal().array() -= probes[k];
            out(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t)) = smallest_singular_value(m);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Operators with slowly oscillating data and their limit operators

enum class OperatorKind { sio, convolution };

/// A = a I + b S_{Gamma,phi} or A = a I + b T with T convolution by k.
struct OperatorData {
    OperatorKind kind = OperatorKind::sio;
    GraphFunction a = constant_function(1.0);
    GraphFunction b = constant_function(0.0);
    KernelModulation phi = KernelModulation::one();
    PlaneKernel k;
};

/// A direction sequence h(m) together with the candidate indices scanned.
struct LimitDirection {
    std::string name;
    SequenceFn h;
    LimitConfig config;
};

/// 2n axis directions and, for n = 2, the 4 diagonals, each scanned on the
/// geometric ladder m = 1, 2, 4, ..., m_max.
inline std::vector<LimitDirection> default_limit_family(int rank, std::int64_t m_max = std::int64_t(1) << 22,
                                                        double tol = 1e-6) {
    std::vector<LimitDirection> fam;
    auto add = [&](std::string name, std::int64_t u, std::int64_t v) {
        SequenceFn h = rank == 1 ? SequenceFn([u](std::int64_t m) { return GroupElement(u * m); })
                                 : SequenceFn([u, v](std::int64_t m) { return GroupElement(u * m, v * m); });
        fam.push_back({std::move(name), h, LimitConfig::ladder(m_max, tol)});
    };
    if (rank == 1) {
        add("+e1", 1, 0);
        add("-e1", -1, 0);
    } else {
        add("+e1", 1, 0);
        add("-e1", -1, 0);
        add("+e2", 0, 1);
        add("-e2", 0, -1);
        add("+e1+e2", 1, 1);
        add("+e1-e2", 1, -1);
        add("-e1+e2", -1, 1);
        add("-e1-e2", -1, -1);
    }
    return fam;
}

struct LimitOperator {
    std::string direction;
    BandOperator band;   // periodic
    FiberFamily fibers;  // mu = a^h + b^h M(tau)
    GraphFunction a, b;  // limit coefficients (periodic)
    KernelModulation phi;
    std::vector<std::int64_t> selected;  // indices of the convergent subsequence
    double achieved_tol = 0.0;
};

struct LimitBandConfig {
    BandConfig band;
    GraphWeight weight;
    double p = 2.0;
    std::vector<Vec2> phi_probe_z{Vec2(0.0, 0.0), Vec2(0.5, 0.0), Vec2(0.0, 1.0), Vec2(2.0, 1.0)};
};

namespace detail {

inline GraphFunction limit_or_self(const MetricGraph& g, const GraphFunction& f, const LimitDirection& d,
                                   const std::vector<GraphPoint>& K, LimitOperator& out) {
    if (f.periodic) return f;
    auto lf = limit_function(g, f, d.h, K, d.config);
    out.achieved_tol = std::max(out.achieved_tol, lf.achieved_tol);
    out.selected = lf.selected;
    return lf.function;
}

}  // namespace detail

/// Kernel band of the operator: S_{Gamma,phi} or T.  Needs periodic phi.
inline BandOperator kernel_band(const OperatorData& op, std::shared_ptr<const Mesh> mesh, const LimitBandConfig& cfg) {
    if (op.kind == OperatorKind::sio) return assemble_sio(op.phi, mesh, cfg.weight, cfg.p, cfg.band);
    return assemble_convolution(op.k, mesh, cfg.band, cfg.weight, cfg.p);
}

/// Limit operator A^h: coefficients replaced by their limit functions along h
/// and phi by phi^h; a convolution kernel passes through unchanged.
inline LimitOperator limit_operator_band(const OperatorData& op, std::shared_ptr<const Mesh> mesh,
                                         const LimitDirection& dir, const LimitBandConfig& cfg = {}) {
    const auto& g = *mesh->graph;
    const auto zero = GroupElement::zero(g.rank());
    std::vector<GraphPoint> K;
    for (int i = 0; i < mesh->size(); ++i) K.push_back(mesh->point(i, zero));

    LimitOperator out;
    out.direction = dir.name;
    out.a = detail::limit_or_self(g, op.a, dir, K, out);
    out.b = detail::limit_or_self(g, op.b, dir, K, out);
    out.phi = op.phi;
    if (op.kind == OperatorKind::sio && !op.phi.periodic) {
        // phi^h(x, z) = lim phi(x + h(m), z); convergence checked on probe z values
        std::vector<std::int64_t> sel;
        for (const Vec2& z : cfg.phi_probe_z) {
            GraphFunction slice{[phi = op.phi, z](const GraphPoint& x) { return phi(x, z); }, false, {}};
            auto lf = limit_function(g, slice, dir.h, K, dir.config);
            out.achieved_tol = std::max(out.achieved_tol, lf.achieved_tol);
            if (sel.empty() || lf.selected.size() < sel.size()) sel = lf.selected;
        }
        std::vector<GroupElement> shifts;
        for (auto m : sel) shifts.push_back(dir.h(m));
        auto gp = mesh->graph;
        out.phi = KernelModulation{[phi = op.phi, shifts, gp](const GraphPoint& x, const Vec2& z) {
                                       GraphPoint base = x;
                                       base.offset = GroupElement::zero(gp->rank());
                                       cplx acc{};
                                       for (const auto& s : shifts) acc += phi(gp->act(base, s), z);
                                       return acc / static_cast<double>(shifts.size());
                                   },
                                   true};
    }
    OperatorData lim = op;
    lim.phi = out.phi;
    const BandOperator Kb = kernel_band(lim, mesh, cfg);
    const Eigen::VectorXcd av = mesh->sample(out.a, zero), bv = mesh->sample(out.b, zero);
    out.fibers = fiber_family(Kb, av, bv);
    GraphFunction ap = out.a, bp = out.b;
    ap.periodic = bp.periodic = true;
    out.band = combine(ap, bp, Kb, mesh);
    return out;
}

/// Assembled A for periodic phi; non-periodic coefficients are evaluated per cell.
inline BandOperator assemble_operator(const OperatorData& op, std::shared_ptr<const Mesh> mesh,
                                      const LimitBandConfig& cfg = {}) {
    return combine(op.a, op.b, kernel_band(op, mesh, cfg), mesh);
}

/// |(V_h^{-1} A V_h - A^h) chi_M| on the section: spectral norm of the block
/// matrix with columns |alpha'|_inf <= M and all rows the band reaches.
inline double limit_defect(const BandOperator& A, const BandOperator& Ah, const GroupElement& h, int M) {
    const auto cols = group_ball(A.rank, M);
    const auto rows = group_ball(A.rank, M + std::max(A.radius, Ah.radius));
    const Eigen::Index n0 = A.n0;
    Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(rows.size()) * n0,
                                                static_cast<Eigen::Index>(cols.size()) * n0);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c) {
            const GroupElement beta = rows[r] - cols[c];
            if (beta.norm_inf() > std::max(A.radius, Ah.radius)) continue;
            D.block(static_cast<Eigen::Index>(r) * n0, static_cast<Eigen::Index>(c) * n0, n0, n0) =
                A.block(rows[r] + h, beta) - Ah.block(rows[r], beta);
        }
    return Eigen::JacobiSVD<Eigen::MatrixXcd>(D).singularValues()(0);
}

}  // namespace perigraph
