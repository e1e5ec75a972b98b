#pragma once

// Block-band discretization over Z^n.  Nodes are composite Gauss-Legendre
// points per edge; a node vector v_i = q_i^{1/p} w(x_i) u(x_i) represents u in
// L^p_w, so every block acts in the unweighted sequence space.  Block A_beta
// couples the rows of cell alpha with the columns of cell alpha - beta:
// (Au)_alpha = sum_beta A_{alpha,beta} u_{alpha-beta}.

#include "perigraph/functions.hpp"
#include "perigraph/graph.hpp"
#include "perigraph/quadrature.hpp"
#include "perigraph/sio.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <vector>

namespace perigraph {

// ---------------------------------------------------------------------------
// Mesh

struct Panel {
    int edge = 0;
    double lo = 0.0, hi = 0.0;  // edge coordinates
    int first = 0;              // index of the first node
    Vec2 center = Vec2::Zero();
    double half = 0.0;          // half length
    cplx tangent{1.0, 0.0};     // oriented unit tangent
};

struct MeshNode {
    int edge = 0;
    int panel = 0;
    double coord = 0.0;
    double s = 0.0;       // position on the reference panel [-1, 1]
    Vec2 pos = Vec2::Zero();
    double weight = 0.0;  // Gauss weight times half length
};

struct Mesh {
    std::shared_ptr<const MetricGraph> graph;
    int order = 4;
    quad::Rule rule;
    std::vector<Panel> panels;
    std::vector<MeshNode> nodes;

    int size() const { return static_cast<int>(nodes.size()); }
    GraphPoint point(int i, const GroupElement& cell) const {
        const auto& n = nodes[static_cast<std::size_t>(i)];
        return {n.edge, n.coord, cell};
    }
    /// Row scaling q_i^{1/p} w(x_i); the column scaling is its inverse times q_j.
    Eigen::VectorXd scaling(const GraphWeight& w = {}, double p = 2.0) const {
        Eigen::VectorXd s(size());
        for (int i = 0; i < size(); ++i)
            s(i) = std::pow(nodes[static_cast<std::size_t>(i)].weight, 1.0 / p) *
                   w.value(*graph, point(i, GroupElement::zero(graph->rank())));
        return s;
    }
    /// f at the nodes of a cell.
    Eigen::VectorXcd sample(const GraphFunction& f, const GroupElement& cell) const {
        Eigen::VectorXcd v(size());
        for (int i = 0; i < size(); ++i) v(i) = f(point(i, cell));
        return v;
    }
    double total_length() const {
        double t = 0.0;
        for (const auto& n : nodes) t += n.weight;
        return t;
    }
};

/// Composite Gauss panels: ceil(panels_per_unit_length * length) panels per
/// edge, `order` nodes each.  Nodes never sit on vertices.
inline Mesh mesh_graph(std::shared_ptr<const MetricGraph> g, int panels_per_unit_length, int order) {
    if (order != 4 && order != 8 && order != 16) fail(ErrorCode::InvalidArgument, "mesh order must be 4, 8 or 16");
    if (panels_per_unit_length < 1) fail(ErrorCode::InvalidArgument, "need at least one panel per unit length");
    Mesh m;
    m.graph = g;
    m.order = order;
    m.rule = quad::gauss_legendre(order);
    for (std::size_t e = 0; e < g->edges().size(); ++e) {
        const auto& ed = g->edges()[e];
        const int np = std::max(1, static_cast<int>(std::ceil(panels_per_unit_length * ed.length - 1e-9)));
        const double h = ed.length / np;
        for (int k = 0; k < np; ++k) {
            Panel p;
            p.edge = static_cast<int>(e);
            p.lo = k * h;
            p.hi = (k + 1) * h;
            p.first = m.size();
            p.half = 0.5 * h;
            p.tangent = ed.direction;
            p.center = g->embed(GraphPoint{p.edge, 0.5 * (p.lo + p.hi), GroupElement::zero(g->rank())});
            for (int j = 0; j < order; ++j) {
                MeshNode n;
                n.edge = p.edge;
                n.panel = static_cast<int>(m.panels.size());
                n.s = m.rule.nodes[static_cast<std::size_t>(j)];
                n.coord = p.lo + p.half * (n.s + 1.0);
                n.pos = g->embed(GraphPoint{p.edge, n.coord, GroupElement::zero(g->rank())});
                n.weight = p.half * m.rule.weights[static_cast<std::size_t>(j)];
                m.nodes.push_back(n);
            }
            m.panels.push_back(p);
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Band operators

using CellDiagonal = std::function<Eigen::VectorXcd(const GroupElement&)>;

/// Blocks A_{alpha,beta} = diag(add(alpha)) delta_{beta,0} + diag(scale(alpha)) K_beta.
/// Without add/scale the operator is periodic and A_{alpha,beta} = K_beta.
struct BandOperator {
    int rank = 1;
    int n0 = 0;
    int radius = 0;
    double tail_bound = 0.0;  // upper estimate of sum_{|beta| > radius} |A_beta|
    std::map<GroupElement, Eigen::MatrixXcd> blocks;
    CellDiagonal add;
    CellDiagonal scale;

    bool periodic() const { return !add && !scale; }

    const Eigen::MatrixXcd* find(const GroupElement& beta) const {
        auto it = blocks.find(beta);
        return it == blocks.end() ? nullptr : &it->second;
    }
    Eigen::MatrixXcd block(const GroupElement& alpha, const GroupElement& beta) const {
        Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n0, n0);
        if (const auto* k = find(beta)) out = *k;
        if (scale) out = scale(alpha).asDiagonal() * out;
        if (add && beta.is_zero()) out.diagonal() += add(alpha);
        return out;
    }
};

inline BandOperator identity_band(int rank, int n0) {
    BandOperator a;
    a.rank = rank;
    a.n0 = n0;
    a.blocks[GroupElement::zero(rank)] = Eigen::MatrixXcd::Identity(n0, n0);
    return a;
}

/// Multiplication by f: diagonal blocks only.
inline BandOperator assemble_multiplication(const GraphFunction& f, std::shared_ptr<const Mesh> mesh) {
    BandOperator a;
    a.rank = mesh->graph->rank();
    a.n0 = mesh->size();
    const auto zero = GroupElement::zero(a.rank);
    if (f.periodic) {
        a.blocks[zero] = mesh->sample(f, zero).asDiagonal();
    } else {
        a.blocks[zero] = Eigen::MatrixXcd::Zero(a.n0, a.n0);
        a.add = [f, mesh](const GroupElement& cell) { return mesh->sample(f, cell); };
    }
    return a;
}

/// A = a I + b K for a periodic kernel band K.  Periodic coefficients are folded
/// into the blocks; otherwise they are evaluated per cell on demand.
inline BandOperator combine(const GraphFunction& a, const GraphFunction& b, const BandOperator& K,
                            std::shared_ptr<const Mesh> mesh) {
    if (!K.periodic()) fail(ErrorCode::NotPeriodic, "combine: kernel band must be periodic");
    BandOperator out = K;
    const auto zero = GroupElement::zero(K.rank);
    if (!out.find(zero)) out.blocks[zero] = Eigen::MatrixXcd::Zero(K.n0, K.n0);
    if (b.periodic) {
        Eigen::VectorXcd bv = mesh->sample(b, zero);
        for (auto& [beta, blk] : out.blocks) blk = bv.asDiagonal() * blk;
        out.tail_bound *= bv.cwiseAbs().maxCoeff();
    } else {
        out.scale = [b, mesh](const GroupElement& cell) { return mesh->sample(b, cell); };
        // b is only sampled; the tail estimate uses the sup over a few cells
        double bmax = 0.0;
        for (const auto& c : group_ball(K.rank, 4)) bmax = std::max(bmax, mesh->sample(b, c).cwiseAbs().maxCoeff());
        out.tail_bound *= bmax;
    }
    if (a.periodic) {
        out.blocks[zero].diagonal() += mesh->sample(a, zero);
    } else {
        out.add = [a, mesh](const GroupElement& cell) { return mesh->sample(a, cell); };
    }
    return out;
}

/// c_a A + c_b B for periodic bands.
inline BandOperator band_sum(const BandOperator& A, const BandOperator& B, cplx ca = 1.0, cplx cb = 1.0) {
    if (!A.periodic() || !B.periodic()) fail(ErrorCode::NotPeriodic, "band_sum needs periodic bands");
    BandOperator out;
    out.rank = A.rank;
    out.n0 = A.n0;
    out.radius = std::max(A.radius, B.radius);
    out.tail_bound = std::abs(ca) * A.tail_bound + std::abs(cb) * B.tail_bound;
    for (const auto& [beta, blk] : A.blocks) out.blocks[beta] = ca * blk;
    for (const auto& [beta, blk] : B.blocks) {
        auto it = out.blocks.find(beta);
        if (it == out.blocks.end()) out.blocks[beta] = cb * blk;
        else it->second += cb * blk;
    }
    return out;
}

/// Block convolution (AB)_gamma = sum_delta A_delta B_{gamma - delta} of periodic bands.
inline BandOperator band_product(const BandOperator& A, const BandOperator& B) {
    if (!A.periodic() || !B.periodic()) fail(ErrorCode::NotPeriodic, "band_product needs periodic bands");
    BandOperator out;
    out.rank = A.rank;
    out.n0 = A.n0;
    out.radius = A.radius + B.radius;
    for (const auto& [da, ba] : A.blocks)
        for (const auto& [db, bb] : B.blocks) {
            Eigen::MatrixXcd p = ba * bb;
            auto it = out.blocks.find(da + db);
            if (it == out.blocks.end()) out.blocks.emplace(da + db, std::move(p));
            else it->second += p;
        }
    double na = 0.0, nb = 0.0;
    for (const auto& [d, b] : A.blocks) na += b.operatorNorm();
    for (const auto& [d, b] : B.blocks) nb += b.operatorNorm();
    out.tail_bound = A.tail_bound * (nb + B.tail_bound) + na * B.tail_bound;
    return out;
}

// ---------------------------------------------------------------------------
// Decay envelopes and tail bounds

/// Envelope E(d) = min_N C_N (1 + d)^{-N} of a radially sampled sup.
struct DecayEnvelope {
    std::vector<std::pair<double, double>> constants;  // (N, C_N)
    double operator()(double d) const {
        double e = std::numeric_limits<double>::infinity();
        for (auto [N, C] : constants) e = std::min(e, C * std::pow(1.0 + d, -N));
        return e;
    }
};

struct RadialSamples {
    std::vector<double> radii;
    std::vector<double> sup;  // sup over sampled points and directions at each radius
};

/// sup over base points and 16 directions of |f(x, z)| on geometric radii up to rho_max.
inline RadialSamples sample_radial(const std::function<double(int, const Vec2&)>& f, int points, double rho_max,
                                   int count = 64) {
    RadialSamples s;
    s.radii = geometric_grid(rho_max, 1e-2, count);
    std::reverse(s.radii.begin(), s.radii.end());
    for (double rho : s.radii) {
        double m = 0.0;
        for (int i = 0; i < points; ++i)
            for (int k = 0; k < 16; ++k) {
                const double th = k * std::numbers::pi / 8.0;
                m = std::max(m, f(i, Vec2(rho * std::cos(th), rho * std::sin(th))));
            }
        s.sup.push_back(m);
    }
    return s;
}

inline DecayEnvelope fit_envelope(const RadialSamples& s, const std::vector<double>& orders) {
    DecayEnvelope env;
    for (double N : orders) {
        double C = 0.0;
        for (std::size_t k = 0; k < s.radii.size(); ++k) C = std::max(C, s.sup[k] * std::pow(1.0 + s.radii[k], N));
        env.constants.push_back({N, C});
    }
    return env;
}

/// sum over |beta|_inf > R of count * bound(d_beta) with d_beta the least
/// distance between cell 0 and cell beta.
inline double lattice_tail(const MetricGraph& g, int R, const std::function<double(double)>& bound) {
    double smin;
    if (g.rank() == 1) {
        smin = g.lattice()[0].norm();
    } else {
        Eigen::Matrix2d L;
        L.col(0) = g.lattice()[0];
        L.col(1) = g.lattice()[1];
        smin = Eigen::JacobiSVD<Eigen::Matrix2d>(L).singularValues()(1);
    }
    const double diam = g.cell_diameter();
    double total = 0.0;
    for (int m = R + 1; m < R + 200000; ++m) {
        const double d = smin * m - diam;
        if (d <= 0.0) return std::numeric_limits<double>::infinity();
        const double count = g.rank() == 1 ? 2.0 : 8.0 * m;
        const double term = count * bound(d);
        if (!std::isfinite(term)) return std::numeric_limits<double>::infinity();
        total += term;
        if (term <= 1e-18 * total || term < 1e-300) break;
    }
    return total;
}

/// Frobenius factor sqrt(sum_i s_i^2 sum_j (q_j / s_j)^2) bounding |A_beta| by
/// sup|kernel| times it.
inline double frobenius_factor(const Mesh& mesh, const Eigen::VectorXd& s) {
    double rows = 0.0, cols = 0.0;
    for (int i = 0; i < mesh.size(); ++i) {
        rows += s(i) * s(i);
        const double c = mesh.nodes[static_cast<std::size_t>(i)].weight / s(i);
        cols += c * c;
    }
    return std::sqrt(rows * cols);
}

struct BandConfig {
    std::optional<int> radius;  // default: smallest radius with tail <= tail_tol
    double tail_tol = 1e-8;
    int max_radius = 64;
    double near_rho = 1.5;     // product integration inside this Bernstein ellipse
    double gauss_tol = 1e-13;  // target error of the smooth rule outside it
};

namespace detail {

inline int choose_radius(const MetricGraph& g, const BandConfig& cfg, const std::function<double(double)>& bound,
                         double& tail) {
    if (cfg.radius) {
        tail = lattice_tail(g, *cfg.radius, bound);
        if (tail > cfg.tail_tol)
            fail(ErrorCode::BandRadiusTooSmall,
                 "tail bound " + std::to_string(tail) + " exceeds tolerance at radius " + std::to_string(*cfg.radius));
        return *cfg.radius;
    }
    for (int R = 1; R <= cfg.max_radius; ++R) {
        tail = lattice_tail(g, R, bound);
        if (tail <= cfg.tail_tol) return R;
    }
    fail(ErrorCode::BandRadiusTooSmall, "no band radius up to max_radius meets the tail tolerance");
}

/// Gauss-Legendre on [a, b] of g(s) / (s - tau) times the panel interpolant,
/// bisected until every piece sees tau outside its Bernstein ellipse rho_far.
inline void far_weights(const quad::Rule& rule, cplx tau, double a, double b, double rho_far,
                        const std::function<cplx(double)>& gfun, std::vector<cplx>& out, int depth = 0) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    if (quad::bernstein_rho((tau - mid) / half) < rho_far && depth < 40) {
        far_weights(rule, tau, a, mid, rho_far, gfun, out, depth + 1);
        far_weights(rule, tau, mid, b, rho_far, gfun, out, depth + 1);
        return;
    }
    const std::size_t q = rule.nodes.size();
    for (std::size_t m = 0; m < q; ++m) {
        const double s = mid + half * rule.nodes[m];
        const cplx k = half * rule.weights[m] * gfun(s) / (s - tau);
        if (depth == 0) {
            out[m] += k;
            continue;
        }
        auto L = quad::lagrange_basis(rule.nodes, s);
        for (std::size_t j = 0; j < q; ++j) out[j] += L[j] * k;
    }
}

/// Weights W with sum_j W_j u(s_j) ~ int u(s) g(s) / (s - tau) ds on the
/// reference panel, u the interpolant through the Gauss nodes.  Inside the
/// ellipse rho < near_rho the product g u is interpolated and integrated
/// exactly against the Cauchy kernel; the forward moment recurrence stays
/// accurate there.
inline void panel_weights(const quad::Rule& rule, cplx tau, bool self, double near_rho, double gauss_tol,
                          const std::function<cplx(double)>& gfun, std::vector<cplx>& out) {
    const std::size_t q = rule.nodes.size();
    out.assign(q, cplx{});
    if (self || quad::bernstein_rho(tau) < near_rho) {
        auto w = quad::cauchy_product_weights(rule, tau);
        for (std::size_t j = 0; j < q; ++j) out[j] = w[j] * gfun(rule.nodes[j]);
        return;
    }
    // Gauss error for 1/(s - tau) decays like rho^{-2q}
    const double rho_far = std::max(near_rho, std::pow(gauss_tol, -0.5 / static_cast<double>(q)));
    far_weights(rule, tau, -1.0, 1.0, rho_far, gfun, out);
}

}  // namespace detail

/// S_{Gamma,phi} u(x) = (1/(pi i)) PV int phi(x, x - y) u(y) / (y - x) dy with
/// the complex line element dy along the oriented edges.
inline BandOperator assemble_sio(const KernelModulation& phi, std::shared_ptr<const Mesh> mesh,
                                 const GraphWeight& w = {}, double p = 2.0, const BandConfig& cfg = {}) {
    if (!phi.periodic) fail(ErrorCode::NotPeriodic, "assemble_sio needs a periodic kernel modulation");
    const auto& g = *mesh->graph;
    const int n0 = mesh->size();
    const auto zero = GroupElement::zero(g.rank());
    const Eigen::VectorXd sc = mesh->scaling(w, p);

    // envelope of |phi| for the far-field tail
    const int base = std::min(n0, 48);
    const double rho_max = 64.0 * std::max(1.0, g.cell_diameter());
    auto samples = sample_radial(
        [&](int i, const Vec2& z) { return std::abs(phi(mesh->point(i * n0 / base, zero), z)); }, base, rho_max);
    const auto env = fit_envelope(samples, {4.0, 8.0, 12.0, 16.0, 24.0, 32.0});
    const double frob = frobenius_factor(*mesh, sc);
    double tail = 0.0;
    const int R = detail::choose_radius(
        g, cfg, [&](double d) { return env(d) / (std::numbers::pi * d) * frob; }, tail);

    BandOperator A;
    A.rank = g.rank();
    A.n0 = n0;
    A.radius = R;
    A.tail_bound = tail;
    const cplx inv_pi_i = 1.0 / cplx(0.0, std::numbers::pi);
    std::vector<cplx> W;
    for (const auto& beta : group_ball(g.rank(), R)) {
        Eigen::MatrixXcd blk = Eigen::MatrixXcd::Zero(n0, n0);
        const Vec2 shift = g.translation(beta);  // x - y = pos_i - pos_j + L beta
        for (int i = 0; i < n0; ++i) {
            const auto& ni = mesh->nodes[static_cast<std::size_t>(i)];
            const GraphPoint xi = mesh->point(i, zero);
            for (std::size_t pidx = 0; pidx < mesh->panels.size(); ++pidx) {
                const auto& P = mesh->panels[pidx];
                // target relative to the source panel placed in cell -beta
                const Vec2 rel = ni.pos + shift - P.center;
                const cplx relc(rel.x(), rel.y());
                const bool self = beta.is_zero() && ni.panel == static_cast<int>(pidx);
                const cplx tau = self ? cplx(ni.s, 0.0) : relc / (P.half * P.tangent);
                auto gfun = [&](double s) {
                    const cplx y = P.half * P.tangent * s;  // y - center
                    const cplx z = relc - y;                // x - y
                    return phi(xi, Vec2(z.real(), z.imag()));
                };
                detail::panel_weights(mesh->rule, tau, self, cfg.near_rho, cfg.gauss_tol, gfun, W);
                for (int j = 0; j < mesh->order; ++j) blk(i, P.first + j) += inv_pi_i * W[static_cast<std::size_t>(j)];
            }
        }
        // v-space: rows scaled by s_i, columns by 1/s_j (quadrature weights are in W)
        for (int i = 0; i < n0; ++i)
            for (int j = 0; j < n0; ++j) blk(i, j) *= sc(i) / sc(j);
        A.blocks.emplace(beta, std::move(blk));
    }
    return A;
}

using PlaneKernel = std::function<cplx(const Vec2&)>;

struct ConvolutionDecay {
    DecayEnvelope envelope;
    double inner_sup = 0.0;  // sup of (1+|z|)^{2+eps} |k| for |z| <= split
    double outer_sup = 0.0;  // same beyond
};

/// Sampled check of |k(z)| <= C (1 + |z|)^{-2-eps}: the weighted sup must not
/// grow past z_split.
inline ConvolutionDecay check_convolution_decay(const PlaneKernel& k, double rho_max, double eps = 0.1,
                                                double split = 8.0) {
    auto s = sample_radial([&](int, const Vec2& z) { return std::abs(k(z)); }, 1, rho_max);
    ConvolutionDecay d;
    for (std::size_t i = 0; i < s.radii.size(); ++i) {
        const double v = s.sup[i] * std::pow(1.0 + s.radii[i], 2.0 + eps);
        if (s.radii[i] <= split) d.inner_sup = std::max(d.inner_sup, v);
        else d.outer_sup = std::max(d.outer_sup, v);
    }
    if (!(d.outer_sup <= d.inner_sup * (1.0 + 1e-9) + 1e-300))
        fail(ErrorCode::DecayViolation, "kernel decays slower than (1+|z|)^(-2-eps) on the samples");
    d.envelope = fit_envelope(s, {2.0 + eps, 4.0, 8.0, 12.0, 16.0, 24.0, 32.0});
    return d;
}

/// T u(x) = int k(x - y) u(y) dy with arc-length measure, smooth Gauss quadrature.
inline BandOperator assemble_convolution(const PlaneKernel& k, std::shared_ptr<const Mesh> mesh,
                                         const BandConfig& cfg = {}, const GraphWeight& w = {}, double p = 2.0) {
    const auto& g = *mesh->graph;
    const int n0 = mesh->size();
    const Eigen::VectorXd sc = mesh->scaling(w, p);
    const auto decay = check_convolution_decay(k, 64.0 * std::max(1.0, g.cell_diameter()));
    const double frob = frobenius_factor(*mesh, sc);
    double tail = 0.0;
    const int R = detail::choose_radius(g, cfg, [&](double d) { return decay.envelope(d) * frob; }, tail);

    BandOperator A;
    A.rank = g.rank();
    A.n0 = n0;
    A.radius = R;
    A.tail_bound = tail;
    for (const auto& beta : group_ball(g.rank(), R)) {
        Eigen::MatrixXcd blk(n0, n0);
        const Vec2 shift = g.translation(beta);
        for (int i = 0; i < n0; ++i)
            for (int j = 0; j < n0; ++j) {
                const auto& ni = mesh->nodes[static_cast<std::size_t>(i)];
                const auto& nj = mesh->nodes[static_cast<std::size_t>(j)];
                blk(i, j) = k(ni.pos - nj.pos + shift) * nj.weight * sc(i) / sc(j);
            }
        A.blocks.emplace(beta, std::move(blk));
    }
    return A;
}

// ---------------------------------------------------------------------------
// Diagnostics

struct BandNorms {
    std::vector<std::pair<GroupElement, double>> norms;  // spectral norm, sup over the alpha window
    double wiener_sum = 0.0;                             // stored blocks plus tail bound
    double slope = 0.0;                                  // log-log fit over the fit range
    int fit_points = 0;
};

/// Least-squares slope of log |A_beta| against log |beta| over lo <= |beta| <= hi;
/// zero norms are skipped.
inline double decay_slope(const std::vector<std::pair<GroupElement, double>>& norms, double lo, double hi,
                          int* used = nullptr) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& [beta, v] : norms) {
        const double r = beta.norm2();
        if (r < lo || r > hi || !(v > 0.0)) continue;
        const double x = std::log(r), y = std::log(v);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (used) *used = n;
    if (n < 2) return -std::numeric_limits<double>::infinity();
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline BandNorms band_norms(const BandOperator& A, double fit_lo = 2.0, double fit_hi = 16.0, int window = 0) {
    BandNorms out;
    std::vector<GroupElement> alphas = A.periodic() ? std::vector<GroupElement>{GroupElement::zero(A.rank)}
                                                    : group_ball(A.rank, window);
    for (const auto& [beta, blk] : A.blocks) {
        double sup = 0.0;
        for (const auto& alpha : alphas) {
            Eigen::MatrixXcd b = A.periodic() ? blk : A.block(alpha, beta);
            sup = std::max(sup, b.size() ? Eigen::JacobiSVD<Eigen::MatrixXcd>(b).singularValues()(0) : 0.0);
        }
        out.norms.push_back({beta, sup});
        out.wiener_sum += sup;
    }
    out.wiener_sum += A.tail_bound;
    out.slope = decay_slope(out.norms, fit_lo, fit_hi, &out.fit_points);
    return out;
}

// ---------------------------------------------------------------------------
// Finite sections

/// Cells |alpha|_inf <= rho in lexicographic order.
inline std::vector<GroupElement> section_cells(int rank, int rho) { return group_ball(rank, rho); }

/// Dense matrix of the section: block (alpha, alpha') = A_{alpha, alpha - alpha'}.
inline Eigen::MatrixXcd finite_section(const BandOperator& A, int rho) {
    const auto cells = section_cells(A.rank, rho);
    const Eigen::Index n0 = A.n0, N = static_cast<Eigen::Index>(cells.size()) * n0;
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(N, N);
    for (std::size_t r = 0; r < cells.size(); ++r)
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const GroupElement beta = cells[r] - cells[c];
            if (beta.norm_inf() > A.radius) continue;
            if (!A.find(beta) && !(beta.is_zero() && A.add)) continue;
            M.block(static_cast<Eigen::Index>(r) * n0, static_cast<Eigen::Index>(c) * n0, n0, n0) = A.block(cells[r], beta);
        }
    return M;
}

/// Node vector of f over the section cells in the weighted representation.
inline Eigen::VectorXcd section_vector(const Mesh& mesh, const GraphFunction& f, int rho, const GraphWeight& w = {},
                                       double p = 2.0) {
    const auto cells = section_cells(mesh.graph->rank(), rho);
    const Eigen::VectorXd sc = mesh.scaling(w, p);
    Eigen::VectorXcd v(static_cast<Eigen::Index>(cells.size()) * mesh.size());
    for (std::size_t c = 0; c < cells.size(); ++c)
        v.segment(static_cast<Eigen::Index>(c) * mesh.size(), mesh.size()) =
            mesh.sample(f, cells[c]).cwiseProduct(sc.cast<cplx>());
    return v;
}

/// Inverse of section_vector: function values at the section nodes.
inline Eigen::VectorXcd section_values(const Mesh& mesh, const Eigen::VectorXcd& v, const GraphWeight& w = {},
                                       double p = 2.0) {
    const Eigen::VectorXd sc = mesh.scaling(w, p);
    Eigen::VectorXcd out(v.size());
    for (Eigen::Index k = 0; k < v.size(); ++k) out(k) = v(k) / sc(k % mesh.size());
    return out;
}

}  // namespace perigraph
