#pragma once

// Coefficient and weight classes on periodic graphs: piecewise-smooth
// functions with one-sided vertex limits, slowly oscillating functions with
// their limit functions, and power-like weights w = exp(sigma).

#include "perigraph/expr.hpp"
#include "perigraph/graph.hpp"
#include "perigraph/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <vector>

namespace perigraph {

using PointFunction = std::function<cplx(const GraphPoint&)>;

/// Complex function on the graph, evaluated on (edge, coordinate, cell offset).
/// Serves both as a PC^infty coefficient (optional explicit vertex limits) and
/// as a slowly oscillating function (the offset is the Z^n representation).
struct GraphFunction {
    PointFunction eval;
    bool periodic = false;  // independent of the cell offset
    /// Optional explicit one-sided limits, per vertex representative, in the
    /// sorted-angle ray order of `vertex_star`.  Only used for periodic functions.
    std::map<int, std::vector<cplx>> vertex_limits;

    cplx operator()(const GraphPoint& p) const { return eval(p); }
};

using PCFunction = GraphFunction;
using SOFunction = GraphFunction;

inline GraphFunction constant_function(cplx c) {
    return GraphFunction{[c](const GraphPoint&) { return c; }, true, {}};
}

/// Environment for evaluating an expression at a graph point.
inline ExprEnv point_env(const MetricGraph& g, const GraphPoint& p) {
    ExprEnv env{};
    Vec2 pos = g.embed(p);
    env[static_cast<std::size_t>(Var::t)] = p.coord;
    env[static_cast<std::size_t>(Var::x)] = pos.x();
    env[static_cast<std::size_t>(Var::y)] = pos.y();
    env[static_cast<std::size_t>(Var::edge)] = static_cast<double>(g.edge(p.edge).id);
    env[static_cast<std::size_t>(Var::g1)] = static_cast<double>(p.offset[0]);
    env[static_cast<std::size_t>(Var::g2)] = static_cast<double>(p.offset[1]);
    return env;
}

/// Function given by an expression in t, x, y, edge, g1, g2.  Periodicity is
/// declared, not inferred: x and y change under translation even for
/// expressions such as sin(2*pi*x) that happen to be periodic.
inline GraphFunction expression_function(std::shared_ptr<const MetricGraph> g, Expr e, bool periodic) {
    return GraphFunction{[g, e = std::move(e)](const GraphPoint& p) { return e(point_env(*g, p)); }, periodic, {}};
}

/// One-sided limits of f at the lifted vertex, as diag(f_1, ..., f_val) in ray order.
inline Eigen::MatrixXcd vertex_trace(const MetricGraph& g, const GraphFunction& f, const LiftedVertex& w,
                                     double eps = -1.0) {
    if (eps <= 0.0) eps = 0.25 * g.min_edge_length();
    VertexStar star = g.vertex_star(w.vertex, eps);
    const auto n = static_cast<Eigen::Index>(star.valency());
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(n, n);
    if (f.periodic) {
        if (auto it = f.vertex_limits.find(w.vertex); it != f.vertex_limits.end()) {
            if (static_cast<Eigen::Index>(it->second.size()) != n)
                fail(ErrorCode::MissingLimit, "explicit vertex limits have wrong length");
            for (Eigen::Index j = 0; j < n; ++j) d(j, j) = it->second[static_cast<std::size_t>(j)];
            return d;
        }
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto& ray = star.rays[static_cast<std::size_t>(j)];
        double len = g.edge(ray.edge).length;
        cplx coarse = f(g.ray_point(ray, 1e-8 * len, w.offset));
        cplx fine = f(g.ray_point(ray, 1e-11 * len, w.offset));
        if (!std::isfinite(fine.real()) || !std::isfinite(fine.imag()) ||
            std::abs(coarse - fine) > 1e-6 * (1.0 + std::abs(fine)))
            fail(ErrorCode::MissingLimit, "one-sided limit does not settle along ray " + std::to_string(j));
        d(j, j) = fine;
    }
    return d;
}

/// Checks declared vertex limits against the edge function on shrinking radii.
inline bool limits_consistent(const MetricGraph& g, const GraphFunction& f, double tol = 1e-8) {
    for (const auto& [v, lim] : f.vertex_limits) {
        VertexStar star = g.vertex_star(v, 0.25 * g.min_edge_length());
        if (lim.size() != star.valency()) return false;
        for (std::size_t j = 0; j < lim.size(); ++j) {
            double len = g.edge(star.rays[j].edge).length;
            for (double r : {1e-9, 1e-11, 1e-13}) {
                cplx val = f(g.ray_point(star.rays[j], r * len, GroupElement::zero(g.rank())));
                if (std::abs(val - lim[j]) > tol) return false;
            }
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Weights

/// sigma = log w near one vertex, as a function of the distance r in (0, eps).
struct Weight {
    std::function<double(double)> sigma = [](double) { return 0.0; };
    std::function<double(double)> dsigma;   // optional closed-form sigma'
    std::function<double(double)> kappa_fn; // optional closed-form r sigma'(r)
    double eps = std::numeric_limits<double>::infinity();

    static Weight trivial() { return {}; }
    static Weight power(double k, double eps = std::numeric_limits<double>::infinity()) {
        Weight w;
        w.sigma = [k](double r) { return k * std::log(r); };
        w.kappa_fn = [k](double) { return k; };
        w.eps = eps;
        return w;
    }
    double operator()(double r) const { return std::exp(sigma(r)); }
};

/// kappa_sigma(r) = r sigma'(r); 4th-order central differences in log r unless a
/// closed form is supplied.
inline double kappa(const Weight& w, double r, double log_step = 1e-4) {
    if (!(r > 0.0) || !(r < w.eps)) fail(ErrorCode::OutOfDomain, "kappa: r outside (0, eps)");
    if (w.kappa_fn) return w.kappa_fn(r);
    if (w.dsigma) return r * w.dsigma(r);
    const double s = std::log(r), h = log_step;
    auto f = [&](double ds) { return w.sigma(std::exp(s + ds)); };
    return (f(-2 * h) - 8 * f(-h) + 8 * f(h) - f(2 * h)) / (12 * h);
}

/// (r d/dr)^2 sigma via differentiation of kappa in log r.
inline double second_log_derivative(const Weight& w, double r, double log_step = 1e-3) {
    const double s = std::log(r), h = log_step;
    Weight unbounded = w;
    unbounded.eps = std::numeric_limits<double>::infinity();
    auto k = [&](double ds) { return kappa(unbounded, std::exp(s + ds)); };
    return (k(-2 * h) - 8 * k(-h) + 8 * k(h) - k(2 * h)) / (12 * h);
}

inline std::vector<double> geometric_grid(double r_max, double r_min, int count) {
    std::vector<double> g;
    for (int k = 0; k < count; ++k) {
        double t = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
        g.push_back(r_max * std::pow(r_min / r_max, t));
    }
    return g;
}

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double v) const { return lo < v && v < hi; }
};

/// The weight interval for L^p with p in (1, oo): (-1/p, 1 - 1/p).
inline Interval weight_interval(double p) { return {-1.0 / p, 1.0 - 1.0 / p}; }

struct WeightClassReport {
    double inf_kappa = 0.0;
    double sup_kappa = 0.0;
    double so_defect = 0.0;  // max |(r d/dr)^2 sigma| on the smallest radii
    double margin = 0.01;
    double tol_so = 0.05;
    bool pass = false;
};

/// Gridded check of the weight class: kappa range strictly inside I with margin
/// and a vanishing second logarithmic derivative at the smallest radii.
inline WeightClassReport check_weight_class(const Weight& w, Interval I, const std::vector<double>& r_grid,
                                            double margin = 0.01, double tol_so = 0.05) {
    WeightClassReport rep;
    rep.margin = margin;
    rep.tol_so = tol_so;
    rep.inf_kappa = std::numeric_limits<double>::infinity();
    rep.sup_kappa = -std::numeric_limits<double>::infinity();
    std::vector<double> grid = r_grid;
    std::sort(grid.begin(), grid.end());
    for (double r : grid) {
        double k = kappa(w, r);
        if (!std::isfinite(k)) k = k > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
        rep.inf_kappa = std::min(rep.inf_kappa, k);
        rep.sup_kappa = std::max(rep.sup_kappa, k);
    }
    std::size_t tail = std::max<std::size_t>(1, grid.size() / 10);
    for (std::size_t k = 0; k < tail && k < grid.size(); ++k)
        rep.so_defect = std::max(rep.so_defect, std::abs(second_log_derivative(w, grid[k])));
    rep.pass = std::isfinite(rep.inf_kappa) && std::isfinite(rep.sup_kappa) && rep.inf_kappa >= I.lo + margin &&
               rep.sup_kappa <= I.hi - margin && rep.so_defect <= tol_so;
    return rep;
}

/// Weight on the whole graph: sigma_v near each vertex orbit, frozen at eps
/// beyond the vertex neighbourhood.  Z^n-periodic by construction.
struct GraphWeight {
    std::vector<Weight> per_vertex;  // indexed by vertex representative; empty = w == 1
    double eps = 0.25;

    static GraphWeight trivial() { return {}; }

    const Weight& at(int v) const {
        static const Weight one = Weight::trivial();
        if (per_vertex.empty()) return one;
        return per_vertex.at(static_cast<std::size_t>(v));
    }
    bool is_trivial() const { return per_vertex.empty(); }

    /// w = exp(sigma_v(r) - sigma_v(eps)) within eps of vertex v, 1 elsewhere.
    double value(const MetricGraph& g, const GraphPoint& p) const {
        if (per_vertex.empty()) return 1.0;
        const auto& e = g.edge(p.edge);
        double r0 = std::clamp(p.coord, 1e-300, eps);
        double r1 = std::clamp(e.length - p.coord, 1e-300, eps);
        double s = at(e.start).sigma(r0) - at(e.start).sigma(eps) + at(e.end).sigma(r1) - at(e.end).sigma(eps);
        return std::exp(s);
    }
};

// ---------------------------------------------------------------------------
// Slow oscillation and limit functions

/// Sample points inside the fundamental cell: `per_edge` interior points per edge.
inline std::vector<GraphPoint> cell_samples(const MetricGraph& g, int per_edge) {
    std::vector<GraphPoint> pts;
    for (std::size_t e = 0; e < g.edges().size(); ++e) {
        double L = g.edges()[e].length;
        for (int k = 0; k < per_edge; ++k)
            pts.push_back({static_cast<int>(e), L * (k + 0.5) / per_edge, GroupElement::zero(g.rank())});
    }
    return pts;
}

struct OscillationReport {
    std::vector<GroupElement> shifts;
    std::vector<std::int64_t> radii;
    std::vector<std::vector<double>> defects;  // [shift][shell]
    double tol = 1e-2;
    bool pass = false;
};

/// Shell-wise sup_y |f_y(beta + alpha) - f_y(alpha)| over |alpha|_inf = R.
inline OscillationReport check_slowly_oscillating(const MetricGraph& g, const GraphFunction& f,
                                                  const std::vector<GroupElement>& shifts,
                                                  const std::vector<std::int64_t>& radii, double tol = 1e-2,
                                                  int per_edge = 8, std::size_t max_shell_samples = 512) {
    OscillationReport rep;
    rep.shifts = shifts;
    rep.radii = radii;
    rep.tol = tol;
    auto ys = cell_samples(g, per_edge);
    rep.pass = true;
    for (const auto& beta : shifts) {
        std::vector<double> row;
        for (std::int64_t R : radii) {
            auto shell = group_shell(g.rank(), R);
            std::size_t stride = std::max<std::size_t>(1, shell.size() / max_shell_samples);
            double sup = 0.0;
            for (std::size_t k = 0; k < shell.size(); k += stride)
                for (const auto& y : ys) {
                    GraphPoint a = g.act(y, shell[k]);
                    GraphPoint b = g.act(a, beta);
                    sup = std::max(sup, std::abs(f(b) - f(a)));
                }
            row.push_back(sup);
        }
        bool ok = !row.empty() && row.back() <= tol && row.back() <= row.front();
        rep.pass = rep.pass && ok;
        rep.defects.push_back(std::move(row));
    }
    return rep;
}

using SequenceFn = std::function<GroupElement(std::int64_t)>;

struct LimitConfig {
    std::vector<std::int64_t> indices;  // candidate indices m, increasing
    double tol = 1e-6;
    std::size_t min_count = 2;
    bool periodize = true;  // evaluate the limit on the cell representative

    /// Geometric ladder m = 1, 2, 4, ... up to m_max.
    static LimitConfig ladder(std::int64_t m_max, double tol = 1e-6) {
        LimitConfig c;
        c.tol = tol;
        for (std::int64_t m = 1; m <= m_max; m *= 2) c.indices.push_back(m);
        if (c.indices.back() != m_max) c.indices.push_back(m_max);
        return c;
    }
    static LimitConfig dense(std::int64_t m_first, std::int64_t m_last, double tol = 1e-6) {
        LimitConfig c;
        c.tol = tol;
        for (std::int64_t m = m_first; m <= m_last; ++m) c.indices.push_back(m);
        return c;
    }
};

struct LimitFunction {
    std::vector<GraphPoint> samples;
    std::vector<cplx> values;            // tail average on the samples
    double achieved_tol = 0.0;           // max pairwise sample distance in the selection
    std::vector<std::int64_t> selected;  // indices of the convergent subsequence
    GraphFunction function;              // periodic when extracted with periodize
};

/// Greedy Cauchy subsequence: keep every candidate whose samples lie within
/// tol/2 of the deepest candidate; the limit is the average over the selection.
inline LimitFunction limit_function(const MetricGraph& g, const GraphFunction& f, const SequenceFn& h,
                                    const std::vector<GraphPoint>& K, const LimitConfig& cfg) {
    if (cfg.indices.empty()) fail(ErrorCode::InvalidArgument, "limit_function: empty index list");
    double last_norm = -1.0;
    std::vector<std::vector<cplx>> rows;
    std::vector<GroupElement> shifts;
    for (std::int64_t m : cfg.indices) {
        GroupElement s = h(m);
        if (s.rank != g.rank()) fail(ErrorCode::RankMismatch, "sequence rank");
        if (s.norm2() <= last_norm) fail(ErrorCode::InvalidArgument, "sequence norms must increase");
        last_norm = s.norm2();
        shifts.push_back(s);
        std::vector<cplx> row;
        for (const auto& x : K) {
            GraphPoint base = x;
            if (cfg.periodize) base.offset = GroupElement::zero(g.rank());
            row.push_back(f(g.act(base, s)));
        }
        rows.push_back(std::move(row));
    }
    const auto& anchor = rows.back();
    auto dist = [](const std::vector<cplx>& a, const std::vector<cplx>& b) {
        double d = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
        return d;
    };
    std::vector<std::size_t> sel;
    for (std::size_t k = 0; k < rows.size(); ++k)
        if (dist(rows[k], anchor) <= 0.5 * cfg.tol) sel.push_back(k);
    if (sel.size() < cfg.min_count)
        fail(ErrorCode::NoConvergentSubsequence,
             "only " + std::to_string(sel.size()) + " candidates within tolerance of the deepest sample");

    LimitFunction out;
    out.samples = K;
    out.values.assign(K.size(), cplx{});
    for (std::size_t k : sel) {
        out.selected.push_back(cfg.indices[k]);
        for (std::size_t j = 0; j < K.size(); ++j) out.values[j] += rows[k][j];
    }
    for (auto& v : out.values) v /= static_cast<double>(sel.size());
    for (std::size_t a : sel)
        for (std::size_t b : sel) out.achieved_tol = std::max(out.achieved_tol, dist(rows[a], rows[b]));

    std::vector<GroupElement> chosen;
    for (std::size_t k : sel) chosen.push_back(shifts[k]);
    const bool periodize = cfg.periodize;
    auto gp = std::make_shared<const MetricGraph>(g);
    out.function.periodic = periodize;
    out.function.eval = [f, chosen, periodize, gp](const GraphPoint& x) {
        GraphPoint base = x;
        if (periodize) base.offset = GroupElement::zero(gp->rank());
        cplx acc{};
        for (const auto& s : chosen) acc += f(gp->act(base, s));
        return acc / static_cast<double>(chosen.size());
    };
    return out;
}

}  // namespace perigraph
