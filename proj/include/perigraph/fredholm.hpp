#pragma once

// Fredholm verdicts for aI + bS_{Gamma,phi} and aI + bT from the edge symbol,
// the vertex Mellin symbols and the fiber margins of the scanned limit family.

#include "perigraph/floquet.hpp"
#include "perigraph/sio.hpp"

#include <json.hpp>

#include <optional>
#include <sstream>
#include <string>

namespace perigraph {

enum class Verdict { Fredholm, NotFredholm, Inconclusive };
enum class ConditionStatus { pass, fail, inconclusive, not_evaluated, not_applicable };

inline std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Fredholm: return "Fredholm";
        case Verdict::NotFredholm: return "NotFredholm";
        case Verdict::Inconclusive: return "Inconclusive";
    }
    return "?";
}
inline std::string to_string(ConditionStatus s) {
    switch (s) {
        case ConditionStatus::pass: return "pass";
        case ConditionStatus::fail: return "fail";
        case ConditionStatus::inconclusive: return "inconclusive";
        case ConditionStatus::not_evaluated: return "not_evaluated";
        case ConditionStatus::not_applicable: return "not_applicable";
    }
    return "?";
}

/// Concrete obstruction: an edge point, a vertex with (r, lambda), a point
/// where a vanishes, or a torus point of a limit operator.
struct Witness {
    std::string kind;  // edge | vertex | point | infinity
    int edge = -1;
    double coord = 0.0;
    std::array<std::int64_t, 2> cell{0, 0};
    int vertex = -1;
    double r = 0.0;
    double lambda = 0.0;
    std::string direction;
    std::array<double, 2> tau_angle{0.0, 0.0};
    double value = 0.0;  // modulus at the witness
    friend bool operator==(const Witness&, const Witness&) = default;
};

struct ConditionEntry {
    std::string label;
    double value = 0.0;
    friend bool operator==(const ConditionEntry&, const ConditionEntry&) = default;
};

struct ConditionReport {
    std::string name;
    ConditionStatus status = ConditionStatus::not_evaluated;
    double margin = 0.0;     // infimum found by the scan
    double threshold = 0.0;  // pass level
    std::string detail;
    std::vector<ConditionEntry> entries;
    std::optional<Witness> witness;
    friend bool operator==(const ConditionReport&, const ConditionReport&) = default;
};

struct FredholmThresholds {
    double edge_tol = 1e-8;      // inf |a +- b phi(x,0)| (or inf |a|) needed to pass
    double vertex_tol = 1e-8;    // inf |det sigma_A| needed to pass
    double inv_tol = 1e-6;       // certified fiber margin needed to pass
    int edge_samples = 64;       // interior samples per edge
    int cell_window = 2;         // cells scanned for non-periodic data, |alpha|_inf <= window
    int r_points = 40;           // geometric r-grid at vertices
    double r_min_factor = 1e-6;  // smallest r as a multiple of the vertex radius eps
    int lambda_points = 401;
    double lambda_tail = 1e-6;   // | |nu(0, L + i/p)| - 1 | at the ends of [-L, L]
    int tau_grid = 256;          // per torus dimension for rank 1
    int tau_grid_rank2 = 48;
    int panels_per_unit_length = 8;
    int order = 4;
    friend bool operator==(const FredholmThresholds&, const FredholmThresholds&) = default;
};

struct FredholmReport {
    Verdict verdict = Verdict::Inconclusive;
    std::string reason;
    ConditionReport edge, vertex, infinity;
    FredholmThresholds thresholds;
    std::vector<std::string> scanned_limit_family;
    std::string scope;
    friend bool operator==(const FredholmReport&, const FredholmReport&) = default;
};

/// Witnesses need values at this level relative to the data scale; the level is
/// fixed so that raising the pass tolerances never creates a witness.
inline constexpr double kWitnessZero = 1e-12;

inline const char* kScopeNote =
    "Fredholm relative to the scanned limit family: condition (infinity) is checked on the listed "
    "direction sequences only. A pass certifies invertibility of those limit operators, not of all.";

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline nlohmann::json num(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}
inline double num(const nlohmann::json& j) {
    if (j.is_number()) return j.get<double>();
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
}
inline ConditionStatus status_from(const std::string& s) {
    for (auto c : {ConditionStatus::pass, ConditionStatus::fail, ConditionStatus::inconclusive,
                   ConditionStatus::not_evaluated, ConditionStatus::not_applicable})
        if (to_string(c) == s) return c;
    fail(ErrorCode::ParseError, "unknown condition status " + s);
}
inline Verdict verdict_from(const std::string& s) {
    for (auto v : {Verdict::Fredholm, Verdict::NotFredholm, Verdict::Inconclusive})
        if (to_string(v) == s) return v;
    fail(ErrorCode::ParseError, "unknown verdict " + s);
}

}  // namespace detail

inline nlohmann::json to_json(const Witness& w) {
    return {{"kind", w.kind},
            {"edge", w.edge},
            {"coord", detail::num(w.coord)},
            {"cell", {w.cell[0], w.cell[1]}},
            {"vertex", w.vertex},
            {"r", detail::num(w.r)},
            {"lambda", detail::num(w.lambda)},
            {"direction", w.direction},
            {"tau_angle", {detail::num(w.tau_angle[0]), detail::num(w.tau_angle[1])}},
            {"value", detail::num(w.value)}};
}
inline Witness witness_from_json(const nlohmann::json& j) {
    Witness w;
    w.kind = j.at("kind").get<std::string>();
    w.edge = j.at("edge").get<int>();
    w.coord = detail::num(j.at("coord"));
    w.cell = {j.at("cell")[0].get<std::int64_t>(), j.at("cell")[1].get<std::int64_t>()};
    w.vertex = j.at("vertex").get<int>();
    w.r = detail::num(j.at("r"));
    w.lambda = detail::num(j.at("lambda"));
    w.direction = j.at("direction").get<std::string>();
    w.tau_angle = {detail::num(j.at("tau_angle")[0]), detail::num(j.at("tau_angle")[1])};
    w.value = detail::num(j.at("value"));
    return w;
}

inline nlohmann::json to_json(const ConditionReport& c) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : c.entries) entries.push_back({{"label", e.label}, {"value", detail::num(e.value)}});
    nlohmann::json j{{"name", c.name},
                     {"status", to_string(c.status)},
                     {"margin", detail::num(c.margin)},
                     {"threshold", detail::num(c.threshold)},
                     {"detail", c.detail},
                     {"entries", entries}};
    j["witness"] = c.witness ? to_json(*c.witness) : nlohmann::json(nullptr);
    return j;
}
inline ConditionReport condition_from_json(const nlohmann::json& j) {
    ConditionReport c;
    c.name = j.at("name").get<std::string>();
    c.status = detail::status_from(j.at("status").get<std::string>());
    c.margin = detail::num(j.at("margin"));
    c.threshold = detail::num(j.at("threshold"));
    c.detail = j.at("detail").get<std::string>();
    for (const auto& e : j.at("entries")) c.entries.push_back({e.at("label").get<std::string>(), detail::num(e.at("value"))});
    if (!j.at("witness").is_null()) c.witness = witness_from_json(j.at("witness"));
    return c;
}

inline nlohmann::json to_json(const FredholmThresholds& t) {
    return {{"edge_tol", t.edge_tol},
            {"vertex_tol", t.vertex_tol},
            {"inv_tol", t.inv_tol},
            {"edge_samples", t.edge_samples},
            {"cell_window", t.cell_window},
            {"r_points", t.r_points},
            {"r_min_factor", t.r_min_factor},
            {"lambda_points", t.lambda_points},
            {"lambda_tail", t.lambda_tail},
            {"tau_grid", t.tau_grid},
            {"tau_grid_rank2", t.tau_grid_rank2},
            {"panels_per_unit_length", t.panels_per_unit_length},
            {"order", t.order},
            {"witness_zero", kWitnessZero}};
}
inline FredholmThresholds thresholds_from_json(const nlohmann::json& j) {
    FredholmThresholds t;
    t.edge_tol = j.value("edge_tol", t.edge_tol);
    t.vertex_tol = j.value("vertex_tol", t.vertex_tol);
    t.inv_tol = j.value("inv_tol", t.inv_tol);
    t.edge_samples = j.value("edge_samples", t.edge_samples);
    t.cell_window = j.value("cell_window", t.cell_window);
    t.r_points = j.value("r_points", t.r_points);
    t.r_min_factor = j.value("r_min_factor", t.r_min_factor);
    t.lambda_points = j.value("lambda_points", t.lambda_points);
    t.lambda_tail = j.value("lambda_tail", t.lambda_tail);
    t.tau_grid = j.value("tau_grid", t.tau_grid);
    t.tau_grid_rank2 = j.value("tau_grid_rank2", t.tau_grid_rank2);
    t.panels_per_unit_length = j.value("panels_per_unit_length", t.panels_per_unit_length);
    t.order = j.value("order", t.order);
    return t;
}

inline nlohmann::json to_json(const FredholmReport& r) {
    nlohmann::json witnesses = nlohmann::json::array();
    for (const auto* c : {&r.edge, &r.vertex, &r.infinity})
        if (c->witness) witnesses.push_back(to_json(*c->witness));
    return {{"verdict", to_string(r.verdict)},
            {"reason", r.reason},
            {"conditions", {{"edge", to_json(r.edge)}, {"vertex", to_json(r.vertex)}, {"infinity", to_json(r.infinity)}}},
            {"thresholds", to_json(r.thresholds)},
            {"witnesses", witnesses},
            {"scanned_limit_family", r.scanned_limit_family},
            {"scope", r.scope}};
}
inline FredholmReport report_from_json(const nlohmann::json& j) {
    FredholmReport r;
    r.verdict = detail::verdict_from(j.at("verdict").get<std::string>());
    r.reason = j.at("reason").get<std::string>();
    r.edge = condition_from_json(j.at("conditions").at("edge"));
    r.vertex = condition_from_json(j.at("conditions").at("vertex"));
    r.infinity = condition_from_json(j.at("conditions").at("infinity"));
    r.thresholds = thresholds_from_json(j.at("thresholds"));
    r.scanned_limit_family = j.at("scanned_limit_family").get<std::vector<std::string>>();
    r.scope = j.at("scope").get<std::string>();
    return r;
}

// ---------------------------------------------------------------------------
// Condition checks

/// Fibers of the multiplication operator aI: a itself when periodic, else its
/// limit function along `dir`.
inline FiberFamily multiplication_fibers(const GraphFunction& a, std::shared_ptr<const Mesh> mesh,
                                         const LimitDirection* dir = nullptr) {
    const auto& g = *mesh->graph;
    const auto zero = GroupElement::zero(g.rank());
    BandOperator Z;
    Z.rank = g.rank();
    Z.n0 = mesh->size();
    Z.blocks[zero] = Eigen::MatrixXcd::Zero(Z.n0, Z.n0);
    GraphFunction ah = a;
    if (!a.periodic) {
        if (!dir) fail(ErrorCode::NotPeriodic, "multiplication_fibers: a is not periodic and no direction was given");
        std::vector<GraphPoint> pts;
        for (int i = 0; i < mesh->size(); ++i) pts.push_back(mesh->point(i, zero));
        ah = limit_function(g, a, dir->h, pts, dir->config).function;
    }
    return fiber_family(Z, mesh->sample(ah, zero), Eigen::VectorXcd::Zero(Z.n0));
}

namespace detail {

inline std::vector<GroupElement> scan_cells(int rank, bool periodic, int window) {
    return periodic ? std::vector<GroupElement>{GroupElement::zero(rank)} : group_ball(rank, window);
}

/// Three-valued status of an infimum: witness at the fixed zero level, pass at tol.
inline ConditionStatus classify(double inf, double scale, double tol) {
    if (inf <= kWitnessZero * std::max(scale, 1.0)) return ConditionStatus::fail;
    if (inf >= tol) return ConditionStatus::pass;
    return ConditionStatus::inconclusive;
}

inline std::string cell_label(const GroupElement& c) {
    std::ostringstream s;
    s << "(" << c[0];
    if (c.rank == 2) s << "," << c[1];
    s << ")";
    return s.str();
}

/// Smallest L with | |nu(0, L + i/p)| - 1 | <= tail.
inline double lambda_extent(double p, double tail) {
    double lo = 0.0, hi = 1.0;
    auto dev = [p](double L) { return std::abs(std::abs(nu(0.0, cplx(L, 1.0 / p))) - 1.0); };
    while (dev(hi) > tail) hi *= 2.0;
    for (int k = 0; k < 60; ++k) {
        const double mid = 0.5 * (lo + hi);
        (dev(mid) > tail ? lo : hi) = mid;
    }
    return hi;
}

/// Scale of the data for the witness level: sup |a| + sup |b| on the samples.
inline double data_scale(const MetricGraph& g, const GraphFunction& a, const GraphFunction& b,
                         const std::vector<GroupElement>& cells, int per_edge) {
    double s = 0.0;
    for (const auto& c : cells)
        for (auto x : cell_samples(g, per_edge)) {
            x.offset = c;
            s = std::max(s, std::abs(a(x)) + std::abs(b(x)));
        }
    return s;
}

inline bool vanishes(const Mesh& mesh, const GraphFunction& f, const std::vector<GroupElement>& cells) {
    for (const auto& c : cells)
        if (mesh.sample(f, c).cwiseAbs().maxCoeff() != 0.0) return false;
    return true;
}

/// Golden-section refinement of min |f| on the sample interval around x.  Run
/// regardless of thresholds so that witnesses do not depend on them.
template <class F>
std::pair<GraphPoint, double> refine_edge_min(const MetricGraph& g, F f, GraphPoint x, int per_edge) {
    const double L = g.edge(x.edge).length, h = L / per_edge;
    // stay off the end vertices, where the edge symbol is undefined
    double lo = std::max(1e-9 * L, x.coord - h), hi = std::min(L - 1e-9 * L, x.coord + h);
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    auto at = [&](double c) {
        GraphPoint y = x;
        y.coord = c;
        return f(y);
    };
    double c1 = hi - r * (hi - lo), c2 = lo + r * (hi - lo);
    double f1 = at(c1), f2 = at(c2);
    for (int k = 0; k < 200 && hi - lo > 0.0; ++k) {
        if (f1 <= f2) {
            hi = c2;
            c2 = c1;
            f2 = f1;
            c1 = hi - r * (hi - lo);
            f1 = at(c1);
        } else {
            lo = c1;
            c1 = c2;
            f1 = f2;
            c2 = lo + r * (hi - lo);
            f2 = at(c2);
        }
    }
    GraphPoint best = x;
    double fb = f(x);
    if (f1 < fb) {
        best.coord = c1;
        fb = f1;
    }
    return {best, fb};
}

inline Witness edge_witness(const GraphPoint& x, double value, const MetricGraph& g) {
    Witness w;
    w.kind = "edge";
    w.edge = g.edge(x.edge).id;
    w.coord = x.coord;
    w.cell = {x.offset[0], x.offset[1]};
    w.value = value;
    return w;
}

/// Condition at infinity: fiber margins over the limit family (or A itself
/// for periodic data).  `kernel` assembles the kernel band of a limit operator.
inline ConditionReport infinity_condition(const OperatorData& op, std::shared_ptr<const Mesh> mesh,
                                          const FredholmThresholds& t, bool kernel_vanishes,
                                          std::vector<std::string>& family_names) {
    ConditionReport rep;
    rep.name = "infinity";
    rep.threshold = t.inv_tol;
    rep.margin = std::numeric_limits<double>::infinity();
    const auto& g = *mesh->graph;
    const bool periodic = op.a.periodic && op.b.periodic && (op.kind != OperatorKind::sio || op.phi.periodic);
    const int grid = g.rank() == 1 ? t.tau_grid : t.tau_grid_rank2;
    const auto zero = GroupElement::zero(g.rank());

    struct Member {
        std::string name;
        FiberFamily F;
    };
    std::vector<Member> members;
    bool incomplete = false;
    if (periodic) {
        family_names = {"periodic (A is its own limit operator)"};
        members.push_back({family_names[0], kernel_vanishes ? multiplication_fibers(op.a, mesh)
                                                            : fiber_family(kernel_band(op, mesh, {}), mesh->sample(op.a, zero),
                                                                           mesh->sample(op.b, zero))});
    } else {
        for (const auto& dir : default_limit_family(g.rank())) {
            family_names.push_back(dir.name);
            try {
                members.push_back({dir.name, kernel_vanishes ? multiplication_fibers(op.a, mesh, &dir)
                                                             : limit_operator_band(op, mesh, dir).fibers});
            } catch (const Error& e) {
                incomplete = true;
                // diagnostic only; -1 marks a direction without a limit operator
                rep.entries.push_back({dir.name + ": " + std::string(e.what()), -1.0});
            }
        }
    }

    bool any_fail = false, all_pass = !incomplete;
    for (const auto& m : members) {
        const auto scan = fiber_invertibility_scan(m.F, grid, t.inv_tol);
        rep.entries.push_back({m.name, scan.certified_margin});
        double scale = 0.0;
        for (const auto& [gm, M] : m.F.blocks) scale += M.norm();
        scale = m.F.a.cwiseAbs().maxCoeff() + m.F.b.cwiseAbs().maxCoeff() * scale;
        const bool witness = scan.singular_witness || scan.margin <= kWitnessZero * std::max(scale, 1.0);
        if (scan.margin < rep.margin) rep.margin = scan.margin;
        if (witness && !any_fail) {
            any_fail = true;
            Witness w;
            w.kind = "infinity";
            w.direction = m.name;
            const auto& tau = scan.singular_witness ? scan.witness : scan.argmin;
            w.tau_angle = {std::arg(tau[0]), g.rank() == 2 ? std::arg(tau[1]) : 0.0};
            w.value = scan.margin;
            rep.witness = w;
        }
        if (!scan.pass) all_pass = false;
    }
    if (any_fail) rep.status = ConditionStatus::fail;
    else if (all_pass) rep.status = ConditionStatus::pass;
    else rep.status = incomplete ? ConditionStatus::not_evaluated : ConditionStatus::inconclusive;
    rep.detail = periodic ? "fiber margins of the periodic operator" : "fiber margins over the scanned limit family";
    if (incomplete) rep.detail += "; some directions had no convergent subsequence";
    return rep;
}

inline void finalize(FredholmReport& r) {
    r.scope = kScopeNote;
    const ConditionReport* conds[] = {&r.edge, &r.vertex, &r.infinity};
    for (const auto* c : conds)
        if (c->status == ConditionStatus::fail) {
            r.verdict = Verdict::NotFredholm;
            r.reason = "condition " + c->name + " fails: " + c->detail;
            return;
        }
    for (const auto* c : conds)
        if (c->status == ConditionStatus::inconclusive || c->status == ConditionStatus::not_evaluated) {
            r.verdict = Verdict::Inconclusive;
            r.reason = "condition " + c->name + " is " + to_string(c->status) + ": " + c->detail;
            return;
        }
    r.verdict = Verdict::Fredholm;
    r.reason = "all conditions pass";
}

}  // namespace detail

struct SioProblem {
    std::shared_ptr<const MetricGraph> graph;
    GraphFunction a = constant_function(1.0);
    GraphFunction b = constant_function(0.0);
    KernelModulation phi = KernelModulation::one();
    GraphWeight weight;
    double p = 2.0;
};

struct ConvolutionProblem {
    std::shared_ptr<const MetricGraph> graph;
    GraphFunction a = constant_function(1.0);
    GraphFunction b = constant_function(0.0);
    PlaneKernel k;
    double p = 2.0;
};

inline FredholmReport check_fredholm_sio(const SioProblem& pr, const FredholmThresholds& t = {}) {
    const auto& g = *pr.graph;
    if (!(pr.p > 1.0) || !std::isfinite(pr.p)) fail(ErrorCode::InvalidArgument, "p must lie in (1, inf)");
    const auto I = weight_interval(pr.p);
    for (std::size_t v = 0; v < pr.weight.per_vertex.size(); ++v) {
        const Weight& wv = pr.weight.per_vertex[v];
        const double top = 0.999 * std::min(pr.weight.eps, wv.eps);
        const auto rep = check_weight_class(wv, I, geometric_grid(top, top * 1e-8, 41));
        if (!rep.pass)
            fail(ErrorCode::WeightOutOfClass, "weight at vertex " + std::to_string(v) + " leaves the class for p = " +
                                                  std::to_string(pr.p));
    }
    FredholmReport r;
    r.thresholds = t;
    const bool periodic = pr.a.periodic && pr.b.periodic && pr.phi.periodic;
    const auto cells = detail::scan_cells(g.rank(), periodic, t.cell_window);
    const double scale = detail::data_scale(g, pr.a, pr.b, cells, t.edge_samples);

    // edge symbol a +- b phi(x, 0)
    r.edge.name = "edge";
    r.edge.threshold = t.edge_tol;
    r.edge.margin = std::numeric_limits<double>::infinity();
    GraphPoint worst;
    for (std::size_t e = 0; e < g.edges().size(); ++e) {
        double inf = std::numeric_limits<double>::infinity();
        for (const auto& c : cells)
            for (auto x : cell_samples(g, t.edge_samples)) {
                if (x.edge != static_cast<int>(e)) continue;
                x.offset = c;
                const double m = edge_symbol(g, pr.a, pr.b, pr.phi, x).min_modulus();
                inf = std::min(inf, m);
                if (m < r.edge.margin) {
                    r.edge.margin = m;
                    worst = x;
                }
            }
        r.edge.entries.push_back({"edge " + std::to_string(g.edge(static_cast<int>(e)).id), inf});
    }
    {
        auto [x, m] = detail::refine_edge_min(
            g, [&](const GraphPoint& y) { return edge_symbol(g, pr.a, pr.b, pr.phi, y).min_modulus(); }, worst,
            t.edge_samples);
        worst = x;
        r.edge.margin = m;
    }
    r.edge.status = detail::classify(r.edge.margin, scale, t.edge_tol);
    r.edge.detail = "inf over edge samples of min |a(x) +- b(x) phi(x, 0)|";
    if (r.edge.status == ConditionStatus::fail) r.edge.witness = detail::edge_witness(worst, r.edge.margin, g);

    // vertex Mellin symbols: inf |det| over r -> 0 and lambda in [-L, L]
    r.vertex.name = "vertex";
    r.vertex.threshold = t.vertex_tol;
    r.vertex.margin = std::numeric_limits<double>::infinity();
    const double L = detail::lambda_extent(pr.p, t.lambda_tail);
    const double eps_v = pr.weight.is_trivial() ? 0.25 * g.min_edge_length() : std::min(pr.weight.eps, 0.25 * g.min_edge_length());
    const auto rgrid = geometric_grid(eps_v, eps_v * t.r_min_factor, t.r_points);
    bool vertex_fail = false;
    for (const auto& c : cells)
        for (std::size_t v = 0; v < g.vertices().size(); ++v) {
            const LiftedVertex lv{static_cast<int>(v), c};
            const auto coeffs = vertex_coefficients(g, pr.a, pr.b, pr.phi, lv, eps_v);
            const Weight& w = pr.weight.at(static_cast<int>(v));
            double inf = std::numeric_limits<double>::infinity();
            double at_r = 0.0, at_l = 0.0;
            for (double rr : rgrid)
                for (int k = 0; k < t.lambda_points; ++k) {
                    const double lam = -L + 2.0 * L * k / (t.lambda_points - 1);
                    const double d = std::abs(vertex_symbol_A(coeffs, pr.p, w, rr, lam).determinant());
                    if (d < inf) {
                        inf = d;
                        at_r = rr;
                        at_l = lam;
                    }
                }
            r.vertex.entries.push_back({"vertex " + std::to_string(g.vertices()[v].id) + " cell " + detail::cell_label(c), inf});
            const double vscale = std::pow(std::max(scale, 1.0) * 2.0, static_cast<double>(coeffs.star.valency()));
            if (inf <= kWitnessZero * vscale && !vertex_fail) {
                vertex_fail = true;
                Witness wt;
                wt.kind = "vertex";
                wt.vertex = g.vertices()[v].id;
                wt.cell = {c[0], c[1]};
                wt.r = at_r;
                wt.lambda = at_l;
                wt.value = inf;
                r.vertex.witness = wt;
            }
            r.vertex.margin = std::min(r.vertex.margin, inf);
        }
    r.vertex.status = vertex_fail ? ConditionStatus::fail
                                  : (r.vertex.margin >= t.vertex_tol ? ConditionStatus::pass : ConditionStatus::inconclusive);
    r.vertex.detail = "inf |det sigma_A(r, lambda + i kappa(r))| over r in [" + std::to_string(rgrid.back()) + ", " +
                      std::to_string(rgrid.front()) + "], |lambda| <= " + std::to_string(L);

    // limit operators
    auto mesh = std::make_shared<const Mesh>(mesh_graph(pr.graph, t.panels_per_unit_length, t.order));
    const bool b_zero = detail::vanishes(*mesh, pr.b, cells);
    OperatorData op;
    op.kind = OperatorKind::sio;
    op.a = pr.a;
    op.b = pr.b;
    op.phi = pr.phi;
    bool decay_ok = true;
    if (!b_zero) {
        std::vector<GraphPoint> pts = cell_samples(g, 2);
        decay_ok = check_kernel_decay(pr.phi, pts, g, 4).pass;
    }
    if (!decay_ok) {
        r.infinity.name = "infinity";
        r.infinity.status = ConditionStatus::not_evaluated;
        r.infinity.threshold = t.inv_tol;
        r.infinity.margin = std::numeric_limits<double>::infinity();
        r.infinity.detail = "phi fails the kernel decay bound on samples; the band framework does not apply";
    } else {
        r.infinity = detail::infinity_condition(op, mesh, t, b_zero, r.scanned_limit_family);
    }
    detail::finalize(r);
    return r;
}

inline FredholmReport check_fredholm_conv(const ConvolutionProblem& pr, const FredholmThresholds& t = {}) {
    const auto& g = *pr.graph;
    FredholmReport r;
    r.thresholds = t;
    const bool periodic = pr.a.periodic && pr.b.periodic;
    const auto cells = detail::scan_cells(g.rank(), periodic, t.cell_window);
    const double scale = detail::data_scale(g, pr.a, pr.b, cells, t.edge_samples);

    r.edge.name = "edge";
    r.edge.threshold = t.edge_tol;
    r.edge.margin = std::numeric_limits<double>::infinity();
    GraphPoint worst;
    for (std::size_t e = 0; e < g.edges().size(); ++e) {
        double inf = std::numeric_limits<double>::infinity();
        for (const auto& c : cells)
            for (auto x : cell_samples(g, t.edge_samples)) {
                if (x.edge != static_cast<int>(e)) continue;
                x.offset = c;
                const double m = std::abs(pr.a(x));
                inf = std::min(inf, m);
                if (m < r.edge.margin) {
                    r.edge.margin = m;
                    worst = x;
                }
            }
        r.edge.entries.push_back({"edge " + std::to_string(g.edge(static_cast<int>(e)).id), inf});
    }
    {
        auto [x, m] = detail::refine_edge_min(g, [&](const GraphPoint& y) { return std::abs(pr.a(y)); }, worst,
                                              t.edge_samples);
        worst = x;
        r.edge.margin = m;
    }
    r.edge.status = detail::classify(r.edge.margin, scale, t.edge_tol);
    r.edge.detail = "inf over edge samples of |a(x)|";
    if (r.edge.status == ConditionStatus::fail) {
        r.edge.witness = detail::edge_witness(worst, r.edge.margin, g);
        r.edge.witness->kind = "point";
    }

    r.vertex.name = "vertex";
    r.vertex.status = ConditionStatus::not_applicable;
    r.vertex.detail = "convolution operators carry no vertex condition";

    auto mesh = std::make_shared<const Mesh>(mesh_graph(pr.graph, t.panels_per_unit_length, t.order));
    const bool b_zero = detail::vanishes(*mesh, pr.b, cells);
    if (!b_zero) check_convolution_decay(pr.k, 64.0 * std::max(1.0, g.cell_diameter()));
    OperatorData op;
    op.kind = OperatorKind::convolution;
    op.a = pr.a;
    op.b = pr.b;
    op.k = pr.k;
    r.infinity = detail::infinity_condition(op, mesh, t, b_zero, r.scanned_limit_family);
    detail::finalize(r);
    return r;
}

}  // namespace perigraph
