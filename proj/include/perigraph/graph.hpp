#pragma once

// Z^n-periodic metric graphs embedded in R^2, stored as one compact cell plus
// the translation action.  The infinite graph is never materialized.

#include "perigraph/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace perigraph {

using cplx = std::complex<double>;
using Vec2 = Eigen::Vector2d;

/// Element of Z^n, n in {1, 2}.  Unused trailing components stay zero.
struct GroupElement {
    int rank = 1;
    std::array<std::int64_t, 2> g{0, 0};

    GroupElement() = default;
    explicit GroupElement(std::int64_t a) : rank(1), g{a, 0} {}
    GroupElement(std::int64_t a, std::int64_t b) : rank(2), g{a, b} {}

    static GroupElement zero(int rank) {
        GroupElement e;
        e.rank = rank;
        return e;
    }

    std::int64_t operator[](int i) const { return g[static_cast<std::size_t>(i)]; }
    std::int64_t& operator[](int i) { return g[static_cast<std::size_t>(i)]; }

    bool is_zero() const { return g[0] == 0 && g[1] == 0; }
    std::int64_t norm_inf() const { return std::max(std::abs(g[0]), std::abs(g[1])); }
    double norm2() const {
        return std::hypot(static_cast<double>(g[0]), static_cast<double>(g[1]));
    }

    friend GroupElement operator+(GroupElement a, const GroupElement& b) {
        check_rank(a, b);
        a.g[0] += b.g[0];
        a.g[1] += b.g[1];
        return a;
    }
    friend GroupElement operator-(GroupElement a, const GroupElement& b) {
        check_rank(a, b);
        a.g[0] -= b.g[0];
        a.g[1] -= b.g[1];
        return a;
    }
    friend GroupElement operator-(GroupElement a) {
        a.g[0] = -a.g[0];
        a.g[1] = -a.g[1];
        return a;
    }
    friend GroupElement operator*(std::int64_t s, GroupElement a) {
        a.g[0] *= s;
        a.g[1] *= s;
        return a;
    }
    friend bool operator==(const GroupElement& a, const GroupElement& b) {
        return a.rank == b.rank && a.g == b.g;
    }
    /// Lexicographic order; used for tie-breaking and as map key.
    friend bool operator<(const GroupElement& a, const GroupElement& b) {
        return std::tie(a.rank, a.g) < std::tie(b.rank, b.g);
    }

    static void check_rank(const GroupElement& a, const GroupElement& b) {
        if (a.rank != b.rank)
            fail(ErrorCode::RankMismatch, "group elements of rank " + std::to_string(a.rank) + " and " +
                                              std::to_string(b.rank));
    }
};

/// All elements with |g|_inf <= radius, lexicographically ordered.
inline std::vector<GroupElement> group_ball(int rank, std::int64_t radius) {
    std::vector<GroupElement> out;
    if (rank == 1) {
        for (std::int64_t a = -radius; a <= radius; ++a) out.emplace_back(a);
    } else {
        for (std::int64_t a = -radius; a <= radius; ++a)
            for (std::int64_t b = -radius; b <= radius; ++b) out.emplace_back(a, b);
    }
    return out;
}

/// Elements with |g|_inf == radius.
inline std::vector<GroupElement> group_shell(int rank, std::int64_t radius) {
    std::vector<GroupElement> out;
    for (const auto& g : group_ball(rank, radius))
        if (g.norm_inf() == radius) out.push_back(g);
    return out;
}

struct GraphSpec {
    struct Vertex {
        int id = 0;
        Vec2 position = Vec2::Zero();
    };
    struct Edge {
        int id = 0;
        int start = 0;
        int end = 0;
        std::optional<double> length;  // defaults to the embedded segment length
    };
    /// `vertex` is the translate of orbit representative `representative` by `offset`.
    struct Identification {
        int vertex = 0;
        int representative = 0;
        GroupElement offset;
    };

    std::vector<Vertex> vertices;
    std::vector<Edge> edges;
    int period_rank = 1;
    std::vector<Vec2> lattice_vectors;
    std::vector<Identification> identifications;
};

/// A point (e, x) of the graph: edge orbit, coordinate from the start vertex,
/// and the cell offset of the edge instance.
struct GraphPoint {
    int edge = 0;
    double coord = 0.0;
    GroupElement offset;
};

struct LiftedVertex {
    int vertex = 0;  // index of the orbit representative
    GroupElement offset;

    friend bool operator==(const LiftedVertex& a, const LiftedVertex& b) {
        return a.vertex == b.vertex && a.offset == b.offset;
    }
    friend bool operator<(const LiftedVertex& a, const LiftedVertex& b) {
        return std::tie(a.vertex, a.offset) < std::tie(b.vertex, b.offset);
    }
};

struct StarRay {
    int edge = 0;
    bool outgoing = true;         // the vertex starts the oriented edge
    GroupElement instance;        // offset of the edge instance relative to the vertex cell
    double angle = 0.0;           // in [0, 2 pi)
    int sign = 1;                 // +1 outgoing, -1 incoming
    Vec2 direction = Vec2::Zero();
};

struct VertexStar {
    int vertex = 0;
    double eps = 0.0;
    std::vector<StarRay> rays;  // sorted by angle

    std::size_t valency() const { return rays.size(); }
    std::vector<double> angles() const {
        std::vector<double> a;
        for (const auto& r : rays) a.push_back(r.angle);
        return a;
    }
    std::vector<int> signs() const {
        std::vector<int> s;
        for (const auto& r : rays) s.push_back(r.sign);
        return s;
    }
};

class MetricGraph {
public:
    struct Vertex {
        int id = 0;
        Vec2 position = Vec2::Zero();
    };
    struct Edge {
        int id = 0;
        int start = 0;  // vertex index, cell 0
        int end = 0;    // vertex index, in cell end_offset
        GroupElement end_offset;
        double length = 0.0;
        Vec2 p0 = Vec2::Zero();  // embedded start (cell 0)
        Vec2 p1 = Vec2::Zero();  // embedded end
        cplx direction{1.0, 0.0};  // unit tangent as a complex number
    };
    struct Incidence {
        int edge = 0;
        bool outgoing = true;
        GroupElement instance;  // edge instance offset touching the vertex in cell 0
    };

    static MetricGraph build(const GraphSpec& spec) {
        MetricGraph gr;
        gr.rank_ = spec.period_rank;
        if (gr.rank_ != 1 && gr.rank_ != 2)
            fail(ErrorCode::LatticeDegenerate, "period_rank must be 1 or 2");
        if (static_cast<int>(spec.lattice_vectors.size()) != gr.rank_)
            fail(ErrorCode::LatticeDegenerate, "need exactly period_rank lattice vectors");
        gr.lattice_ = spec.lattice_vectors;
        if (gr.rank_ == 1) {
            if (gr.lattice_[0].norm() <= 1e-14) fail(ErrorCode::LatticeDegenerate, "zero lattice vector");
        } else {
            double det = gr.lattice_[0].x() * gr.lattice_[1].y() - gr.lattice_[0].y() * gr.lattice_[1].x();
            if (std::abs(det) <= 1e-12 * gr.lattice_[0].norm() * gr.lattice_[1].norm())
                fail(ErrorCode::LatticeDegenerate, "lattice vectors are linearly dependent");
        }

        std::map<int, Vec2> position;
        for (const auto& v : spec.vertices) position[v.id] = v.position;
        std::map<int, std::pair<int, GroupElement>> ident;
        for (const auto& id : spec.identifications) {
            if (!position.count(id.vertex) || !position.count(id.representative))
                fail(ErrorCode::UnknownVertex, "identification references unknown vertex");
            if (id.offset.rank != gr.rank_) fail(ErrorCode::RankMismatch, "identification offset rank");
            ident[id.vertex] = {id.representative, id.offset};
        }
        std::map<int, int> rep_index;
        for (const auto& v : spec.vertices) {
            if (ident.count(v.id)) continue;
            rep_index[v.id] = static_cast<int>(gr.vertices_.size());
            gr.vertices_.push_back({v.id, v.position});
        }
        double scale = 1.0;
        for (const auto& L : gr.lattice_) scale = std::max(scale, L.norm());
        auto resolve = [&](int vid) -> std::pair<int, GroupElement> {
            if (!position.count(vid)) fail(ErrorCode::UnknownVertex, "vertex id " + std::to_string(vid));
            if (auto it = ident.find(vid); it != ident.end()) {
                auto rit = rep_index.find(it->second.first);
                if (rit == rep_index.end())
                    fail(ErrorCode::UnknownVertex, "representative " + std::to_string(it->second.first) +
                                                       " is itself identified");
                Vec2 expect = gr.vertices_[static_cast<std::size_t>(rit->second)].position +
                              gr.translation(it->second.second);
                if ((expect - position[vid]).norm() > 1e-9 * scale)
                    fail(ErrorCode::InconsistentEmbedding,
                         "vertex " + std::to_string(vid) + " is not the stated translate of its representative");
                return {rit->second, it->second.second};
            }
            return {rep_index.at(vid), GroupElement::zero(gr.rank_)};
        };

        std::set<std::tuple<int, int, GroupElement>> keys;
        for (const auto& e : spec.edges) {
            auto [rs, gs] = resolve(e.start);
            auto [re, ge] = resolve(e.end);
            Edge ed;
            ed.id = e.id;
            ed.start = rs;
            ed.end = re;
            ed.end_offset = ge - gs;
            if (rs == re && ed.end_offset.is_zero())
                fail(ErrorCode::LoopEdge, "edge " + std::to_string(e.id) + " is a loop");
            ed.p0 = gr.vertices_[static_cast<std::size_t>(rs)].position;
            ed.p1 = gr.vertices_[static_cast<std::size_t>(re)].position + gr.translation(ed.end_offset);
            double euclid = (ed.p1 - ed.p0).norm();
            ed.length = e.length.value_or(euclid);
            if (!(ed.length > 0.0))
                fail(ErrorCode::NonPositiveLength, "edge " + std::to_string(e.id) + " has non-positive length");
            if (std::abs(ed.length - euclid) > 1e-9 * std::max(1.0, euclid))
                fail(ErrorCode::InconsistentEmbedding,
                     "edge " + std::to_string(e.id) + " length differs from its embedded segment");
            Vec2 d = (ed.p1 - ed.p0) / euclid;
            ed.direction = cplx(d.x(), d.y());
            auto key = std::make_tuple(rs, re, ed.end_offset);
            auto rev = std::make_tuple(re, rs, -ed.end_offset);
            if (keys.count(rev))
                fail(ErrorCode::AntiParallelEdge, "edge " + std::to_string(e.id) + " reverses another edge");
            if (keys.count(key)) fail(ErrorCode::DuplicateEdge, "edge " + std::to_string(e.id) + " is repeated");
            keys.insert(key);
            gr.edges_.push_back(ed);
        }

        gr.incidence_.assign(gr.vertices_.size(), {});
        for (std::size_t k = 0; k < gr.edges_.size(); ++k) {
            const auto& e = gr.edges_[k];
            gr.incidence_[static_cast<std::size_t>(e.start)].push_back(
                {static_cast<int>(k), true, GroupElement::zero(gr.rank_)});
            gr.incidence_[static_cast<std::size_t>(e.end)].push_back({static_cast<int>(k), false, -e.end_offset});
        }
        for (std::size_t v = 0; v < gr.vertices_.size(); ++v)
            if (gr.incidence_[v].empty())
                fail(ErrorCode::IsolatedVertex, "vertex " + std::to_string(gr.vertices_[v].id) + " has valency 0");

        double diam = 0.0;
        std::vector<Vec2> pts;
        for (const auto& e : gr.edges_) {
            pts.push_back(e.p0);
            pts.push_back(e.p1);
        }
        for (const auto& a : pts)
            for (const auto& b : pts) diam = std::max(diam, (a - b).norm());
        gr.diameter_ = diam;
        std::int64_t maxoff = 0;
        for (const auto& e : gr.edges_) maxoff = std::max(maxoff, e.end_offset.norm_inf());
        gr.max_edge_offset_ = maxoff;
        return gr;
    }

    int rank() const { return rank_; }
    const std::vector<Vertex>& vertices() const { return vertices_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const Edge& edge(int e) const { return edges_.at(static_cast<std::size_t>(e)); }
    const std::vector<Vec2>& lattice() const { return lattice_; }
    double cell_diameter() const { return diameter_; }
    double total_length() const {
        double s = 0.0;
        for (const auto& e : edges_) s += e.length;
        return s;
    }
    double min_edge_length() const {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& e : edges_) m = std::min(m, e.length);
        return m;
    }
    const std::vector<Incidence>& incidences(int v) const { return incidence_.at(static_cast<std::size_t>(v)); }
    int valency(int v) const { return static_cast<int>(incidences(v).size()); }

    int vertex_index(int id) const {
        for (std::size_t k = 0; k < vertices_.size(); ++k)
            if (vertices_[k].id == id) return static_cast<int>(k);
        fail(ErrorCode::UnknownVertex, "no orbit representative with id " + std::to_string(id));
    }
    int edge_index(int id) const {
        for (std::size_t k = 0; k < edges_.size(); ++k)
            if (edges_[k].id == id) return static_cast<int>(k);
        fail(ErrorCode::InvalidArgument, "no edge with id " + std::to_string(id));
    }

    Vec2 translation(const GroupElement& g) const {
        if (g.rank != rank_) fail(ErrorCode::RankMismatch, "group element rank differs from graph rank");
        Vec2 t = Vec2::Zero();
        for (int i = 0; i < rank_; ++i) t += static_cast<double>(g[i]) * lattice_[static_cast<std::size_t>(i)];
        return t;
    }

    Vec2 embed(const GraphPoint& x) const {
        const auto& e = edge(x.edge);
        double s = x.coord / e.length;
        return e.p0 + s * (e.p1 - e.p0) + translation(x.offset);
    }
    Vec2 embed(const LiftedVertex& v) const {
        return vertices_.at(static_cast<std::size_t>(v.vertex)).position + translation(v.offset);
    }

    /// Vertex represented by x if x sits at an edge end, within a relative tolerance.
    std::optional<LiftedVertex> as_vertex(const GraphPoint& x, double tol = 1e-14) const {
        const auto& e = edge(x.edge);
        if (x.coord <= tol * e.length) return LiftedVertex{e.start, x.offset};
        if (x.coord >= e.length * (1.0 - tol)) return LiftedVertex{e.end, x.offset + e.end_offset};
        return std::nullopt;
    }

    bool same_point(const GraphPoint& x, const GraphPoint& y) const {
        auto vx = as_vertex(x);
        auto vy = as_vertex(y);
        if (vx || vy) return vx && vy && *vx == *vy;
        return x.edge == y.edge && x.offset == y.offset && std::abs(x.coord - y.coord) <= 1e-14 * edge(x.edge).length;
    }

    GraphPoint act(const GraphPoint& x, const GroupElement& g) const {
        if (g.rank != rank_ || x.offset.rank != rank_) fail(ErrorCode::RankMismatch, "act: rank mismatch");
        GraphPoint y = x;
        y.offset = x.offset + g;
        return y;
    }

    /// Path distance between two points.
    double distance(const GraphPoint& x, const GraphPoint& y) const {
        if (x.offset.rank != rank_ || y.offset.rank != rank_) fail(ErrorCode::RankMismatch, "distance: rank");
        const auto& ex = edge(x.edge);
        const auto& ey = edge(y.edge);
        double best = std::numeric_limits<double>::infinity();
        if (x.edge == y.edge && x.offset == y.offset) best = std::abs(x.coord - y.coord);

        struct Item {
            double d;
            LiftedVertex v;
            bool operator>(const Item& o) const { return d > o.d; }
        };
        std::map<LiftedVertex, double> dist;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
        auto push = [&](const LiftedVertex& v, double d) {
            auto it = dist.find(v);
            if (it == dist.end() || d < it->second) {
                dist[v] = d;
                heap.push({d, v});
            }
        };
        push({ex.start, x.offset}, x.coord);
        push({ex.end, x.offset + ex.end_offset}, ex.length - x.coord);
        std::map<LiftedVertex, double> targets;
        auto add_target = [&](const LiftedVertex& v, double c) {
            auto it = targets.find(v);
            if (it == targets.end() || c < it->second) targets[v] = c;
        };
        add_target({ey.start, y.offset}, y.coord);
        add_target({ey.end, y.offset + ey.end_offset}, ey.length - y.coord);

        const std::int64_t window = (x.offset - y.offset).norm_inf() + 2 +
                                    static_cast<std::int64_t>(vertices_.size()) * (max_edge_offset_ + 1);
        bool reached = false;
        std::set<LiftedVertex> done;
        while (!heap.empty()) {
            Item it = heap.top();
            heap.pop();
            if (done.count(it.v)) continue;
            done.insert(it.v);
            if (it.d >= best) break;
            if (auto t = targets.find(it.v); t != targets.end()) {
                best = std::min(best, it.d + t->second);
                reached = true;
            }
            for (const auto& inc : incidences(it.v.vertex)) {
                const auto& e = edges_[static_cast<std::size_t>(inc.edge)];
                LiftedVertex nb = inc.outgoing ? LiftedVertex{e.end, it.v.offset + e.end_offset}
                                               : LiftedVertex{e.start, it.v.offset + inc.instance};
                if ((nb.offset - x.offset).norm_inf() > window && (nb.offset - y.offset).norm_inf() > window) continue;
                if (!done.count(nb)) push(nb, it.d + e.length);
            }
        }
        if (!reached && !std::isfinite(best))
            fail(ErrorCode::Unreachable, "points lie in different components of the graph");
        return best;
    }

    /// Tile g with x in Gamma_g.  Shared vertices go to the lexicographically
    /// smallest incident edge-instance offset.
    GroupElement tile_of(const GraphPoint& x) const {
        auto v = as_vertex(x);
        if (!v) return x.offset;
        GroupElement best = v->offset;
        bool first = true;
        for (const auto& inc : incidences(v->vertex)) {
            GroupElement cand = v->offset + inc.instance;
            if (first || cand < best) {
                best = cand;
                first = false;
            }
        }
        return best;
    }

    std::vector<GroupElement> tile_partition(const std::vector<GraphPoint>& points) const {
        std::vector<GroupElement> out;
        out.reserve(points.size());
        for (const auto& p : points) out.push_back(tile_of(p));
        return out;
    }

    VertexStar vertex_star(int v, double eps) const {
        VertexStar star;
        star.vertex = v;
        star.eps = eps;
        double shortest = std::numeric_limits<double>::infinity();
        for (const auto& inc : incidences(v)) {
            const auto& e = edges_[static_cast<std::size_t>(inc.edge)];
            shortest = std::min(shortest, e.length);
            StarRay ray;
            ray.edge = inc.edge;
            ray.outgoing = inc.outgoing;
            ray.instance = inc.instance;
            ray.sign = inc.outgoing ? 1 : -1;
            Vec2 d = (e.p1 - e.p0) / e.length;
            ray.direction = inc.outgoing ? d : Vec2(-d);
            double a = std::atan2(ray.direction.y(), ray.direction.x());
            if (a < 0.0) a += 2.0 * std::numbers::pi;
            if (a >= 2.0 * std::numbers::pi) a -= 2.0 * std::numbers::pi;
            ray.angle = a;
            star.rays.push_back(ray);
        }
        if (!(eps > 0.0) || eps >= 0.5 * shortest)
            fail(ErrorCode::EpsilonTooLarge, "star radius must lie in (0, shortest incident length / 2)");
        std::sort(star.rays.begin(), star.rays.end(),
                  [](const StarRay& a, const StarRay& b) { return a.angle < b.angle; });
        return star;
    }

    /// Point at distance r from the vertex (in cell `cell`) along the given ray.
    GraphPoint ray_point(const StarRay& ray, double r, const GroupElement& cell) const {
        const auto& e = edge(ray.edge);
        return GraphPoint{ray.edge, ray.outgoing ? r : e.length - r, cell + ray.instance};
    }

private:
    int rank_ = 1;
    std::vector<Vertex> vertices_;
    std::vector<Edge> edges_;
    std::vector<Vec2> lattice_;
    std::vector<std::vector<Incidence>> incidence_;
    double diameter_ = 0.0;
    std::int64_t max_edge_offset_ = 0;
};

inline MetricGraph build_graph(const GraphSpec& spec) { return MetricGraph::build(spec); }

/// The real line as a Z-periodic graph: one unit edge per cell.
inline GraphSpec line_graph_spec(double length = 1.0) {
    GraphSpec s;
    s.period_rank = 1;
    s.lattice_vectors = {Vec2(length, 0.0)};
    s.vertices = {{0, Vec2(0.0, 0.0)}, {1, Vec2(length, 0.0)}};
    s.edges = {{0, 0, 1, length}};
    s.identifications = {{1, 0, GroupElement(1)}};
    return s;
}

/// Honeycomb lattice: two vertex orbits, three edge orbits, unit bond length.
inline GraphSpec honeycomb_spec() {
    const double s3 = std::sqrt(3.0);
    GraphSpec s;
    s.period_rank = 2;
    s.lattice_vectors = {Vec2(s3, 0.0), Vec2(0.5 * s3, 1.5)};
    Vec2 a(0.0, 0.0), b(0.0, 1.0);
    s.vertices = {{0, a}, {1, b}};
    // B sits at A + (0, 1); the other two B neighbours of A are translates.
    Vec2 l1 = s.lattice_vectors[0], l2 = s.lattice_vectors[1];
    s.vertices.push_back({2, b - l2});
    s.vertices.push_back({3, b - l2 + l1});
    s.edges = {{0, 0, 1, 1.0}, {1, 0, 2, 1.0}, {2, 0, 3, 1.0}};
    s.identifications = {{2, 1, GroupElement(0, -1)}, {3, 1, GroupElement(1, -1)}};
    return s;
}

}  // namespace perigraph
