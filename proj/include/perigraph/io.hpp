#pragma once

// File formats: graph and operator specs (JSON), band and symbol-grid exports
// (binary with a header), spectra, margin maps and symbol scans (CSV).

#include "perigraph/fredholm.hpp"
#include "perigraph/section.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>

namespace perigraph {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Graph specs

namespace detail {

template <class T>
T field(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) fail(ErrorCode::ParseError, where + ": missing \"" + key + "\"");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        fail(ErrorCode::ParseError, where + ": bad \"" + key + "\": " + e.what());
    }
}

inline Vec2 vec2(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty() || j.size() > 2 || !j[0].is_number() || (j.size() == 2 && !j[1].is_number()))
        fail(ErrorCode::ParseError, where + ": expected [x] or [x, y]");
    return {j[0].get<double>(), j.size() == 2 ? j[1].get<double>() : 0.0};
}

inline GroupElement group_element(const json& j, int rank, const std::string& where) {
    if (!j.is_array() || static_cast<int>(j.size()) != rank)
        fail(ErrorCode::ParseError, where + ": offset must have " + std::to_string(rank) + " integer entries");
    for (const auto& v : j)
        if (!v.is_number_integer()) fail(ErrorCode::ParseError, where + ": offset entries must be integers");
    return rank == 1 ? GroupElement(j[0].get<std::int64_t>()) : GroupElement(j[0].get<std::int64_t>(), j[1].get<std::int64_t>());
}

inline json group_json(const GroupElement& g) {
    return g.rank == 1 ? json::array({g[0]}) : json::array({g[0], g[1]});
}

}  // namespace detail

inline GraphSpec graph_spec_from_json(const json& j) {
    if (!j.is_object()) fail(ErrorCode::ParseError, "graph spec must be a JSON object");
    GraphSpec s;
    s.period_rank = detail::field<int>(j, "period_rank", "graph");
    if (s.period_rank != 1 && s.period_rank != 2) fail(ErrorCode::ParseError, "graph: period_rank must be 1 or 2");
    for (const auto& v : detail::field<json>(j, "vertices", "graph")) {
        GraphSpec::Vertex x;
        x.id = detail::field<int>(v, "id", "vertex");
        x.position = detail::vec2(detail::field<json>(v, "position", "vertex"), "vertex " + std::to_string(x.id));
        s.vertices.push_back(x);
    }
    for (const auto& e : detail::field<json>(j, "edges", "graph")) {
        GraphSpec::Edge x;
        x.id = detail::field<int>(e, "id", "edge");
        x.start = detail::field<int>(e, "start", "edge");
        x.end = detail::field<int>(e, "end", "edge");
        if (e.contains("length")) x.length = detail::field<double>(e, "length", "edge");
        s.edges.push_back(x);
    }
    for (const auto& l : detail::field<json>(j, "lattice_vectors", "graph"))
        s.lattice_vectors.push_back(detail::vec2(l, "lattice vector"));
    for (const auto& i : j.value("identifications", json::array())) {
        GraphSpec::Identification x;
        x.vertex = detail::field<int>(i, "vertex", "identification");
        x.representative = detail::field<int>(i, "representative", "identification");
        x.offset = detail::group_element(detail::field<json>(i, "offset", "identification"), s.period_rank, "identification");
        s.identifications.push_back(x);
    }
    return s;
}

inline json to_json(const GraphSpec& s) {
    json j;
    j["period_rank"] = s.period_rank;
    j["vertices"] = json::array();
    for (const auto& v : s.vertices) j["vertices"].push_back({{"id", v.id}, {"position", {v.position.x(), v.position.y()}}});
    j["edges"] = json::array();
    for (const auto& e : s.edges) {
        json x{{"id", e.id}, {"start", e.start}, {"end", e.end}};
        if (e.length) x["length"] = *e.length;
        j["edges"].push_back(x);
    }
    j["lattice_vectors"] = json::array();
    for (const auto& l : s.lattice_vectors) j["lattice_vectors"].push_back({l.x(), l.y()});
    j["identifications"] = json::array();
    for (const auto& i : s.identifications)
        j["identifications"].push_back(
            {{"vertex", i.vertex}, {"representative", i.representative}, {"offset", detail::group_json(i.offset)}});
    return j;
}

inline json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::InvalidArgument, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
}

/// "line", "honeycomb", an inline graph object, or a path relative to `base`.
inline std::shared_ptr<const MetricGraph> load_graph(const json& ref, const std::filesystem::path& base = {}) {
    if (ref.is_string()) {
        const auto name = ref.get<std::string>();
        if (name == "line") return std::make_shared<const MetricGraph>(build_graph(line_graph_spec()));
        if (name == "honeycomb") return std::make_shared<const MetricGraph>(build_graph(honeycomb_spec()));
        return std::make_shared<const MetricGraph>(build_graph(graph_spec_from_json(read_json_file(base / name))));
    }
    return std::make_shared<const MetricGraph>(build_graph(graph_spec_from_json(ref)));
}

// ---------------------------------------------------------------------------
// Operator specs

/// One operator from a spec file.  `sum` carries its terms; the other kinds
/// carry coefficients a, b and either phi (sio) or k (convolution).
struct OperatorSpec {
    std::string kind;  // multiplication | sio | convolution | sum
    std::shared_ptr<const MetricGraph> graph;
    GraphFunction a = constant_function(1.0);
    GraphFunction b = constant_function(0.0);
    KernelModulation phi = KernelModulation::one();
    PlaneKernel k;
    std::string a_source = "1", b_source = "0", phi_source = "1", k_source;
    double p = 2.0;
    GraphWeight weight;
    int panels_per_unit_length = 8;
    int order = 4;
    BandConfig band;
    std::vector<OperatorSpec> terms;
    std::vector<cplx> coefficients;

    OperatorData data() const {
        OperatorData d;
        d.kind = kind == "convolution" ? OperatorKind::convolution : OperatorKind::sio;
        d.a = a;
        d.b = kind == "multiplication" ? constant_function(0.0) : b;
        d.phi = phi;
        d.k = k;
        return d;
    }
};

namespace detail {

/// Equal values at samples and at their lattice translates.
inline bool looks_periodic(const MetricGraph& g, const std::function<cplx(const GraphPoint&)>& f) {
    const auto pts = cell_samples(g, 5);
    std::vector<GroupElement> shifts;
    for (std::int64_t s : {1, -2, 7})
        if (g.rank() == 1) shifts.emplace_back(s);
        else {
            shifts.emplace_back(s, 0);
            shifts.emplace_back(0, s);
        }
    for (const auto& x : pts) {
        const cplx f0 = f(x);
        for (const auto& s : shifts) {
            GraphPoint y = x;
            y.offset = s;
            if (std::abs(f(y) - f0) > 1e-12 * std::max(1.0, std::abs(f0))) return false;
        }
    }
    return true;
}

inline std::string expr_text(const json& j, const std::string& where) {
    if (j.is_number()) {
        std::ostringstream s;
        s << std::setprecision(17) << j.get<double>();
        return s.str();
    }
    if (j.is_string()) return j.get<std::string>();
    if (j.is_object() && j.contains("expr")) return expr_text(j.at("expr"), where);
    fail(ErrorCode::ParseError, where + ": expected a number, an expression string or {\"expr\": ...}");
}

inline std::optional<bool> declared_periodic(const json& j) {
    if (j.is_object() && j.contains("periodic")) return j.at("periodic").get<bool>();
    return std::nullopt;
}

inline GraphFunction function_from(const json& j, std::shared_ptr<const MetricGraph> g, const std::string& where,
                                   std::string& source) {
    source = expr_text(j, where);
    Expr e = Expr::parse(source);
    GraphFunction f = expression_function(g, e, true);
    f.periodic = declared_periodic(j).value_or(looks_periodic(*g, f.eval));
    return f;
}

inline KernelModulation phi_from(const json& j, std::shared_ptr<const MetricGraph> g, std::string& source) {
    source = expr_text(j, "phi");
    KernelModulation phi = KernelModulation::from_expr(g, Expr::parse(source), true);
    if (auto d = declared_periodic(j)) {
        phi.periodic = *d;
    } else {
        bool periodic = true;
        for (const Vec2 z : {Vec2(0.0, 0.0), Vec2(0.7, 0.0), Vec2(-1.3, 0.4)})
            periodic = periodic && looks_periodic(*g, [&](const GraphPoint& x) { return phi(x, z); });
        phi.periodic = periodic;
    }
    return phi;
}

inline PlaneKernel kernel_from(const json& j, std::string& source) {
    source = expr_text(j, "kernel");
    Expr e = Expr::parse(source);
    if (!e.independent_of(Var::t) || !e.independent_of(Var::x) || !e.independent_of(Var::y) ||
        !e.independent_of(Var::edge) || !e.independent_of(Var::g1) || !e.independent_of(Var::g2))
        fail(ErrorCode::ParseError, "kernel: a convolution kernel depends on z1, z2, zabs only");
    return [e](const Vec2& z) {
        ExprEnv env{};
        env[static_cast<std::size_t>(Var::z1)] = z.x();
        env[static_cast<std::size_t>(Var::z2)] = z.y();
        env[static_cast<std::size_t>(Var::zabs)] = z.norm();
        return e(env);
    };
}

inline GraphWeight weight_from(const json& j, const MetricGraph& g) {
    GraphWeight w;
    if (j.is_null()) return w;
    w.eps = j.value("eps", w.eps);
    const auto& kappas = detail::field<json>(j, "kappa", "weight");
    if (kappas.is_number()) {
        w.per_vertex.assign(g.vertices().size(), Weight::power(kappas.get<double>(), w.eps));
    } else {
        if (kappas.size() != g.vertices().size())
            fail(ErrorCode::ParseError, "weight: need one kappa per vertex representative");
        for (const auto& k : kappas) w.per_vertex.push_back(Weight::power(k.get<double>(), w.eps));
    }
    return w;
}

}  // namespace detail

inline OperatorSpec operator_spec_from_json(const json& j, const std::filesystem::path& base = {},
                                            std::shared_ptr<const MetricGraph> inherited = nullptr) {
    if (!j.is_object()) fail(ErrorCode::ParseError, "operator spec must be a JSON object");
    OperatorSpec s;
    s.kind = detail::field<std::string>(j, "kind", "operator");
    if (s.kind != "multiplication" && s.kind != "sio" && s.kind != "convolution" && s.kind != "sum")
        fail(ErrorCode::ParseError, "operator: kind must be multiplication, sio, convolution or sum");
    s.graph = j.contains("graph") ? load_graph(j.at("graph"), base) : inherited;
    if (!s.graph) fail(ErrorCode::ParseError, "operator: missing \"graph\"");
    const auto& g = s.graph;
    s.p = j.value("p", 2.0);
    if (j.contains("mesh")) {
        s.panels_per_unit_length = j["mesh"].value("panels_per_unit_length", s.panels_per_unit_length);
        s.order = j["mesh"].value("order", s.order);
    }
    if (j.contains("band")) {
        const auto& b = j["band"];
        if (b.contains("radius")) s.band.radius = b["radius"].get<int>();
        s.band.tail_tol = b.value("tail_tol", s.band.tail_tol);
        s.band.max_radius = b.value("max_radius", s.band.max_radius);
    }
    s.weight = detail::weight_from(j.value("weight", json()), *g);
    if (s.kind == "sum") {
        for (const auto& t : detail::field<json>(j, "terms", "sum")) s.terms.push_back(operator_spec_from_json(t, base, g));
        if (s.terms.empty()) fail(ErrorCode::ParseError, "sum: no terms");
        for (const auto& c : j.value("coefficients", json::array())) {
            if (c.is_number()) s.coefficients.emplace_back(c.get<double>(), 0.0);
            else s.coefficients.emplace_back(c.at(0).get<double>(), c.at(1).get<double>());
        }
        if (s.coefficients.empty()) s.coefficients.assign(s.terms.size(), cplx(1.0));
        if (s.coefficients.size() != s.terms.size()) fail(ErrorCode::ParseError, "sum: one coefficient per term");
        return s;
    }
    if (j.contains("a")) s.a = detail::function_from(j["a"], g, "a", s.a_source);
    if (s.kind == "multiplication") return s;
    if (j.contains("b")) s.b = detail::function_from(j["b"], g, "b", s.b_source);
    if (s.kind == "sio") {
        if (j.contains("phi")) s.phi = detail::phi_from(j["phi"], g, s.phi_source);
    } else {
        s.k = detail::kernel_from(detail::field<json>(j, "kernel", "convolution"), s.k_source);
    }
    return s;
}

inline OperatorSpec load_operator(const std::filesystem::path& path) {
    return operator_spec_from_json(read_json_file(path), path.parent_path());
}

inline std::shared_ptr<const Mesh> spec_mesh(const OperatorSpec& s) {
    return std::make_shared<const Mesh>(mesh_graph(s.graph, s.panels_per_unit_length, s.order));
}

/// b == 0 on the sampled cells; the kernel then plays no role and need not decay.
inline bool b_vanishes(const OperatorSpec& s, const Mesh& mesh) {
    return s.kind == "multiplication" ||
           detail::vanishes(mesh, s.b, detail::scan_cells(s.graph->rank(), s.b.periodic, 2));
}

/// Band of the whole operator on the given mesh.
inline BandOperator assemble_spec(const OperatorSpec& s, std::shared_ptr<const Mesh> mesh) {
    if (s.kind == "sum") {
        BandOperator out = assemble_spec(s.terms[0], mesh);
        if (s.coefficients[0] != cplx(1.0)) out = band_sum(out, out, s.coefficients[0], 0.0);
        for (std::size_t t = 1; t < s.terms.size(); ++t)
            out = band_sum(out, assemble_spec(s.terms[t], mesh), 1.0, s.coefficients[t]);
        return out;
    }
    if (s.kind == "multiplication" || b_vanishes(s, *mesh)) return assemble_multiplication(s.a, mesh);
    LimitBandConfig cfg;
    cfg.band = s.band;
    cfg.weight = s.weight;
    cfg.p = s.p;
    return combine(s.a, s.b, kernel_band(s.data(), mesh, cfg), mesh);
}

inline FredholmReport check_fredholm_spec(const OperatorSpec& s, const FredholmThresholds& t = {}) {
    FredholmThresholds th = t;
    th.panels_per_unit_length = s.panels_per_unit_length;
    th.order = s.order;
    if (s.kind == "sum") fail(ErrorCode::InvalidArgument, "check-fredholm needs an operator of the form aI + bK, not a sum");
    if (s.kind == "convolution") {
        ConvolutionProblem pr{s.graph, s.a, s.b, s.k, s.p};
        return check_fredholm_conv(pr, th);
    }
    SioProblem pr{s.graph, s.a, s.kind == "multiplication" ? constant_function(0.0) : s.b, s.phi, s.weight, s.p};
    return check_fredholm_sio(pr, th);
}

/// Fiber families whose union carries the essential spectrum: the operator
/// itself when periodic, otherwise the scanned limit family.
struct SpecFibers {
    std::vector<FiberFamily> families;
    std::vector<std::string> names;
    std::vector<std::string> skipped;  // directions without a convergent subsequence
};

inline SpecFibers spec_fibers(const OperatorSpec& s, std::shared_ptr<const Mesh> mesh) {
    SpecFibers out;
    const bool multiplication = s.kind != "sum" && b_vanishes(s, *mesh);
    const bool periodic = s.kind == "sum" || (s.a.periodic && (s.kind == "multiplication" || s.b.periodic) &&
                                              (s.kind != "sio" || s.phi.periodic));
    if (periodic || (multiplication && s.a.periodic)) {
        out.families.push_back(fiber_blocks(assemble_spec(s, mesh)));
        out.names.push_back("periodic");
        return out;
    }
    LimitBandConfig cfg;
    cfg.band = s.band;
    for (const auto& dir : default_limit_family(s.graph->rank())) {
        try {
            out.families.push_back(multiplication ? multiplication_fibers(s.a, mesh, &dir)
                                                  : limit_operator_band(s.data(), mesh, dir, cfg).fibers);
            out.names.push_back(dir.name);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoConvergentSubsequence) throw;
            out.skipped.push_back(dir.name);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Band export: magic, version, rank, n0, count, radius, tail bound, index of
// (beta, byte offset), then the blocks as row-major complex128.

inline constexpr char kBandMagic[8] = {'P', 'G', 'B', 'A', 'N', 'D', '\0', '\1'};

namespace detail {

template <class T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T get(std::istream& is) {
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) fail(ErrorCode::ParseError, "truncated binary file");
    return v;
}

}  // namespace detail

inline void write_band(std::ostream& os, const BandOperator& A) {
    if (!A.periodic()) fail(ErrorCode::NotPeriodic, "only periodic bands can be exported");
    os.write(kBandMagic, sizeof kBandMagic);
    detail::put<std::uint32_t>(os, 1);
    detail::put<std::int32_t>(os, A.rank);
    detail::put<std::int64_t>(os, A.n0);
    detail::put<std::int64_t>(os, static_cast<std::int64_t>(A.blocks.size()));
    detail::put<std::int64_t>(os, A.radius);
    detail::put<double>(os, A.tail_bound);
    const std::uint64_t block_bytes = static_cast<std::uint64_t>(A.n0) * A.n0 * sizeof(cplx);
    std::uint64_t offset = 0;
    for (const auto& [beta, blk] : A.blocks) {
        detail::put<std::int64_t>(os, beta[0]);
        detail::put<std::int64_t>(os, A.rank == 2 ? beta[1] : 0);
        detail::put<std::uint64_t>(os, offset);
        offset += block_bytes;
    }
    for (const auto& [beta, blk] : A.blocks)
        for (Eigen::Index i = 0; i < blk.rows(); ++i)
            for (Eigen::Index j = 0; j < blk.cols(); ++j) detail::put<cplx>(os, blk(i, j));
}

inline BandOperator read_band(std::istream& is) {
    char magic[8];
    if (!is.read(magic, sizeof magic) || std::memcmp(magic, kBandMagic, sizeof magic) != 0)
        fail(ErrorCode::ParseError, "not a band file");
    if (detail::get<std::uint32_t>(is) != 1) fail(ErrorCode::ParseError, "unsupported band file version");
    BandOperator A;
    A.rank = detail::get<std::int32_t>(is);
    A.n0 = static_cast<int>(detail::get<std::int64_t>(is));
    const auto count = detail::get<std::int64_t>(is);
    A.radius = static_cast<int>(detail::get<std::int64_t>(is));
    A.tail_bound = detail::get<double>(is);
    std::vector<GroupElement> index;
    for (std::int64_t k = 0; k < count; ++k) {
        const auto b1 = detail::get<std::int64_t>(is), b2 = detail::get<std::int64_t>(is);
        detail::get<std::uint64_t>(is);
        index.push_back(A.rank == 1 ? GroupElement(b1) : GroupElement(b1, b2));
    }
    for (const auto& beta : index) {
        Eigen::MatrixXcd blk(A.n0, A.n0);
        for (Eigen::Index i = 0; i < A.n0; ++i)
            for (Eigen::Index j = 0; j < A.n0; ++j) blk(i, j) = detail::get<cplx>(is);
        A.blocks[beta] = std::move(blk);
    }
    return A;
}

// ---------------------------------------------------------------------------
// Symbol grids: text header lines starting with '#', closed by "# end", then
// int32 n, nr, nl, float64 r[nr], lambda[nl] and complex64 entries, row-major
// over (r, lambda, row, col).

struct SymbolGrid {
    int n = 1;
    std::vector<double> r, lambda;
    std::vector<Eigen::MatrixXcf> values;  // index i * lambda.size() + j
    std::vector<std::string> header;
};

inline void write_symbol_grid(std::ostream& os, const std::function<Eigen::MatrixXcd(double, double)>& sym, int n,
                              const std::vector<double>& r, const std::vector<double>& lambda,
                              const std::vector<std::string>& header) {
    os << "# perigraph symbol grid v1\n";
    for (const auto& h : header) os << "# " << h << "\n";
    os << "# layout: int32 n, int32 nr, int32 nl, float64 r[nr], float64 lambda[nl], complex64 row-major\n";
    os << "# end\n";
    detail::put<std::int32_t>(os, n);
    detail::put<std::int32_t>(os, static_cast<std::int32_t>(r.size()));
    detail::put<std::int32_t>(os, static_cast<std::int32_t>(lambda.size()));
    for (double x : r) detail::put<double>(os, x);
    for (double x : lambda) detail::put<double>(os, x);
    for (double rr : r)
        for (double l : lambda) {
            const Eigen::MatrixXcd m = sym(rr, l);
            if (m.rows() != n || m.cols() != n) fail(ErrorCode::InvalidArgument, "symbol size differs from n");
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) detail::put<std::complex<float>>(os, std::complex<float>(m(i, j)));
        }
}

inline SymbolGrid read_symbol_grid(std::istream& is) {
    SymbolGrid g;
    std::string line;
    if (!std::getline(is, line) || line != "# perigraph symbol grid v1") fail(ErrorCode::ParseError, "not a symbol grid");
    while (std::getline(is, line) && line != "# end") {
        if (line.rfind("# ", 0) != 0) fail(ErrorCode::ParseError, "malformed symbol grid header");
        g.header.push_back(line.substr(2));
    }
    if (line != "# end") fail(ErrorCode::ParseError, "symbol grid header not closed");
    if (!g.header.empty() && g.header.back().rfind("layout:", 0) == 0) g.header.pop_back();
    g.n = detail::get<std::int32_t>(is);
    const auto nr = detail::get<std::int32_t>(is), nl = detail::get<std::int32_t>(is);
    for (int k = 0; k < nr; ++k) g.r.push_back(detail::get<double>(is));
    for (int k = 0; k < nl; ++k) g.lambda.push_back(detail::get<double>(is));
    for (int k = 0; k < nr * nl; ++k) {
        Eigen::MatrixXcf m(g.n, g.n);
        for (int i = 0; i < g.n; ++i)
            for (int j = 0; j < g.n; ++j) m(i, j) = detail::get<std::complex<float>>(is);
        g.values.push_back(std::move(m));
    }
    return g;
}

// ---------------------------------------------------------------------------
// CSV

inline void write_spectrum_csv(std::ostream& os, const SpectrumEstimate& est) {
    os << "re,im,tau_index,family_index\n" << std::setprecision(17);
    for (const auto& p : est.points)
        os << p.lambda.real() << ',' << p.lambda.imag() << ',' << p.tau_index << ',' << p.family_index << '\n';
}

inline std::vector<cplx> read_spectrum_csv(std::istream& is) {
    std::vector<cplx> out;
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream s(line);
        double re, im;
        char comma;
        if (!(s >> re >> comma >> im)) fail(ErrorCode::ParseError, "bad spectrum row: " + line);
        out.emplace_back(re, im);
    }
    return out;
}

/// sigma_min(mu(tau) - probe) on the torus grid.
inline void write_margin_csv(std::ostream& os, const FiberFamily& F, int grid, const std::vector<cplx>& probes) {
    const auto taus = torus_grid(F.rank, grid);
    const Eigen::MatrixXd m = margin_map(F, grid, probes);
    os << "tau_index,theta1,theta2,probe_re,probe_im,margin\n" << std::setprecision(17);
    for (std::size_t t = 0; t < taus.size(); ++t)
        for (std::size_t k = 0; k < probes.size(); ++k)
            os << t << ',' << std::arg(taus[t][0]) << ',' << std::arg(taus[t][1]) << ',' << probes[k].real() << ','
               << probes[k].imag() << ',' << m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t)) << '\n';
}

inline json margin_summary(const FiberMargin& m) {
    return {{"min_margin", detail::num(m.margin)},
            {"argmin_tau", {{m.argmin[0].real(), m.argmin[0].imag()}, {m.argmin[1].real(), m.argmin[1].imag()}}},
            {"grid", m.grid},
            {"tail_bound", detail::num(m.tail_bound)},
            {"lipschitz", detail::num(m.lipschitz)},
            {"certified_margin", detail::num(m.certified_margin)},
            {"pass", m.pass}};
}

/// Edge symbol a +- b phi(x, 0) along every edge of the given cells.
inline void write_edge_symbol_csv(std::ostream& os, const MetricGraph& g, const GraphFunction& a, const GraphFunction& b,
                                  const KernelModulation& phi, int per_edge, const std::vector<GroupElement>& cells) {
    os << "edge,cell1,cell2,coord,xi,re,im,abs\n" << std::setprecision(17);
    for (const auto& c : cells)
        for (auto x : cell_samples(g, per_edge)) {
            x.offset = c;
            const auto s = edge_symbol(g, a, b, phi, x);
            for (int sign : {1, -1}) {
                const cplx v = sign > 0 ? s.plus : s.minus;
                os << g.edge(x.edge).id << ',' << c[0] << ',' << (c.rank == 2 ? c[1] : 0) << ',' << x.coord << ','
                   << sign << ',' << v.real() << ',' << v.imag() << ',' << std::abs(v) << '\n';
            }
        }
}

/// det sigma_A(r, lambda + i kappa(r)) at one vertex over an (r, lambda) grid.
inline void write_vertex_symbol_csv(std::ostream& os, const VertexCoefficients& c, double p, const Weight& w,
                                    const std::vector<double>& r, const std::vector<double>& lambda) {
    os << "vertex,r,lambda,re,im,absdet\n" << std::setprecision(17);
    for (double rr : r)
        for (double l : lambda) {
            const cplx d = vertex_symbol_A(c, p, w, rr, l).determinant();
            os << c.vertex.vertex << ',' << rr << ',' << l << ',' << d.real() << ',' << d.imag() << ',' << std::abs(d) << '\n';
        }
}

}  // namespace perigraph
