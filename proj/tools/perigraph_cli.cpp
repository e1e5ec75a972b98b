// perigraph command line: graph validation, symbol scans, Fredholm checks,
// essential spectra and finite-section cross-checks.
//
// Exit codes: 0 success or Fredholm, 1 error, 2 NotFredholm, 3 Inconclusive.

#include "perigraph/perigraph.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace perigraph;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNotFredholm = 2;
constexpr int kExitInconclusive = 3;

/// Output file, or stdout for "" and "-".
class Sink {
public:
    explicit Sink(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_.open(path);
            if (!file_) fail(ErrorCode::InvalidArgument, "cannot write " + path);
        }
    }
    std::ostream& get() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

std::vector<GroupElement> cells_within(int rank, int window) { return group_ball(rank, window); }

int run_validate(const std::string& path) {
    const auto spec = graph_spec_from_json(read_json_file(path));
    const MetricGraph g = build_graph(spec);
    std::cout << "graph ok: rank " << g.rank() << ", " << g.vertices().size() << " vertex orbits, " << g.edges().size()
              << " edge orbits, cell length " << g.total_length() << ", shortest edge " << g.min_edge_length() << "\n";
    return kExitOk;
}

struct EdgeArgs {
    std::string op, csv;
    int per_edge = 64;
    int window = 0;
};

int run_symbol_edge(const EdgeArgs& a) {
    const auto s = load_operator(a.op);
    if (s.kind != "sio") fail(ErrorCode::InvalidArgument, "edge symbols are defined for sio operators");
    Sink out(a.csv);
    write_edge_symbol_csv(out.get(), *s.graph, s.a, s.b, s.phi, a.per_edge, cells_within(s.graph->rank(), a.window));
    return kExitOk;
}

struct VertexArgs {
    std::string op, csv;
    int vertex = 0;
    int r_points = 40;
    int grid = 201;
    double lambda_max = 0.0;
    double r_min_factor = 1e-6;
};

int run_symbol_vertex(const VertexArgs& a) {
    const auto s = load_operator(a.op);
    if (s.kind != "sio") fail(ErrorCode::InvalidArgument, "vertex symbols are defined for sio operators");
    const auto& g = *s.graph;
    if (a.vertex < 0 || a.vertex >= static_cast<int>(g.vertices().size()))
        fail(ErrorCode::UnknownVertex, "vertex index " + std::to_string(a.vertex));
    const double eps = 0.25 * g.min_edge_length();
    const auto c = vertex_coefficients(g, s.a, s.b, s.phi, LiftedVertex{a.vertex, GroupElement::zero(g.rank())}, eps);
    const double L = a.lambda_max > 0.0 ? a.lambda_max : detail::lambda_extent(s.p, 1e-6);
    std::vector<double> lam;
    for (int k = 0; k < a.grid; ++k) lam.push_back(a.grid == 1 ? 0.0 : -L + 2.0 * L * k / (a.grid - 1));
    Sink out(a.csv);
    write_vertex_symbol_csv(out.get(), c, s.p, s.weight.at(a.vertex), geometric_grid(eps, eps * a.r_min_factor, a.r_points),
                            lam);
    return kExitOk;
}

struct FredholmArgs {
    std::string op, json_out;
    std::optional<double> p;
    FredholmThresholds t;
};

int run_check(const FredholmArgs& a) {
    auto s = load_operator(a.op);
    if (a.p) s.p = *a.p;
    const auto report = check_fredholm_spec(s, a.t);
    std::cerr << "verdict: " << to_string(report.verdict) << " (" << report.reason << ")\n";
    for (const auto* c : {&report.edge, &report.vertex, &report.infinity})
        std::cerr << "  " << c->name << ": " << to_string(c->status) << ", margin " << c->margin << "\n";
    Sink out(a.json_out);
    out.get() << to_json(report).dump(2) << "\n";
    switch (report.verdict) {
        case Verdict::Fredholm: return kExitOk;
        case Verdict::NotFredholm: return kExitNotFredholm;
        case Verdict::Inconclusive: return kExitInconclusive;
    }
    return kExitError;
}

struct SpectrumArgs {
    std::string op, csv, json_out;
    int tau_grid = 256;
    bool adaptive = false;
};

int run_spectrum(const SpectrumArgs& a) {
    const auto s = load_operator(a.op);
    const auto fibers = spec_fibers(s, spec_mesh(s));
    if (fibers.families.empty()) fail(ErrorCode::NoConvergentSubsequence, "no limit operator could be extracted");
    SpectrumConfig cfg;
    cfg.tau_grid = a.tau_grid;
    cfg.adaptive = a.adaptive;
    const auto est = essential_spectrum(fibers.families, cfg, fibers.names);
    Sink out(a.csv);
    write_spectrum_csv(out.get(), est);
    double re_lo = std::numeric_limits<double>::infinity(), re_hi = -re_lo, im_lo = re_lo, im_hi = -re_lo;
    for (const auto& p : est.points) {
        re_lo = std::min(re_lo, p.lambda.real());
        re_hi = std::max(re_hi, p.lambda.real());
        im_lo = std::min(im_lo, p.lambda.imag());
        im_hi = std::max(im_hi, p.lambda.imag());
    }
    const json summary{{"points", est.points.size()},
                       {"grid", est.grid},
                       {"tail_bound", est.tail_bound},
                       {"family", est.family},
                       {"skipped_directions", fibers.skipped},
                       {"re_range", {re_lo, re_hi}},
                       {"im_range", {im_lo, im_hi}}};
    if (!a.json_out.empty()) {
        Sink js(a.json_out);
        js.get() << summary.dump(2) << "\n";
    }
    std::cerr << "essential spectrum: " << est.points.size() << " points on a grid of " << est.grid << ", Re in [" << re_lo
              << ", " << re_hi << "], tail bound " << est.tail_bound << "\n";
    return kExitOk;
}

struct OracleArgs {
    std::string op, csv;
    int radius = 20;
    int tau_grid = 256;
    bool condition = false;
};

int run_oracle(const OracleArgs& a) {
    const auto s = load_operator(a.op);
    const auto mesh = spec_mesh(s);
    const auto A = assemble_spec(s, mesh);
    const auto eig = section_eigenvalues(A, a.radius);
    Sink out(a.csv);
    out.get() << "re,im\n" << std::setprecision(17);
    for (auto z : eig) out.get() << z.real() << ',' << z.imag() << '\n';
    std::cerr << "finite section radius " << a.radius << ": " << eig.size() << " eigenvalues\n";
    if (A.periodic()) {
        const auto est = essential_spectrum(A, SpectrumConfig{a.tau_grid});
        const auto curve = est.rank == 1 ? est.densified() : est.cloud();
        std::cerr << "  max distance from section eigenvalues to the fiber spectrum: " << directed_hausdorff(eig, curve)
                  << "\n";
    }
    if (a.condition) {
        const auto c = section_condition(A, a.radius);
        std::cerr << "  sigma_min " << c.sigma_min << ", sigma_max " << c.sigma_max << ", condition " << c.condition << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fredholm checks and essential spectra for operators on periodic metric graphs"};
    app.require_subcommand(1);

    std::string graph_path;
    auto* validate = app.add_subcommand("validate", "Check a graph spec and print a summary");
    validate->add_option("graph", graph_path, "graph JSON")->required();

    auto* symbol = app.add_subcommand("symbol", "Scan symbols to CSV");
    symbol->require_subcommand(1);
    EdgeArgs edge_args;
    auto* edge = symbol->add_subcommand("edge", "a(x) +- b(x) phi(x, 0) along the edges");
    edge->add_option("operator", edge_args.op, "operator JSON")->required();
    edge->add_option("--grid", edge_args.per_edge, "samples per edge")->check(CLI::PositiveNumber);
    edge->add_option("--cells", edge_args.window, "scan cells with |alpha|_inf <= this")->check(CLI::NonNegativeNumber);
    edge->add_option("--csv-out", edge_args.csv, "output file (default stdout)");
    VertexArgs vertex_args;
    auto* vertex = symbol->add_subcommand("vertex", "det of the vertex Mellin symbol over (r, lambda)");
    vertex->add_option("operator", vertex_args.op, "operator JSON")->required();
    vertex->add_option("--vertex", vertex_args.vertex, "vertex orbit index");
    vertex->add_option("--grid", vertex_args.grid, "lambda points")->check(CLI::PositiveNumber);
    vertex->add_option("--r-points", vertex_args.r_points, "geometric r points")->check(CLI::PositiveNumber);
    vertex->add_option("--lambda-max", vertex_args.lambda_max, "lambda range [-L, L] (default: tail criterion)");
    vertex->add_option("--csv-out", vertex_args.csv, "output file (default stdout)");

    FredholmArgs fr;
    auto* check = app.add_subcommand("check-fredholm", "Fredholm verdict with per-condition report");
    check->add_option("operator", fr.op, "operator JSON")->required();
    check->add_option("--p", fr.p, "exponent p in (1, inf)");
    check->add_option("--json-out", fr.json_out, "report file (default stdout)");
    check->add_option("--edge-tol", fr.t.edge_tol, "pass level for the edge symbol");
    check->add_option("--vertex-tol", fr.t.vertex_tol, "pass level for vertex determinants");
    check->add_option("--inv-tol", fr.t.inv_tol, "pass level for certified fiber margins");
    check->add_option("--tau-grid", fr.t.tau_grid, "torus grid for rank 1");

    SpectrumArgs sp;
    auto* spectrum = app.add_subcommand("ess-spectrum", "Essential spectrum from the fiber family");
    spectrum->add_option("operator", sp.op, "operator JSON")->required();
    spectrum->add_option("--tau-grid", sp.tau_grid, "points per torus dimension")->check(CLI::PositiveNumber);
    spectrum->add_flag("--adaptive", sp.adaptive, "refine the grid until the cloud settles");
    spectrum->add_option("--csv-out", sp.csv, "spectrum CSV (default stdout)");
    spectrum->add_option("--json-out", sp.json_out, "summary JSON");

    auto* oracle = app.add_subcommand("oracle", "Brute-force cross-checks");
    oracle->require_subcommand(1);
    OracleArgs orc;
    auto* section = oracle->add_subcommand("finite-section", "Eigenvalues of a finite section");
    section->add_option("operator", orc.op, "operator JSON")->required();
    section->add_option("--radius", orc.radius, "section radius rho")->required()->check(CLI::NonNegativeNumber);
    section->add_option("--tau-grid", orc.tau_grid, "grid for the fiber comparison")->check(CLI::PositiveNumber);
    section->add_flag("--condition", orc.condition, "also estimate the condition number");
    section->add_option("--csv-out", orc.csv, "eigenvalue CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // help requests exit 0, usage errors 1
        return app.exit(e) == 0 ? kExitOk : kExitError;
    }

    try {
        if (*validate) return run_validate(graph_path);
        if (*edge) return run_symbol_edge(edge_args);
        if (*vertex) return run_symbol_vertex(vertex_args);
        if (*check) return run_check(fr);
        if (*spectrum) return run_spectrum(sp);
        if (*section) return run_oracle(orc);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
