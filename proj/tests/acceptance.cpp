// Acceptance run: one PASS/FAIL line per criterion, with the measured
// quantity and wall time. Exit status is nonzero if any criterion fails.

#include "perigraph/perigraph.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

using namespace perigraph;

namespace {

const double pi = std::numbers::pi;
const double kSqrtPi = std::sqrt(pi);

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::shared_ptr<const MetricGraph> line() { return std::make_shared<const MetricGraph>(build_graph(line_graph_spec())); }
std::shared_ptr<const Mesh> mesh_of(std::shared_ptr<const MetricGraph> g, int ppul, int order) {
    return std::make_shared<const Mesh>(mesh_graph(std::move(g), ppul, order));
}

cplx gaussian(const Vec2& z) { return std::exp(-z.squaredNorm()); }

KernelModulation gaussian_phi() {
    return {[](const GraphPoint&, const Vec2& z) { return cplx(std::exp(-z.squaredNorm())); }, true};
}

BandOperator gaussian_band(std::shared_ptr<const Mesh> m) {
    BandConfig cfg;
    cfg.radius = 20;
    return assemble_convolution(gaussian, m, cfg);
}

GraphFunction on_line(std::shared_ptr<const MetricGraph> g, std::function<double(double)> f, bool periodic) {
    return {[g, f](const GraphPoint& p) { return cplx(f(g->embed(p).x())); }, periodic, {}};
}

MellinSymbol tanh_symbol() {
    return MellinSymbol::scalar_of_lambda([](cplx l) { return std::tanh(pi * l); }, Interval{-0.5, 0.5});
}

std::vector<Eigen::MatrixXcd> bump_suite(const LogGrid& g, int count, double lo, double hi) {
    std::vector<Eigen::MatrixXcd> out;
    for (int k = 0; k < count; ++k) {
        const double c = lo + (hi - lo) * k / std::max(1, count - 1);
        const double width = 0.7 + 0.1 * (k % 4);
        Eigen::MatrixXcd u(g.size, 1);
        for (int j = 0; j < g.size; ++j) {
            const double z = (g.x(j) - c) / width;
            u(j, 0) = std::exp(-0.5 * z * z);
            if (k % 3 == 1) u(j, 0) *= std::polar(1.0, 1.5 * g.x(j));
        }
        out.push_back(u);
    }
    return out;
}

std::pair<double, double> real_range(const std::vector<cplx>& pts) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (cplx z : pts) {
        lo = std::min(lo, z.real());
        hi = std::max(hi, z.real());
    }
    return {lo, hi};
}

Outcome criterion1() {
    StarGeometry star{{0.0}, {1}};
    double worst = 0.0;
    for (int k = 0; k <= 2000; ++k) {
        const double l = -10.0 + 20.0 * k / 2000.0;
        for (double r : {1e-4, 0.1}) {
            const auto m = vertex_symbol_S(star, 2.0, Weight::trivial(), r, l);
            worst = std::max(worst, std::abs(m(0, 0) - std::tanh(pi * l)));
        }
    }
    return {worst <= 1e-10, fmt("max |S - tanh(pi lambda)| = %.3e", worst)};
}

Outcome criterion2() {
    auto phi = [](double z) { return cplx(std::exp(-z * z)); };
    double inner = 0.0, outer = 0.0;
    for (int k = 0; k <= 1600; ++k) {
        const double xi = -8.0 + 16.0 * k / 1600.0;
        inner = std::max(inner, std::abs(fourier_symbol_phi(phi, xi).value - std::erf(xi / 2.0)));
    }
    for (double xi = 8.0; xi <= 256.0; xi *= 1.1)
        for (double s : {-1.0, 1.0}) outer = std::max(outer, std::abs(fourier_symbol_phi(phi, s * xi).value - s));
    return {inner <= 1e-6 && outer <= 1e-3, fmt("erf error %.3e on [-8, 8], |sigma - sgn| %.3e beyond", inner, outer)};
}

Outcome criterion3() {
    const auto est = essential_spectrum(gaussian_band(mesh_of(line(), 8, 4)), SpectrumConfig{256});
    auto dist = [](cplx z) { return distance_to_segment(z, 0.0, kSqrtPi); };
    const double d = hausdorff_to_set(est.cloud(), dist, segment_samples(0.0, kSqrtPi, 20000));
    return {d <= 1e-2, fmt("Hausdorff distance to [0, sqrt(pi)] = %.3e", d)};
}

Outcome criterion4() {
    const auto A = gaussian_band(mesh_of(line(), 8, 4));
    const auto ev = section_eigenvalues(A, 100);
    const auto cloud = essential_spectrum(A, SpectrumConfig{256}).cloud();
    const double d = directed_hausdorff(ev, cloud);
    const auto [lo, hi] = real_range(ev);
    const auto [clo, chi] = real_range(cloud);
    const double ext = std::max(std::abs(clo - lo), std::abs(chi - hi));
    return {d <= 5e-2 && ext <= 5e-2,
            fmt("%zu eigenvalues, max distance to cloud %.3e, extreme mismatch %.3e", ev.size(), d, ext)};
}

Outcome criterion5() {
    BandOperator S;
    S.n0 = 1;
    S.radius = 1;
    S.blocks[GroupElement(1)] = Eigen::MatrixXcd::Identity(1, 1);
    const auto est = essential_spectrum(S, SpectrumConfig{512});
    std::vector<cplx> circle;
    for (int k = 0; k < 20000; ++k) circle.push_back(std::polar(1.0, 2.0 * pi * (k + 0.5) / 20000));
    const double d = hausdorff_to_set(est.densified(), [](cplx z) { return std::abs(std::abs(z) - 1.0); }, circle);
    return {d <= 1e-3, fmt("Hausdorff distance to the unit circle = %.3e", d)};
}

Outcome criterion6() {
    auto a0 = MellinSymbol::scalar([](double r, cplx l) { return (1.0 + std::exp(-r)) * std::cos(l); });
    auto b0 = tanh_symbol();
    auto c0 = compose(a0, b0);
    bool exact = true;
    for (double r : {1e-3, 0.5, 4.0})
        for (double l : {-3.0, 0.1, 2.0}) exact = exact && c0(r, l)(0, 0) == a0(r, l)(0, 0) * b0(r, l)(0, 0);

    auto a = tanh_symbol();
    auto b = MellinSymbol::of_r(1, [](double r) { return Eigen::MatrixXcd::Constant(1, 1, 1.0 + std::exp(-r)); });
    OscillatoryConfig cfg;
    cfg.s_min = -16.5;
    cfg.s_max = 16.5;
    cfg.t_max = 32.0;
    auto c = compose(a, b, cfg);
    LogGrid g{-16.0, 0.05, 641};
    double worst = 0.0;
    for (const auto& u : bump_suite(g, 10, -3.0, 3.0)) {
        const auto lhs = apply_mellin(a, g, apply_mellin(b, g, u));
        const auto rhs = apply_mellin(c, g, u);
        worst = std::max(worst, (lhs - rhs).norm() / u.norm());
    }
    return {exact && worst <= 1e-4, fmt("pointwise product %s, relative operator defect %.3e", exact ? "exact" : "inexact",
                                         worst)};
}

Outcome criterion7() {
    LogGrid g{-30.0, 0.05, 1200};
    const auto tests = bump_suite(g, 4, -2.0, 2.0);
    double worst = 0.0;
    for (double k : {-0.3, 0.0, 0.3}) {
        const auto w = Weight::power(k);
        const auto a = tanh_symbol();
        const auto b = conjugate_by_weight(a, w);
        worst = std::max(worst, conjugation_defect(a, w, b.symbol, g, tests));
    }
    return {worst <= 1e-12, fmt("max conjugation defect %.3e", worst)};
}

Outcome criterion8() {
    BandConfig cfg;
    cfg.radius = 16;
    const auto A = assemble_sio(gaussian_phi(), mesh_of(line(), 8, 4), {}, 2.0, cfg);
    const auto bn = band_norms(A, 2.0, 16.0);
    return {bn.slope <= -3.0 && bn.fit_points >= 2, fmt("fitted slope %.3f over %d blocks", bn.slope, bn.fit_points)};
}

Outcome criterion9() {
    auto g = line();
    std::ostringstream os;
    bool ok = true;

    SioProblem identity;
    identity.graph = g;
    const auto r1 = check_fredholm_sio(identity);
    ok = ok && r1.verdict == Verdict::Fredholm;
    os << "(i) " << to_string(r1.verdict);

    SioProblem degenerate;
    degenerate.graph = g;
    degenerate.b = constant_function(1.0);
    const auto r2 = check_fredholm_sio(degenerate);
    const bool edge_witness = r2.edge.witness.has_value() && r2.edge.witness->kind == "edge";
    ok = ok && r2.verdict == Verdict::NotFredholm && edge_witness;
    os << ", (ii) " << to_string(r2.verdict) << (edge_witness ? " with edge witness" : " without edge witness");

    ConvolutionProblem conv;
    conv.graph = g;
    conv.a = constant_function(2.0);
    conv.b = constant_function(-1.0);
    conv.k = gaussian;
    const auto r3 = check_fredholm_conv(conv);
    ok = ok && r3.verdict == Verdict::Fredholm;
    os << ", (iii) " << to_string(r3.verdict);

    SioProblem sin_case;
    sin_case.graph = g;
    sin_case.a = on_line(g, [](double x) { return 2.0 + std::sin(2.0 * pi * x); }, true);
    sin_case.b = constant_function(0.5);
    sin_case.phi = gaussian_phi();
    const auto r4 = check_fredholm_sio(sin_case);
    const auto mesh = mesh_of(g, 8, 4);
    const auto A = combine(sin_case.a, sin_case.b, assemble_sio(sin_case.phi, mesh), mesh);
    const double c100 = section_condition(A, 100).condition;
    const double c200 = section_condition(A, 200).condition;
    const double ratio = c200 / c100;
    ok = ok && r4.verdict == Verdict::Fredholm && std::isfinite(c200) && ratio <= 1.5;
    os << ", (iv) " << to_string(r4.verdict) << fmt(", cond(100) %.4f, cond(200) %.4f, ratio %.4f", c100, c200, ratio);
    return {ok, os.str()};
}

Outcome criterion10() {
    auto g = line();
    auto m = mesh_of(g, 4, 4);
    OperatorData op;
    op.kind = OperatorKind::convolution;
    op.a = on_line(g, [](double x) { return 3.0 + std::atan(x); }, false);
    op.b = constant_function(0.5);
    op.k = gaussian;
    LimitBandConfig cfg;
    cfg.band.radius = 8;
    const auto dir = default_limit_family(1)[0];
    const auto L = limit_operator_band(op, m, dir, cfg);
    double coeff = 0.0;
    for (int i = 0; i < m->size(); ++i) coeff = std::max(coeff, std::abs(L.fibers.a(i) - (3.0 + pi / 2)));
    const auto A = assemble_operator(op, m, cfg);
    bool monotone = true;
    double prev = std::numeric_limits<double>::infinity();
    for (std::int64_t h = 16; h <= 4096; h *= 2) {
        const double d = limit_defect(A, L.band, dir.h(h), 3);
        monotone = monotone && d < prev;
        prev = d;
    }
    return {L.band.periodic() && coeff <= 1e-6 && monotone,
            fmt("coefficient error %.3e, defect %s, final defect %.3e", coeff, monotone ? "monotone" : "not monotone", prev)};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"vertex Mellin symbol of a single ray is tanh", criterion1},
        {"Gaussian SIO Fourier symbol is erf(xi/2)", criterion2},
        {"Gaussian convolution spectrum matches the Fourier range", criterion3},
        {"finite section eigenvalues follow the fiber cloud", criterion4},
        {"shift spectrum is the unit circle", criterion5},
        {"Mellin composition", criterion6},
        {"power weight conjugation", criterion7},
        {"Wiener band decay of the Gaussian SIO", criterion8},
        {"Fredholm verdicts", criterion9},
        {"arctan limit operator", criterion10},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %zu: %s  %s: %s (%.1f s)\n", k + 1, o.pass ? "PASS" : "FAIL", criteria[k].first,
                    o.detail.c_str(), secs);
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
