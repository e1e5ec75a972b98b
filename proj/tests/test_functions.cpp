#include "perigraph/functions.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace perigraph;

namespace {

std::shared_ptr<const MetricGraph> line() { return std::make_shared<const MetricGraph>(build_graph(line_graph_spec())); }
std::shared_ptr<const MetricGraph> honeycomb() {
    return std::make_shared<const MetricGraph>(build_graph(honeycomb_spec()));
}

GraphFunction expr_fn(const std::shared_ptr<const MetricGraph>& g, const std::string& text, bool periodic) {
    return expression_function(g, Expr::parse(text), periodic);
}

}  // namespace

TEST(VertexTrace, ConstantIsScalarMatrix) {
    auto g = honeycomb();
    auto d = vertex_trace(*g, constant_function(cplx(2.0, -1.0)), {0, GroupElement(0, 0)});
    EXPECT_TRUE(d.isApprox(cplx(2.0, -1.0) * Eigen::MatrixXcd::Identity(3, 3), 0.0));
}

TEST(VertexTrace, LineSignFunctionFollowsRayOrder) {
    auto g = line();
    // sign of the embedded coordinate; at x = 0 the ray at angle 0 points right
    auto f = expr_fn(g, "sign(x)", false);
    auto d = vertex_trace(*g, f, {0, GroupElement(0)});
    EXPECT_EQ(d(0, 0), cplx(1.0));
    EXPECT_EQ(d(1, 1), cplx(-1.0));
    EXPECT_EQ(d(0, 1), cplx(0.0));
}

TEST(VertexTrace, HoneycombAngleFunctionMatchesOneSidedOracle) {
    auto g = honeycomb();
    auto f = expr_fn(g, "exp(i*atan2(y, x))", false);
    auto d = vertex_trace(*g, f, {0, GroupElement(0, 0)});
    auto star = g->vertex_star(0, 0.2);
    for (std::size_t j = 0; j < star.valency(); ++j) {
        Vec2 q = g->embed(g->ray_point(star.rays[j], 1e-6, GroupElement(0, 0)));
        cplx oracle = std::exp(cplx(0.0, std::atan2(q.y(), q.x())));
        EXPECT_NEAR(std::abs(d(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) - oracle), 0.0, 1e-9);
    }
}

TEST(VertexTrace, ProductIsEntrywiseProduct) {
    auto g = honeycomb();
    auto f1 = expr_fn(g, "2 + cos(3*x) + i*y", false);
    auto f2 = expr_fn(g, "exp(i*atan2(y, x)) + x*y", false);
    GraphFunction prod{[&](const GraphPoint& p) { return f1(p) * f2(p); }, false, {}};
    for (int v = 0; v < 2; ++v) {
        LiftedVertex w{v, GroupElement(1, -1)};
        auto d1 = vertex_trace(*g, f1, w), d2 = vertex_trace(*g, f2, w), d = vertex_trace(*g, prod, w);
        EXPECT_LE((d - d1.cwiseProduct(d2)).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(VertexTrace, MissingLimitAndDeclaredLimits) {
    auto g = line();
    auto f = expr_fn(g, "sin(1/x)", false);
    try {
        vertex_trace(*g, f, {0, GroupElement(0)});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingLimit);
    }
    GraphFunction h = expr_fn(g, "t", true);
    h.vertex_limits[0] = {0.0, 1.0};
    EXPECT_TRUE(limits_consistent(*g, h));
    h.vertex_limits[0] = {0.0, 0.5};
    EXPECT_FALSE(limits_consistent(*g, h));
}

TEST(Kappa, PowerAndTrivialWeights) {
    for (double k : {-0.4, 0.0, 0.3}) {
        auto w = Weight::power(k, 0.5);
        for (double r : {1e-9, 1e-3, 0.3}) EXPECT_EQ(kappa(w, r), k);
        Weight numeric;
        numeric.sigma = [k](double r) { return k * std::log(r); };
        for (double r : {1e-9, 1e-3, 0.3}) EXPECT_NEAR(kappa(numeric, r), k, 1e-10);
    }
    EXPECT_NEAR(kappa(Weight::trivial(), 0.1), 0.0, 0.0);
    EXPECT_THROW(kappa(Weight::power(0.1, 0.5), 0.6), Error);
    EXPECT_THROW(kappa(Weight::power(0.1, 0.5), 0.0), Error);
}

TEST(Kappa, SlowlyVaryingMatchesSymbolicDerivative) {
    Weight w;
    w.sigma = [](double r) {
        double L = std::log(r);
        return std::sin(L) / L;
    };
    for (double r : {1e-12, 1e-8, 1e-5, 1e-3, 0.05}) {
        double L = std::log(r);
        double exact = std::cos(L) / L - std::sin(L) / (L * L);  // d sigma / d log r
        EXPECT_NEAR(kappa(w, r), exact, 1e-8) << r;
    }
}

TEST(Kappa, AdditiveUnderSumOfSigmas) {
    auto a = Weight::power(0.2), b = Weight::power(-0.45);
    Weight sum;
    sum.sigma = [&](double r) { return a.sigma(r) + b.sigma(r); };
    sum.kappa_fn = [&](double r) { return a.kappa_fn(r) + b.kappa_fn(r); };
    for (double r : {1e-6, 1e-2, 0.4}) EXPECT_EQ(kappa(sum, r), kappa(a, r) + kappa(b, r));
}

TEST(WeightClass, PowerWeightsInsideInterval) {
    auto grid = geometric_grid(0.25, 1e-10, 60);
    auto I = weight_interval(2.0);
    EXPECT_DOUBLE_EQ(I.lo, -0.5);
    EXPECT_DOUBLE_EQ(I.hi, 0.5);
    for (double k : {-0.45, 0.0, 0.3, 0.45}) EXPECT_TRUE(check_weight_class(Weight::power(k), I, grid).pass) << k;
    EXPECT_FALSE(check_weight_class(Weight::power(0.495), I, grid).pass);
    EXPECT_FALSE(check_weight_class(Weight::power(-0.6), I, grid).pass);
}

TEST(WeightClass, InversePowerIsUnbounded) {
    Weight w;
    w.sigma = [](double r) { return 1.0 / r; };
    auto rep = check_weight_class(w, weight_interval(2.0), geometric_grid(0.25, 1e-10, 60));
    EXPECT_FALSE(rep.pass);
    EXPECT_LT(rep.inf_kappa, -1e8);
}

TEST(WeightClass, DampedOscillationMatchesSymbolicOracle) {
    // sigma = 0.3 log r + sin(log log(1/r)); kappa = 0.3 - cos(log s)/s with s = log(1/r)
    Weight w;
    w.sigma = [](double r) { return 0.3 * std::log(r) + std::sin(std::log(-std::log(r))); };
    w.eps = 0.1;
    auto grid = geometric_grid(0.05, 1e-40, 80);
    auto rep = check_weight_class(w, weight_interval(2.0), grid);
    double lo = 1e9, hi = -1e9, so = 0.0;
    for (double r : grid) {
        double s = -std::log(r);
        double k = 0.3 - std::cos(std::log(s)) / s;
        lo = std::min(lo, k);
        hi = std::max(hi, k);
    }
    std::vector<double> sorted = grid;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t j = 0; j < sorted.size() / 10; ++j) {
        double s = -std::log(sorted[j]);
        // d/dlog r of kappa = (d/ds)(cos(log s)/s) = -(sin(log s) + cos(log s))/s^2
        so = std::max(so, std::abs((std::sin(std::log(s)) + std::cos(std::log(s))) / (s * s)));
    }
    EXPECT_NEAR(rep.inf_kappa, lo, 1e-7);
    EXPECT_NEAR(rep.sup_kappa, hi, 1e-7);
    EXPECT_NEAR(rep.so_defect, so, 1e-6);
    EXPECT_EQ(rep.pass, lo >= -0.49 && hi <= 0.49 && so <= 0.05);
}

TEST(GraphWeightTest, PeriodicAndPositive) {
    auto g = honeycomb();
    GraphWeight w{{Weight::power(0.3), Weight::power(-0.2)}, 0.25};
    for (double t : {1e-6, 0.1, 0.5, 0.9, 1.0 - 1e-6})
        for (int e = 0; e < 3; ++e) {
            GraphPoint p{e, t, GroupElement(0, 0)};
            double v = w.value(*g, p);
            EXPECT_GT(v, 0.0);
            EXPECT_EQ(v, w.value(*g, g->act(p, GroupElement(3, -2))));
        }
    EXPECT_DOUBLE_EQ(w.value(*g, {0, 0.5, GroupElement(0, 0)}), 1.0);
    // near the start vertex (orbit 0) the weight behaves like (r / eps)^0.3
    EXPECT_NEAR(w.value(*g, {0, 1e-4, GroupElement(0, 0)}), std::pow(1e-4 / 0.25, 0.3), 1e-12);
}

TEST(SlowOscillation, PeriodicHasZeroDefect) {
    auto g = honeycomb();
    auto f = expr_fn(g, "2 + sin(t) + edge", true);
    auto rep = check_slowly_oscillating(*g, f, {GroupElement(1, 0), GroupElement(-1, 2)}, {1, 4, 16});
    for (const auto& row : rep.defects)
        for (double d : row) EXPECT_EQ(d, 0.0);
    EXPECT_TRUE(rep.pass);
}

TEST(SlowOscillation, LogSineDecaysAndSineDoesNot) {
    auto g = line();
    std::vector<std::int64_t> radii{1, 10, 100, 1000};
    auto slow = check_slowly_oscillating(*g, expr_fn(g, "sin(log(1+abs(x)))", false), {GroupElement(1), GroupElement(-2)}, radii);
    EXPECT_TRUE(slow.pass);
    for (std::size_t b = 0; b < 2; ++b) {
        // oracle: |sin(log(1+R+beta)) - sin(log(1+R))| <= |beta| / (1 + R) up to one cell
        EXPECT_LE(slow.defects[b].back(), 2.0 * (b + 1) / 1000.0);
        for (std::size_t k = 1; k < radii.size(); ++k) EXPECT_LT(slow.defects[b][k], slow.defects[b][k - 1]);
    }
    auto fast = check_slowly_oscillating(*g, expr_fn(g, "sin(abs(x))", false), {GroupElement(1)}, radii);
    EXPECT_FALSE(fast.pass);
    EXPECT_GT(fast.defects[0].back(), 0.5);
}

TEST(LimitFunctionTest, PeriodicFunctionIsItsOwnLimit) {
    auto g = honeycomb();
    auto f = expr_fn(g, "cos(t) + i*edge", true);
    auto K = cell_samples(*g, 5);
    auto lim = limit_function(*g, f, [](std::int64_t m) { return GroupElement(m, 2 * m); }, K, LimitConfig::ladder(1 << 20));
    for (std::size_t j = 0; j < K.size(); ++j) EXPECT_NEAR(std::abs(lim.values[j] - f(K[j])), 0.0, 1e-15);
    EXPECT_EQ(lim.achieved_tol, 0.0);
}

TEST(LimitFunctionTest, ArctanOfFirstCoordinate) {
    auto g = honeycomb();
    auto f = expr_fn(g, "atan(x)", false);
    auto K = cell_samples(*g, 4);
    auto lim = limit_function(*g, f, [](std::int64_t m) { return GroupElement(m, 0); }, K, LimitConfig::ladder(1000000000));
    for (const auto& v : lim.values) EXPECT_NEAR(v.real(), std::numbers::pi / 2, 1e-6);
    EXPECT_LE(lim.achieved_tol, 1e-6);
    EXPECT_GE(lim.selected.size(), 2u);
    // the limit is periodic, so shifts by small beta agree within the achieved tolerance
    for (const auto& x : K)
        for (const auto& b : group_ball(2, 2)) EXPECT_LE(std::abs(lim.function(x) - lim.function(g->act(x, b))), lim.achieved_tol);
}

TEST(LimitFunctionTest, LogSineAlongExponentialShells) {
    auto g = line();
    auto f = expr_fn(g, "sin(log(1+abs(x)))", false);
    auto K = cell_samples(*g, 6);
    auto h = [](std::int64_t m) { return GroupElement(static_cast<std::int64_t>(std::floor(std::exp(static_cast<double>(m))))); };
    auto lim = limit_function(*g, f, h, K, LimitConfig::dense(1, 30, 0.05));
    double direct = std::sin(std::log(1.0 + std::floor(std::exp(30.0))));
    for (const auto& v : lim.values) {
        EXPECT_NEAR(v.real(), direct, 0.05);
        EXPECT_NEAR(v.imag(), 0.0, 0.0);
    }
    // the selected indices all sit on the same branch of sin(m)
    for (auto m : lim.selected) EXPECT_NEAR(std::sin(static_cast<double>(m)), direct, 0.05);
}

TEST(LimitFunctionTest, NoConvergentSubsequence) {
    auto g = line();
    auto f = expr_fn(g, "sin(x)", false);
    auto K = cell_samples(*g, 3);
    try {
        limit_function(*g, f, [](std::int64_t m) { return GroupElement(m); }, K, LimitConfig::dense(1, 5, 1e-8));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NoConvergentSubsequence);
    }
}
