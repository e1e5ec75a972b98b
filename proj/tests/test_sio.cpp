#include "perigraph/sio.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include <numbers>

using namespace perigraph;

namespace {

const double pi = std::numbers::pi;

std::shared_ptr<const MetricGraph> line() { return std::make_shared<const MetricGraph>(build_graph(line_graph_spec())); }
std::shared_ptr<const MetricGraph> honeycomb() {
    return std::make_shared<const MetricGraph>(build_graph(honeycomb_spec()));
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::InvalidArgument;
}

VertexCoefficients single_ray(cplx a, cplx b, cplx phi0) {
    VertexCoefficients c;
    c.star = {{0.0}, {1}};
    c.a = Eigen::MatrixXcd::Constant(1, 1, a);
    c.b = Eigen::MatrixXcd::Constant(1, 1, b);
    c.phi0 = Eigen::MatrixXcd::Constant(1, 1, phi0);
    return c;
}

}  // namespace

TEST(Nu, ClosedValues) {
    EXPECT_NEAR(std::abs(nu(0.0, cplx(0.0, 0.5))), 0.0, 1e-15);
    // coth(pi) = 1 + 2 sum_k exp(-2 pi k)
    double series = 1.0;
    for (int k = 1; k < 20; ++k) series += 2.0 * std::exp(-2.0 * pi * k);
    EXPECT_NEAR(nu(0.0, 1.0).real(), series, 1e-15);
    EXPECT_NEAR(nu(0.0, 1.0).real(), 1.003741873, 1e-9);
    for (cplx z : {cplx(0.3, 0.2), cplx(-1.1, 0.7), cplx(2.0, 0.5)})
        EXPECT_NEAR(std::abs(nu(pi, z) - 1.0 / std::sinh(pi * z)), 0.0, 1e-14);
    EXPECT_EQ(code_of([] { nu(0.0, cplx(0.0, 1.0)); }), ErrorCode::SymbolPole);
    EXPECT_EQ(code_of([] { nu(1.0, cplx(1e-9, -2.0)); }), ErrorCode::SymbolPole);
}

TEST(Nu, AgreesWithDirectFormulaAwayFromOverflow) {
    for (double d : {0.0, 0.4, 2.0, 5.9})
        for (cplx z : {cplx(0.7, 0.3), cplx(-0.4, 0.9), cplx(3.0, 0.25), cplx(-2.5, 0.6)}) {
            cplx direct = d == 0.0 ? std::cosh(pi * z) / std::sinh(pi * z) : std::exp((pi - d) * z) / std::sinh(pi * z);
            EXPECT_NEAR(std::abs(nu(d, z) - direct), 0.0, 1e-13 * (1.0 + std::abs(direct)));
        }
}

TEST(Nu, LimitsAlongRays) {
    // +-1 for delta = 0 and decay otherwise; 2 exp(-20 min(delta, 2 pi - delta)) < 1e-8
    // needs delta at least 0.96 away from 0 and 2 pi
    for (double y : {0.1, 0.5, 0.9}) {
        EXPECT_NEAR(std::abs(nu(0.0, cplx(20.0, y)) - 1.0), 0.0, 1e-8);
        EXPECT_NEAR(std::abs(nu(0.0, cplx(-20.0, y)) + 1.0), 0.0, 1e-8);
        for (double d : {1.0, pi / 2, pi, 4.0, 2.0 * pi - 1.0}) {
            EXPECT_LT(std::abs(nu(d, cplx(20.0, y))), 1e-8);
            EXPECT_LT(std::abs(nu(d, cplx(-20.0, y))), 1e-8);
        }
    }
    // no overflow far out
    EXPECT_TRUE(std::isfinite(std::abs(nu(0.3, cplx(-400.0, 0.5)))));
    EXPECT_EQ(nu(0.0, cplx(400.0, 0.5)), cplx(1.0, 0.0));
}

TEST(VertexSymbolS, SingleRayIsTanh) {
    StarGeometry star{{0.0}, {1}};
    for (double l : {-3.0, -0.4, 0.0, 0.25, 2.0}) {
        auto m = vertex_symbol_S(star, 2.0, Weight::trivial(), 0.1, l);
        // coth(z + i pi/2) = tanh(z)
        EXPECT_NEAR(std::abs(m(0, 0) - std::tanh(pi * l)), 0.0, 1e-14) << l;
    }
    EXPECT_NEAR(std::abs(vertex_symbol_S(star, 2.0, Weight::trivial(), 0.1, 0.0)(0, 0)), 0.0, 1e-15);
}

TEST(VertexSymbolS, LineVertex) {
    auto g = line();
    auto star = StarGeometry::of(g->vertex_star(0, 0.2));
    ASSERT_EQ(star.valency(), 2u);
    EXPECT_EQ(star.theta[0], 0.0);
    EXPECT_NEAR(star.theta[1], pi, 1e-15);
    EXPECT_EQ(star.eps[0], 1);
    EXPECT_EQ(star.eps[1], -1);
    for (double l : {-1.5, 0.0, 0.8}) {
        auto m = vertex_symbol_S(star, 2.0, Weight::trivial(), 0.1, l);
        // sinh(z + i pi/2) = i cosh(z), so nu(pi, lambda + i/2) = -i / cosh(pi lambda)
        const cplx off = cplx(0.0, -1.0) / std::cosh(pi * l);
        EXPECT_NEAR(std::abs(m(0, 0) - std::tanh(pi * l)), 0.0, 1e-14);
        EXPECT_NEAR(std::abs(m(1, 1) + std::tanh(pi * l)), 0.0, 1e-14);
        EXPECT_NEAR(std::abs(m(1, 0) - off), 0.0, 1e-14);
        EXPECT_NEAR(std::abs(m(0, 1) + off), 0.0, 1e-14);
    }
}

TEST(VertexSymbolS, SignFlipNegatesColumn) {
    auto star = StarGeometry::of(honeycomb()->vertex_star(0, 0.1));
    auto flipped = star;
    flipped.eps[1] = -flipped.eps[1];
    cplx z(0.37, 0.6);
    auto m = vertex_symbol_S_at(star, z), f = vertex_symbol_S_at(flipped, z);
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) EXPECT_EQ(f(j, k), k == 1 ? -m(j, k) : m(j, k));
}

TEST(VertexSymbolS, JointRotationIsPermutationConjugation) {
    auto base = StarGeometry::of(honeycomb()->vertex_star(1, 0.1));
    const int n = static_cast<int>(base.valency());
    for (double rot : {0.3, 2.0, 4.5}) {
        // rotate, wrap into [0, 2 pi) and re-sort; perm[new] = old
        std::vector<std::pair<double, int>> rays;
        for (int k = 0; k < n; ++k) rays.push_back({std::fmod(base.theta[k] + rot, 2.0 * pi), k});
        std::sort(rays.begin(), rays.end());
        StarGeometry rotated;
        Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            rotated.theta.push_back(rays[i].first);
            rotated.eps.push_back(base.eps[rays[i].second]);
            P(i, rays[i].second) = 1.0;
        }
        for (cplx z : {cplx(0.0, 0.5), cplx(-1.2, 0.3), cplx(0.8, 0.75)}) {
            auto m = vertex_symbol_S_at(base, z), mr = vertex_symbol_S_at(rotated, z);
            EXPECT_LE((mr - P * m * P.transpose()).cwiseAbs().maxCoeff(), 1e-13);
            // relabeling leaves det sigma_A unchanged
            Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n), b = a;
            for (int k = 0; k < n; ++k) {
                a(k, k) = cplx(2.0 + k, 0.5);
                b(k, k) = cplx(1.0, -0.3 * k);
            }
            Eigen::MatrixXcd A = a + b * m, Ar = P * a * P.transpose() + P * b * P.transpose() * mr;
            EXPECT_NEAR(std::abs(A.determinant() - Ar.determinant()), 0.0, 1e-12 * std::abs(A.determinant()));
        }
    }
}

TEST(VertexSymbolS, WeightShiftsImaginaryPart) {
    StarGeometry star{{0.0, 2.0}, {1, -1}};
    auto w = Weight::power(0.2);
    auto m = vertex_symbol_S(star, 3.0, w, 1e-3, 0.4);
    EXPECT_LE((m - vertex_symbol_S_at(star, cplx(0.4, 1.0 / 3.0 + 0.2))).cwiseAbs().maxCoeff(), 1e-15);
    // 1/p + kappa = 1 hits the pole at lambda = 0
    EXPECT_EQ(code_of([&] { vertex_symbol_S(star, 2.0, Weight::power(0.5), 1e-3, 0.0); }), ErrorCode::SymbolPole);
}

TEST(VertexSymbolA, Examples) {
    // b = 0: constant diagonal a~
    auto c0 = single_ray(cplx(1.5, -0.5), 0.0, 1.0);
    for (double l : {-2.0, 0.0, 3.0}) EXPECT_EQ(vertex_symbol_A(c0, 2.0, Weight::trivial(), 0.1, l)(0, 0), cplx(1.5, -0.5));
    // a = 0, b = phi = 1: tanh
    auto c1 = single_ray(0.0, 1.0, 1.0);
    for (double l : {-0.7, 0.2}) EXPECT_NEAR(std::abs(vertex_symbol_A(c1, 2.0, Weight::trivial(), 0.1, l)(0, 0) - std::tanh(pi * l)), 0.0, 1e-14);
    // linearity in b~
    auto g = honeycomb();
    auto a = constant_function(0.0);
    auto b = expression_function(g, Expr::parse("1 + x + i*y"), false);
    auto b2 = GraphFunction{[&](const GraphPoint& x) { return 2.0 * b(x); }, false, {}};
    auto phi = KernelModulation::from_expr(g, Expr::parse("exp(-zabs^2) * (2 + cos(x))"));
    LiftedVertex w{0, GroupElement(1, 0)};
    auto v1 = vertex_coefficients(*g, a, b, phi, w), v2 = vertex_coefficients(*g, a, b2, phi, w);
    for (double l : {-1.0, 0.5}) {
        auto A1 = vertex_symbol_A(v1, 2.0, Weight::trivial(), 0.1, l), A2 = vertex_symbol_A(v2, 2.0, Weight::trivial(), 0.1, l);
        EXPECT_EQ(A2, (2.0 * A1).eval());
    }
}

TEST(VertexSymbolA, MellinFormMatchesDirectEvaluation) {
    auto g = honeycomb();
    auto a = expression_function(g, Expr::parse("2 + sin(x)"), false);
    auto b = constant_function(cplx(0.5, 0.25));
    auto c = vertex_coefficients(*g, a, b, KernelModulation::one(), {1, GroupElement(0, 0)});
    auto w = Weight::power(-0.1);
    auto sym = vertex_mellin_symbol(c, 2.5);
    for (double l : {-2.0, 0.0, 1.3}) {
        auto direct = vertex_symbol_A(c, 2.5, w, 1e-4, l);
        auto via = sym(1e-4, cplx(l, -0.1));
        EXPECT_LE((direct - via).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(EdgeSymbol, Examples) {
    auto g = line();
    GraphPoint x{0, 0.3, GroupElement(0)};
    auto s = edge_symbol(*g, constant_function(2.0), constant_function(1.0), KernelModulation::one(), x);
    EXPECT_EQ(s.plus, cplx(3.0));
    EXPECT_EQ(s.minus, cplx(1.0));
    EXPECT_TRUE(elliptic(s));
    auto t = edge_symbol(*g, constant_function(1.0), constant_function(1.0), KernelModulation::one(), x);
    EXPECT_EQ(t(-1.0), cplx(0.0));
    EXPECT_EQ(t(0.0), cplx(2.0));
    EXPECT_FALSE(elliptic(t));
    EXPECT_EQ(code_of([&] {
                  edge_symbol(*g, constant_function(1.0), constant_function(1.0), KernelModulation::one(), {0, 0.0, GroupElement(0)});
              }),
              ErrorCode::PointIsVertex);
}

TEST(EdgeSymbol, SineCosineLineIsElliptic) {
    auto g = line();
    auto a = expression_function(g, Expr::parse("2 + sin(x)"), false);
    auto b = expression_function(g, Expr::parse("cos(x)"), false);
    std::vector<GroupElement> cells;
    for (int k = -20; k <= 20; ++k) cells.push_back(GroupElement(k));
    auto rep = scan_edge_ellipticity(*g, a, b, KernelModulation::one(), 64, cells);
    // grid minimization of |a| - |b| = 2 + sin x - |cos x| >= 2 - sqrt(2)
    double oracle = 1e9;
    for (int k = 0; k <= 200000; ++k) {
        double x = 2.0 * pi * k / 200000;
        oracle = std::min(oracle, 2.0 + std::sin(x) - std::abs(std::cos(x)));
    }
    EXPECT_NEAR(oracle, 2.0 - std::sqrt(2.0), 1e-9);
    EXPECT_TRUE(rep.elliptic);
    EXPECT_GE(rep.inf_modulus, oracle - 1e-12);
    EXPECT_LE(rep.inf_modulus, oracle + 1e-2);
}

TEST(FourierSymbol, GaussianIsErf) {
    auto phi = [](double z) { return cplx(std::exp(-z * z)); };
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    for (double xi : {-5.0, -1.0, 0.0, 0.3, 2.0, 8.0}) {
        auto s = fourier_symbol_phi(phi, xi);
        // (2/pi) int_0^oo exp(-z^2) sin(z xi) / z dz
        double q = (2.0 / pi) * GK::integrate([xi](double z) { return z == 0.0 ? xi : std::exp(-z * z) * std::sin(z * xi) / z; },
                                              0.0, 12.0, 15, 1e-15);
        EXPECT_NEAR(std::abs(s.value - std::erf(xi / 2.0)), 0.0, 1e-12) << xi;
        EXPECT_NEAR(std::abs(s.value - q), 0.0, 1e-12) << xi;
    }
    EXPECT_EQ(fourier_symbol_phi(phi, 0.0).value, cplx(0.0));
}

TEST(FourierSymbol, GaussianRemainderDecays) {
    auto phi = [](double z) { return cplx(std::exp(-z * z)); };
    double worst = 0.0;
    for (double xi = 4.0; xi <= 64.0; xi *= 1.25) {
        for (double sgn : {-1.0, 1.0}) {
            auto s = fourier_symbol_phi(phi, sgn * xi);
            worst = std::max(worst, s.remainder * xi * xi);
        }
    }
    // 1 - erf(2) = 4.7e-3 at xi = 4
    EXPECT_LT(worst, 0.1);
}

TEST(FourierSymbol, LorentzianClosedForm) {
    // (1/(pi i)) PV int e^{i z xi} / (z (1 + z^2)) dz = sgn(xi) (1 - e^{-|xi|})
    auto phi = [](double z) { return cplx(1.0 / (1.0 + z * z)); };
    for (double xi : {-3.0, -0.5, 0.5, 1.0, 6.0}) {
        double exact = (xi > 0 ? 1.0 : -1.0) * (1.0 - std::exp(-std::abs(xi)));
        EXPECT_NEAR(std::abs(fourier_symbol_phi(phi, xi).value - exact), 0.0, 1e-9) << xi;
    }
}

TEST(FourierSymbol, CutoffTendsToSign) {
    // smooth cutoff, 1 on [-1, 1] and 0 beyond |z| = 4
    auto bump = [](double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; };
    auto phi = [&](double z) {
        double t = (4.0 - std::abs(z)) / 3.0;
        return cplx(bump(t) / (bump(t) + bump(1.0 - t)));
    };
    double prev = 1.0;
    for (double xi : {8.0, 12.0, 20.0, 40.0}) {
        double rem = fourier_symbol_phi(phi, xi).remainder;
        EXPECT_LE(rem, 1e-3) << xi;
        EXPECT_LT(rem, prev);
        EXPECT_NEAR(fourier_symbol_phi(phi, -xi).remainder, rem, 1e-14);
        prev = rem;
    }
}

TEST(FourierSymbol, OddModulationVanishesAtInfinity) {
    // (1/(pi i)) int exp(-z^2) e^{i z xi} dz = sqrt(pi) exp(-xi^2/4) / (pi i)
    auto phi = [](double z) { return cplx(z * std::exp(-z * z)); };
    for (double xi : {0.0, 1.0, 4.0, 10.0}) {
        cplx exact = std::sqrt(pi) * std::exp(-xi * xi / 4.0) / cplx(0.0, pi);
        EXPECT_NEAR(std::abs(fourier_symbol_phi(phi, xi).value - exact), 0.0, 1e-12);
    }
    EXPECT_LT(std::abs(fourier_symbol_phi(phi, 16.0).value), 1e-12);
}

TEST(FourierSymbol, NonDecayingModulationDiverges) {
    EXPECT_EQ(code_of([] { fourier_symbol_phi([](double) { return cplx(1.0); }, 2.0); }), ErrorCode::QuadratureDiverged);
}

TEST(FourierSymbol, GraphOverloadUsesEdgeTangent) {
    auto g = honeycomb();
    auto phi = KernelModulation::from_expr(g, Expr::parse("exp(-(z1^2 + z2^2))"));
    GraphPoint x{1, 0.2, GroupElement(0, 0)};
    EXPECT_NEAR(std::abs(fourier_symbol_phi(*g, phi, x, 1.7).value - std::erf(0.85)), 0.0, 1e-12);
}

TEST(KernelModulation, DecayCheck) {
    auto g = honeycomb();
    auto pts = cell_samples(*g, 2);
    auto gauss = KernelModulation::from_expr(g, Expr::parse("exp(-zabs^2) * (1 + 0.5*sin(x))"));
    EXPECT_TRUE(check_kernel_decay(gauss, pts, *g, 4).pass);
    auto slow = KernelModulation::from_expr(g, Expr::parse("1 / (1 + zabs^2)"));
    EXPECT_TRUE(check_kernel_decay(slow, pts, *g, 2).pass);
    EXPECT_FALSE(check_kernel_decay(slow, pts, *g, 4).pass);
}
