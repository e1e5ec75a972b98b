#include "perigraph/expr.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace perigraph;

namespace {
ExprEnv env_with(double t, double x, double z1 = 0.0, double z2 = 0.0) {
    ExprEnv env{};
    env[static_cast<std::size_t>(Var::t)] = t;
    env[static_cast<std::size_t>(Var::x)] = x;
    env[static_cast<std::size_t>(Var::z1)] = z1;
    env[static_cast<std::size_t>(Var::z2)] = z2;
    env[static_cast<std::size_t>(Var::zabs)] = std::hypot(z1, z2);
    return env;
}
}  // namespace

TEST(Expr, ArithmeticAndPrecedence) {
    EXPECT_DOUBLE_EQ(Expr::parse("1 + 2*3 - 4/2")(ExprEnv{}).real(), 5.0);
    EXPECT_DOUBLE_EQ(Expr::parse("-2^2")(ExprEnv{}).real(), -4.0);
    EXPECT_DOUBLE_EQ(Expr::parse("2^-1")(ExprEnv{}).real(), 0.5);
    EXPECT_DOUBLE_EQ(Expr::parse("(1+2)*(3+4)")(ExprEnv{}).real(), 21.0);
    EXPECT_DOUBLE_EQ(Expr::parse("1e-3*2")(ExprEnv{}).real(), 2e-3);
}

TEST(Expr, VariablesFunctionsAndConstants) {
    auto env = env_with(0.25, 2.0, 1.0, -1.0);
    EXPECT_NEAR(Expr::parse("2 + sin(2*pi*x)")(env).real(), 2.0, 1e-14);
    EXPECT_NEAR(Expr::parse("exp(-(z1^2 + z2^2))")(env).real(), std::exp(-2.0), 1e-15);
    EXPECT_NEAR(Expr::parse("atan(x) + abs(z2)")(env).real(), std::atan(2.0) + 1.0, 1e-15);
    EXPECT_NEAR(Expr::parse("x_coord")(env).real(), 0.25, 0.0);
    auto c = Expr::parse("exp(i*pi)")(env);
    EXPECT_NEAR(c.real(), -1.0, 1e-15);
    EXPECT_NEAR(c.imag(), 0.0, 1e-15);
    EXPECT_NEAR(Expr::parse("1/(1+zabs)^2")(env).real(), 1.0 / std::pow(1.0 + std::sqrt(2.0), 2), 1e-15);
}

TEST(Expr, Dependencies) {
    EXPECT_TRUE(Expr::parse("2 + sin(t)").independent_of(Var::x));
    EXPECT_FALSE(Expr::parse("2 + sin(x)").independent_of(Var::x));
}

TEST(Expr, ErrorsAreParseErrors) {
    for (const char* bad : {"1 +", "sin(1", "foo(2)", "unknown", "2 $ 3", "pow(1)"}) {
        try {
            Expr::parse(bad);
            ADD_FAILURE() << bad;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::ParseError) << bad;
        }
    }
}
