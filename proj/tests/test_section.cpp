#include "perigraph/section.hpp"

#include <Eigen/SVD>
#include <gtest/gtest.h>

using namespace perigraph;

namespace {

std::shared_ptr<const Mesh> line_mesh(int ppul, int order) {
    auto g = std::make_shared<const MetricGraph>(build_graph(line_graph_spec()));
    return std::make_shared<const Mesh>(mesh_graph(g, ppul, order));
}

BandOperator sio_operator(std::shared_ptr<const Mesh> m) {
    const auto& g = m->graph;
    KernelModulation phi{[](const GraphPoint&, const Vec2& z) { return cplx(std::exp(-z.squaredNorm())); }, true};
    GraphFunction a{[g](const GraphPoint& p) { return cplx(2.0 + std::sin(2.0 * std::numbers::pi * g->embed(p).x())); },
                    true, {}};
    return combine(a, constant_function(0.5), assemble_sio(phi, m), m);
}

}  // namespace

TEST(SectionCondition, MatchesDenseSvd) {
    auto m = line_mesh(4, 4);
    auto A = sio_operator(m);
    for (int rho : {3, 10}) {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(finite_section(A, rho));
        const auto& s = svd.singularValues();
        auto c = section_condition(A, rho);
        EXPECT_NEAR(c.sigma_max, s(0), 1e-6 * s(0));
        EXPECT_NEAR(c.sigma_min, s(s.size() - 1), 1e-6 * s(0));
        EXPECT_NEAR(c.condition, s(0) / s(s.size() - 1), 1e-5 * s(0) / s(s.size() - 1));
    }
}

TEST(SectionCondition, RankTwoUsesSparseLu) {
    auto g = std::make_shared<const MetricGraph>(build_graph(honeycomb_spec()));
    auto m = std::make_shared<const Mesh>(mesh_graph(g, 1, 4));
    auto A = identity_band(2, m->size());
    A.blocks[GroupElement(1, 0)] = 0.25 * Eigen::MatrixXcd::Identity(A.n0, A.n0);
    A.radius = 1;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(finite_section(A, 2));
    const auto& s = svd.singularValues();
    auto c = section_condition(A, 2);
    EXPECT_NEAR(c.sigma_max, s(0), 1e-6);
    EXPECT_NEAR(c.sigma_min, s(s.size() - 1), 1e-6);
}

TEST(SectionCondition, SingularSectionHasInfiniteCondition) {
    BandOperator Z;
    Z.n0 = 2;
    Z.blocks[GroupElement(0)] = Eigen::MatrixXcd::Zero(2, 2);
    Z.blocks[GroupElement(0)](0, 0) = 1.0;
    auto c = section_condition(Z, 3);
    EXPECT_EQ(c.sigma_min, 0.0);
    EXPECT_TRUE(std::isinf(c.condition));
}

TEST(SectionEigenvalues, BandedAndDenseSolversAgree) {
    auto m = line_mesh(2, 4);
    BandOperator A = identity_band(1, m->size());
    A.blocks[GroupElement(1)] = 0.3 * Eigen::MatrixXcd::Identity(A.n0, A.n0);
    A.blocks[GroupElement(-1)] = 0.3 * Eigen::MatrixXcd::Identity(A.n0, A.n0);
    A.radius = 1;
    auto banded = section_eigenvalues(A, 6);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(finite_section(A, 6));
    ASSERT_EQ(banded.size(), static_cast<std::size_t>(es.eigenvalues().size()));
    std::vector<double> b;
    for (auto z : banded) b.push_back(z.real());
    std::sort(b.begin(), b.end());
    for (std::size_t k = 0; k < b.size(); ++k) EXPECT_NEAR(b[k], es.eigenvalues()(static_cast<Eigen::Index>(k)), 1e-12);
}
