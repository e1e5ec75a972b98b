#pragma once

// Quadrature and finite-difference primitives shared by the operator
// discretizations: Gauss-Legendre rules, Cauchy product-integration weights
// for (nearly) singular 1/(s - tau) kernels, and Fornberg stencils.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

namespace perigraph::quad {

using cplx = std::complex<double>;

struct Rule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

/// Gauss-Legendre rule of order q on [-1, 1] (Newton iteration on P_q).
inline Rule gauss_legendre(int q) {
    Rule rule;
    rule.nodes.resize(static_cast<std::size_t>(q));
    rule.weights.resize(static_cast<std::size_t>(q));
    for (int i = 0; i < (q + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= q; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (q == 1) { p1 = x; p0 = 1.0; }
            dp = q * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= q; ++k) {
            double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        if (q == 1) { p1 = x; p0 = 1.0; }
        dp = q * (x * p1 - p0) / (x * x - 1.0);
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        auto lo = static_cast<std::size_t>(i);
        auto hi = static_cast<std::size_t>(q - 1 - i);
        rule.nodes[lo] = -x;
        rule.nodes[hi] = x;
        rule.weights[lo] = w;
        rule.weights[hi] = w;
    }
    if (q % 2 == 1) rule.nodes[static_cast<std::size_t>(q / 2)] = 0.0;
    return rule;
}

/// Legendre polynomials P_0..P_{q-1} at x.
inline std::vector<double> legendre_values(int q, double x) {
    std::vector<double> p(static_cast<std::size_t>(q));
    if (q > 0) p[0] = 1.0;
    if (q > 1) p[1] = x;
    for (int k = 1; k + 1 < q; ++k)
        p[static_cast<std::size_t>(k + 1)] =
            ((2.0 * k + 1.0) * x * p[static_cast<std::size_t>(k)] - k * p[static_cast<std::size_t>(k - 1)]) / (k + 1.0);
    return p;
}

/// Bernstein-ellipse parameter of tau relative to [-1, 1] (1 on the segment).
inline double bernstein_rho(cplx tau) {
    cplx s = std::sqrt(tau - 1.0) * std::sqrt(tau + 1.0);
    return std::max(std::abs(tau + s), std::abs(tau - s));
}

/// m_k = PV int_{-1}^{1} P_k(s) / (s - tau) ds for k < q.  Forward recurrence,
/// only used for tau inside a modest Bernstein ellipse.
inline std::vector<cplx> legendre_cauchy_moments(int q, cplx tau) {
    std::vector<cplx> m(static_cast<std::size_t>(q));
    cplx m0;
    if (std::abs(tau.imag()) > 1e-15) {
        m0 = std::log(1.0 - tau) - std::log(-1.0 - tau);
        // principal logs are continuous along the real segment when Im tau != 0
    } else {
        double t = tau.real();
        m0 = std::log(std::abs(1.0 - t)) - std::log(std::abs(1.0 + t));
    }
    m[0] = m0;
    if (q > 1) m[1] = 2.0 + tau * m0;
    for (int k = 1; k + 1 < q; ++k) {
        auto ks = static_cast<std::size_t>(k);
        m[ks + 1] = ((2.0 * k + 1.0) * tau * m[ks] - static_cast<double>(k) * m[ks - 1]) / (k + 1.0);
    }
    return m;
}

/// Weights W_j with sum_j W_j f(s_j) = PV int_{-1}^{1} f(s)/(s - tau) ds exactly
/// for polynomials f of degree < q sampled at the Gauss nodes of `rule`.
inline std::vector<cplx> cauchy_product_weights(const Rule& rule, cplx tau) {
    int q = static_cast<int>(rule.nodes.size());
    auto m = legendre_cauchy_moments(q, tau);
    std::vector<cplx> w(static_cast<std::size_t>(q), cplx{});
    for (int j = 0; j < q; ++j) {
        auto js = static_cast<std::size_t>(j);
        auto p = legendre_values(q, rule.nodes[js]);
        cplx acc{};
        for (int k = 0; k < q; ++k) {
            auto ks = static_cast<std::size_t>(k);
            acc += m[ks] * (0.5 * (2.0 * k + 1.0) * p[ks]);
        }
        w[js] = acc * rule.weights[js];
    }
    return w;
}

/// Lagrange basis of the nodes evaluated at x.
inline std::vector<double> lagrange_basis(const std::vector<double>& nodes, double x) {
    std::vector<double> l(nodes.size(), 1.0);
    for (std::size_t j = 0; j < nodes.size(); ++j)
        for (std::size_t m = 0; m < nodes.size(); ++m)
            if (m != j) l[j] *= (x - nodes[m]) / (nodes[j] - nodes[m]);
    return l;
}

/// Fornberg finite-difference weights for the `order`-th derivative at 0 on
/// the given stencil offsets.
inline std::vector<double> fornberg_weights(int order, const std::vector<double>& x) {
    const int n = static_cast<int>(x.size());
    std::vector<std::vector<double>> c(static_cast<std::size_t>(n),
                                       std::vector<double>(static_cast<std::size_t>(order + 1), 0.0));
    double c1 = 1.0, c4 = x[0];
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        auto is = static_cast<std::size_t>(i);
        int mn = std::min(i, order);
        double c2 = 1.0, c5 = c4;
        c4 = x[is];
        for (int j = 0; j < i; ++j) {
            auto js = static_cast<std::size_t>(j);
            double c3 = x[is] - x[js];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) {
                    auto ks = static_cast<std::size_t>(k);
                    c[is][ks] = c1 * (k * c[is - 1][ks - 1] - c5 * c[is - 1][ks]) / c2;
                }
                c[is][0] = -c1 * c5 * c[is - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) {
                auto ks = static_cast<std::size_t>(k);
                c[js][ks] = (c4 * c[js][ks] - k * c[js][ks - 1]) / c3;
            }
            c[js][0] = c4 * c[js][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = c[static_cast<std::size_t>(i)][static_cast<std::size_t>(order)];
    return w;
}

/// Symmetric stencil offsets (in units of h) giving 4th-order accuracy for
/// the `order`-th derivative.
inline std::vector<double> central_stencil(int order) {
    int half = (order + 1) / 2 + 1;
    std::vector<double> s;
    for (int k = -half; k <= half; ++k) s.push_back(static_cast<double>(k));
    return s;
}

/// Composite Gauss-Legendre integral of f over [a, b].
template <class F>
auto integrate(F&& f, double a, double b, int panels, int order = 16) {
    Rule rule = gauss_legendre(order);
    using R = decltype(f(a));
    R acc{};
    double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        double lo = a + p * h;
        for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
            double s = lo + 0.5 * h * (rule.nodes[j] + 1.0);
            acc += f(s) * (0.5 * h * rule.weights[j]);
        }
    }
    return acc;
}

}  // namespace perigraph::quad
