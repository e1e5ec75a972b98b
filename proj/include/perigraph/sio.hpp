#pragma once

// Explicit symbols of A = aI + b S_{Gamma,phi}: the Fourier symbol of the
// modulated Cauchy operator on the line, the two-valued edge symbol, and the
// Mellin symbol matrices at vertices built from nu and s_jk.

#include "perigraph/functions.hpp"
#include "perigraph/mellin.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <numbers>
#include <vector>

namespace perigraph {

/// Kernel modulation phi(x, z): x a graph point, z = x - y in the plane.
struct KernelModulation {
    std::function<cplx(const GraphPoint&, const Vec2&)> phi;
    bool periodic = true;

    cplx operator()(const GraphPoint& x, const Vec2& z) const { return phi(x, z); }
    cplx at_zero(const GraphPoint& x) const { return phi(x, Vec2::Zero()); }

    static KernelModulation one() {
        return {[](const GraphPoint&, const Vec2&) { return cplx(1.0, 0.0); }, true};
    }
    /// Expression in t, x, y, edge, g1, g2 (for the point x) and z1, z2, zabs.
    static KernelModulation from_expr(std::shared_ptr<const MetricGraph> g, Expr e, bool periodic = true) {
        return {[g, e = std::move(e)](const GraphPoint& x, const Vec2& z) {
                    ExprEnv env = point_env(*g, x);
                    env[static_cast<std::size_t>(Var::z1)] = z.x();
                    env[static_cast<std::size_t>(Var::z2)] = z.y();
                    env[static_cast<std::size_t>(Var::zabs)] = z.norm();
                    return e(env);
                },
                periodic};
    }
};

struct KernelDecayReport {
    double sup_inner = 0.0;  // sup over |z| <= z_split of (1+|z|)^N |d^beta phi|
    double sup_outer = 0.0;  // same over |z| > z_split
    bool pass = false;
};

/// Sampled check of |d_x^alpha d_z^beta phi(x, z)| (1 + |z|)^N bounded for
/// alpha, beta <= 2.  Derivatives are central differences: alpha along the edge
/// coordinate, beta along each axis of z.  Unbounded growth shows up as an
/// outer sup exceeding the inner one.
inline KernelDecayReport check_kernel_decay(const KernelModulation& phi, const std::vector<GraphPoint>& points,
                                            const MetricGraph& g, int N, double z_max = 1e3,
                                            double z_split = 30.0, double h = 1e-3) {
    KernelDecayReport rep;
    const auto radii = geometric_grid(z_max, 1e-2, 41);
    static const double d0[] = {0.0, 1.0, 0.0}, d1[] = {-0.5, 0.0, 0.5}, d2[] = {1.0, -2.0, 1.0};
    const double* stencils[] = {d0, d1, d2};
    for (const auto& x : points) {
        const double len = g.edge(x.edge).length;
        const double hx = std::min(h, 0.25 * std::min(x.coord, len - x.coord));
        for (double rho : radii)
            for (int dir = 0; dir < 8; ++dir) {
                const double th = dir * std::numbers::pi / 4.0;
                const Vec2 z(rho * std::cos(th), rho * std::sin(th));
                double worst = 0.0;
                for (int alpha = 0; alpha <= 2; ++alpha)
                    for (int beta = 0; beta <= 2; ++beta)
                        for (int axis = 0; axis < 2; ++axis) {
                            cplx acc{};
                            for (int i = 0; i < 3; ++i) {
                                if (stencils[alpha][i] == 0.0) continue;
                                GraphPoint xi = x;
                                xi.coord += (i - 1) * hx;
                                for (int k = 0; k < 3; ++k) {
                                    if (stencils[beta][k] == 0.0) continue;
                                    Vec2 zk = z;
                                    zk[axis] += (k - 1) * h;
                                    acc += stencils[alpha][i] * stencils[beta][k] * phi(xi, zk);
                                }
                            }
                            double scale = std::pow(hx, -alpha) * std::pow(h, -beta);
                            worst = std::max(worst, std::abs(acc) * scale);
                        }
                const double v = worst * std::pow(1.0 + rho, N);
                if (rho <= z_split) rep.sup_inner = std::max(rep.sup_inner, v);
                else rep.sup_outer = std::max(rep.sup_outer, v);
            }
    }
    rep.pass = std::isfinite(rep.sup_inner) && rep.sup_outer <= rep.sup_inner + 1e-12;
    return rep;
}

// ---------------------------------------------------------------------------
// Fourier symbol of S_{R,phi}

struct PVQuadConfig {
    double tol = 1e-11;      // tail bound at which the half-line integral stops
    double z_max = 1e5;
    int order = 16;
    double base_width = 0.5;
};

struct FourierSymbolValue {
    cplx value;
    double remainder = 0.0;  // |sigma - phi(0) sgn xi|, sgn 0 = +1
    double z_cut = 0.0;
};

/// sigma(xi) = (1/(pi i)) PV int phi(z) e^{i z xi} / z dz via the odd-part
/// reduction int_0^oo [phi(z) e^{i z xi} - phi(-z) e^{-i z xi}] / z dz.
inline FourierSymbolValue fourier_symbol_phi(const std::function<cplx(double)>& phi, double xi,
                                             const PVQuadConfig& cfg = {}) {
    const auto rule = quad::gauss_legendre(cfg.order);
    const double axi = std::abs(xi);
    cplx acc{};
    double z = 0.0;
    for (;;) {
        double w = std::max(cfg.base_width, 0.25 * z);
        if (axi > 0.0) w = std::min(w, 4.0 * std::numbers::pi / axi);
        for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
            const double s = z + 0.5 * w * (rule.nodes[j] + 1.0);
            const cplx e = std::polar(1.0, s * xi);
            acc += (phi(s) * e - phi(-s) / e) / s * (0.5 * w * rule.weights[j]);
        }
        z += w;
        // integration by parts bounds the oscillatory tail by 2 |phi| / (z |xi|)
        const double m = axi > 0.0 ? std::abs(phi(z)) + std::abs(phi(-z)) : std::abs(phi(z) - phi(-z));
        const double tail = m * std::min(1.0, axi > 0.0 ? 2.0 / (z * axi) : 1.0);
        if (tail < cfg.tol) break;
        if (z > cfg.z_max || !std::isfinite(tail))
            fail(ErrorCode::QuadratureDiverged, "kernel modulation does not decay within z_max");
    }
    FourierSymbolValue out;
    out.value = acc / cplx(0.0, std::numbers::pi);
    out.remainder = std::abs(out.value - phi(0.0) * (xi >= 0.0 ? 1.0 : -1.0));
    out.z_cut = z;
    return out;
}

/// Fourier symbol of the local line model at an interior point x: z runs along
/// the unit tangent of the edge.
inline FourierSymbolValue fourier_symbol_phi(const MetricGraph& g, const KernelModulation& phi, const GraphPoint& x,
                                             double xi, const PVQuadConfig& cfg = {}) {
    const auto& e = g.edge(x.edge);
    const Vec2 d = (e.p1 - e.p0) / e.length;
    return fourier_symbol_phi([&](double s) { return phi(x, Vec2(s * d)); }, xi, cfg);
}

// ---------------------------------------------------------------------------
// Edge symbol

struct EdgeSymbol {
    cplx plus;   // a + b phi(x, 0), xi > 0
    cplx minus;  // a - b phi(x, 0), xi < 0

    cplx operator()(double xi) const { return xi >= 0.0 ? plus : minus; }
    double min_modulus() const { return std::min(std::abs(plus), std::abs(minus)); }
};

inline EdgeSymbol edge_symbol(const MetricGraph& g, const PCFunction& a, const PCFunction& b,
                              const KernelModulation& phi, const GraphPoint& x) {
    if (g.as_vertex(x, 1e-12)) fail(ErrorCode::PointIsVertex, "edge symbol requested at a vertex");
    const cplx bp = b(x) * phi.at_zero(x);
    return {a(x) + bp, a(x) - bp};
}

inline bool elliptic(const EdgeSymbol& s, double ell_tol = 1e-8) { return s.min_modulus() >= ell_tol; }

struct EdgeEllipticityReport {
    double inf_modulus = std::numeric_limits<double>::infinity();
    GraphPoint at;
    bool elliptic = false;
};

/// inf over interior samples of min |a +- b phi(x, 0)| in the given cells.
inline EdgeEllipticityReport scan_edge_ellipticity(const MetricGraph& g, const PCFunction& a, const PCFunction& b,
                                                   const KernelModulation& phi, int per_edge,
                                                   const std::vector<GroupElement>& cells, double ell_tol = 1e-8) {
    EdgeEllipticityReport rep;
    for (const auto& cell : cells)
        for (auto x : cell_samples(g, per_edge)) {
            x.offset = cell;
            double m = edge_symbol(g, a, b, phi, x).min_modulus();
            if (m < rep.inf_modulus) {
                rep.inf_modulus = m;
                rep.at = x;
            }
        }
    rep.elliptic = rep.inf_modulus >= ell_tol;
    return rep;
}

// ---------------------------------------------------------------------------
// Vertex symbols

/// Distance from zeta to the pole set iZ.
inline double pole_distance(cplx zeta) { return std::hypot(zeta.real(), zeta.imag() - std::round(zeta.imag())); }

/// nu(delta, zeta): coth(pi zeta) for delta = 0, e^{(pi - delta) zeta} / sinh(pi zeta)
/// for delta in (0, 2 pi).  Evaluated in forms that do not overflow for large |Re zeta|.
inline cplx nu(double delta, cplx zeta, double pole_tol = 1e-8) {
    if (pole_distance(zeta) < pole_tol) fail(ErrorCode::SymbolPole, "zeta lies on i Z");
    if (!(delta >= 0.0 && delta < 2.0 * std::numbers::pi)) fail(ErrorCode::InvalidArgument, "delta outside [0, 2 pi)");
    const double pi = std::numbers::pi;
    if (zeta.real() >= 0.0) {
        const cplx q = std::exp(-2.0 * pi * zeta);
        if (delta == 0.0) return (1.0 + q) / (1.0 - q);
        return 2.0 * std::exp(-delta * zeta) / (1.0 - q);
    }
    const cplx q = std::exp(2.0 * pi * zeta);
    if (delta == 0.0) return -(1.0 + q) / (1.0 - q);
    return -2.0 * std::exp((2.0 * pi - delta) * zeta) / (1.0 - q);
}

/// Star geometry entering the vertex symbol: sorted angles in [0, 2 pi) and
/// orientation signs (+1 if the vertex starts the edge).
struct StarGeometry {
    std::vector<double> theta;
    std::vector<int> eps;

    static StarGeometry of(const VertexStar& star) { return {star.angles(), star.signs()}; }
    std::size_t valency() const { return theta.size(); }
};

/// (s_jk(zeta)) for the given star.
inline Eigen::MatrixXcd vertex_symbol_S_at(const StarGeometry& star, cplx zeta, double pole_tol = 1e-8) {
    const auto n = static_cast<Eigen::Index>(star.valency());
    Eigen::MatrixXcd m(n, n);
    const double two_pi = 2.0 * std::numbers::pi;
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k) {
            const double tj = star.theta[static_cast<std::size_t>(j)], tk = star.theta[static_cast<std::size_t>(k)];
            double delta = j == k ? 0.0 : (j < k ? two_pi + tj - tk : tj - tk);
            m(j, k) = static_cast<double>(star.eps[static_cast<std::size_t>(k)]) * nu(delta, zeta, pole_tol);
        }
    return m;
}

/// Vertex symbol of S_Gamma at (r, lambda): s_jk(lambda + i (1/p + kappa_w(r))).
inline Eigen::MatrixXcd vertex_symbol_S(const StarGeometry& star, double p, const Weight& w, double r, double lambda,
                                        double pole_tol = 1e-8) {
    return vertex_symbol_S_at(star, cplx(lambda, 1.0 / p + kappa_or_zero(w, r)), pole_tol);
}

/// One-sided data at a vertex: a~, b~ and phi~(omega, 0) in ray order.
struct VertexCoefficients {
    LiftedVertex vertex;
    StarGeometry star;
    Eigen::MatrixXcd a;
    Eigen::MatrixXcd b;
    Eigen::MatrixXcd phi0;
};

inline VertexCoefficients vertex_coefficients(const MetricGraph& g, const PCFunction& a, const PCFunction& b,
                                              const KernelModulation& phi, const LiftedVertex& w, double eps = -1.0) {
    if (eps <= 0.0) eps = 0.25 * g.min_edge_length();
    VertexCoefficients c;
    c.vertex = w;
    c.star = StarGeometry::of(g.vertex_star(w.vertex, eps));
    c.a = vertex_trace(g, a, w, eps);
    c.b = vertex_trace(g, b, w, eps);
    GraphFunction phi_zero{[&phi](const GraphPoint& x) { return phi.at_zero(x); }, phi.periodic, {}};
    c.phi0 = vertex_trace(g, phi_zero, w, eps);
    return c;
}

/// sigma_A(r, lambda) = a~ + phi~(omega, 0) b~ sigma_S(r, lambda).
inline Eigen::MatrixXcd vertex_symbol_A(const VertexCoefficients& c, double p, const Weight& w, double r, double lambda,
                                        double pole_tol = 1e-8) {
    return c.a + c.phi0 * c.b * vertex_symbol_S(c.star, p, w, r, lambda, pole_tol);
}

/// Unweighted vertex symbol lambda -> a~ + phi~ b~ s(lambda + i/p) as a Mellin
/// symbol.  Its analytic strip is the weight interval (-1/p, 1 - 1/p), so weight
/// conjugation and the invertibility test at 0 add i kappa_w(r) on top.
inline MellinSymbol vertex_mellin_symbol(const VertexCoefficients& c, double p, double pole_tol = 1e-8) {
    const int n = static_cast<int>(c.star.valency());
    Eigen::MatrixXcd lead = c.phi0 * c.b;
    return MellinSymbol::of_lambda(
        n,
        [c, lead, p, pole_tol](cplx l) {
            return Eigen::MatrixXcd(c.a + lead * vertex_symbol_S_at(c.star, l + cplx(0.0, 1.0 / p), pole_tol));
        },
        weight_interval(p));
}

}  // namespace perigraph
