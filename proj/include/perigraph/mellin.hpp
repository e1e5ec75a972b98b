#pragma once

// Matrix Mellin pseudodifferential calculus on R_+ with the invariant measure
// dr/r.  Everything is computed in the logarithmic variable x = -log r, where
//
//   op(a)u(x) = (1/2pi) int a(r, lambda) u^(lambda) exp(-i lambda x) dlambda,
//   u^(lambda) = int exp(i lambda y) u(y) dy.

#include "perigraph/errors.hpp"
#include "perigraph/functions.hpp"
#include "perigraph/quadrature.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <vector>

namespace perigraph {

using SymbolFn = std::function<Eigen::MatrixXcd(double r, cplx lambda)>;
/// Closed-form (r d/dr)^beta (d/dlambda)^alpha a at real lambda.
using SymbolDerivativeFn = std::function<Eigen::MatrixXcd(int beta, int alpha, double r, double lambda)>;

/// Symbol sampled on a (log r, lambda) grid with local bicubic interpolation.
/// Outside the grid the nearest boundary value is used in each direction.
struct SymbolTable {
    int n = 1;
    std::vector<double> log_r;   // uniform, increasing
    std::vector<double> lambda;  // uniform, increasing
    std::vector<Eigen::MatrixXcd> values;  // index i * lambda.size() + j

    const Eigen::MatrixXcd& at(std::size_t i, std::size_t j) const { return values[i * lambda.size() + j]; }

    Eigen::MatrixXcd operator()(double r, double lam) const {
        auto s = stencil(log_r, std::log(r));
        auto l = stencil(lambda, lam);
        Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
        for (std::size_t a = 0; a < s.index.size(); ++a)
            for (std::size_t b = 0; b < l.index.size(); ++b)
                out += (s.weight[a] * l.weight[b]) * at(s.index[a], l.index[b]);
        return out;
    }

private:
    struct Stencil {
        std::vector<std::size_t> index;
        std::vector<double> weight;
    };
    static Stencil stencil(const std::vector<double>& grid, double x) {
        Stencil st;
        const std::size_t m = grid.size();
        if (m == 1) return {{0}, {1.0}};
        x = std::clamp(x, grid.front(), grid.back());
        const double h = (grid.back() - grid.front()) / static_cast<double>(m - 1);
        auto i = static_cast<std::ptrdiff_t>(std::floor((x - grid.front()) / h));
        const auto width = static_cast<std::ptrdiff_t>(std::min<std::size_t>(4, m));
        std::ptrdiff_t lo = std::clamp<std::ptrdiff_t>(i - 1, 0, static_cast<std::ptrdiff_t>(m) - width);
        std::vector<double> nodes;
        for (std::ptrdiff_t k = 0; k < width; ++k) {
            st.index.push_back(static_cast<std::size_t>(lo + k));
            nodes.push_back(grid[static_cast<std::size_t>(lo + k)]);
        }
        st.weight = quad::lagrange_basis(nodes, x);
        return st;
    }
};

/// Matrix symbol a(r, lambda) of size n.  Evaluation at non-real lambda is only
/// allowed inside the declared analytic strip {Im lambda in strip}.
struct MellinSymbol {
    int n = 1;
    SymbolFn fn;
    bool r_independent = false;
    bool lambda_independent = false;
    std::optional<Interval> strip;  // closed strip; nullopt = real lambda only
    SymbolDerivativeFn derivative;  // optional closed form
    std::shared_ptr<const SymbolTable> table;  // set for tabulated symbols

    Eigen::MatrixXcd operator()(double r, cplx lambda) const {
        if (lambda.imag() != 0.0) {
            const double y = lambda.imag();
            if (!strip || y < strip->lo - 1e-14 || y > strip->hi + 1e-14)
                fail(ErrorCode::StripViolation, "Im lambda = " + std::to_string(y) + " outside the analytic strip");
        }
        return fn(r, lambda);
    }
    Eigen::MatrixXcd operator()(double r, double lambda) const { return fn(r, cplx(lambda, 0.0)); }

    static MellinSymbol constant(const Eigen::MatrixXcd& m) {
        MellinSymbol s;
        s.n = static_cast<int>(m.rows());
        s.fn = [m](double, cplx) { return m; };
        s.r_independent = s.lambda_independent = true;
        s.strip = Interval{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
        return s;
    }
    static MellinSymbol identity(int n) { return constant(Eigen::MatrixXcd::Identity(n, n)); }

    /// r-independent symbol lambda -> a(lambda).
    static MellinSymbol of_lambda(int n, std::function<Eigen::MatrixXcd(cplx)> f,
                                  std::optional<Interval> strip = std::nullopt) {
        MellinSymbol s;
        s.n = n;
        s.fn = [f = std::move(f)](double, cplx l) { return f(l); };
        s.r_independent = true;
        s.strip = strip;
        return s;
    }
    /// lambda-independent symbol r -> a(r) (a multiplication operator).
    static MellinSymbol of_r(int n, std::function<Eigen::MatrixXcd(double)> f) {
        MellinSymbol s;
        s.n = n;
        s.fn = [f = std::move(f)](double r, cplx) { return f(r); };
        s.lambda_independent = true;
        s.strip = Interval{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
        return s;
    }
    static MellinSymbol general(int n, SymbolFn f, std::optional<Interval> strip = std::nullopt) {
        MellinSymbol s;
        s.n = n;
        s.fn = std::move(f);
        s.strip = strip;
        return s;
    }
    static MellinSymbol tabulated(std::shared_ptr<const SymbolTable> t) {
        MellinSymbol s;
        s.n = t->n;
        s.table = t;
        s.fn = [t](double r, cplx l) { return (*t)(r, l.real()); };
        return s;
    }
    /// Scalar convenience constructors.
    static MellinSymbol scalar_of_lambda(std::function<cplx(cplx)> f, std::optional<Interval> strip = std::nullopt) {
        return of_lambda(1, [f = std::move(f)](cplx l) { return Eigen::MatrixXcd::Constant(1, 1, f(l)); }, strip);
    }
    static MellinSymbol scalar(std::function<cplx(double, cplx)> f, std::optional<Interval> strip = std::nullopt) {
        return general(1, [f = std::move(f)](double r, cplx l) { return Eigen::MatrixXcd::Constant(1, 1, f(r, l)); },
                       strip);
    }
};

// ---------------------------------------------------------------------------
// Derivatives and seminorms

/// (r d/dr)^beta (d/dlambda)^alpha a at real lambda; closed form when supplied,
/// otherwise tensor central differences (step h in log r and in lambda).
inline Eigen::MatrixXcd symbol_derivative(const MellinSymbol& a, int beta, int alpha, double r, double lambda,
                                          double h = 1e-2) {
    if (beta < 0 || alpha < 0 || beta > 4 || alpha > 4)
        fail(ErrorCode::DerivativeUnavailable, "derivative orders are limited to 4");
    if ((beta > 0 && a.r_independent) || (alpha > 0 && a.lambda_independent))
        return Eigen::MatrixXcd::Zero(a.n, a.n);
    if (a.derivative) return a.derivative(beta, alpha, r, lambda);
    if (beta == 0 && alpha == 0) return a(r, lambda);
    const std::vector<double> sb = beta ? quad::central_stencil(beta) : std::vector<double>{0.0};
    const std::vector<double> sa = alpha ? quad::central_stencil(alpha) : std::vector<double>{0.0};
    const auto wb = beta ? quad::fornberg_weights(beta, sb) : std::vector<double>{1.0};
    const auto wa = alpha ? quad::fornberg_weights(alpha, sa) : std::vector<double>{1.0};
    const double scale = std::pow(h, -(beta + alpha));
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(a.n, a.n);
    for (std::size_t i = 0; i < sb.size(); ++i) {
        if (wb[i] == 0.0) continue;
        double rr = r * std::exp(sb[i] * h);
        for (std::size_t j = 0; j < sa.size(); ++j) {
            if (wa[j] == 0.0) continue;
            out += (wb[i] * wa[j] * scale) * a(rr, lambda + sa[j] * h);
        }
    }
    if (!out.allFinite()) fail(ErrorCode::DerivativeUnavailable, "non-finite finite-difference derivative");
    return out;
}

inline double japanese(double lambda) { return std::sqrt(1.0 + lambda * lambda); }

struct SeminormConfig {
    std::vector<double> r_grid = geometric_grid(1e3, 1e-3, 61);
    std::vector<double> lambda_grid = [] {
        std::vector<double> g;
        for (int k = -100; k <= 100; ++k) g.push_back(0.1 * k);
        return g;
    }();
    double fd_step = 1e-2;
    /// Which derivative order carries the <lambda> weight: true = beta (as
    /// printed for the seminorm), false = alpha.
    bool weight_on_beta = true;
};

struct SeminormReport {
    double value = 0.0;
    double r_at = 0.0;
    double lambda_at = 0.0;
    /// The sup over the outermost r decades dominates the interior: growth at
    /// the r-boundary of the grid suggests an unbounded seminorm.
    bool unbounded_in_r = false;
};

inline SeminormReport seminorm(const MellinSymbol& a, int l1, int l2, const SeminormConfig& cfg = {}) {
    if (l1 > 4 || l2 > 4) fail(ErrorCode::DerivativeUnavailable, "seminorm orders are limited to 4");
    SeminormReport rep;
    std::vector<double> rs = cfg.r_grid;
    std::sort(rs.begin(), rs.end());
    const double lo_edge = rs.front() * 10.0, hi_edge = rs.back() / 10.0;
    double sup_edge = 0.0, sup_inner = 0.0;
    for (double r : rs) {
        for (double lam : cfg.lambda_grid) {
            Eigen::ArrayXXd acc = Eigen::ArrayXXd::Zero(a.n, a.n);
            for (int al = 0; al <= l1; ++al)
                for (int be = 0; be <= l2; ++be) {
                    const int power = cfg.weight_on_beta ? be : al;
                    acc += symbol_derivative(a, be, al, r, lam, cfg.fd_step).array().abs() *
                           std::pow(japanese(lam), power);
                }
            double v = acc.maxCoeff();
            if (v > rep.value) {
                rep.value = v;
                rep.r_at = r;
                rep.lambda_at = lam;
            }
            if (r < lo_edge || r > hi_edge) sup_edge = std::max(sup_edge, v);
            else sup_inner = std::max(sup_inner, v);
        }
    }
    rep.unbounded_in_r = sup_edge > 2.0 * sup_inner + 1e-12;
    return rep;
}

/// Slow-oscillation defect at 0: for each r in the grid, sup over lambda of
/// |(r d/dr)^beta (d/dlambda)^alpha a| <lambda>^alpha (weight on alpha, as printed).
inline std::vector<double> slow_oscillation_defect(const MellinSymbol& a, int beta, int alpha,
                                                   const std::vector<double>& r_grid,
                                                   const std::vector<double>& lambda_grid, double fd_step = 1e-2,
                                                   bool weight_on_alpha = true) {
    std::vector<double> out;
    for (double r : r_grid) {
        double sup = 0.0;
        for (double lam : lambda_grid) {
            double v = symbol_derivative(a, beta, alpha, r, lam, fd_step).cwiseAbs().maxCoeff();
            sup = std::max(sup, v * std::pow(japanese(lam), weight_on_alpha ? alpha : beta));
        }
        out.push_back(sup);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Discretized action

/// Uniform grid in x = -log r: x_j = x0 + j dx, j < size.
struct LogGrid {
    double x0 = -10.0;
    double dx = 0.05;
    int size = 400;

    double x(int j) const { return x0 + j * dx; }
    double r(int j) const { return std::exp(-x(j)); }
    static LogGrid covering(double r_min, double r_max, int size) {
        double xa = -std::log(r_max), xb = -std::log(r_min);
        return {xa, (xb - xa) / (size - 1), size};
    }
};

struct ApplyConfig {
    int pad_factor = 4;            // zero padding against circular wrap-around
    bool check_aliasing = true;
    double alias_fraction = 0.01;  // max energy share in the top 10% of frequencies
    double skip_relative = 1e-17;  // r-dependent synthesis skips negligible modes
};

namespace detail {

inline int next_fft_size(int n) {
    int p = 1;
    while (p < n) p *= 2;
    return p;
}

inline double signed_frequency(int k, int P, double dx) {
    int ks = k <= P / 2 ? k : k - P;
    return 2.0 * std::numbers::pi * ks / (P * dx);
}

}  // namespace detail

/// op(a)u on a uniform log grid; u has one row per grid point and n columns.
inline Eigen::MatrixXcd apply_mellin(const MellinSymbol& a, const LogGrid& grid, const Eigen::MatrixXcd& u,
                                     const ApplyConfig& cfg = {}) {
    const int N = grid.size;
    if (u.rows() != N || u.cols() != a.n) fail(ErrorCode::InvalidArgument, "apply_mellin: sample shape");
    const int P = detail::next_fft_size(N * std::max(1, cfg.pad_factor));
    Eigen::FFT<double> fft;

    // U_k = (1/P) sum_j u_j exp(+2 pi i jk/P); then u^(lambda_k) = dx P exp(i lambda_k x0) U_k
    std::vector<std::vector<cplx>> U(static_cast<std::size_t>(a.n));
    for (int c = 0; c < a.n; ++c) {
        std::vector<cplx> buf(static_cast<std::size_t>(P), cplx{});
        for (int j = 0; j < N; ++j) buf[static_cast<std::size_t>(j)] = u(j, c);
        fft.inv(U[static_cast<std::size_t>(c)], buf);
    }
    if (cfg.check_aliasing) {
        double total = 0.0, top = 0.0;
        for (const auto& col : U)
            for (int k = 0; k < P; ++k) {
                int ks = k <= P / 2 ? k : P - k;
                double e = std::norm(col[static_cast<std::size_t>(k)]);
                total += e;
                if (ks > 0.9 * (P / 2)) top += e;
            }
        if (total > 0.0 && top > cfg.alias_fraction * total)
            fail(ErrorCode::GridTooCoarse, "input spectrum is not resolved by the log grid");
    }

    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(N, a.n);
    if (a.lambda_independent) {
        // lambda-independent symbols act by multiplication
        for (int j = 0; j < N; ++j) out.row(j) = (a(grid.r(j), 0.0) * u.row(j).transpose()).transpose();
        return out;
    }
    if (a.r_independent) {
        std::vector<std::vector<cplx>> V(static_cast<std::size_t>(a.n), std::vector<cplx>(static_cast<std::size_t>(P)));
        for (int k = 0; k < P; ++k) {
            Eigen::MatrixXcd ak = a(1.0, detail::signed_frequency(k, P, grid.dx));
            for (int i = 0; i < a.n; ++i) {
                cplx acc{};
                for (int c = 0; c < a.n; ++c) acc += ak(i, c) * U[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)];
                V[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = acc;
            }
        }
        for (int i = 0; i < a.n; ++i) {
            std::vector<cplx> res;
            fft.fwd(res, V[static_cast<std::size_t>(i)]);
            for (int j = 0; j < N; ++j) out(j, i) = res[static_cast<std::size_t>(j)];
        }
        return out;
    }

    // r-dependent: direct synthesis at every output point
    double umax = 0.0;
    for (const auto& col : U)
        for (const auto& v : col) umax = std::max(umax, std::abs(v));
    std::vector<int> modes;
    for (int k = 0; k < P; ++k) {
        double m = 0.0;
        for (const auto& col : U) m = std::max(m, std::abs(col[static_cast<std::size_t>(k)]));
        if (m > cfg.skip_relative * umax) modes.push_back(k);
    }
    for (int j = 0; j < N; ++j) {
        const double r = grid.r(j);
        Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(a.n);
        for (int k : modes) {
            Eigen::VectorXcd uk(a.n);
            for (int c = 0; c < a.n; ++c) uk(c) = U[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)];
            const double phase = -2.0 * std::numbers::pi * static_cast<double>((static_cast<long long>(j) * k) % P) / P;
            acc += a(r, detail::signed_frequency(k, P, grid.dx)) * uk * std::polar(1.0, phase);
        }
        out.row(j) = acc.transpose();
    }
    return out;
}

/// Direct O(N^2) quadrature of the defining double integral for r-independent
/// scalar-type symbols; slow reference used to validate the FFT path.
inline Eigen::MatrixXcd apply_mellin_direct(const MellinSymbol& a, const LogGrid& grid, const Eigen::MatrixXcd& u,
                                            double lambda_max, int lambda_points) {
    const int N = grid.size;
    const double dl = 2.0 * lambda_max / (lambda_points - 1);
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(N, a.n);
    for (int k = 0; k < lambda_points; ++k) {
        double lam = -lambda_max + k * dl;
        double wk = (k == 0 || k == lambda_points - 1) ? 0.5 * dl : dl;
        Eigen::VectorXcd uh = Eigen::VectorXcd::Zero(a.n);
        for (int j = 0; j < N; ++j) uh += grid.dx * std::polar(1.0, lam * grid.x(j)) * u.row(j).transpose();
        for (int j = 0; j < N; ++j) {
            Eigen::VectorXcd v = a(grid.r(j), lam) * uh;
            out.row(j) += (wk / (2.0 * std::numbers::pi)) * std::polar(1.0, -lam * grid.x(j)) * v.transpose();
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Composition and adjoint

/// Truncation and resolution of the oscillatory double integrals.  The rho
/// integral runs over t = log rho in [-t_max, t_max] with step dt; zero padding
/// to fft_size fixes the eta step h = 2 pi / (fft_size dt), which is also the
/// lambda step of the returned table.
struct OscillatoryConfig {
    double s_min = -8.0;   // log r range of the output table
    double s_max = 8.0;
    double ds = 0.1;
    double lambda_max = 10.0;
    double t_max = 16.0;
    double dt = 0.05;
    int fft_size = 2560;
    double eta_max = 15.0;
    double tol = 1e-6;           // allowed tail of the regular remainder at |t| = t_max
    double limit_offset = 40.0;  // r e^{+-offset} stands in for the limits r -> oo, 0

    double eta_step() const { return 2.0 * std::numbers::pi / (fft_size * dt); }
};

namespace detail {

inline double logistic(double t) { return t >= 0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t)); }

/// Offset grids shared by compose and adjoint.
struct OscGrid {
    double h = 0.0;
    int lam_k = 0;  // lambda_j = j h, |j| <= lam_k
    int eta_k = 0;  // eta_k = k h, |k| <= eta_k
    int logi_k = 0; // eta range for the 1/sinh kernel
    int pad = 4;    // finite-difference margin on the mu grid
    int mu_lo = 0, mu_hi = 0;
    std::vector<double> t;
    std::vector<double> s;

    explicit OscGrid(const OscillatoryConfig& c) {
        h = c.eta_step();
        lam_k = static_cast<int>(std::floor(c.lambda_max / h));
        eta_k = static_cast<int>(std::floor(c.eta_max / h));
        logi_k = static_cast<int>(std::ceil(15.0 / h));
        int span = std::max(eta_k, logi_k) + pad;
        mu_lo = -lam_k - span;
        mu_hi = lam_k + span;
        int M = static_cast<int>(std::round(2.0 * c.t_max / c.dt)) + 1;
        if (M > c.fft_size) fail(ErrorCode::InvalidArgument, "fft_size smaller than the t grid");
        for (int m = 0; m < M; ++m) t.push_back(-c.t_max + m * c.dt);
        int S = static_cast<int>(std::round((c.s_max - c.s_min) / c.ds)) + 1;
        for (int i = 0; i < S; ++i) s.push_back(c.s_min + i * c.ds);
    }
    double mu(int m) const { return m * h; }
    std::size_t mu_index(int m) const { return static_cast<std::size_t>(m - mu_lo); }
    std::vector<double> lambdas() const {
        std::vector<double> l;
        for (int j = -lam_k; j <= lam_k; ++j) l.push_back(j * h);
        return l;
    }
};

/// e^(eta_k) = int e(t) exp(-i eta_k t) dt for every entry, k in [-K, K].
inline std::vector<Eigen::MatrixXcd> regular_transform(const std::vector<Eigen::MatrixXcd>& e, const OscGrid& g,
                                                       const OscillatoryConfig& c, int K, Eigen::FFT<double>& fft) {
    const int n = static_cast<int>(e.front().rows());
    const int P = c.fft_size;
    std::vector<Eigen::MatrixXcd> out(static_cast<std::size_t>(2 * K + 1), Eigen::MatrixXcd::Zero(n, n));
    std::vector<cplx> buf(static_cast<std::size_t>(P)), res;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            std::fill(buf.begin(), buf.end(), cplx{});
            for (std::size_t m = 0; m < e.size(); ++m) buf[m] = e[m](i, j);
            fft.fwd(res, buf);
            for (int k = -K; k <= K; ++k) {
                int idx = ((k % P) + P) % P;
                double eta = k * g.h;
                // t_m = -t_max + m dt, so exp(-i eta t_m) = exp(i eta t_max) exp(-2 pi i m k / P)
                out[static_cast<std::size_t>(k + K)](i, j) = c.dt * std::polar(1.0, eta * c.t_max) * res[static_cast<std::size_t>(idx)];
            }
        }
    return out;
}

/// (1/2i) int [f(lambda + eta) - f(lambda)] / sinh(pi eta) deta on the aligned
/// eta grid; the eta = 0 term uses an 8th-order derivative stencil.
inline Eigen::MatrixXcd sinh_kernel_term(const std::vector<Eigen::MatrixXcd>& f, int j, const OscGrid& g) {
    const auto& f0 = f[g.mu_index(j)];
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(f0.rows(), f0.cols());
    static const double d1[] = {1.0 / 280, -4.0 / 105, 1.0 / 5, -4.0 / 5, 0.0, 4.0 / 5, -1.0 / 5, 4.0 / 105, -1.0 / 280};
    Eigen::MatrixXcd deriv = Eigen::MatrixXcd::Zero(f0.rows(), f0.cols());
    for (int q = -4; q <= 4; ++q) deriv += d1[q + 4] * f[g.mu_index(j + q)];
    acc += (deriv / g.h) / std::numbers::pi;
    for (int k = 1; k <= g.logi_k; ++k) {
        double sh = std::sinh(std::numbers::pi * k * g.h);
        acc += (f[g.mu_index(j + k)] - f[g.mu_index(j - k)]) / sh;
    }
    return acc * (g.h / cplx(0.0, 2.0));
}

inline std::shared_ptr<SymbolTable> make_table(int n, const OscGrid& g) {
    auto t = std::make_shared<SymbolTable>();
    t->n = n;
    t->log_r = g.s;
    t->lambda = g.lambdas();
    t->values.assign(t->log_r.size() * t->lambda.size(), Eigen::MatrixXcd::Zero(n, n));
    return t;
}

inline std::optional<Interval> strip_intersection(const std::optional<Interval>& a, const std::optional<Interval>& b) {
    if (!a || !b) return std::nullopt;
    return Interval{std::max(a->lo, b->lo), std::min(a->hi, b->hi)};
}

}  // namespace detail

/// Symbol of op(a) op(b).  Exact pointwise product when b is r-independent;
/// otherwise a table from the regularized oscillatory integral.
inline MellinSymbol compose(const MellinSymbol& a, const MellinSymbol& b, const OscillatoryConfig& cfg = {}) {
    if (a.n != b.n) fail(ErrorCode::InvalidArgument, "compose: symbol sizes differ");
    if (b.r_independent) {
        MellinSymbol c = MellinSymbol::general(a.n, [a, b](double r, cplx l) { return Eigen::MatrixXcd(a(r, l) * b(r, l)); },
                                               detail::strip_intersection(a.strip, b.strip));
        c.r_independent = a.r_independent;
        c.lambda_independent = a.lambda_independent && b.lambda_independent;
        return c;
    }
    detail::OscGrid g(cfg);
    auto table = detail::make_table(a.n, g);
    Eigen::FFT<double> fft;
    const int n = a.n;
    std::vector<Eigen::MatrixXcd> A(static_cast<std::size_t>(g.mu_hi - g.mu_lo + 1));
    auto fill_a = [&](double r) {
        for (int m = g.mu_lo; m <= g.mu_hi; ++m) A[g.mu_index(m)] = a(r, g.mu(m));
    };
    if (a.r_independent) fill_a(1.0);
    const double L = cfg.limit_offset;

    for (std::size_t i = 0; i < g.s.size(); ++i) {
        const double r = std::exp(g.s[i]);
        if (!a.r_independent) fill_a(r);
        std::vector<Eigen::MatrixXcd> ehat;
        Eigen::MatrixXcd b0, jump, esum;
        Eigen::MatrixXcd reg(n, n);
        auto prepare = [&](double lam) {
            b0 = b(r, lam);
            Eigen::MatrixXcd dinf = b(r * std::exp(L), lam) - b0;
            Eigen::MatrixXcd dzero = b(r * std::exp(-L), lam) - b0;
            jump = dinf - dzero;
            std::vector<Eigen::MatrixXcd> e;
            e.reserve(g.t.size());
            for (double t : g.t) {
                double sg = detail::logistic(t);
                e.push_back(b(r * std::exp(t), lam) - b0 - sg * dinf - (1.0 - sg) * dzero);
            }
            double tail = std::max(e.front().cwiseAbs().maxCoeff(), e.back().cwiseAbs().maxCoeff());
            if (!(tail <= cfg.tol))
                fail(ErrorCode::QuadratureDiverged,
                     "compose: b(r rho) has not settled at |log rho| = t_max (tail " + std::to_string(tail) + ")");
            ehat = detail::regular_transform(e, g, cfg, g.eta_k, fft);
            esum = Eigen::MatrixXcd::Zero(n, n);
            for (const auto& x : ehat) esum += x;
        };
        if (b.lambda_independent) prepare(0.0);
        for (int j = -g.lam_k; j <= g.lam_k; ++j) {
            if (!b.lambda_independent) prepare(j * g.h);
            const auto& aj = A[g.mu_index(j)];
            Eigen::MatrixXcd c = aj * b0;
            // sum_k [a(lambda + eta_k) - a(lambda)] e^(eta_k), without per-term temporaries
            reg.noalias() = -aj * esum;
            for (int k = -g.eta_k; k <= g.eta_k; ++k)
                reg.noalias() += A[g.mu_index(j + k)] * ehat[static_cast<std::size_t>(k + g.eta_k)];
            c += reg * (g.h / (2.0 * std::numbers::pi));
            c += detail::sinh_kernel_term(A, j, g) * jump;
            table->values[i * table->lambda.size() + static_cast<std::size_t>(j + g.lam_k)] = c;
        }
    }
    return MellinSymbol::tabulated(table);
}

/// Symbol of the L^2(dr/r) adjoint of op(a).  Exact conjugate transpose for
/// r-independent a; otherwise a table from the regularized oscillatory integral.
inline MellinSymbol adjoint(const MellinSymbol& a, double p = 2.0, const OscillatoryConfig& cfg = {}) {
    (void)p;  // the dr/r pairing is p-independent
    if (a.r_independent) {
        std::optional<Interval> strip;
        if (a.strip) strip = Interval{-a.strip->hi, -a.strip->lo};
        MellinSymbol b = MellinSymbol::general(
            a.n, [a](double r, cplx l) { return Eigen::MatrixXcd(a(r, std::conj(l)).adjoint()); }, strip);
        b.r_independent = true;
        b.lambda_independent = a.lambda_independent;
        return b;
    }
    detail::OscGrid g(cfg);
    auto table = detail::make_table(a.n, g);
    Eigen::FFT<double> fft;
    const int n = a.n;
    const double L = cfg.limit_offset;
    const std::size_t M = static_cast<std::size_t>(g.mu_hi - g.mu_lo + 1);
    std::vector<Eigen::MatrixXcd> A0(M), PQ(M), Psum(M);
    std::vector<std::vector<Eigen::MatrixXcd>> ehat(M);
    for (std::size_t i = 0; i < g.s.size(); ++i) {
        const double r = std::exp(g.s[i]);
        for (int m = g.mu_lo; m <= g.mu_hi; ++m) {
            const double mu = g.mu(m);
            const auto idx = g.mu_index(m);
            A0[idx] = a(r, mu).adjoint();
            Eigen::MatrixXcd P = Eigen::MatrixXcd(a(r * std::exp(L), mu).adjoint()) - A0[idx];
            Eigen::MatrixXcd Q = Eigen::MatrixXcd(a(r * std::exp(-L), mu).adjoint()) - A0[idx];
            PQ[idx] = P - Q;
            Psum[idx] = P + Q;
            // the regular part is only needed where lambda + eta stays on the mu grid
            if (std::abs(m) > g.lam_k + g.eta_k) continue;
            if (a.lambda_independent && m != g.mu_lo + static_cast<int>(M / 2)) continue;
            std::vector<Eigen::MatrixXcd> e;
            e.reserve(g.t.size());
            for (double t : g.t) {
                double sg = detail::logistic(t);
                e.push_back(Eigen::MatrixXcd(a(r * std::exp(t), mu).adjoint()) - A0[idx] - sg * P - (1.0 - sg) * Q);
            }
            double tail = std::max(e.front().cwiseAbs().maxCoeff(), e.back().cwiseAbs().maxCoeff());
            if (!(tail <= cfg.tol))
                fail(ErrorCode::QuadratureDiverged,
                     "adjoint: a(r rho) has not settled at |log rho| = t_max (tail " + std::to_string(tail) + ")");
            ehat[idx] = detail::regular_transform(e, g, cfg, g.eta_k, fft);
        }
        const auto& shared = a.lambda_independent ? ehat[M / 2] : ehat[0];
        for (int j = -g.lam_k; j <= g.lam_k; ++j) {
            Eigen::MatrixXcd b = A0[g.mu_index(j)] + 0.5 * Psum[g.mu_index(j)];
            b += detail::sinh_kernel_term(PQ, j, g);
            Eigen::MatrixXcd reg = Eigen::MatrixXcd::Zero(n, n);
            for (int k = -g.eta_k; k <= g.eta_k; ++k) {
                const auto& eh = a.lambda_independent ? shared : ehat[g.mu_index(j + k)];
                reg += eh[static_cast<std::size_t>(k + g.eta_k)];
            }
            b += reg * (g.h / (2.0 * std::numbers::pi));
            table->values[i * table->lambda.size() + static_cast<std::size_t>(j + g.lam_k)] = b;
        }
    }
    return MellinSymbol::tabulated(table);
}

// ---------------------------------------------------------------------------
// Weights

/// kappa_sigma(r), frozen to 0 beyond the weight's neighbourhood.
inline double kappa_or_zero(const Weight& w, double r) { return r < w.eps ? kappa(w, r) : 0.0; }

/// log w(r) with sigma frozen at eps.
inline double log_weight(const Weight& w, double r) {
    return std::isfinite(w.eps) ? w.sigma(std::min(r, w.eps)) : w.sigma(r);
}

struct ConjugatedSymbol {
    MellinSymbol symbol;  // b0(r, lambda) = a(r, lambda + i kappa(r))
    double kappa_min = 0.0;
    double kappa_max = 0.0;
};

/// Leading term of w op(a) w^{-1}.  The kappa range is sampled on r_grid and
/// must lie in the analytic strip of a.
inline ConjugatedSymbol conjugate_by_weight(const MellinSymbol& a, const Weight& w,
                                            const std::vector<double>& r_grid = geometric_grid(0.5, 1e-12, 80)) {
    ConjugatedSymbol out;
    out.kappa_min = std::numeric_limits<double>::infinity();
    out.kappa_max = -std::numeric_limits<double>::infinity();
    for (double r : r_grid) {
        double k = kappa_or_zero(w, r);
        out.kappa_min = std::min(out.kappa_min, k);
        out.kappa_max = std::max(out.kappa_max, k);
    }
    const bool trivial = out.kappa_min == 0.0 && out.kappa_max == 0.0;
    if (!trivial && (!a.strip || out.kappa_min < a.strip->lo || out.kappa_max > a.strip->hi))
        fail(ErrorCode::StripViolation, "kappa range leaves the analytic strip of the symbol");
    std::optional<Interval> strip;
    if (a.strip) strip = Interval{a.strip->lo - std::min(out.kappa_min, 0.0), a.strip->hi - std::max(out.kappa_max, 0.0)};
    MellinSymbol b = MellinSymbol::general(
        a.n, [a, w](double r, cplx l) { return a(r, l + cplx(0.0, kappa_or_zero(w, r))); }, strip);
    const bool constant_kappa = w.kappa_fn && !std::isfinite(w.eps) && out.kappa_min == out.kappa_max;
    b.r_independent = a.r_independent && (trivial || constant_kappa);
    b.lambda_independent = a.lambda_independent;
    out.symbol = std::move(b);
    return out;
}

/// max over test columns of |w op(a) w^{-1} u - op(b) u|_2 / |u|_2 on the grid.
inline double conjugation_defect(const MellinSymbol& a, const Weight& w, const MellinSymbol& b, const LogGrid& grid,
                                 const std::vector<Eigen::MatrixXcd>& tests, const ApplyConfig& cfg = {}) {
    double worst = 0.0;
    Eigen::VectorXd lw(grid.size);
    for (int j = 0; j < grid.size; ++j) lw(j) = log_weight(w, grid.r(j));
    for (const auto& u : tests) {
        Eigen::MatrixXcd scaled = u;
        for (int j = 0; j < grid.size; ++j) scaled.row(j) *= std::exp(-lw(j));
        Eigen::MatrixXcd lhs = apply_mellin(a, grid, scaled, cfg);
        for (int j = 0; j < grid.size; ++j) lhs.row(j) *= std::exp(lw(j));
        Eigen::MatrixXcd rhs = apply_mellin(b, grid, u, cfg);
        worst = std::max(worst, (lhs - rhs).norm() / u.norm());
    }
    return worst;
}

struct LocalInvertibilityReport {
    double inf_det = std::numeric_limits<double>::infinity();
    double r_at = 0.0;
    double lambda_at = 0.0;
    double threshold = 1e-6;
    bool pass = false;
};

/// Gridded inf |det a(r, lambda + i kappa(r))| as r -> 0.  The shift is the
/// weight exponent alone; p only fixes the admissible weight interval.
inline LocalInvertibilityReport local_invertibility_zero(const MellinSymbol& a, const Weight& w, double p,
                                                         const std::vector<double>& r_grid,
                                                         const std::vector<double>& lambda_grid,
                                                         double threshold = 1e-6) {
    if (!(p > 1.0)) fail(ErrorCode::InvalidArgument, "p must exceed 1");
    LocalInvertibilityReport rep;
    rep.threshold = threshold;
    for (double r : r_grid) {
        const double k = kappa_or_zero(w, r);
        for (double lam : lambda_grid) {
            cplx d = a(r, cplx(lam, k)).determinant();
            double v = std::abs(d);
            if (!std::isfinite(v)) v = std::numeric_limits<double>::infinity();
            if (v < rep.inf_det) {
                rep.inf_det = v;
                rep.r_at = r;
                rep.lambda_at = lam;
            }
        }
    }
    rep.pass = rep.inf_det >= threshold;
    return rep;
}

}  // namespace perigraph
