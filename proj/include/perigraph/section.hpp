#pragma once

// Linear algebra on finite sections of band operators: eigenvalues and
// extreme singular values without forming the dense matrix where the band
// structure allows it.

#include "perigraph/assemble.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <random>

#ifdef PERIGRAPH_HAVE_LAPACKE
#include <lapacke.h>
#endif
#ifdef PERIGRAPH_HAVE_ARPACK
#include <arpack/arpack.hpp>
// arpack.hpp pulls in C <complex.h>
#undef I
#undef complex
#endif

namespace perigraph {

/// Largest |beta|_inf whose block is not negligible against A_0; blocks below
/// drop_tol * max|A_0| are treated as zero and their norms summed in `dropped`.
inline int effective_radius(const BandOperator& A, double drop_tol, double* dropped = nullptr) {
    const auto* a0 = A.find(GroupElement::zero(A.rank));
    const double scale = a0 ? a0->cwiseAbs().maxCoeff() : 1.0;
    int r = 0;
    double drop = 0.0;
    for (const auto& [beta, blk] : A.blocks) {
        const double m = blk.cwiseAbs().maxCoeff();
        if (m > drop_tol * scale) r = std::max<int>(r, static_cast<int>(beta.norm_inf()));
        else drop += blk.norm();
    }
    if (dropped) *dropped = drop;
    return r;
}

/// A_{-beta} = A_beta^* for every stored block.
inline bool is_hermitian_band(const BandOperator& A, double tol = 1e-13) {
    if (!A.periodic()) return false;
    double scale = 0.0;
    for (const auto& [b, blk] : A.blocks) scale = std::max(scale, blk.cwiseAbs().maxCoeff());
    for (const auto& [beta, blk] : A.blocks) {
        const auto* other = A.find(-beta);
        const double d = other ? (blk - other->adjoint()).cwiseAbs().maxCoeff() : blk.cwiseAbs().maxCoeff();
        if (d > tol * scale) return false;
    }
    return true;
}

inline bool is_real_band(const BandOperator& A) {
    for (const auto& [b, blk] : A.blocks)
        if (blk.imag().cwiseAbs().maxCoeff() != 0.0) return false;
    return true;
}

/// Sparse section matrix, same ordering as finite_section.
inline Eigen::SparseMatrix<cplx> finite_section_sparse(const BandOperator& A, int rho, double drop_tol = 0.0) {
    const auto cells = section_cells(A.rank, rho);
    std::map<GroupElement, int> index;
    for (std::size_t c = 0; c < cells.size(); ++c) index[cells[c]] = static_cast<int>(c);
    const Eigen::Index n0 = A.n0, N = static_cast<Eigen::Index>(cells.size()) * n0;
    const int R = effective_radius(A, drop_tol);
    std::vector<Eigen::Triplet<cplx>> trip;
    for (std::size_t r = 0; r < cells.size(); ++r)
        for (const auto& [beta, blk0] : A.blocks) {
            if (beta.norm_inf() > R) continue;
            auto it = index.find(cells[r] - beta);
            if (it == index.end()) continue;
            const Eigen::MatrixXcd blk = A.block(cells[r], beta);
            for (Eigen::Index i = 0; i < n0; ++i)
                for (Eigen::Index j = 0; j < n0; ++j)
                    if (blk(i, j) != cplx{}) trip.emplace_back(static_cast<Eigen::Index>(r) * n0 + i, it->second * n0 + j, blk(i, j));
        }
    Eigen::SparseMatrix<cplx> M(N, N);
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

/// Eigenvalues of the finite section.  Self-adjoint periodic bands on Z use a
/// banded Hermitian solver; everything else goes through the dense solver.
inline std::vector<cplx> section_eigenvalues(const BandOperator& A, int rho, double drop_tol = 1e-14) {
    std::vector<cplx> out;
#ifdef PERIGRAPH_HAVE_LAPACKE
    if (A.rank == 1 && is_hermitian_band(A)) {
        const int R = effective_radius(A, drop_tol);
        const lapack_int n0 = A.n0, cells = 2 * rho + 1, n = n0 * cells;
        // bandwidth from the entries that survive the drop tolerance
        const auto* a0 = A.find(GroupElement(0));
        const double cut = drop_tol * (a0 ? a0->cwiseAbs().maxCoeff() : 1.0);
        lapack_int width = 0;
        for (const auto& [beta, blk] : A.blocks) {
            if (beta[0] > 0 || -beta[0] > R) continue;
            for (lapack_int i = 0; i < n0; ++i)
                for (lapack_int j = 0; j < n0; ++j)
                    if (std::abs(blk(i, j)) > cut) width = std::max<lapack_int>(width, -beta[0] * n0 + j - i);
        }
        const lapack_int kd = std::min<lapack_int>(n - 1, width);
        const lapack_int ldab = kd + 1;
        const bool real = is_real_band(A);
        std::vector<double> w(static_cast<std::size_t>(n));
        std::vector<double> abr;
        std::vector<cplx> abc;
        if (real) abr.assign(static_cast<std::size_t>(ldab) * n, 0.0);
        else abc.assign(static_cast<std::size_t>(ldab) * n, cplx{});
        // upper triangle: ab(kd + i - j, j) = M(i, j) for j - kd <= i <= j
        for (lapack_int c = 0; c < cells; ++c)
            for (lapack_int r = std::max<lapack_int>(0, c - R); r <= c; ++r) {
                const auto* blk = A.find(GroupElement(r - c));
                if (!blk) continue;
                for (lapack_int i = 0; i < n0; ++i)
                    for (lapack_int j = 0; j < n0; ++j) {
                        const lapack_int gi = r * n0 + i, gj = c * n0 + j;
                        if (gi > gj || gj - gi > kd || std::abs((*blk)(i, j)) <= cut) continue;
                        const std::size_t pos = static_cast<std::size_t>(kd + gi - gj) + static_cast<std::size_t>(gj) * ldab;
                        if (real) abr[pos] = (*blk)(i, j).real();
                        else abc[pos] = (*blk)(i, j);
                    }
            }
        lapack_int info;
        if (real) info = LAPACKE_dsbevd(LAPACK_COL_MAJOR, 'N', 'U', n, kd, abr.data(), ldab, w.data(), nullptr, 1);
        else info = LAPACKE_zhbevd(LAPACK_COL_MAJOR, 'N', 'U', n, kd, abc.data(), ldab, w.data(), nullptr, 1);
        if (info != 0) fail(ErrorCode::InvalidArgument, "banded eigensolver failed, info " + std::to_string(info));
        for (double v : w) out.emplace_back(v, 0.0);
        return out;
    }
#endif
    const Eigen::MatrixXcd M = finite_section(A, rho);
    if (A.periodic() && is_hermitian_band(A)) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M, Eigen::EigenvaluesOnly);
        for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) out.emplace_back(es.eigenvalues()(k), 0.0);
        return out;
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(M, false);
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) out.push_back(es.eigenvalues()(k));
    return out;
}

struct SectionConditioning {
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    double condition = 0.0;
    int iterations_min = 0;
    int iterations_max = 0;
    double dropped_norm = 0.0;  // blocks ignored as negligible
};

struct ConditionConfig {
    int max_iterations = 400;
    double rel_tol = 1e-4;  // Ritz residual; the Ritz value itself is far more accurate
    double drop_tol = 1e-16;
    unsigned seed = 12345;
    int krylov_dim = 48;  // Arnoldi subspace size; clustered spectra need a large one
};

namespace detail {

/// Power iteration for the largest eigenvalue of a positive operator given as
/// v -> op(v); returns the Rayleigh quotient.
template <class Op>
double power_iterate(Op op, Eigen::Index n, const ConditionConfig& cfg, int& iters) {
    std::mt19937 rng(cfg.seed);
    std::normal_distribution<double> nd;
    Eigen::VectorXcd v(n);
    for (Eigen::Index k = 0; k < n; ++k) v(k) = cplx(nd(rng), nd(rng));
    v.normalize();
    double lam = 0.0;
    for (iters = 1; iters <= cfg.max_iterations; ++iters) {
        Eigen::VectorXcd y = op(v);
        const double next = v.dot(y).real();
        v = y / y.norm();
        if (iters > 1 && std::abs(next - lam) <= cfg.rel_tol * std::abs(next)) {
            lam = next;
            break;
        }
        lam = next;
    }
    return lam;
}

/// Largest eigenvalue of a positive operator: implicitly restarted Arnoldi
/// when ARPACK is available, plain power iteration otherwise.  Sections of
/// periodic operators have clustered singular values, where power iteration
/// stalls.
template <class Op>
double largest_eigenvalue(Op op, Eigen::Index n, const ConditionConfig& cfg, int& iters) {
#ifdef PERIGRAPH_HAVE_ARPACK
    if (n >= 8) {
        const a_int N = static_cast<a_int>(n), nev = 1, ncv = static_cast<a_int>(std::min<Eigen::Index>(n, cfg.krylov_dim));
        const a_int lworkl = 3 * ncv * ncv + 5 * ncv;
        std::mt19937 rng(cfg.seed);
        std::normal_distribution<double> nd;
        std::vector<cplx> resid(static_cast<std::size_t>(n)), v(static_cast<std::size_t>(n * ncv)),
            workd(static_cast<std::size_t>(3 * n)), workl(static_cast<std::size_t>(lworkl));
        for (auto& r : resid) r = cplx(nd(rng), nd(rng));
        std::vector<double> rwork(static_cast<std::size_t>(ncv));
        a_int iparam[11] = {1, 0, cfg.max_iterations, 1, 0, 0, 1, 0, 0, 0, 0};
        a_int ipntr[14] = {};
        a_int ido = 0, info = 1;  // info = 1: use the seeded starting vector
        while (true) {
            arpack::naupd(ido, arpack::bmat::identity, N, arpack::which::largest_magnitude, nev, cfg.rel_tol,
                          resid.data(), ncv, v.data(), N, iparam, ipntr, workd.data(), workl.data(), lworkl,
                          rwork.data(), info);
            if (ido != 1 && ido != -1) break;
            Eigen::Map<const Eigen::VectorXcd> x(workd.data() + ipntr[0] - 1, n);
            Eigen::Map<Eigen::VectorXcd> y(workd.data() + ipntr[1] - 1, n);
            y = op(Eigen::VectorXcd(x));
        }
        if (info < 0) fail(ErrorCode::InvalidArgument, "ARPACK naupd failed, info " + std::to_string(info));
        iters = static_cast<int>(iparam[2]);
        std::vector<a_int> select(static_cast<std::size_t>(ncv));
        std::vector<cplx> d(static_cast<std::size_t>(nev + 1)), workev(static_cast<std::size_t>(2 * ncv));
        arpack::neupd(0, arpack::howmny::ritz_vectors, select.data(), d.data(), v.data(), N, cplx{}, workev.data(),
                      arpack::bmat::identity, N, arpack::which::largest_magnitude, nev, cfg.rel_tol, resid.data(), ncv,
                      v.data(), N, iparam, ipntr, workd.data(), workl.data(), lworkl, rwork.data(), info);
        if (info != 0) fail(ErrorCode::InvalidArgument, "ARPACK neupd failed, info " + std::to_string(info));
        return d[0].real();
    }
#endif
    return power_iterate(op, n, cfg, iters);
}

}  // namespace detail

/// Extreme singular values of the finite section from the largest eigenvalues
/// of M^*M and (M^*M)^{-1}, the inverse applied through a banded (rank 1) or
/// sparse LU factorization.
inline SectionConditioning section_condition(const BandOperator& A, int rho, const ConditionConfig& cfg = {}) {
    SectionConditioning out;
    effective_radius(A, cfg.drop_tol, &out.dropped_norm);
    const Eigen::SparseMatrix<cplx> M = finite_section_sparse(A, rho, cfg.drop_tol);
    const Eigen::SparseMatrix<cplx> Mh = M.adjoint();
    const Eigen::Index n = M.rows();
    out.sigma_max = std::sqrt(detail::largest_eigenvalue([&](const Eigen::VectorXcd& v) -> Eigen::VectorXcd { return Mh * (M * v); },
                                                    n, cfg, out.iterations_max));
    std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)> inv_normal;
#ifdef PERIGRAPH_HAVE_LAPACKE
    std::vector<cplx> ab;
    std::vector<lapack_int> ipiv;
    if (A.rank == 1) {
        const lapack_int N = static_cast<lapack_int>(n);
        const lapack_int k = std::min<lapack_int>(N - 1, (effective_radius(A, cfg.drop_tol) + 1) * A.n0 - 1);
        const lapack_int ldab = 3 * k + 1;
        ab.assign(static_cast<std::size_t>(ldab) * N, cplx{});
        for (Eigen::Index c = 0; c < M.outerSize(); ++c)
            for (Eigen::SparseMatrix<cplx>::InnerIterator it(M, c); it; ++it)
                ab[static_cast<std::size_t>(2 * k + it.row() - it.col()) + static_cast<std::size_t>(it.col()) * ldab] = it.value();
        ipiv.resize(static_cast<std::size_t>(N));
        const lapack_int info = LAPACKE_zgbtrf(LAPACK_COL_MAJOR, N, N, k, k, ab.data(), ldab, ipiv.data());
        if (info > 0) {
            out.sigma_min = 0.0;
            out.condition = std::numeric_limits<double>::infinity();
            return out;
        }
        inv_normal = [&, N, k, ldab](const Eigen::VectorXcd& v) -> Eigen::VectorXcd {
            Eigen::VectorXcd y = v;
            // (M^* M)^{-1} v = M^{-1} M^{-*} v
            LAPACKE_zgbtrs(LAPACK_COL_MAJOR, 'C', N, k, k, 1, ab.data(), ldab, ipiv.data(), y.data(), N);
            LAPACKE_zgbtrs(LAPACK_COL_MAJOR, 'N', N, k, k, 1, ab.data(), ldab, ipiv.data(), y.data(), N);
            return y;
        };
    }
#endif
    Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu, luh;
    if (!inv_normal) {
        lu.compute(M);
        luh.compute(Mh);
        if (lu.info() != Eigen::Success || luh.info() != Eigen::Success) {
            out.sigma_min = 0.0;
            out.condition = std::numeric_limits<double>::infinity();
            return out;
        }
        inv_normal = [&](const Eigen::VectorXcd& v) -> Eigen::VectorXcd { return lu.solve(luh.solve(v)); };
    }
    const double inv = detail::largest_eigenvalue(inv_normal, n, cfg, out.iterations_min);
    out.sigma_min = 1.0 / std::sqrt(inv);
    out.condition = out.sigma_max / out.sigma_min;
    return out;
}

}  // namespace perigraph
