#include "ttclass/linalg.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <lapacke.h>

#ifdef _OPENMP
#include <omp.h>
#endif

// present when the BLAS backend is OpenBLAS
extern "C" void openblas_set_num_threads(int) __attribute__((weak));

namespace ttclass::linalg {

void set_blas_threads(int threads) {
    if (!openblas_set_num_threads) return;
    if (threads < 1) {
#ifdef _OPENMP
        threads = omp_get_max_threads();
#else
        threads = 1;
#endif
    }
    openblas_set_num_threads(threads);
}

namespace {

// Above this size Eigen's symmetric eigensolver becomes the bottleneck
// of the whole pipeline; LAPACK's divide-and-conquer dsyevd is used instead.
constexpr Eigen::Index kLapackEigCutoff = 128;

// Relative level at which singular values count as numerically zero even
// when the caller requests threshold 0 (minimum-norm solutions must not
// divide by round-off noise).
constexpr double kNumericalZeroRel = 1e-14;

// Problem sizes (rows * cols) above which tsvd_least_squares switches to
// the Gram route. Only taken when the threshold is large enough that the
// squared conditioning of M M^T cannot promote noise into retained
// triplets (relative error in the smallest retained direction is about
// eps / threshold^2).
constexpr Eigen::Index kGramRouteCutoff = 20'000;
constexpr double kGramRouteMinThreshold = 1e-4;

void fix_signs(Matrix& U, Matrix& Vt) {
    for (Eigen::Index j = 0; j < U.cols(); ++j) {
        Eigen::Index imax = 0;
        U.col(j).cwiseAbs().maxCoeff(&imax);
        if (U(imax, j) < 0.0) {
            U.col(j) = -U.col(j);
            if (Vt.rows() > j) Vt.row(j) = -Vt.row(j);
        }
    }
}

}  // namespace

std::pair<Vector, Matrix> symmetric_eig(const Matrix& A) {
    const Eigen::Index n = A.rows();
    if (n <= kLapackEigCutoff) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(A);
        if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver failed");
        return {es.eigenvalues(), es.eigenvectors()};
    }
    Matrix V = A;
    Vector lambda(n);
    const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(n),
                                           V.data(), static_cast<lapack_int>(n), lambda.data());
    if (info != 0) throw NumericalError("LAPACK dsyevd failed with info " + std::to_string(info));
    return {lambda, V};
}

TruncatedSvd truncated_svd(const Matrix& A, double rel_threshold) {
    if (A.size() == 0) throw ValidationError("truncated_svd: empty matrix");
    if (!A.allFinite()) throw ValidationError("truncated_svd: non-finite entries");
    if (rel_threshold < 0.0 || rel_threshold >= 1.0)
        throw ValidationError("truncated_svd: relative threshold must lie in [0, 1)");

    Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sigma = svd.singularValues();
    const double sigma_max = sigma.size() > 0 ? sigma(0) : 0.0;
    if (sigma_max <= 0.0) throw ValidationError("truncated_svd: degenerate all-zero matrix");

    const double cutoff = std::max(rel_threshold, kNumericalZeroRel) * sigma_max;
    Eigen::Index k = 0;
    while (k < sigma.size() && sigma(k) > cutoff) ++k;

    TruncatedSvd result;
    result.U = svd.matrixU().leftCols(k);
    result.singular_values = sigma.head(k);
    result.Vt = svd.matrixV().leftCols(k).transpose();
    result.threshold = rel_threshold;
    fix_signs(result.U, result.Vt);
    return result;
}

Vector tsvd_least_squares(const Matrix& M, const Vector& w, double rel_threshold) {
    const Eigen::Index q = M.rows();
    const Eigen::Index m = M.cols();
    if (w.size() != m) throw ValidationError("tsvd_least_squares: length of w must match columns of M");

    const bool gram_route = q <= m && q * m > kGramRouteCutoff && rel_threshold >= kGramRouteMinThreshold;
    if (!gram_route) {
        const TruncatedSvd svd = truncated_svd(M, rel_threshold);
        // v = w V_k S_k^{-1} U_k^T
        Vector coeffs = svd.Vt * w;                       // k
        coeffs.array() /= svd.singular_values.array();    // S_k^{-1}
        return svd.U * coeffs;                            // q
    }

    // Gram route: retained triplets from the eigendecomposition of M M^T.
    // v = (w M^T) U_k S_k^{-2} U_k^T with S_k^2 = retained eigenvalues.
    Matrix G = Matrix::Zero(q, q);
    G.selfadjointView<Eigen::Lower>().rankUpdate(M);
    G = G.selfadjointView<Eigen::Lower>();
    auto [lambda, U] = symmetric_eig(G);  // ascending
    const double lambda_max = lambda(q - 1);
    if (lambda_max <= 0.0) throw ValidationError("tsvd_least_squares: degenerate all-zero matrix");
    const double cut = rel_threshold * rel_threshold * lambda_max;

    const Vector wMt = M * w;  // = (w M^T)^T, length q
    Vector v = Vector::Zero(q);
    for (Eigen::Index i = q - 1; i >= 0; --i) {
        if (!(lambda(i) > cut) || lambda(i) <= 0.0) break;
        v += (U.col(i).dot(wMt) / lambda(i)) * U.col(i);
    }
    return v;
}

Matrix solve_gram(const Matrix& G, const Matrix& Y, double ridge) {
    const Eigen::Index m = G.rows();
    if (G.cols() != m) throw ValidationError("solve_gram: G must be square");
    if (Y.cols() != m) throw ValidationError("solve_gram: Y column count must match G");
    if (ridge < 0.0) throw ValidationError("solve_gram: ridge must be >= 0");

    const double scale = G.cwiseAbs().maxCoeff();
    if ((G - G.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(scale, 1.0))
        throw ValidationError("solve_gram: G is not symmetric");

    if (ridge > 0.0) {
        Matrix A = G;
        A.diagonal().array() += ridge;
        Eigen::LLT<Matrix> llt(A);
        if (llt.info() != Eigen::Success)
            throw NumericalError("solve_gram: Cholesky factorization failed");
        // Z (G + ridge Id) = Y  =>  Z^T solves the transposed SPD system
        return llt.solve(Y.transpose()).transpose();
    }

    auto [lambda, U] = symmetric_eig(G);
    const double lambda_max = std::max(lambda.maxCoeff(), 0.0);
    const double cut = 1e-12 * lambda_max;
    Vector inv = Vector::Zero(m);
    for (Eigen::Index i = 0; i < m; ++i)
        if (lambda(i) > cut) inv(i) = 1.0 / lambda(i);
    // Z = Y U diag(inv) U^T
    Matrix YU = Y * U;
    YU.array().rowwise() *= inv.transpose().array();
    return YU * U.transpose();
}

std::pair<Matrix, Matrix> thin_qr(const Matrix& A) {
    if (!A.allFinite()) throw ValidationError("thin_qr: non-finite entries");
    const Eigen::Index k = std::min(A.rows(), A.cols());
    Eigen::HouseholderQR<Matrix> qr(A);
    Matrix Q = qr.householderQ() * Matrix::Identity(A.rows(), k);
    Matrix R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < k; ++j) {
        Eigen::Index imax = 0;
        Q.col(j).cwiseAbs().maxCoeff(&imax);
        if (Q(imax, j) < 0.0) {
            Q.col(j) = -Q.col(j);
            R.row(j) = -R.row(j);
        }
    }
    return {std::move(Q), std::move(R)};
}

}  // namespace ttclass::linalg
