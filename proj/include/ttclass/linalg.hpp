#pragma once

#include <utility>

#include <Eigen/Core>

#include "ttclass/errors.hpp"

namespace ttclass::linalg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Rank-revealing SVD truncated at a relative singular-value threshold.
/// Keeps exactly the triplets with sigma_i > threshold * sigma_1.
struct TruncatedSvd {
    Matrix U;                ///< m x k, orthonormal columns
    Vector singular_values;  ///< k positive values, descending
    Matrix Vt;               ///< k x n, orthonormal rows
    double threshold;        ///< the relative cutoff that was applied
};

/// Reduced SVD of A with retained rank k = #{ sigma_i > rel_threshold * sigma_1 }.
/// Values below 1e-14 * sigma_1 always count as zero, so threshold 0 yields
/// the numerical rank. Signs are fixed by making the largest-magnitude entry
/// of each left singular vector positive. Throws ValidationError for an
/// all-zero matrix.
[[nodiscard]] TruncatedSvd truncated_svd(const Matrix& A, double rel_threshold);

/// Minimizer v of ||w - v M||_2 over row vectors, computed from the
/// truncated pseudoinverse of M (q x m): v = w V_k S_k^{-1} U_k^T.
/// With rel_threshold 0 this is the minimum-norm least-squares solution.
///
/// For large instances with a meaningful threshold the retained triplets
/// are derived from the eigendecomposition of M M^T instead of a full SVD;
/// both routes keep the same set of triplets and agree to solver accuracy.
[[nodiscard]] Vector tsvd_least_squares(const Matrix& M, const Vector& w, double rel_threshold);

/// Solve Z G = Y for Z, where G is symmetric positive semi-definite.
/// ridge > 0: Z = Y (G + ridge * Id)^{-1} via Cholesky.
/// ridge = 0: minimum-norm least-squares solution via symmetric
/// eigendecomposition, treating eigenvalues below 1e-12 * lambda_max as zero.
/// Throws ValidationError when G is not symmetric (1e-10 relative).
[[nodiscard]] Matrix solve_gram(const Matrix& G, const Matrix& Y, double ridge);

/// Thin QR factorization A = Q R with orthonormal Q columns. Signs are
/// fixed by making the largest-magnitude entry of each Q column positive.
[[nodiscard]] std::pair<Matrix, Matrix> thin_qr(const Matrix& A);

/// Eigendecomposition of a symmetric matrix, eigenvalues ascending.
/// Dispatches to LAPACK (dsyevd) above a size cutoff, Eigen below; both
/// paths are deterministic for a fixed environment.
[[nodiscard]] std::pair<Vector, Matrix> symmetric_eig(const Matrix& A);

/// Cap the BLAS backend's thread pool (no-op when the backend has no such
/// knob). Callers that parallelize at a higher level set this to 1 so the
/// backend does not oversubscribe the machine; 0 restores the default.
void set_blas_threads(int threads);

}  // namespace ttclass::linalg
