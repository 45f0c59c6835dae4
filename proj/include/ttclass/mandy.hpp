#pragma once

#include <Eigen/Core>

#include "ttclass/errors.hpp"
#include "ttclass/features.hpp"

namespace ttclass::mandy {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Kernel matrix of pairwise transformed-feature inner products, built as a
/// Hadamard product of per-coordinate factors. The factors themselves are
/// not retained (recomputable via local_gram); only their count is kept.
struct GramMatrix {
    Matrix values;       ///< m x m, symmetric psd
    Index factor_count;  ///< number of Hadamard factors that produced it
};

/// Largest sample count for which the dense Gram matrix is assembled by
/// default; override per call (the CLI maps TTCLASS_MAX_GRAM onto this).
inline constexpr Index kDefaultGramCap = 20'000;

/// Closed-form classifier state: label weights Z against the kernel of the
/// retained training features. Prediction needs the training features, so
/// models keep them.
struct KernelModel {
    Matrix Z;                            ///< d' x m
    FeatureMatrixSet training_features;  ///< per-coordinate n_mu x m matrices
    FeatureBasis basis;
    double ridge_used{0.0};
};

/// G = Theta_1 o Theta_2 o ... o Theta_p (entrywise). Throws a size error
/// with subsampling advice when m exceeds `gram_cap`.
[[nodiscard]] GramMatrix build_gram(const FeatureMatrixSet& features, Index gram_cap = kDefaultGramCap);

/// Closed-form fit: feature matrices -> Gram -> solve Z G = Y.
/// Y must be one-hot columns. ridge 0 uses the pseudoinverse solve.
[[nodiscard]] KernelModel fit(const Matrix& X, const Matrix& Y, const FeatureBasis& basis,
                              double ridge = 0.0, Index gram_cap = kDefaultGramCap);

/// Decision values f(x) = Z k(x), where the kernel vector against the
/// training set is a running entrywise product over coordinates.
[[nodiscard]] Vector decision_values(const KernelModel& model, const Vector& x);

/// Batched decision values for a d x m_test matrix, computed in column
/// blocks to bound memory; returns d' x m_test scores.
[[nodiscard]] Matrix decision_values(const KernelModel& model, const Matrix& X_test,
                                     Index block_size = 256);

/// Index of the largest decision value; ties resolve to the lowest index.
[[nodiscard]] Index classify(const KernelModel& model, const Vector& x);

/// Argmax with lowest-index tie rule, shared by both classifiers.
[[nodiscard]] Index argmax_label(const Vector& scores);

}  // namespace ttclass::mandy
