#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "ttclass/dense_tensor.hpp"
#include "ttclass/errors.hpp"

namespace ttclass {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Per-coordinate feature maps psi_mu: the mu-th map reads coordinate mu of
/// the input and produces a vector of length n_mu. The product of all maps
/// spans the rank-one transformed tensor of an input vector.
class FeatureBasis {
public:
    enum class Kind { TrigAlpha, Custom };

    /// The trigonometric map [cos(alpha*x_mu), sin(alpha*x_mu)] on every
    /// coordinate; n_mu == 2 throughout.
    static FeatureBasis trig(Index d, double alpha);

    /// Arbitrary scalar function lists, one list per coordinate.
    static FeatureBasis custom(std::vector<std::vector<std::function<double(double)>>> functions);

    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] double alpha() const { return alpha_; }
    [[nodiscard]] Index coordinate_count() const { return p_; }
    [[nodiscard]] Index dim(Index mu) const { return dims_[static_cast<std::size_t>(mu)]; }
    [[nodiscard]] const std::vector<Index>& dims() const { return dims_; }

    /// psi_mu applied to scalar coordinate value x_mu.
    [[nodiscard]] Vector map(Index mu, double x_mu) const;

private:
    FeatureBasis() = default;

    Kind kind_{Kind::TrigAlpha};
    double alpha_{0.0};
    Index p_{0};
    std::vector<Index> dims_;
    std::vector<std::vector<std::function<double(double)>>> functions_;
};

/// Default trigonometric map parameter.
inline constexpr double kDefaultAlpha = 0.59;

/// Per-coordinate feature evaluations of a whole sample set: matrix mu has
/// shape n_mu x m with column j = psi_mu(x^(j)). This is the only
/// representation of the transformed data kept at scale.
struct FeatureMatrixSet {
    std::vector<Matrix> factors;

    [[nodiscard]] Index coordinate_count() const { return static_cast<Index>(factors.size()); }
    [[nodiscard]] Index sample_count() const {
        return factors.empty() ? 0 : factors.front().cols();
    }
};

/// Evaluate all coordinate maps on one input vector.
/// For the trigonometric map, inputs are expected in [0, 1]; values outside
/// trigger a one-time warning on stderr but are still mapped.
[[nodiscard]] std::vector<Vector> apply_basis(const FeatureBasis& basis, const Vector& x);

/// Column-wise apply_basis over a d x m data matrix.
[[nodiscard]] FeatureMatrixSet build_feature_matrices(const FeatureBasis& basis, const Matrix& X);

/// Local kernel factor Theta_mu = F_mu^T F_mu (m x m, symmetric psd).
[[nodiscard]] Matrix local_gram(const Matrix& F_mu);

/// Materialize the transformed data tensor with the sample mode attached to
/// core `shift_index`, by contracting the explicit core chain including the
/// sparse order-4 core at that position. All shift positions represent the
/// same (n_1 x ... x n_p x m) tensor; this exists as a cross-check at tiny
/// sizes and throws once the dense cap is exceeded.
[[nodiscard]] DenseTensor materialize_psi_hat(const FeatureBasis& basis, const Matrix& X,
                                              Index shift_index, Index cap = 10'000'000);

}  // namespace ttclass
