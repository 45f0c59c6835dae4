#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "ttclass/dense_tensor.hpp"
#include "ttclass/errors.hpp"

namespace ttclass {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Order-3 tensor-train core of shape (r_prev, n, r_next).
///
/// Entries are stored in one flat buffer with the fixed index order
/// (k_prev, i, k_next), k_next fastest. Under this layout both unfoldings
/// are plain reshapes:
///   left  unfolding: (r_prev * n) x r_next, row index (k_prev, i), k_prev slowest
///   right unfolding: r_prev x (n * r_next), column index (i, k_next), i slowest
class TTCore {
public:
    TTCore(Index r_prev, Index n, Index r_next);

    [[nodiscard]] Index r_prev() const { return r_prev_; }
    [[nodiscard]] Index n() const { return n_; }
    [[nodiscard]] Index r_next() const { return r_next_; }
    [[nodiscard]] Index size() const { return static_cast<Index>(data_.size()); }

    double operator()(Index k_prev, Index i, Index k_next) const {
        return data_[static_cast<std::size_t>((k_prev * n_ + i) * r_next_ + k_next)];
    }
    double& operator()(Index k_prev, Index i, Index k_next) {
        return data_[static_cast<std::size_t>((k_prev * n_ + i) * r_next_ + k_next)];
    }

    [[nodiscard]] const std::vector<double>& flat() const { return data_; }
    [[nodiscard]] std::vector<double>& flat() { return data_; }

    /// Mode slice (:, i, :) as an r_prev x r_next matrix.
    [[nodiscard]] Matrix slice(Index i) const;

    /// All entries finite (no NaN/Inf).
    [[nodiscard]] bool is_finite() const;

private:
    Index r_prev_, n_, r_next_;
    std::vector<double> data_;
};

enum class UnfoldKind { Left, Right };

/// Matricization of a TT core.
struct Unfolding {
    Matrix matrix;
    UnfoldKind kind;
};

[[nodiscard]] Unfolding left_unfold(const TTCore& core);
[[nodiscard]] Unfolding right_unfold(const TTCore& core);

/// Inverse of left_unfold / right_unfold for the given core shape.
[[nodiscard]] TTCore fold(const Unfolding& u, Index r_prev, Index n, Index r_next);

/// Tensor train: a chain of order-3 cores with matching ranks and
/// boundary ranks 1. Immutable after construction; all operations
/// return new values.
class TensorTrain {
public:
    explicit TensorTrain(std::vector<TTCore> cores);

    [[nodiscard]] Index order() const { return static_cast<Index>(cores_.size()); }
    [[nodiscard]] const TTCore& core(Index mu) const { return cores_[static_cast<std::size_t>(mu)]; }
    [[nodiscard]] const std::vector<TTCore>& cores() const { return cores_; }

    /// Mode dimensions n_1..n_p.
    [[nodiscard]] std::vector<Index> mode_dims() const;
    /// Rank chain r_0..r_p (first and last are 1).
    [[nodiscard]] std::vector<Index> ranks() const;

    /// Replace one core; rank compatibility with the neighbors is re-checked.
    [[nodiscard]] TensorTrain with_core(Index mu, TTCore core) const;

private:
    std::vector<TTCore> cores_;
};

/// Default cap on dense materializations (number of entries).
inline constexpr Index kDenseCap = 10'000'000;

/// Left-orthonormalize the first `upto` cores by sequential reduced SVDs;
/// the non-orthonormal factor of each step is absorbed into the next core.
/// Requires 0 <= upto <= order-1, so there is always a neighbor to absorb
/// into. The represented tensor is unchanged up to round-off; ranks may
/// shrink when numerically zero singular values (below 1e-14 * sigma_max)
/// are discarded.
[[nodiscard]] TensorTrain orthonormalize_left(const TensorTrain& tt, Index upto);

/// Mirror of orthonormalize_left: cores with index >= downto become
/// right-orthonormal, absorbing factors into the previous core.
/// Requires 1 <= downto <= order (downto == order is a no-op).
[[nodiscard]] TensorTrain orthonormalize_right(const TensorTrain& tt, Index downto);

/// Materialize the represented tensor densely (row-major, last mode fastest).
/// Throws ValidationError when the entry count exceeds `cap`.
[[nodiscard]] DenseTensor contract_full(const TensorTrain& tt, Index cap = kDenseCap);

/// Contract the train with one feature vector per mode. With
/// features.size() == order the result has length r_p == 1 (a scalar).
/// With features.size() == order - 1 the last core is treated as a label
/// core: its mode is left open and the result is a vector of that length.
[[nodiscard]] Vector evaluate(const TensorTrain& tt, const std::vector<Vector>& features);

/// Combine per-label trains into one train with a trailing label mode,
/// by block-diagonal rank stacking. Evaluating the result against the
/// features of x yields the vector of per-label evaluations.
[[nodiscard]] TensorTrain direct_sum_labels(const std::vector<TensorTrain>& parts);

/// Binary serialization. Header: magic "TTC1", then the core count and the
/// per-core (r_prev, n, r_next) triplets as 64-bit little-endian unsigned
/// integers, followed by each core's entries as 64-bit little-endian floats
/// in the documented (k_prev, i, k_next) order, k_next fastest.
void save_tensor_train(std::ostream& out, const TensorTrain& tt);
[[nodiscard]] TensorTrain load_tensor_train(std::istream& in);

}  // namespace ttclass
