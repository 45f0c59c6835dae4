#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "ttclass/features.hpp"
#include "ttclass/tensor_train.hpp"

namespace ttclass::arr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct ArrConfig {
    Index rank = 10;             ///< target TT rank of each per-label train
    int sweeps = 5;              ///< repetitions of (left-right, right-left) half sweeps
    double svd_threshold = 1e-2; ///< relative truncation for the subproblem solves
    double subproblem_ridge = 0.0; ///< > 0 swaps truncation for an explicit l2 term per solve
    std::uint64_t seed = 42;     ///< seed of the Gaussian initial guess
    double tol = 0.0;            ///< optional early exit on relative residual change; 0 disables

    void validate() const;
};

/// Mutable state of one per-label optimization: the current coefficient
/// train plus the contraction stacks against the training features.
///
/// left_stack[mu] (m x r_{mu-1}) contracts cores 0..mu-1 with the features;
/// right_stack[mu] (r_mu x m) contracts cores mu+1..p-1. The boundary
/// entries are all-ones vectors. Entries are refreshed lazily while
/// sweeping; an entry is only read at positions where it is fresh.
struct SweepState {
    TensorTrain xi;
    std::vector<Matrix> left_stack;
    std::vector<Matrix> right_stack;
    Vector w;
    const FeatureMatrixSet* features;
    std::vector<double> residual_log;  ///< training residual after each half sweep
};

/// Random initial guess: seeded i.i.d. standard normal cores with ranks
/// capped at the feasible unfolding ranks, then right-orthonormalized.
[[nodiscard]] TensorTrain init_guess(const std::vector<Index>& dims, Index rank, std::uint64_t seed);

/// Fresh state for a right-orthonormalized initial train: builds the full
/// right stack and the trivial left boundary.
[[nodiscard]] SweepState make_state(TensorTrain xi, const FeatureMatrixSet& features, Vector w);

/// Stack recurrences.
[[nodiscard]] Matrix advance_left(const Matrix& P_mu, const Matrix& F_mu, const TTCore& core);
[[nodiscard]] Matrix advance_right(const Matrix& Q_mu, const Matrix& F_mu, const TTCore& core);

/// Subproblem matrix at core mu: (r_{mu-1} * n_mu * r_mu) x m, column j the
/// outer product of the j-th left stack row, feature column, and right
/// stack column. Row order matches the flat core layout, so the subproblem
/// solution reshapes into a core directly.
[[nodiscard]] Matrix build_micro_matrix(const SweepState& state, Index mu);

/// One left-to-right half sweep over cores 0..p-2: refresh the left stack
/// entry, solve the truncated-SVD subproblem, QR the updated core
/// left-orthonormal and absorb the triangular factor into the right
/// neighbor. Appends the training residual to the log.
[[nodiscard]] SweepState half_sweep_lr(SweepState state, const ArrConfig& config);

/// Mirror half sweep over cores p-1..0; cores keep right-orthonormal form
/// except core 0, which receives the plain reshaped solution.
[[nodiscard]] SweepState half_sweep_rl(SweepState state, const ArrConfig& config);

/// Full per-label fit: initial guess, right stack, then `sweeps`
/// repetitions of both half sweeps. Optionally records the residual log.
[[nodiscard]] TensorTrain fit_label(const FeatureMatrixSet& features, const Vector& w,
                                    const ArrConfig& config,
                                    std::vector<double>* residual_log = nullptr);

/// Low-rank classifier: per-label coefficient trains plus their
/// block-diagonal assembly with a trailing label mode.
struct TtModel {
    std::vector<TensorTrain> parts;
    TensorTrain xi;  ///< direct_sum_labels(parts)
    FeatureBasis basis;
    ArrConfig config;
};

/// Fit one train per label row (parallel across labels) and assemble.
/// Residual logs, when requested, get one entry per label row.
[[nodiscard]] TtModel fit(const Matrix& X, const Matrix& Y, const FeatureBasis& basis,
                          const ArrConfig& config,
                          std::vector<std::vector<double>>* residual_logs = nullptr,
                          int workers = 0);

[[nodiscard]] Vector decision_values(const TtModel& model, const Vector& x);
[[nodiscard]] Matrix decision_values(const TtModel& model, const Matrix& X_test);
[[nodiscard]] Index classify(const TtModel& model, const Vector& x);

}  // namespace ttclass::arr
