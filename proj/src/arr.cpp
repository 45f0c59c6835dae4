#include "ttclass/arr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ttclass/linalg.hpp"
#include "ttclass/mandy.hpp"
#include "ttclass/rng.hpp"

namespace ttclass::arr {

void ArrConfig::validate() const {
    if (rank < 1) throw ValidationError("ArrConfig: rank must be >= 1");
    if (sweeps < 1) throw ValidationError("ArrConfig: sweeps must be >= 1");
    if (svd_threshold < 0.0 || svd_threshold >= 1.0)
        throw ValidationError("ArrConfig: svd_threshold must lie in [0, 1)");
    if (subproblem_ridge < 0.0) throw ValidationError("ArrConfig: subproblem_ridge must be >= 0");
    if (tol < 0.0) throw ValidationError("ArrConfig: tol must be >= 0");
}

TensorTrain init_guess(const std::vector<Index>& dims, Index rank, std::uint64_t seed) {
    if (rank < 1) throw ValidationError("init_guess: rank must be >= 1");
    if (dims.empty()) throw ValidationError("init_guess: no mode dimensions");
    const Index p = static_cast<Index>(dims.size());

    // feasible rank at each cut is bounded by the mode-dimension products
    // on either side; cap the products to avoid overflow at large p
    constexpr Index kProductCap = 1'000'000'000;
    std::vector<Index> ranks(static_cast<std::size_t>(p + 1), 1);
    Index left = 1;
    for (Index mu = 1; mu < p; ++mu) {
        left = std::min(kProductCap, left * dims[static_cast<std::size_t>(mu - 1)]);
        ranks[static_cast<std::size_t>(mu)] = std::min(rank, left);
    }
    Index right = 1;
    for (Index mu = p - 1; mu >= 1; --mu) {
        right = std::min(kProductCap, right * dims[static_cast<std::size_t>(mu)]);
        ranks[static_cast<std::size_t>(mu)] = std::min(ranks[static_cast<std::size_t>(mu)], right);
    }

    Rng rng(seed);
    std::vector<TTCore> cores;
    cores.reserve(static_cast<std::size_t>(p));
    for (Index mu = 0; mu < p; ++mu) {
        TTCore core(ranks[static_cast<std::size_t>(mu)], dims[static_cast<std::size_t>(mu)],
                    ranks[static_cast<std::size_t>(mu + 1)]);
        for (double& v : core.flat()) v = rng.normal();
        cores.push_back(std::move(core));
    }
    TensorTrain tt(std::move(cores));
    return p > 1 ? orthonormalize_right(tt, 1) : tt;
}

Matrix advance_left(const Matrix& P_mu, const Matrix& F_mu, const TTCore& core) {
    // P_{mu+1}(j, l) = sum_{k,i} P_mu(j, k) F_mu(i, j) core(k, i, l)
    Matrix next = Matrix::Zero(P_mu.rows(), core.r_next());
    for (Index i = 0; i < core.n(); ++i)
        next.noalias() +=
            ((P_mu * core.slice(i)).array().colwise() * F_mu.row(i).transpose().array()).matrix();
    return next;
}

Matrix advance_right(const Matrix& Q_mu, const Matrix& F_mu, const TTCore& core) {
    // Q_{mu-1}(k, j) = sum_{i,l} core(k, i, l) F_mu(i, j) Q_mu(l, j)
    Matrix next = Matrix::Zero(core.r_prev(), Q_mu.cols());
    for (Index i = 0; i < core.n(); ++i)
        next.noalias() += ((core.slice(i) * Q_mu).array().rowwise() * F_mu.row(i).array()).matrix();
    return next;
}

SweepState make_state(TensorTrain xi, const FeatureMatrixSet& features, Vector w) {
    const Index p = xi.order();
    const Index m = features.sample_count();
    if (features.coordinate_count() != p)
        throw ValidationError("make_state: feature set and train order differ");
    if (w.size() != m) throw ValidationError("make_state: label row length does not match samples");
    for (Index mu = 0; mu < p; ++mu)
        if (features.factors[static_cast<std::size_t>(mu)].rows() != xi.core(mu).n())
            throw ValidationError("make_state: mode dimension mismatch");

    SweepState state{std::move(xi), {}, {}, std::move(w), &features, {}};
    state.left_stack.assign(static_cast<std::size_t>(p), Matrix());
    state.right_stack.assign(static_cast<std::size_t>(p), Matrix());
    state.left_stack[0] = Matrix::Ones(m, 1);
    state.right_stack[static_cast<std::size_t>(p - 1)] = Matrix::Ones(1, m);
    for (Index mu = p - 2; mu >= 0; --mu)
        state.right_stack[static_cast<std::size_t>(mu)] =
            advance_right(state.right_stack[static_cast<std::size_t>(mu + 1)],
                          state.features->factors[static_cast<std::size_t>(mu + 1)],
                          state.xi.core(mu + 1));
    return state;
}

Matrix build_micro_matrix(const SweepState& state, Index mu) {
    const TTCore& core = state.xi.core(mu);
    const Matrix& P = state.left_stack[static_cast<std::size_t>(mu)];
    const Matrix& Q = state.right_stack[static_cast<std::size_t>(mu)];
    const Matrix& F = state.features->factors[static_cast<std::size_t>(mu)];
    const Index m = F.cols();
    if (P.rows() != m || P.cols() != core.r_prev())
        throw ValidationError("build_micro_matrix: stale left stack");
    if (Q.cols() != m || Q.rows() != core.r_next())
        throw ValidationError("build_micro_matrix: stale right stack");

    Matrix M(core.r_prev() * core.n() * core.r_next(), m);
    for (Index k = 0; k < core.r_prev(); ++k)
        for (Index i = 0; i < core.n(); ++i) {
            const auto scale = P.col(k).transpose().array() * F.row(i).array();
            M.middleRows((k * core.n() + i) * core.r_next(), core.r_next()) =
                (Q.array().rowwise() * scale).matrix();
        }
    return M;
}

namespace {

/// Core update solve: truncated SVD by default, or ridge-regularized
/// normal equations when an explicit l2 term is requested.
Vector solve_subproblem(const Matrix& M, const Vector& w, const ArrConfig& config) {
    if (config.subproblem_ridge > 0.0) {
        Matrix A = Matrix::Zero(M.rows(), M.rows());
        A.selfadjointView<Eigen::Lower>().rankUpdate(M);
        A = Matrix(A.selfadjointView<Eigen::Lower>());
        A.diagonal().array() += config.subproblem_ridge;
        return A.ldlt().solve(M * w);
    }
    return linalg::tsvd_least_squares(M, w, config.svd_threshold);
}

TTCore core_from_flat(const Vector& v, Index r_prev, Index n, Index r_next) {
    TTCore core(r_prev, n, r_next);
    std::copy(v.data(), v.data() + v.size(), core.flat().begin());
    return core;
}


}  // namespace

SweepState half_sweep_lr(SweepState state, const ArrConfig& config) {
    config.validate();
    const Index p = state.xi.order();
    std::vector<TTCore> cores = state.xi.cores();

    for (Index mu = 0; mu + 1 < p; ++mu) {
        if (mu > 0)
            state.left_stack[static_cast<std::size_t>(mu)] =
                advance_left(state.left_stack[static_cast<std::size_t>(mu - 1)],
                             state.features->factors[static_cast<std::size_t>(mu - 1)],
                             cores[static_cast<std::size_t>(mu - 1)]);
        state.xi = TensorTrain(cores);  // expose current cores to the micro builder
        const Matrix M = build_micro_matrix(state, mu);
        const Vector v = solve_subproblem(M, state.w, config);

        const TTCore& c = cores[static_cast<std::size_t>(mu)];
        TTCore solved = core_from_flat(v, c.r_prev(), c.n(), c.r_next());
        auto [Q, R] = linalg::thin_qr(left_unfold(solved).matrix);
        if (Q.cols() != c.r_next())
            throw NumericalError("half_sweep_lr: unfolding lost rank during QR");
        cores[static_cast<std::size_t>(mu)] =
            fold(Unfolding{Q, UnfoldKind::Left}, c.r_prev(), c.n(), c.r_next());
        const TTCore& next = cores[static_cast<std::size_t>(mu + 1)];
        cores[static_cast<std::size_t>(mu + 1)] =
            fold(Unfolding{R * right_unfold(next).matrix, UnfoldKind::Right}, c.r_next(), next.n(),
                 next.r_next());
    }
    state.xi = TensorTrain(std::move(cores));

    // residual via the tail of the left-stack recursion
    if (p >= 2) {
        state.left_stack[static_cast<std::size_t>(p - 1)] =
            advance_left(state.left_stack[static_cast<std::size_t>(p - 2)],
                         state.features->factors[static_cast<std::size_t>(p - 2)],
                         state.xi.core(p - 2));
    }
    const Matrix tail = advance_left(state.left_stack[static_cast<std::size_t>(p - 1)],
                                     state.features->factors[static_cast<std::size_t>(p - 1)],
                                     state.xi.core(p - 1));
    state.residual_log.push_back((state.w - tail.col(0)).norm());
    return state;
}

SweepState half_sweep_rl(SweepState state, const ArrConfig& config) {
    config.validate();
    const Index p = state.xi.order();
    std::vector<TTCore> cores = state.xi.cores();
    Vector last_solution;

    for (Index mu = p - 1; mu >= 0; --mu) {
        if (mu + 1 < p)
            state.right_stack[static_cast<std::size_t>(mu)] =
                advance_right(state.right_stack[static_cast<std::size_t>(mu + 1)],
                              state.features->factors[static_cast<std::size_t>(mu + 1)],
                              cores[static_cast<std::size_t>(mu + 1)]);
        state.xi = TensorTrain(cores);
        const Matrix M = build_micro_matrix(state, mu);
        const Vector v = solve_subproblem(M, state.w, config);

        const TTCore& c = cores[static_cast<std::size_t>(mu)];
        if (mu > 0) {
            TTCore solved = core_from_flat(v, c.r_prev(), c.n(), c.r_next());
            // right-orthonormalize: QR of the transposed right unfolding
            auto [Q, R] = linalg::thin_qr(right_unfold(solved).matrix.transpose());
            if (Q.cols() != c.r_prev())
                throw NumericalError("half_sweep_rl: unfolding lost rank during QR");
            cores[static_cast<std::size_t>(mu)] =
                fold(Unfolding{Q.transpose(), UnfoldKind::Right}, c.r_prev(), c.n(), c.r_next());
            const TTCore& prev = cores[static_cast<std::size_t>(mu - 1)];
            cores[static_cast<std::size_t>(mu - 1)] =
                fold(Unfolding{left_unfold(prev).matrix * R.transpose(), UnfoldKind::Left},
                     prev.r_prev(), prev.n(), c.r_prev());
        } else {
            cores[0] = core_from_flat(v, c.r_prev(), c.n(), c.r_next());
            // predictions of the fully updated train fall out of the last solve
            last_solution = M.transpose() * v;
        }
    }
    state.xi = TensorTrain(std::move(cores));
    state.residual_log.push_back((state.w - last_solution).norm());
    return state;
}

TensorTrain fit_label(const FeatureMatrixSet& features, const Vector& w, const ArrConfig& config,
                      std::vector<double>* residual_log) {
    config.validate();
    std::vector<Index> dims;
    dims.reserve(static_cast<std::size_t>(features.coordinate_count()));
    for (const Matrix& F : features.factors) dims.push_back(F.rows());

    SweepState state = make_state(init_guess(dims, config.rank, config.seed), features, w);
    double previous = std::numeric_limits<double>::infinity();
    for (int sweep = 0; sweep < config.sweeps; ++sweep) {
        if (state.xi.order() > 1) state = half_sweep_lr(std::move(state), config);
        state = half_sweep_rl(std::move(state), config);
        const double current = state.residual_log.back();
        if (config.tol > 0.0 && std::abs(previous - current) <= config.tol * std::max(1.0, previous))
            break;
        previous = current;
    }
    if (residual_log) *residual_log = state.residual_log;
    return state.xi;
}

TtModel fit(const Matrix& X, const Matrix& Y, const FeatureBasis& basis, const ArrConfig& config,
            std::vector<std::vector<double>>* residual_logs, int workers) {
    config.validate();
    if (X.cols() != Y.cols()) throw ValidationError("arr::fit: X and Y sample counts differ");
    const Index d_prime = Y.rows();
    if (d_prime < 1) throw ValidationError("arr::fit: no label rows");
    for (Index j = 0; j < Y.cols(); ++j) {
        Index ones = 0;
        for (Index i = 0; i < d_prime; ++i) {
            if (Y(i, j) == 1.0) ++ones;
            else if (Y(i, j) != 0.0) throw ValidationError("arr::fit: Y must be one-hot");
        }
        if (ones != 1) throw ValidationError("arr::fit: Y must be one-hot");
    }

    const FeatureMatrixSet features = build_feature_matrices(basis, X);
    std::vector<TensorTrain> parts;
    parts.reserve(static_cast<std::size_t>(d_prime));
    for (Index i = 0; i < d_prime; ++i) parts.emplace_back(init_guess(std::vector<Index>{1}, 1, 0));
    if (residual_logs) residual_logs->assign(static_cast<std::size_t>(d_prime), {});

    std::exception_ptr failure;
    // labels run in parallel here; the BLAS pool must not oversubscribe
    linalg::set_blas_threads(1);
#ifdef _OPENMP
    const int n_threads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for num_threads(n_threads) schedule(static, 1)
#endif
    for (Index i = 0; i < d_prime; ++i) {
        try {
            std::vector<double> log;
            TensorTrain part = fit_label(features, Y.row(i).transpose(), config, &log);
            parts[static_cast<std::size_t>(i)] = std::move(part);
            if (residual_logs) (*residual_logs)[static_cast<std::size_t>(i)] = std::move(log);
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
            if (!failure) failure = std::current_exception();
        }
    }
    linalg::set_blas_threads(0);
    if (failure) std::rethrow_exception(failure);

    TensorTrain assembled = direct_sum_labels(parts);
    return TtModel{std::move(parts), std::move(assembled), basis, config};
}

Vector decision_values(const TtModel& model, const Vector& x) {
    return evaluate(model.xi, apply_basis(model.basis, x));
}

Matrix decision_values(const TtModel& model, const Matrix& X_test) {
    if (X_test.rows() != model.basis.coordinate_count())
        throw ValidationError("decision_values: input dimension does not match model basis");
    const FeatureMatrixSet feats = build_feature_matrices(model.basis, X_test);
    const Index d_prime = static_cast<Index>(model.parts.size());
    Matrix scores(d_prime, X_test.cols());
    for (Index i = 0; i < d_prime; ++i) {
        const TensorTrain& part = model.parts[static_cast<std::size_t>(i)];
        Matrix P = Matrix::Ones(X_test.cols(), 1);
        for (Index mu = 0; mu < part.order(); ++mu)
            P = advance_left(P, feats.factors[static_cast<std::size_t>(mu)], part.core(mu));
        scores.row(i) = P.col(0).transpose();
    }
    return scores;
}

Index classify(const TtModel& model, const Vector& x) {
    return mandy::argmax_label(decision_values(model, x));
}

}  // namespace ttclass::arr
