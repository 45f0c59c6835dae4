#include "ttclass/features.hpp"

#include <atomic>
#include <cmath>
#include <iostream>

namespace ttclass {

FeatureBasis FeatureBasis::trig(Index d, double alpha) {
    if (d < 1) throw ValidationError("FeatureBasis::trig: d must be >= 1");
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw ValidationError("FeatureBasis::trig: alpha must be positive and finite");
    FeatureBasis basis;
    basis.kind_ = Kind::TrigAlpha;
    basis.alpha_ = alpha;
    basis.p_ = d;
    basis.dims_.assign(static_cast<std::size_t>(d), 2);
    return basis;
}

FeatureBasis FeatureBasis::custom(std::vector<std::vector<std::function<double(double)>>> functions) {
    if (functions.empty()) throw ValidationError("FeatureBasis::custom: no coordinate maps");
    FeatureBasis basis;
    basis.kind_ = Kind::Custom;
    basis.p_ = static_cast<Index>(functions.size());
    for (const auto& fns : functions) {
        if (fns.empty()) throw ValidationError("FeatureBasis::custom: empty function list");
        basis.dims_.push_back(static_cast<Index>(fns.size()));
    }
    basis.functions_ = std::move(functions);
    return basis;
}

Vector FeatureBasis::map(Index mu, double x_mu) const {
    if (mu < 0 || mu >= p_) throw ValidationError("FeatureBasis::map: coordinate index out of range");
    if (kind_ == Kind::TrigAlpha) {
        Vector v(2);
        v << std::cos(alpha_ * x_mu), std::sin(alpha_ * x_mu);
        return v;
    }
    const auto& fns = functions_[static_cast<std::size_t>(mu)];
    Vector v(static_cast<Index>(fns.size()));
    for (std::size_t i = 0; i < fns.size(); ++i) {
        v(static_cast<Index>(i)) = fns[i](x_mu);
        if (!std::isfinite(v(static_cast<Index>(i))))
            throw NumericalError("FeatureBasis: custom map produced non-finite value");
    }
    return v;
}

namespace {

std::atomic<bool> g_range_warned{false};

void warn_range_once(double value) {
    if (!g_range_warned.exchange(true))
        std::cerr << "ttclass: warning: trig feature map input " << value
                  << " outside [0, 1]; results stay finite but the map was tuned for unit-scaled data\n";
}

}  // namespace

std::vector<Vector> apply_basis(const FeatureBasis& basis, const Vector& x) {
    if (x.size() != basis.coordinate_count())
        throw ValidationError("apply_basis: input dimension does not match basis");
    std::vector<Vector> out;
    out.reserve(static_cast<std::size_t>(basis.coordinate_count()));
    for (Index mu = 0; mu < basis.coordinate_count(); ++mu) {
        const double v = x(mu);
        if (basis.kind() == FeatureBasis::Kind::TrigAlpha && (v < 0.0 || v > 1.0)) warn_range_once(v);
        out.push_back(basis.map(mu, v));
    }
    return out;
}

FeatureMatrixSet build_feature_matrices(const FeatureBasis& basis, const Matrix& X) {
    if (X.rows() != basis.coordinate_count())
        throw ValidationError("build_feature_matrices: row count does not match basis");
    if (!X.allFinite()) throw ValidationError("build_feature_matrices: non-finite data");
    const Index m = X.cols();
    FeatureMatrixSet set;
    set.factors.reserve(static_cast<std::size_t>(basis.coordinate_count()));
    if (basis.kind() == FeatureBasis::Kind::TrigAlpha) {
        const double alpha = basis.alpha();
        if (m > 0 && (X.minCoeff() < 0.0 || X.maxCoeff() > 1.0)) warn_range_once(X.minCoeff() < 0.0 ? X.minCoeff() : X.maxCoeff());
        for (Index mu = 0; mu < basis.coordinate_count(); ++mu) {
            Matrix F(2, m);
            F.row(0) = (alpha * X.row(mu)).array().cos();
            F.row(1) = (alpha * X.row(mu)).array().sin();
            set.factors.push_back(std::move(F));
        }
        return set;
    }
    for (Index mu = 0; mu < basis.coordinate_count(); ++mu) {
        Matrix F(basis.dim(mu), m);
        for (Index j = 0; j < m; ++j) F.col(j) = basis.map(mu, X(mu, j));
        set.factors.push_back(std::move(F));
    }
    return set;
}

Matrix local_gram(const Matrix& F_mu) {
    if (!F_mu.allFinite()) throw ValidationError("local_gram: non-finite entries");
    const Index m = F_mu.cols();
    Matrix theta = Matrix::Zero(m, m);
    theta.selfadjointView<Eigen::Lower>().rankUpdate(F_mu.transpose());
    return theta.selfadjointView<Eigen::Lower>();
}

DenseTensor materialize_psi_hat(const FeatureBasis& basis, const Matrix& X, Index shift_index,
                                Index cap) {
    const Index p = basis.coordinate_count();
    const Index m = X.cols();
    if (X.rows() != p) throw ValidationError("materialize_psi_hat: data dimension mismatch");
    if (m < 1) throw ValidationError("materialize_psi_hat: empty sample set");
    if (shift_index < 0 || shift_index >= p)
        throw ValidationError("materialize_psi_hat: shift index out of range");

    Index total = m;
    for (Index mu = 0; mu < p; ++mu) {
        const Index n_mu = basis.dim(mu);
        if (total > cap / n_mu) throw ValidationError("materialize_psi_hat: dense cap exceeded");
        total *= n_mu;
    }

    const FeatureMatrixSet feats = build_feature_matrices(basis, X);

    // Contract the explicit core chain. Ranks are m except at the ends; the
    // core at shift_index additionally carries the open sample mode j. The
    // accumulator maps (already-materialized mode indices [, j]) x rank.
    // Cores after the first are diagonal in the rank indices, so each step
    // is an elementwise scale rather than a matrix product.
    const auto& F = feats.factors;

    // acc has shape (prefix_modes [, j], k) flattened row-major with k fastest.
    std::vector<double> acc;
    Index rank = 1;
    Index rows = 1;

    for (Index mu = 0; mu < p; ++mu) {
        const Index n_mu = basis.dim(mu);
        const bool first = (mu == 0);
        const bool carries_sample = (mu == shift_index);
        const Index new_rank = (mu == p - 1) ? 1 : m;

        std::vector<double> next;
        if (first) {
            // boundary core: (1, n_mu [, j], k) with entry psi(x^(k or j))
            if (carries_sample) {
                // entry (i, j, k) = F(i, j) * delta_{jk}  (or k absent when p == 1)
                rows = n_mu * m;
                next.assign(static_cast<std::size_t>(rows * new_rank), 0.0);
                for (Index i = 0; i < n_mu; ++i)
                    for (Index j = 0; j < m; ++j) {
                        if (new_rank == 1)
                            next[static_cast<std::size_t>(i * m + j)] = F[0](i, j);
                        else
                            next[static_cast<std::size_t>((i * m + j) * new_rank + j)] = F[0](i, j);
                    }
            } else {
                rows = n_mu;
                next.assign(static_cast<std::size_t>(rows * new_rank), 0.0);
                for (Index i = 0; i < n_mu; ++i)
                    for (Index k = 0; k < new_rank; ++k)
                        next[static_cast<std::size_t>(i * new_rank + k)] = F[0](i, k);
            }
        } else {
            // interior/last cores are diagonal in the rank index: entry
            // (k, i, k) = F_mu(i, k); the shifted core adds delta_{jk}.
            const Index out_rows = rows * n_mu * (carries_sample ? m : 1);
            next.assign(static_cast<std::size_t>(out_rows * new_rank), 0.0);
            for (Index row = 0; row < rows; ++row) {
                for (Index i = 0; i < n_mu; ++i) {
                    for (Index k = 0; k < rank; ++k) {
                        const double a = acc[static_cast<std::size_t>(row * rank + k)];
                        if (a == 0.0) continue;
                        const double f = F[static_cast<std::size_t>(mu)](i, k);
                        if (carries_sample) {
                            const Index j = k;  // delta_{jk}
                            const Index out_row = (row * n_mu + i) * m + j;
                            if (new_rank == 1)
                                next[static_cast<std::size_t>(out_row)] += a * f;
                            else
                                next[static_cast<std::size_t>(out_row * new_rank + k)] += a * f;
                        } else {
                            const Index out_row = row * n_mu + i;
                            if (new_rank == 1) {
                                // last core must close on the sample index
                                next[static_cast<std::size_t>(out_row)] += a * f;
                            } else {
                                next[static_cast<std::size_t>(out_row * new_rank + k)] += a * f;
                            }
                        }
                    }
                }
            }
            rows = out_rows;
        }
        acc = std::move(next);
        rank = new_rank;
    }

    // acc rows enumerate (n_1, ..., n_shift, j, n_{shift+1}, ..., n_p);
    // move the sample index to the trailing position.
    DenseTensor out;
    out.dims.reserve(static_cast<std::size_t>(p + 1));
    for (Index mu = 0; mu < p; ++mu) out.dims.push_back(basis.dim(mu));
    out.dims.push_back(m);
    out.values.assign(static_cast<std::size_t>(total), 0.0);

    // strides of the accumulator layout
    std::vector<Index> acc_dims;
    for (Index mu = 0; mu <= shift_index; ++mu) acc_dims.push_back(basis.dim(mu));
    acc_dims.insert(acc_dims.begin() + shift_index + 1, m);
    for (Index mu = shift_index + 1; mu < p; ++mu) acc_dims.push_back(basis.dim(mu));

    std::vector<Index> idx(acc_dims.size(), 0);
    for (Index flat = 0; flat < total; ++flat) {
        // decode acc flat index
        Index rem = flat;
        for (Index k = static_cast<Index>(acc_dims.size()) - 1; k >= 0; --k) {
            idx[static_cast<std::size_t>(k)] = rem % acc_dims[static_cast<std::size_t>(k)];
            rem /= acc_dims[static_cast<std::size_t>(k)];
        }
        // re-encode with the sample index last
        Index out_flat = 0;
        for (Index mu = 0; mu < static_cast<Index>(acc_dims.size()); ++mu) {
            if (mu == shift_index + 1) continue;  // sample position in acc layout
            out_flat = out_flat * acc_dims[static_cast<std::size_t>(mu)] + idx[static_cast<std::size_t>(mu)];
        }
        out_flat = out_flat * m + idx[static_cast<std::size_t>(shift_index + 1)];
        out.values[static_cast<std::size_t>(out_flat)] = acc[static_cast<std::size_t>(flat)];
    }
    return out;
}

}  // namespace ttclass
