#include "ttclass/mandy.hpp"

#include <string>

#include "ttclass/linalg.hpp"

namespace ttclass::mandy {

GramMatrix build_gram(const FeatureMatrixSet& features, Index gram_cap) {
    const Index p = features.coordinate_count();
    if (p < 1) throw ValidationError("build_gram: empty feature set");
    const Index m = features.sample_count();
    if (m < 1) throw ValidationError("build_gram: need at least one sample");
    for (const Matrix& F : features.factors)
        if (F.cols() != m) throw ValidationError("build_gram: inconsistent sample counts");
    if (m > gram_cap)
        throw ValidationError("build_gram: " + std::to_string(m) + " samples exceed the Gram cap of " +
                              std::to_string(gram_cap) +
                              " (m^2 entries); subsample the training set or raise TTCLASS_MAX_GRAM");

    Matrix G = local_gram(features.factors.front());
    for (Index mu = 1; mu < p; ++mu)
        G.array() *= local_gram(features.factors[static_cast<std::size_t>(mu)]).array();
    return GramMatrix{std::move(G), p};
}

KernelModel fit(const Matrix& X, const Matrix& Y, const FeatureBasis& basis, double ridge,
                Index gram_cap) {
    if (X.cols() != Y.cols()) throw ValidationError("mandy::fit: X and Y sample counts differ");
    if (X.cols() < 1) throw ValidationError("mandy::fit: empty training set");
    for (Index j = 0; j < Y.cols(); ++j) {
        Index ones = 0;
        for (Index i = 0; i < Y.rows(); ++i) {
            if (Y(i, j) == 1.0) ++ones;
            else if (Y(i, j) != 0.0) throw ValidationError("mandy::fit: Y must be one-hot");
        }
        if (ones != 1) throw ValidationError("mandy::fit: Y must be one-hot");
    }

    KernelModel model{Matrix(), build_feature_matrices(basis, X), basis, ridge};
    const GramMatrix gram = build_gram(model.training_features, gram_cap);
    model.Z = linalg::solve_gram(gram.values, Y, ridge);
    return model;
}

Matrix decision_values(const KernelModel& model, const Matrix& X_test, Index block_size) {
    if (X_test.rows() != model.basis.coordinate_count())
        throw ValidationError("decision_values: input dimension does not match model basis");
    if (block_size < 1) throw ValidationError("decision_values: block size must be >= 1");
    const Index m = model.training_features.sample_count();
    const Index m_test = X_test.cols();
    const Index p = model.basis.coordinate_count();

    Matrix scores(model.Z.rows(), m_test);
    for (Index start = 0; start < m_test; start += block_size) {
        const Index b = std::min(block_size, m_test - start);
        const FeatureMatrixSet test_feats =
            build_feature_matrices(model.basis, X_test.middleCols(start, b));
        // kernel block: running entrywise product of F_mu^T Psi_mu over mu
        Matrix K = Matrix::Ones(m, b);
        for (Index mu = 0; mu < p; ++mu)
            K.array() *= (model.training_features.factors[static_cast<std::size_t>(mu)].transpose() *
                          test_feats.factors[static_cast<std::size_t>(mu)])
                             .array();
        scores.middleCols(start, b) = model.Z * K;
    }
    return scores;
}

Vector decision_values(const KernelModel& model, const Vector& x) {
    return decision_values(model, Matrix(x), 1).col(0);
}

Index argmax_label(const Vector& scores) {
    if (scores.size() < 1) throw ValidationError("argmax_label: empty score vector");
    Index best = 0;
    for (Index i = 1; i < scores.size(); ++i)
        if (scores(i) > scores(best)) best = i;
    return best;
}

Index classify(const KernelModel& model, const Vector& x) {
    return argmax_label(decision_values(model, x));
}

}  // namespace ttclass::mandy
