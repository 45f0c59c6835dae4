#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "test_helpers.hpp"
#include "ttclass/tensor_train.hpp"

using namespace ttclass;
using testing::random_core;
using testing::random_train;

TEST_CASE("left unfolding of a boundary core") {
    TTCore core(1, 2, 1);
    core(0, 0, 0) = 3.0;
    core(0, 1, 0) = -4.0;
    const Unfolding u = left_unfold(core);
    CHECK(u.matrix.rows() == 2);
    CHECK(u.matrix.cols() == 1);
    CHECK(u.matrix(0, 0) == 3.0);
    CHECK(u.matrix(1, 0) == -4.0);

    const Unfolding r = right_unfold(core);
    CHECK(r.matrix.rows() == 1);
    CHECK(r.matrix.cols() == 2);
    CHECK(r.matrix(0, 0) == 3.0);
    CHECK(r.matrix(0, 1) == -4.0);
}

TEST_CASE("unfold round trips reproduce the core exactly") {
    Rng rng(7);
    const TTCore core = random_core(2, 2, 2, rng);
    CHECK(fold(left_unfold(core), 2, 2, 2).flat() == core.flat());
    CHECK(fold(right_unfold(core), 2, 2, 2).flat() == core.flat());
}

TEST_CASE("unfoldings match the index-loop oracle") {
    Rng rng(11);
    const TTCore core = random_core(3, 4, 2, rng);
    const Unfolding left = left_unfold(core);
    for (Index k = 0; k < 3; ++k)
        for (Index i = 0; i < 4; ++i)
            for (Index l = 0; l < 2; ++l) CHECK(left.matrix(k * 4 + i, l) == core(k, i, l));

    const TTCore wide = random_core(2, 3, 4, rng);
    const Unfolding right = right_unfold(wide);
    for (Index k = 0; k < 2; ++k)
        for (Index i = 0; i < 3; ++i)
            for (Index l = 0; l < 4; ++l) CHECK(right.matrix(k, i * 4 + l) == wide(k, i, l));
}

TEST_CASE("rank chain validation") {
    std::vector<TTCore> bad;
    bad.emplace_back(1, 2, 3);
    bad.emplace_back(2, 2, 1);  // 3 != 2
    CHECK_THROWS_AS(TensorTrain(std::move(bad)), ValidationError);

    std::vector<TTCore> open;
    open.emplace_back(1, 2, 2);
    open.emplace_back(2, 2, 2);  // r_p != 1
    CHECK_THROWS_AS(TensorTrain(std::move(open)), ValidationError);
}

TEST_CASE("contract_full of a two-core outer product") {
    Vector u(3), v(2);
    u << 1.0, -2.0, 0.5;
    v << 0.25, 4.0;
    TTCore a(1, 3, 1), b(1, 2, 1);
    for (Index i = 0; i < 3; ++i) a(0, i, 0) = u(i);
    for (Index i = 0; i < 2; ++i) b(0, i, 0) = v(i);
    const DenseTensor t = contract_full(TensorTrain({a, b}));
    for (Index i = 0; i < 3; ++i)
        for (Index j = 0; j < 2; ++j) CHECK(t({i, j}) == doctest::Approx(u(i) * v(j)).epsilon(1e-14));
}

TEST_CASE("contract_full of all-ones rank-one cores is all ones") {
    std::vector<TTCore> cores;
    for (int mu = 0; mu < 3; ++mu) {
        TTCore c(1, 2, 1);
        c(0, 0, 0) = 1.0;
        c(0, 1, 0) = 1.0;
        cores.push_back(c);
    }
    const DenseTensor t = contract_full(TensorTrain(std::move(cores)));
    for (double v : t.values) CHECK(v == 1.0);
}

TEST_CASE("contract_full matches the nested-loop oracle") {
    Rng rng(3);
    const TensorTrain tt = random_train({2, 3, 2}, {1, 2, 3, 1}, rng);
    const DenseTensor dense = contract_full(tt);
    for (Index flat = 0; flat < dense.size(); ++flat) {
        const auto idx = testing::unflatten(flat, dense.dims);
        CHECK(dense(idx) == doctest::Approx(testing::dense_entry_oracle(tt, idx)).epsilon(1e-12));
    }
}

TEST_CASE("contract_full rejects oversized trains") {
    Rng rng(5);
    const TensorTrain tt = random_train({8, 8, 8}, {1, 2, 2, 1}, rng);
    CHECK_THROWS_AS(contract_full(tt, 100), ValidationError);
}

TEST_CASE("left orthonormalization preserves the tensor and orthonormalizes") {
    Rng rng(17);
    const TensorTrain tt = random_train({3, 2, 4, 2}, {1, 3, 4, 2, 1}, rng);
    const TensorTrain ortho = orthonormalize_left(tt, tt.order() - 1);

    const DenseTensor before = contract_full(tt);
    const DenseTensor after = contract_full(ortho);
    double max_err = 0.0;
    for (std::size_t i = 0; i < before.values.size(); ++i)
        max_err = std::max(max_err, std::abs(before.values[i] - after.values[i]));
    CHECK(max_err <= 1e-10);

    for (Index mu = 0; mu < ortho.order() - 1; ++mu) {
        const Matrix L = left_unfold(ortho.core(mu)).matrix;
        const Matrix gram = L.transpose() * L;
        CHECK((gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("right orthonormalization mirrors the left one") {
    Rng rng(19);
    const TensorTrain tt = random_train({2, 3, 2, 3}, {1, 2, 4, 3, 1}, rng);
    const TensorTrain ortho = orthonormalize_right(tt, 1);

    const DenseTensor before = contract_full(tt);
    const DenseTensor after = contract_full(ortho);
    for (std::size_t i = 0; i < before.values.size(); ++i)
        CHECK(before.values[i] == doctest::Approx(after.values[i]).epsilon(1e-10));

    for (Index mu = 1; mu < ortho.order(); ++mu) {
        const Matrix R = right_unfold(ortho.core(mu)).matrix;
        const Matrix gram = R * R.transpose();
        CHECK((gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("orthonormalizing an already orthonormal train is stable") {
    Rng rng(23);
    const TensorTrain tt = random_train({2, 2, 2}, {1, 2, 2, 1}, rng);
    const TensorTrain once = orthonormalize_left(tt, 2);
    const TensorTrain twice = orthonormalize_left(once, 2);
    const DenseTensor a = contract_full(once);
    const DenseTensor b = contract_full(twice);
    for (std::size_t i = 0; i < a.values.size(); ++i)
        CHECK(a.values[i] == doctest::Approx(b.values[i]).epsilon(1e-12));
}

TEST_CASE("rank-one unit-vector train is unchanged by orthonormalization") {
    TTCore a(1, 2, 1), b(1, 2, 1);
    a(0, 0, 0) = 1.0;  // e_1
    b(0, 1, 0) = 1.0;  // e_2
    const TensorTrain tt({a, b});
    const TensorTrain ortho = orthonormalize_left(tt, 1);
    CHECK(ortho.ranks() == tt.ranks());
    const DenseTensor before = contract_full(tt);
    const DenseTensor after = contract_full(ortho);
    for (std::size_t i = 0; i < before.values.size(); ++i)
        CHECK(before.values[i] == doctest::Approx(after.values[i]).epsilon(1e-14));
}

TEST_CASE("evaluate of a rank-one train against its own unit factors") {
    Vector u(2), v(3);
    u << 1.0, 0.0;
    v << 0.0, 1.0, 0.0;
    TTCore a(1, 2, 1), b(1, 3, 1);
    for (Index i = 0; i < 2; ++i) a(0, i, 0) = u(i);
    for (Index i = 0; i < 3; ++i) b(0, i, 0) = v(i);
    const TensorTrain tt({a, b});
    const Vector result = evaluate(tt, {u, v});
    CHECK(result.size() == 1);
    CHECK(result(0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("evaluate of the zero train is zero") {
    const TensorTrain tt({TTCore(1, 2, 2), TTCore(2, 2, 1)});
    Vector f(2);
    f << 0.3, -0.7;
    CHECK(evaluate(tt, {f, f})(0) == 0.0);
}

TEST_CASE("evaluate matches the dense contraction oracle") {
    Rng rng(29);
    const TensorTrain tt = random_train({2, 3, 2}, {1, 3, 2, 1}, rng);
    std::vector<Vector> features;
    for (Index dim : std::vector<Index>{2, 3, 2}) {
        Vector f(dim);
        for (Index i = 0; i < dim; ++i) f(i) = rng.uniform(-1.0, 1.0);
        features.push_back(f);
    }
    const DenseTensor dense = contract_full(tt);
    double expected = 0.0;
    for (Index flat = 0; flat < dense.size(); ++flat) {
        const auto idx = testing::unflatten(flat, dense.dims);
        double prod = dense(idx);
        for (std::size_t mu = 0; mu < idx.size(); ++mu)
            prod *= features[mu](idx[mu]);
        expected += prod;
    }
    CHECK(evaluate(tt, features)(0) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("evaluate is multilinear in each feature slot") {
    Rng rng(31);
    const TensorTrain tt = random_train({2, 2, 3}, {1, 2, 2, 1}, rng);
    std::vector<Vector> features;
    for (Index dim : std::vector<Index>{2, 2, 3}) {
        Vector f(dim);
        for (Index i = 0; i < dim; ++i) f(i) = rng.uniform(-1.0, 1.0);
        features.push_back(f);
    }
    for (std::size_t slot = 0; slot < features.size(); ++slot) {
        Vector u(features[slot].size()), w(features[slot].size());
        for (Index i = 0; i < u.size(); ++i) {
            u(i) = rng.uniform(-1.0, 1.0);
            w(i) = rng.uniform(-1.0, 1.0);
        }
        const double a = rng.uniform(-2.0, 2.0), b = rng.uniform(-2.0, 2.0);
        auto with = [&](const Vector& f) {
            std::vector<Vector> fs = features;
            fs[slot] = f;
            return evaluate(tt, fs)(0);
        };
        CHECK(with(a * u + b * w) == doctest::Approx(a * with(u) + b * with(w)).epsilon(1e-10));
    }
}

TEST_CASE("direct_sum_labels with one part reduces to plain evaluation") {
    Rng rng(37);
    const TensorTrain part = random_train({2, 2}, {1, 2, 1}, rng);
    const TensorTrain combined = direct_sum_labels({part});
    std::vector<Vector> features;
    for (int mu = 0; mu < 2; ++mu) {
        Vector f(2);
        f << rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0);
        features.push_back(f);
    }
    const Vector out = evaluate(combined, features);
    CHECK(out.size() == 1);
    CHECK(out(0) == doctest::Approx(evaluate(part, features)(0)).epsilon(1e-12));
}

TEST_CASE("direct_sum_labels of identical parts yields equal entries") {
    Rng rng(41);
    const TensorTrain part = random_train({2, 3}, {1, 2, 1}, rng);
    const TensorTrain combined = direct_sum_labels({part, part});
    Vector f0(2), f1(3);
    f0 << 0.2, -0.5;
    f1 << 1.0, 0.1, -0.3;
    const Vector out = evaluate(combined, {f0, f1});
    CHECK(out.size() == 2);
    CHECK(out(0) == doctest::Approx(out(1)).epsilon(1e-12));
}

TEST_CASE("direct_sum_labels matches per-part evaluations") {
    Rng rng(43);
    std::vector<TensorTrain> parts;
    for (int i = 0; i < 3; ++i) parts.push_back(random_train({2, 2, 2}, {1, 2, 2, 1}, rng));
    const TensorTrain combined = direct_sum_labels(parts);
    CHECK(combined.order() == 4);

    std::vector<Vector> features;
    for (int mu = 0; mu < 3; ++mu) {
        Vector f(2);
        f << rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0);
        features.push_back(f);
    }
    const Vector out = evaluate(combined, features);
    for (std::size_t i = 0; i < parts.size(); ++i)
        CHECK(out(static_cast<Index>(i)) ==
              doctest::Approx(evaluate(parts[i], features)(0)).epsilon(1e-10));
}

TEST_CASE("direct_sum_labels rejects mismatched mode dimensions") {
    Rng rng(47);
    const TensorTrain a = random_train({2, 2}, {1, 2, 1}, rng);
    const TensorTrain b = random_train({2, 3}, {1, 2, 1}, rng);
    CHECK_THROWS_AS(direct_sum_labels({a, b}), ValidationError);
}

TEST_CASE("serialization round trip is exact") {
    Rng rng(53);
    const TensorTrain tt = random_train({2, 3, 2}, {1, 2, 3, 1}, rng);
    std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
    save_tensor_train(buf, tt);
    const TensorTrain back = load_tensor_train(buf);
    REQUIRE(back.order() == tt.order());
    for (Index mu = 0; mu < tt.order(); ++mu) CHECK(back.core(mu).flat() == tt.core(mu).flat());
}

TEST_CASE("serialization header layout is stable") {
    TTCore a(1, 2, 1);
    a(0, 0, 0) = 1.5;
    a(0, 1, 0) = -2.0;
    std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
    save_tensor_train(buf, TensorTrain({a}));
    const std::string bytes = buf.str();
    REQUIRE(bytes.size() == 4 + 8 + 3 * 8 + 2 * 8);
    CHECK(bytes.substr(0, 4) == "TTC1");
    CHECK(static_cast<unsigned char>(bytes[4]) == 1);  // p = 1, little-endian

    std::stringstream bad(std::ios::in | std::ios::out | std::ios::binary);
    bad << "NOPE";
    CHECK_THROWS_AS(load_tensor_train(bad), IoError);
}

TEST_CASE("rank chain stays compatible after every operation") {
    Rng rng(59);
    for (int trial = 0; trial < 10; ++trial) {
        const Index p = 2 + static_cast<Index>(rng.uniform_index(4));
        std::vector<Index> dims, ranks{1};
        for (Index mu = 0; mu < p; ++mu) dims.push_back(2 + static_cast<Index>(rng.uniform_index(3)));
        for (Index mu = 1; mu < p; ++mu) ranks.push_back(1 + static_cast<Index>(rng.uniform_index(4)));
        ranks.push_back(1);
        const TensorTrain tt = random_train(dims, ranks, rng);
        // constructor of the returned train re-validates the chain
        const TensorTrain l = orthonormalize_left(tt, p - 1);
        const TensorTrain r = orthonormalize_right(tt, 1);
        CHECK(l.mode_dims() == dims);
        CHECK(r.mode_dims() == dims);
    }
}
