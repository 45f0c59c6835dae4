"""Python-side smoke tests for the extension module."""

import numpy as np
import pytest

import ttclass


def test_tensor_train_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    cores = [rng.normal(size=(1, 2, 3)), rng.normal(size=(3, 2, 2)), rng.normal(size=(2, 2, 1))]
    tt = ttclass.TensorTrain(cores)
    assert tt.order == 3
    assert tt.ranks == [1, 3, 2, 1]

    path = str(tmp_path / "train.ttc")
    tt.save(path)
    back = ttclass.TensorTrain.load(path)
    for a, b in zip(tt.cores(), back.cores()):
        np.testing.assert_array_equal(a, b)


def test_contract_and_evaluate_agree():
    rng = np.random.default_rng(2)
    cores = [rng.normal(size=(1, 2, 2)), rng.normal(size=(2, 3, 1))]
    tt = ttclass.TensorTrain(cores)
    dense = tt.contract_full()
    assert dense.shape == (2, 3)

    f0 = rng.normal(size=2)
    f1 = rng.normal(size=3)
    value = tt.evaluate([f0, f1])
    expected = np.einsum("ij,i,j->", dense, f0, f1)
    assert value[0] == pytest.approx(expected, rel=1e-12)


def test_gram_matches_cosine_closed_form():
    rng = np.random.default_rng(3)
    d, m, alpha = 6, 9, 0.59
    X = rng.uniform(size=(d, m))
    basis = ttclass.FeatureBasis.trig(d, alpha)
    factors = ttclass.build_feature_matrices(basis, X)
    G = ttclass.build_gram(factors)

    diff = X[:, :, None] - X[:, None, :]
    closed = np.cos(alpha * diff).prod(axis=0)
    np.testing.assert_allclose(G, closed, atol=1e-12)


def test_mandy_interpolates_training_set():
    ds = ttclass.make_synthetic_digits(40, seed=11)
    reduced = ttclass.reduce_pool2(ds)
    basis = ttclass.FeatureBasis.trig(reduced.X.shape[0], 0.59)
    model = ttclass.mandy_fit(reduced.X, reduced.Y, basis)
    labels = model.classify(reduced.X)
    truth = [reduced.label_of(j) for j in range(reduced.X.shape[1])]
    assert labels == truth


def test_arr_fits_and_serializes(tmp_path):
    ds = ttclass.make_synthetic_digits(30, seed=13)
    reduced = ttclass.reduce_pool2(ds)
    basis = ttclass.FeatureBasis.trig(reduced.X.shape[0], 0.59)
    config = ttclass.ArrConfig()
    config.rank = 3
    config.sweeps = 1
    model = ttclass.arr_fit(reduced.X, reduced.Y, basis, config, workers=1)
    scores = model.decision_values(reduced.X)
    assert scores.shape == (10, 30)
    assert len(model.parts) == 10

    # per-part evaluation matches the assembled train
    x = np.ascontiguousarray(reduced.X[:, 0])
    feats = ttclass.apply_basis(basis, x)
    assembled = model.xi.evaluate(feats)
    for i, part in enumerate(model.parts):
        assert part.evaluate(feats)[0] == pytest.approx(assembled[i], abs=1e-10)


def test_idx_round_trip(tmp_path):
    ds = ttclass.make_synthetic_digits(12, seed=17)
    images = str(tmp_path / "img.idx")
    labels = str(tmp_path / "lab.idx")
    ttclass.save_idx(ds, images, labels)
    back = ttclass.load_idx(images, labels)
    np.testing.assert_array_equal(ds.X, back.X)
    np.testing.assert_array_equal(ds.Y, back.Y)


def test_subsample_stratified():
    ds = ttclass.make_synthetic_digits(60, seed=19)
    small = ttclass.subsample(ds, 10, seed=3)
    labels = sorted(small.label_of(j) for j in range(10))
    assert labels == list(range(10))


def test_validation_errors_surface_as_value_errors():
    with pytest.raises(ValueError):
        ttclass.FeatureBasis.trig(3, -1.0)
    with pytest.raises(ValueError):
        ttclass.truncated_svd(np.zeros((3, 3)), 1e-2)


def test_tsvd_least_squares_solves_consistent_system():
    rng = np.random.default_rng(23)
    M = rng.normal(size=(5, 12))
    v0 = rng.normal(size=5)
    w = v0 @ M
    v = ttclass.tsvd_least_squares(M, w, 0.0)
    np.testing.assert_allclose(v, v0, atol=1e-10)
