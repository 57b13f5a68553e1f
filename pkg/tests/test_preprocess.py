import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from alrbench.dataio import load_csv, load_manifest
from alrbench.preprocess import (
    DimensionMismatch,
    PoolTooSmall,
    one_hot,
    one_hot_names,
    pca_apply,
    pca_fit,
    prepare_dataset,
    split_train_test,
    train_fraction_size,
    zscore_apply,
    zscore_fit,
)

from oracles import jacobi_eigh


def test_one_hot_block_order(tiny_csv):
    raw = load_csv(load_manifest(tiny_csv))
    X = one_hot(raw)
    assert X.shape == (60, 5)
    assert one_hot_names(raw) == ["a", "b", "colour=blue", "colour=green", "colour=red"]
    np.testing.assert_array_equal(X[:, 2:].sum(axis=1), 1.0)
    # row 0 is red
    np.testing.assert_array_equal(X[0, 2:], [0, 0, 1])


def test_prepare_projects_back_to_raw_width(tiny_csv):
    raw = load_csv(load_manifest(tiny_csv))
    ds = prepare_dataset(raw)
    assert ds.d == 3
    assert ds.meta["total_features"] == 5
    assert ds.meta["pca"] is not None


def test_prepare_warns_when_too_small():
    from alrbench.dataio import Column, RawDataset

    raw = RawDataset("small", (Column("a", "numeric", np.arange(20.0)),), np.arange(20.0), 20, 0)
    with pytest.warns(UserWarning, match="too small"):
        prepare_dataset(raw)


def test_pca_matches_jacobi(rng):
    X = rng.normal(size=(50, 5)) @ rng.normal(size=(5, 5))
    t = pca_fit(X, 5)
    Xc = X - X.mean(axis=0)
    evals, evecs = jacobi_eigh(Xc.T @ Xc / X.shape[0])
    order = np.argsort(-evals)
    np.testing.assert_allclose(t.explained_variance, evals[order], rtol=1e-10)
    for j in range(5):
        v = evecs[:, order[j]]
        assert abs(abs(v @ t.components[:, j]) - 1.0) < 1e-8
        i = int(np.argmax(np.abs(t.components[:, j])))
        assert t.components[i, j] > 0


@given(arrays(np.float64, st.tuples(st.integers(6, 30), st.integers(1, 5)),
              elements=st.floats(-100, 100, allow_nan=False)))
def test_pca_components_orthonormal(X):
    k = X.shape[1]
    t = pca_fit(X, k)
    np.testing.assert_allclose(t.components.T @ t.components, np.eye(k), atol=1e-8)
    Z = pca_apply(t, X)
    np.testing.assert_allclose(Z.mean(axis=0), 0.0, atol=1e-6 * (1 + np.abs(X).max()))


def test_pca_rank_deficiency_flag(rng):
    a = rng.normal(size=(40, 1))
    X = np.hstack([a, 2 * a, -a])
    assert pca_fit(X, 3).rank_deficient
    assert not pca_fit(X, 1).rank_deficient


@given(arrays(np.float64, st.tuples(st.integers(2, 40), st.integers(1, 6)),
              elements=st.floats(-1e3, 1e3, allow_nan=False)))
def test_zscore_train_moments(X):
    s = zscore_fit(X)
    Z = zscore_apply(s, X)
    np.testing.assert_allclose(Z.mean(axis=0), 0.0, atol=1e-7)
    live = ~s.degenerate
    np.testing.assert_allclose(Z[:, live].std(axis=0), 1.0, rtol=1e-6)


def test_zscore_constant_column_and_mismatch():
    X = np.column_stack([np.arange(10.0), np.full(10, 3.0)])
    s = zscore_fit(X)
    assert s.degenerate.tolist() == [False, True]
    np.testing.assert_array_equal(zscore_apply(s, X)[:, 1], 0.0)
    with pytest.raises(DimensionMismatch):
        zscore_apply(s, np.ones((2, 3)))


@given(st.integers(5, 5000), st.integers(0, 2**32))
def test_split_partition(n, seed):
    sp = split_train_test(n, seed)
    assert sp.train_indices.size == train_fraction_size(n) == int(np.floor(0.8 * n + 1e-9))
    both = np.concatenate([sp.train_indices, sp.test_indices])
    np.testing.assert_array_equal(np.sort(both), np.arange(n))
    np.testing.assert_array_equal(split_train_test(n, seed).train_indices, sp.train_indices)


def test_split_too_small():
    with pytest.raises(PoolTooSmall):
        split_train_test(4, 0)
