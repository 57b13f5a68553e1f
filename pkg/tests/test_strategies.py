import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from alrbench.clustering import kmeans
from alrbench.regression import bootstrap_committee, fit_ridge
from alrbench.seeding import derive_seed
from alrbench.strategies import (
    CRITERIA,
    PAIRING,
    EmptyCandidateSet,
    LabelAccessError,
    NoLabeled,
    PoolExhausted,
    PoolState,
    StrategyId,
    emcm_scores,
    init_gsx,
    init_rd,
    next_igs,
    next_qbc,
    next_rd,
    rd_cluster,
    run_strategy,
    score_dx,
    score_igs,
    score_R,
)

import oracles

ALL = [s.value for s in StrategyId]


def _pool(seed, n=None, d=None):
    gen = np.random.default_rng(seed)
    d = d or int(gen.integers(1, 6))
    n = n or int(gen.integers(d + 8, 41))
    X = gen.normal(size=(n, d))
    y = X @ gen.normal(size=d) + 0.5 * gen.normal(size=n)
    return X, y


class CountingPool(PoolState):
    """Records every label read and fails on unlabeled ones."""

    def __init__(self, X, y):
        super().__init__(X, y)
        self.reads = []

    def _reveal(self, idx):
        idx = np.asarray(idx)
        self.reads.extend(idx.tolist())
        return super()._reveal(idx)


def test_parse_and_tables():
    assert StrategyId.parse("rd_igs") is StrategyId.RD_iGS
    assert StrategyId.parse(" RDIGSR ") is StrategyId.RDiGSr
    assert str(StrategyId.RD_EMCM) == "RD-EMCM"
    with pytest.raises(ValueError):
        StrategyId.parse("BALD")
    assert set(PAIRING) == set(StrategyId) == set(CRITERIA)
    assert PAIRING[StrategyId.RDiGS] == ("rd", "igs")


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("strategy", ["GSx", "iGS", "EMCM", "QBC", "RDiGSr"])
def test_selection_matches_brute_force(strategy, seed):
    X, y = _pool(seed)
    d = X.shape[1]
    M0, M_max = d + 1, min(X.shape[0] - 1, d + 15)
    s = derive_seed(seed, "strategies")
    run = run_strategy(strategy, X, y, M0, M_max, 0.01, s)
    initial = run.selection[:M0] if strategy == "RDiGSr" else None
    assert run.selection == oracles.replay(strategy, X, y, M0, M_max, 0.01, s, initial=initial)


def test_rd_initial_set_is_nearest_to_centroids():
    X, y = _pool(3, n=30, d=2)
    run = run_strategy("RDiGS", X, y, 3, 3, 0.01, 5)
    a = kmeans(X, 3, derive_seed(5, "kmeans", 3))
    for j, pick in enumerate(run.selection):
        members = np.flatnonzero(a.labels == j)
        dists = [oracles.dist(X[m], a.centroids[j]) for m in members]
        assert pick == members[oracles.argmin_first(dists)]


def test_scores_match_loops(rng):
    X = rng.normal(size=(25, 3))
    y = rng.normal(size=25)
    state = PoolState(X, y)
    for i in (3, 9, 14, 20):
        state.query(i)
    model = state.fit(0.1)
    s = score_igs(state, model)
    cand = list(s.indices)
    np.testing.assert_allclose(s.dx, oracles.dx_scores(X, state.labeled, cand), rtol=1e-12)
    y_hat = oracles.predict(model.weights, model.bias, X[cand])
    np.testing.assert_allclose(s.dy, oracles.dy_scores(y_hat, list(y[state.labeled])), rtol=1e-9, atol=1e-12)
    R = score_R(X, chunk=7)
    np.testing.assert_allclose(R, [sum(oracles.dist(X[n], X[i]) for i in range(25)) for n in range(25)])


def test_emcm_bias_coordinate(rng):
    X = rng.normal(size=(15, 2))
    y = rng.normal(size=15)
    state = PoolState(X, y)
    for i in range(5):
        state.query(i)
    model = state.fit(0.01)
    c = bootstrap_committee(state.X_labeled, state.labels(), 4, 0.01, 1)
    g0 = emcm_scores(state, model, c).g
    g1 = emcm_scores(state, model, c, bias_coordinate=True).g
    norms = np.linalg.norm(X[5:], axis=1)
    np.testing.assert_allclose(g1 / g0, np.sqrt(norms ** 2 + 1) / norms)


def test_ties_go_to_smallest_index():
    X = np.array([[0.0], [-1.0], [1.0], [-2.0], [2.0]])
    y = np.zeros(5)
    state = PoolState(X, y)
    assert init_gsx(state, 2) == [0, 3]  # 3 and 4 tie at distance 2
    state = PoolState(X, np.array([0.0, 1.0, 1.0, 5.0, 5.0]))
    state.query(0)
    c = bootstrap_committee(np.zeros((2, 1)), np.array([0.0, 1.0]), 2, 0.1, 0)
    # identical members give zero variance everywhere
    c = type(c)(members=(c.members[0], c.members[0]), seed=0)
    assert next_qbc(state, c) == 1


def test_label_access_is_restricted():
    X, y = _pool(4, n=30, d=2)
    state = PoolState(X, y)
    state.query(0)
    with pytest.raises(LabelAccessError):
        state.label(1)
    with pytest.raises(ValueError):
        state.query(0)


@pytest.mark.parametrize("strategy", ALL)
def test_strategies_only_read_labels_of_labeled_samples(strategy):
    X, y = _pool(11, n=35, d=3)
    state = CountingPool(X, y)
    run = run_strategy(strategy, X, y, 4, 14, 0.01, 3, state=state)
    assert set(state.reads) <= set(run.selection)
    # initializers must not look at labels at all
    first = state.reads[0] if state.reads else None
    M0_set = set(run.selection[:4])
    assert first is None or first in M0_set


@given(st.integers(0, 2**31), st.sampled_from(ALL), st.integers(1, 4))
def test_run_invariants(seed, strategy, d):
    X, y = _pool(seed, n=d + 25, d=d)
    M0, M_max = d + 1, d + 21
    run = run_strategy(strategy, X, y, M0, M_max, 0.01, seed)
    assert len(run.selection) == M_max
    assert len(set(run.selection)) == M_max
    assert sorted(run.models) == list(range(M0, M_max + 1))
    assert all(0 <= i < X.shape[0] for i in run.selection)
    again = run_strategy(strategy, X, y, M0, M_max, 0.01, seed)
    assert again.selection == run.selection


@given(st.integers(0, 2**31), st.sampled_from(["igs", "emcm"]))
def test_rd_pick_lies_in_largest_unlabeled_cluster(seed, inner):
    X, y = _pool(seed, n=30, d=2)
    state = PoolState(X, y)
    init_rd(state, 3, seed)
    model = state.fit(0.01)
    committee = bootstrap_committee(state.X_labeled, state.labels(), 4, 0.01, seed)
    a, cid = rd_cluster(state, seed)
    pick = next_rd(state, model, inner, seed, committee)
    assert a.labels[pick] == cid
    assert not np.isin(a.members(cid), state.labeled).any()
    members = a.members(cid)
    if inner == "igs" and members.size > 1:
        assert pick == next_igs(state, model, restrict=members)


def test_errors():
    X, y = _pool(0, n=12, d=2)
    state = PoolState(X, y)
    with pytest.raises(NoLabeled):
        score_dx(state)
    with pytest.raises(PoolExhausted):
        init_gsx(state, 13)
    for i in range(12):
        state.query(i)
    with pytest.raises(EmptyCandidateSet):
        score_dx(state)
    with pytest.raises(ValueError):
        run_strategy("RS", X, y, 5, 4, 0.01, 0)
    with pytest.raises(ValueError):
        next_rd(PoolState(X, y), fit_ridge(X, y, 0.1), "bogus", 0)
