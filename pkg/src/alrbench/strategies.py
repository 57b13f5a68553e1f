"""Pool-based sequential query strategies for active learning in regression.

Every strategy is an (initializer, iterator) pair. The initializer labels
``M0`` samples without looking at any label; the iterator then picks one
sample per step using the ridge model fit on everything labeled so far.

=========  ===========  ===============
strategy   initializer  iterator
=========  ===========  ===============
RS         random       random
GSx        GSx          GSx
QBC        random       QBC
EMCM       random       EMCM
RD-EMCM    RD           RD + EMCM
iGS        GSx          iGS
RD-iGS     RD           RD + iGS
RDiGS      RD           iGS
RDiGSr     RD           iGSr
=========  ===========  ===============

All argmax ties resolve to the smallest pool index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np
from scipy.spatial.distance import cdist

from .clustering import ClusterAssignment, closest_to_centroid, kmeans, largest_unlabeled_cluster
from .regression import Committee, RidgeModel, bootstrap_committee, fit_ridge
from .seeding import derive_seed

__all__ = [
    "StrategyId",
    "PAIRING",
    "CRITERIA",
    "PoolExhausted",
    "NoLabeled",
    "EmptyCandidateSet",
    "LabelAccessError",
    "PoolState",
    "CandidateScores",
    "init_random",
    "init_gsx",
    "init_rd",
    "score_dx",
    "score_dy",
    "score_igs",
    "score_R",
    "next_random",
    "next_gsx",
    "next_qbc",
    "next_emcm",
    "next_igs",
    "next_rd",
    "next_igsr",
    "run_strategy",
    "StrategyRun",
    "R_EPS",
    "DEFAULT_COMMITTEE_SIZE",
]

R_EPS = 1e-12
DEFAULT_COMMITTEE_SIZE = 4


class StrategyId(str, Enum):
    RS = "RS"
    GSx = "GSx"
    QBC = "QBC"
    EMCM = "EMCM"
    RD_EMCM = "RD-EMCM"
    iGS = "iGS"
    RD_iGS = "RD-iGS"
    RDiGS = "RDiGS"
    RDiGSr = "RDiGSr"

    def __str__(self):
        return self.value

    @classmethod
    def parse(cls, name: str) -> "StrategyId":
        key = name.strip().lower().replace("_", "-")
        for s in cls:
            if s.value.lower() == key:
                return s
        raise ValueError(f"unknown strategy {name!r}; choose from {', '.join(s.value for s in cls)}")


PAIRING = {
    StrategyId.RS: ("random", "random"),
    StrategyId.GSx: ("gsx", "gsx"),
    StrategyId.QBC: ("random", "qbc"),
    StrategyId.EMCM: ("random", "emcm"),
    StrategyId.RD_EMCM: ("rd", "rd-emcm"),
    StrategyId.iGS: ("gsx", "igs"),
    StrategyId.RD_iGS: ("rd", "rd-igs"),
    StrategyId.RDiGS: ("rd", "igs"),
    StrategyId.RDiGSr: ("rd", "igsr"),
}

# (informativeness, representativeness, diversity) covered at (init, iteration)
CRITERIA = {
    StrategyId.RS: ("", ""),
    StrategyId.GSx: ("D", "D"),
    StrategyId.QBC: ("", "I"),
    StrategyId.EMCM: ("", "I"),
    StrategyId.RD_EMCM: ("RD", "IRD"),
    StrategyId.iGS: ("D", "ID"),
    StrategyId.RD_iGS: ("RD", "IRD"),
    StrategyId.RDiGS: ("RD", "ID"),
    StrategyId.RDiGSr: ("RD", "IRD"),
}


class PoolExhausted(RuntimeError):
    pass


class NoLabeled(ValueError):
    pass


class EmptyCandidateSet(ValueError):
    pass


class LabelAccessError(RuntimeError):
    pass


class PoolState:
    """Training pool split into labeled (in selection order) and unlabeled indices.

    Labels are only reachable through :meth:`label` / :meth:`labels`, which
    refuse unlabeled indices.
    """

    def __init__(self, X, y):
        X = np.array(X, dtype=float)
        X.setflags(write=False)
        self.X = X
        self._y = np.asarray(y, dtype=float).ravel()
        if self._y.shape[0] != X.shape[0]:
            raise ValueError("pool features and labels disagree in length")
        self._mask = np.zeros(X.shape[0], dtype=bool)
        self.labeled: list[int] = []

    @property
    def N(self) -> int:
        return self.X.shape[0]

    @property
    def M(self) -> int:
        return len(self.labeled)

    @property
    def unlabeled(self) -> np.ndarray:
        return np.flatnonzero(~self._mask)

    def is_labeled(self, i) -> bool:
        return bool(self._mask[i])

    def _reveal(self, idx: np.ndarray) -> np.ndarray:
        if not np.all(self._mask[idx]):
            raise LabelAccessError("attempted to read the label of an unlabeled sample")
        return self._y[idx]

    def label(self, i: int) -> float:
        return float(self._reveal(np.array([i]))[0])

    def labels(self) -> np.ndarray:
        """Labels of the labeled set, in selection order."""
        return self._reveal(np.asarray(self.labeled, dtype=np.intp))

    @property
    def X_labeled(self) -> np.ndarray:
        return self.X[self.labeled]

    def query(self, i: int) -> None:
        i = int(i)
        if self._mask[i]:
            raise ValueError(f"index {i} is already labeled")
        self._mask[i] = True
        self.labeled.append(i)

    def fit(self, r: float) -> RidgeModel:
        return fit_ridge(self.X_labeled, self.labels(), r)


@dataclass
class CandidateScores:
    """Per-candidate criteria; fields a strategy doesn't use stay ``None``."""

    indices: np.ndarray
    dx: np.ndarray | None = None
    dy: np.ndarray | None = None
    dxy: np.ndarray | None = None
    g: np.ndarray | None = None
    variance: np.ndarray | None = None
    R: np.ndarray | None = None

    def argmax(self, values: np.ndarray) -> int:
        if self.indices.size == 0:
            raise EmptyCandidateSet("no candidates to choose from")
        # indices are ascending, so the first maximum is the smallest pool index
        return int(self.indices[int(np.argmax(values))])


def _candidates(state: PoolState, restrict=None) -> np.ndarray:
    if restrict is None:
        cand = state.unlabeled
    else:
        cand = np.unique(np.asarray(list(restrict), dtype=np.intp))
        if np.any(state._mask[cand]):
            raise ValueError("restricted candidate set contains labeled samples")
    if cand.size == 0:
        raise EmptyCandidateSet("no unlabeled candidates")
    return cand


# -- initializers ----------------------------------------------------------


def init_random(state: PoolState, M0: int, rng) -> list[int]:
    """Label ``M0`` distinct unlabeled samples drawn uniformly."""
    rng = np.random.default_rng(rng)
    pool = state.unlabeled
    if M0 > pool.size:
        raise PoolExhausted(f"cannot draw {M0} samples from {pool.size} unlabeled")
    picks = [int(i) for i in rng.choice(pool, size=M0, replace=False)]
    for i in picks:
        state.query(i)
    return picks


def init_gsx(state: PoolState, M0: int) -> list[int]:
    """Closest sample to the pool centroid, then greedy max-min distance in input space."""
    if M0 < 1:
        raise ValueError("M0 must be at least 1")
    if M0 > state.N - state.M:
        raise PoolExhausted(f"cannot select {M0} samples from {state.N - state.M} unlabeled")
    picks = []
    if state.M == 0:
        cand = state.unlabeled
        d = np.linalg.norm(state.X[cand] - state.X.mean(axis=0), axis=1)
        first = int(cand[np.argmin(d)])
        state.query(first)
        picks.append(first)
    while len(picks) < M0:
        pick = next_gsx(state)
        state.query(pick)
        picks.append(pick)
    return picks


def init_rd(state: PoolState, M0: int, seed, cluster: Callable = kmeans) -> list[int]:
    """k-means with k = M0 over the pool; label the sample nearest each centroid."""
    if M0 > state.N:
        raise PoolExhausted(f"cannot select {M0} samples from a pool of {state.N}")
    assignment = cluster(state.X, M0, seed)
    picks = [closest_to_centroid(state.X, assignment, j) for j in range(M0)]
    for i in picks:
        state.query(i)
    return picks


# -- scores ----------------------------------------------------------------


def score_dx(state: PoolState, restrict=None) -> CandidateScores:
    """Distance from each candidate to its nearest labeled sample in input space."""
    if state.M == 0:
        raise NoLabeled("dx needs at least one labeled sample")
    cand = _candidates(state, restrict)
    dx = cdist(state.X[cand], state.X_labeled).min(axis=1)
    return CandidateScores(indices=cand, dx=dx)


def score_dy(state: PoolState, model: RidgeModel, restrict=None) -> CandidateScores:
    """Distance from each candidate's prediction to the nearest observed label."""
    if state.M == 0:
        raise NoLabeled("dy needs at least one labeled sample")
    cand = _candidates(state, restrict)
    y_hat = model.predict(state.X[cand])
    dy = np.abs(y_hat[:, None] - state.labels()[None, :]).min(axis=1)
    return CandidateScores(indices=cand, dy=dy)


def score_igs(state: PoolState, model: RidgeModel, restrict=None) -> CandidateScores:
    s = score_dx(state, restrict)
    s.dy = score_dy(state, model, s.indices).dy
    s.dxy = s.dx * s.dy
    return s


def score_R(X, chunk: int = 1024) -> np.ndarray:
    """Sum of Euclidean distances from each sample to every pool sample."""
    X = np.asarray(X, dtype=float)
    out = np.empty(X.shape[0])
    for start in range(0, X.shape[0], chunk):
        out[start:start + chunk] = cdist(X[start:start + chunk], X).sum(axis=1)
    return out


# -- iterators -------------------------------------------------------------


def next_random(state: PoolState, rng) -> int:
    pool = state.unlabeled
    if pool.size == 0:
        raise PoolExhausted("no unlabeled samples left")
    return int(pool[rng.integers(pool.size)])


def next_gsx(state: PoolState) -> int:
    if state.M == state.N:
        raise PoolExhausted("no unlabeled samples left")
    s = score_dx(state)
    return s.argmax(s.dx)


def next_qbc(state: PoolState, committee: Committee) -> int:
    """Sample on which the bootstrap committee disagrees most."""
    if state.M == state.N:
        raise PoolExhausted("no unlabeled samples left")
    cand = state.unlabeled
    s = CandidateScores(indices=cand, variance=committee.predictions(state.X[cand]).var(axis=0))
    return s.argmax(s.variance)


def emcm_scores(state: PoolState, model: RidgeModel, committee: Committee, restrict=None,
                bias_coordinate: bool = False) -> CandidateScores:
    """Expected model change: mean over members of ``|y_p - y_hat| * ||x||``."""
    cand = _candidates(state, restrict)
    Xc = state.X[cand]
    y_hat = model.predict(Xc)
    spread = np.abs(committee.predictions(Xc) - y_hat[None, :]).mean(axis=0)
    sq = np.einsum("ij,ij->i", Xc, Xc)
    if bias_coordinate:
        sq = sq + 1.0
    return CandidateScores(indices=cand, g=spread * np.sqrt(sq))


def next_emcm(state: PoolState, model: RidgeModel, committee: Committee, restrict=None,
              bias_coordinate: bool = False) -> int:
    if state.M == state.N:
        raise PoolExhausted("no unlabeled samples left")
    s = emcm_scores(state, model, committee, restrict, bias_coordinate)
    return s.argmax(s.g)


def next_igs(state: PoolState, model: RidgeModel, restrict=None) -> int:
    """Greedy sampling on the product of input- and output-space distances."""
    s = score_igs(state, model, restrict)
    return s.argmax(s.dxy)


def next_igsr(state: PoolState, model: RidgeModel, R: np.ndarray) -> int:
    """iGS score divided by the pool distance sum, favouring dense regions."""
    s = score_igs(state, model)
    s.R = np.asarray(R)[s.indices]
    return s.argmax(s.dxy / np.maximum(s.R, R_EPS))


def rd_cluster(state: PoolState, seed, cluster: Callable = kmeans) -> tuple[ClusterAssignment, int]:
    """Cluster the pool into M + 1 groups and pick the largest group with no labeled member."""
    k = state.M + 1
    if k > state.N:
        raise PoolExhausted("pool too small for another RD step")
    assignment = cluster(state.X, k, seed)
    return assignment, largest_unlabeled_cluster(assignment, state.labeled)


def next_rd(state: PoolState, model: RidgeModel, inner: str, seed, committee: Committee | None = None,
            cluster: Callable = kmeans, bias_coordinate: bool = False) -> int:
    """RD step: restrict ``inner`` ("emcm" or "igs") to the largest labeled-free cluster.

    Scores are still computed against every labeled sample; only the
    candidate set shrinks.
    """
    assignment, cid = rd_cluster(state, seed, cluster)
    members = assignment.members(cid)
    if members.size == 1:
        return int(members[0])
    inner = inner.lower()
    if inner == "igs":
        return next_igs(state, model, restrict=members)
    if inner == "emcm":
        if committee is None:
            raise ValueError("RD-EMCM needs a committee")
        return next_emcm(state, model, committee, restrict=members, bias_coordinate=bias_coordinate)
    raise ValueError(f"unknown inner criterion {inner!r}")


# -- full runs -------------------------------------------------------------


@dataclass
class StrategyRun:
    strategy: StrategyId
    selection: list[int]
    models: dict[int, RidgeModel] = field(default_factory=dict)  # keyed by M

    @property
    def M0(self) -> int:
        return min(self.models)


class _CachedKMeans:
    """k-means memoised on (k, seed); valid for one fixed pool."""

    def __init__(self, store: dict | None):
        self.store = {} if store is None else store

    def __call__(self, X, k, seed):
        key = (int(k), int(seed))
        hit = self.store.get(key)
        if hit is None:
            hit = self.store[key] = kmeans(X, k, seed)
        return hit


def run_strategy(strategy, X, y, M0: int, M_max: int, r: float, seed: int,
                 committee_size: int = DEFAULT_COMMITTEE_SIZE, kmeans_cache: dict | None = None,
                 R: np.ndarray | None = None, emcm_bias_coordinate: bool = False,
                 state: PoolState | None = None) -> StrategyRun:
    """Select ``M_max`` pool samples with ``strategy`` and fit a ridge model at every M >= M0.

    ``kmeans_cache`` may be shared between calls on the *same* pool (for
    instance across regularization values); ``R`` likewise.
    """
    sid = StrategyId.parse(str(strategy))
    init, step = PAIRING[sid]
    state = PoolState(X, y) if state is None else state
    if not 1 <= M0 <= M_max <= state.N:
        raise ValueError(f"need 1 <= M0 <= M_max <= N, got M0={M0}, M_max={M_max}, N={state.N}")
    cluster = _CachedKMeans(kmeans_cache)
    rng = np.random.default_rng(derive_seed(seed, "random"))

    if init == "random":
        init_random(state, M0, rng)
    elif init == "gsx":
        init_gsx(state, M0)
    else:
        init_rd(state, M0, derive_seed(seed, "kmeans", M0), cluster)

    if step == "igsr" and R is None:
        R = score_R(state.X)

    run = StrategyRun(strategy=sid, selection=list(state.labeled))
    model = state.fit(r)
    run.models[state.M] = model
    while state.M < M_max:
        M = state.M
        if step == "random":
            pick = next_random(state, rng)
        elif step == "gsx":
            pick = next_gsx(state)
        elif step in ("qbc", "emcm", "rd-emcm"):
            committee = bootstrap_committee(state.X_labeled, state.labels(), committee_size, r,
                                            derive_seed(seed, "committee", M))
            if step == "qbc":
                pick = next_qbc(state, committee)
            elif step == "emcm":
                pick = next_emcm(state, model, committee, bias_coordinate=emcm_bias_coordinate)
            else:
                pick = next_rd(state, model, "emcm", derive_seed(seed, "kmeans", M + 1), committee,
                               cluster, emcm_bias_coordinate)
        elif step == "rd-igs":
            pick = next_rd(state, model, "igs", derive_seed(seed, "kmeans", M + 1), cluster=cluster)
        elif step == "igs":
            pick = next_igs(state, model)
        elif step == "igsr":
            pick = next_igsr(state, model, R)
        else:  # pragma: no cover
            raise AssertionError(step)
        state.query(pick)
        run.selection.append(pick)
        model = state.fit(r)
        run.models[state.M] = model
    return run
