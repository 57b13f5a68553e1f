"""k-means clustering and the representativeness/diversity (RD) cluster helpers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "KTooLarge",
    "EmptyCluster",
    "NoEligibleCluster",
    "ClusterAssignment",
    "kmeans",
    "closest_to_centroid",
    "largest_unlabeled_cluster",
    "N_RESTARTS",
    "MAX_ITER",
]

N_RESTARTS = 10
MAX_ITER = 300
_MONOTONE_RTOL = 1e-9
_TRANSFER_TOL = 1e-12


class KTooLarge(ValueError):
    pass


class EmptyCluster(ValueError):
    pass


class NoEligibleCluster(RuntimeError):
    """No cluster is free of labeled samples; with k = M + 1 non-empty clusters this cannot happen."""


@dataclass(frozen=True)
class ClusterAssignment:
    k: int
    labels: np.ndarray  # 0-based cluster id per point
    centroids: np.ndarray
    inertia: float
    n_iter: int = 0

    def members(self, cluster_id: int) -> np.ndarray:
        return np.flatnonzero(self.labels == cluster_id)

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)


def _sqdist(X, C, x_sq=None):
    if x_sq is None:
        x_sq = np.einsum("ij,ij->i", X, X)
    c_sq = np.einsum("ij,ij->i", C, C)
    d2 = x_sq[:, None] + c_sq[None, :] - 2.0 * (X @ C.T)
    np.maximum(d2, 0.0, out=d2)
    return d2


def _inertia(X, C, labels) -> float:
    diff = X - C[labels]
    return float(np.einsum("ij,ij->", diff, diff))


def _greedy_kmeanspp(X, k, rng, x_sq):
    """Greedy k-means++: each step samples a few D^2 candidates and keeps the best."""
    n = X.shape[0]
    n_trials = 2 + int(np.log(k))
    centers = np.empty(k, dtype=np.intp)
    centers[0] = rng.integers(n)
    closest = _sqdist(X, X[centers[:1]], x_sq)[:, 0]
    pot = closest.sum()
    for c in range(1, k):
        if pot <= 0.0:
            # every point coincides with a chosen centre; take any unused point
            unused = np.setdiff1d(np.arange(n), centers[:c])
            centers[c] = rng.choice(unused)
            continue
        cum = np.cumsum(closest)
        cand = np.searchsorted(cum, rng.random(n_trials) * pot, side="right")
        np.minimum(cand, n - 1, out=cand)
        d_cand = _sqdist(X[cand], X, x_sq[cand])
        new_closest = np.minimum(closest[None, :], d_cand)
        new_pot = new_closest.sum(axis=1)
        best = int(np.argmin(new_pot))
        centers[c] = cand[best]
        closest = new_closest[best]
        pot = new_pot[best]
    return centers


def _repair_empty(X, C, labels, d2, k):
    counts = np.bincount(labels, minlength=k)
    empty = np.flatnonzero(counts == 0)
    if empty.size == 0:
        return
    own = d2[np.arange(X.shape[0]), labels]
    for j in empty:
        movable = counts[labels] > 1
        score = np.where(movable, own, -1.0)
        p = int(np.argmax(score))
        counts[labels[p]] -= 1
        labels[p] = j
        counts[j] = 1
        C[j] = X[p]
        own[p] = 0.0


def _means(X, k, labels):
    counts = np.bincount(labels, minlength=k)
    sums = np.zeros((k, X.shape[1]))
    np.add.at(sums, labels, X)
    return sums / counts[:, None]


def _transfer_pass(X, C, labels, x_sq, tol):
    """One sequential pass of Hartigan single-point transfers; True if any point moved.

    Moving x from cluster a to b changes inertia by
    n_b/(n_b+1) |x - c_b|^2 - n_a/(n_a-1) |x - c_a|^2. Only points whose move
    improves at the start of the pass are visited, each re-scored against the
    centroids as they stand. ``C`` and ``labels`` are updated in place.
    """
    k = C.shape[0]
    counts = np.bincount(labels, minlength=k).astype(float)
    d2 = _sqdist(X, C, x_sq)
    rows = np.arange(X.shape[0])
    src = counts[labels]
    with np.errstate(divide="ignore", invalid="ignore"):
        leave = np.where(src > 1, src / (src - 1) * d2[rows, labels], np.inf)
    enter = (counts / (counts + 1))[None, :] * d2
    enter[rows, labels] = np.inf
    moved = False
    for i in np.flatnonzero(enter.min(axis=1) - leave < -tol):
        a = labels[i]
        if counts[a] <= 1:
            continue
        diff = X[i] - C
        dd = np.einsum("ij,ij->i", diff, diff)
        cost = counts / (counts + 1) * dd
        cost[a] = np.inf
        b = int(np.argmin(cost))
        if not cost[b] - counts[a] / (counts[a] - 1) * dd[a] < -tol:
            continue
        C[a] = (C[a] * counts[a] - X[i]) / (counts[a] - 1)
        C[b] = (C[b] * counts[b] + X[i]) / (counts[b] + 1)
        counts[a] -= 1
        counts[b] += 1
        labels[i] = b
        moved = True
    return moved


def _lloyd(X, k, centers, x_sq, max_iter):
    """Lloyd iterations; at each fixed point, a pass of single-point transfers."""
    C = X[centers].copy()
    labels_prev = None
    inertia_prev = np.inf
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        d2 = _sqdist(X, C, x_sq)
        labels = np.argmin(d2, axis=1)
        _repair_empty(X, C, labels, d2, k)
        C = _means(X, k, labels)
        inertia = _inertia(X, C, labels)
        if inertia > inertia_prev * (1 + _MONOTONE_RTOL) + 1e-12:
            raise AssertionError(f"k-means inertia increased: {inertia_prev} -> {inertia}")
        inertia_prev = inertia
        if labels_prev is not None and np.array_equal(labels, labels_prev):
            if not _transfer_pass(X, C, labels, x_sq, _TRANSFER_TOL * (1.0 + inertia)):
                break
            C = _means(X, k, labels)
            inertia_prev = _inertia(X, C, labels)
        labels_prev = labels
    return labels, C, inertia_prev, n_iter


def kmeans(X, k: int, seed, n_restarts: int = N_RESTARTS, max_iter: int = MAX_ITER) -> ClusterAssignment:
    """Lloyd's algorithm with greedy k-means++ seeding; the lowest-inertia restart wins.

    Every returned cluster is non-empty. Ties between restarts go to the
    earliest restart.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = X.shape[0]
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    if k > n:
        raise KTooLarge(f"k={k} exceeds the number of points N={n}")
    x_sq = np.einsum("ij,ij->i", X, X)
    streams = np.random.SeedSequence(int(seed)).spawn(n_restarts)
    best = None
    for ss in streams:
        rng = np.random.default_rng(ss)
        centers = _greedy_kmeanspp(X, k, rng, x_sq)
        labels, C, inertia, n_iter = _lloyd(X, k, centers, x_sq, max_iter)
        if best is None or inertia < best.inertia:
            best = ClusterAssignment(k=k, labels=labels, centroids=C, inertia=inertia, n_iter=n_iter)
    return best


def closest_to_centroid(X, assignment: ClusterAssignment, cluster_id: int) -> int:
    """Member of ``cluster_id`` nearest its centroid; smallest index on ties."""
    members = assignment.members(cluster_id)
    if members.size == 0:
        raise EmptyCluster(f"cluster {cluster_id} has no members")
    diff = np.asarray(X, dtype=float)[members] - assignment.centroids[cluster_id]
    return int(members[np.argmin(np.einsum("ij,ij->i", diff, diff))])


def largest_unlabeled_cluster(assignment: ClusterAssignment, labeled) -> int:
    """Largest cluster with no labeled member; smallest id on ties."""
    sizes = assignment.sizes
    labeled = np.asarray(list(labeled), dtype=np.intp)
    touched = np.zeros(assignment.k, dtype=bool)
    touched[assignment.labels[labeled]] = True
    eligible = np.where(touched | (sizes == 0), -1, sizes)
    best = int(np.argmax(eligible))
    if eligible[best] < 0:
        raise NoEligibleCluster(
            f"all {assignment.k} clusters contain labeled samples ({labeled.size} labeled)"
        )
    return best
