"""k-medoids (PAM) over a precomputed geodesic distance matrix.

Used to pick which target trials to ask labels for: medoids are actual
trials, so each selected index can be handed to the label oracle.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import DimMismatchError, KTooLargeError, NonFiniteError
from .spd import Array, riemannian_distance, spd_inv_sqrt, symmetrize


def pairwise_distances(covs: Sequence[Array]) -> Array:
    """Symmetric matrix of geodesic distances, one eigensolve per pair."""
    mats = [np.asarray(c, dtype=np.float64) for c in covs]
    n = len(mats)
    if n == 0:
        raise DimMismatchError("pairwise_distances: empty input")
    shape = mats[0].shape
    for m in mats[1:]:
        if m.shape != shape:
            raise DimMismatchError(f"mixed shapes {shape} vs {m.shape}")
    inv_sqrts = [spd_inv_sqrt(m) for m in mats]
    d = np.zeros((n, n))
    for i in range(n):
        isq = inv_sqrts[i]
        for j in range(i + 1, n):
            w = np.linalg.eigvalsh(symmetrize(isq @ mats[j] @ isq))
            d[i, j] = d[j, i] = np.sqrt(np.sum(np.log(w) ** 2))
    return d


def _validate_distance_matrix(d: Array) -> Array:
    d = np.asarray(d, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise DimMismatchError(f"distance matrix must be square, got {d.shape}")
    if not np.isfinite(d).all():
        raise NonFiniteError("distance matrix contains NaN or Inf")
    return d


def total_cost(d: Array, medoids: Sequence[int]) -> float:
    """Sum over points of the distance to the nearest medoid."""
    return float(d[np.asarray(medoids)].min(axis=0).sum())


def k_medoids(d: Array, k: int, seed: int = 0) -> list[int]:
    """PAM: greedy BUILD then best-improvement SWAP until a local optimum.

    Fully deterministic: ties are broken by the smallest index, and the
    swap scan considers medoids and candidates in ascending index order.
    ``seed`` is accepted for optional random restarts but the default
    single deterministic run does not consume it. Returns sorted indices.
    """
    d = _validate_distance_matrix(d)
    n = d.shape[0]
    if not 1 <= k <= n:
        raise KTooLargeError(f"k must satisfy 1 <= k <= {n}, got {k}")

    # BUILD: start from the 1-medoid, then add the point with the largest
    # cost reduction. argmin/argmax return the first (smallest) index on ties.
    medoids = [int(np.argmin(d.sum(axis=1)))]
    nearest = d[medoids[0]].copy()
    while len(medoids) < k:
        gains = np.maximum(nearest[None, :] - d, 0.0).sum(axis=1)
        gains[medoids] = -np.inf
        best = int(np.argmax(gains))
        medoids.append(best)
        nearest = np.minimum(nearest, d[best])

    # SWAP: repeatedly apply the single best strictly improving swap.
    medoids = sorted(medoids)
    while True:
        med = np.asarray(medoids)
        dist_to_med = d[med]
        order = np.argsort(dist_to_med, axis=0, kind="stable")
        d1 = dist_to_med[order[0], np.arange(n)]
        owner = order[0]
        d2 = (
            dist_to_med[order[1], np.arange(n)]
            if k > 1
            else np.full(n, np.inf)
        )
        non_medoids = [h for h in range(n) if h not in set(medoids)]
        if not non_medoids:
            break
        hs = np.asarray(non_medoids)
        best_delta = 0.0
        best_swap = None
        for mi, m in enumerate(medoids):
            owned = owner == mi
            # Points losing medoid m move to min(d(., h), second nearest);
            # the rest can only improve by moving to h.
            delta_owned = (
                np.minimum(d[np.ix_(owned.nonzero()[0], hs)], d2[owned, None])
                - d1[owned, None]
            ).sum(axis=0)
            others = ~owned
            delta_others = np.minimum(
                d[np.ix_(others.nonzero()[0], hs)] - d1[others, None], 0.0
            ).sum(axis=0)
            deltas = delta_owned + delta_others
            hi = int(np.argmin(deltas))
            if deltas[hi] < best_delta - 1e-15:
                best_delta = float(deltas[hi])
                best_swap = (mi, int(hs[hi]))
        if best_swap is None:
            break
        mi, h = best_swap
        medoids[mi] = h
        medoids = sorted(medoids)
    return medoids
