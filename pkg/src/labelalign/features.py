"""Covariance estimation, CSP spatial filtering, and tangent-space features."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    ConfigError,
    DegenerateCovarianceError,
    DimMismatchError,
)
from .signal import Trial
from .spd import (
    Array,
    spd_from_matrix,
    symmetrize,
    tangent_map,
)

DEFAULT_CSP_PAIRS = 3


@dataclass(frozen=True, eq=False)
class CspModel:
    """Spatial filter bank: ``filters`` rows applied to raw trials.

    Binary mode holds 2*pairs rows; one-vs-rest holds 2*pairs rows per
    class, concatenated in class order. ``eigvals`` are the generalized
    eigenvalues the rows were selected by, aligned with the rows.
    """

    filters: Array
    pairs: int
    classes: tuple
    mode: str
    eigvals: Array

    @property
    def n_filters(self) -> int:
        return self.filters.shape[0]


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: Array
    kind: str


def trial_covariance(x: Trial | Array, shrinkage: float = 0.0) -> Array:
    """Spatial covariance X X^T, optionally shrunk toward a scaled identity.

    ``shrinkage`` in [0, 1) blends in trace(C)/dim * I, which keeps the
    result SPD for rank-deficient trials (T < channels). The default of 0
    is the plain Gram matrix.
    """
    data = x.data if isinstance(x, Trial) else np.asarray(x, dtype=np.float64)
    if not 0.0 <= shrinkage < 1.0:
        raise ConfigError(f"shrinkage must be in [0, 1), got {shrinkage}")
    c = data @ data.T
    if shrinkage > 0.0:
        dim = c.shape[0]
        c = (1.0 - shrinkage) * c + shrinkage * (np.trace(c) / dim) * np.eye(dim)
    return spd_from_matrix(c)


def _binary_csp(c1: Array, c2: Array, pairs: int) -> tuple[Array, Array]:
    """Filters and eigenvalues for the two-class problem c1 vs c2.

    Solves c1 w = lambda (c1 + c2) w by whitening the composite covariance;
    keeps the ``pairs`` largest then ``pairs`` smallest eigenvalues. Rows
    satisfy w^T (c1 + c2) w = 1. Each row is flipped so its
    largest-magnitude entry is positive.
    """
    composite = symmetrize(c1 + c2)
    w, u = np.linalg.eigh(composite)
    dim = composite.shape[0]
    if w[0] <= 1e-12 * np.trace(composite) / dim:
        raise DegenerateCovarianceError(
            f"composite covariance not SPD (min eigenvalue {w[0]:.6g})"
        )
    whitener = (u * (1.0 / np.sqrt(w))) @ u.T
    lam, vecs = np.linalg.eigh(symmetrize(whitener @ c1 @ whitener))
    order = list(range(dim - 1, dim - 1 - pairs, -1)) + list(range(pairs))
    filters = (whitener @ vecs).T[order]
    for row in filters:
        if row[np.argmax(np.abs(row))] < 0.0:
            row *= -1.0
    return filters, lam[order]


def csp_fit(
    covs_by_class: Mapping[int, Sequence[Array]],
    pairs: int = DEFAULT_CSP_PAIRS,
) -> CspModel:
    """Fit CSP filters from per-class trial covariances.

    Two classes give the classic binary filters; more classes use
    one-vs-rest (each class against the pooled others), concatenating the
    per-class filter blocks in sorted class order. Deterministic: fixed
    eigen-sorting and a positive-largest-entry sign convention.
    """
    classes = tuple(sorted(covs_by_class))
    if len(classes) < 2:
        raise ConfigError(f"CSP needs >= 2 classes, got {len(classes)}")
    for label in classes:
        if len(covs_by_class[label]) == 0:
            raise ConfigError(f"class {label!r} has no covariances")
    dim = np.asarray(covs_by_class[classes[0]][0]).shape[0]
    if pairs < 1 or 2 * pairs > dim:
        raise ConfigError(f"pairs must satisfy 1 <= pairs <= channels/2, got {pairs}")

    means = {
        label: np.mean(np.asarray(covs_by_class[label]), axis=0) for label in classes
    }
    if len(classes) == 2:
        filters, lam = _binary_csp(means[classes[0]], means[classes[1]], pairs)
        return CspModel(filters, pairs, classes, "binary", lam)

    blocks = []
    lams = []
    for label in classes:
        rest = [
            cov for other in classes if other != label for cov in covs_by_class[other]
        ]
        rest_mean = np.mean(np.asarray(rest), axis=0)
        f, lam = _binary_csp(means[label], rest_mean, pairs)
        blocks.append(f)
        lams.append(lam)
    return CspModel(
        np.vstack(blocks), pairs, classes, "one-vs-rest", np.concatenate(lams)
    )


def csp_features(model: CspModel, x: Trial | Array) -> FeatureVector:
    """Normalized log-variance of the spatially filtered trial."""
    data = x.data if isinstance(x, Trial) else np.asarray(x, dtype=np.float64)
    if data.shape[0] != model.filters.shape[1]:
        raise DimMismatchError(
            f"trial has {data.shape[0]} channels, filters expect "
            f"{model.filters.shape[1]}"
        )
    filtered = model.filters @ data
    variances = filtered.var(axis=1, ddof=1)
    return FeatureVector(np.log(variances / variances.sum()), "csp-logvar")


def ts_features(ref: Array, covs: Sequence[Array]) -> list[FeatureVector]:
    """Tangent-space vectors of ``covs`` at the shared reference point."""
    return [
        FeatureVector(tangent_map(ref, cov).flat, "tangent-space") for cov in covs
    ]
