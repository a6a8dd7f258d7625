"""Geometry of symmetric positive definite matrices.

SPD matrices are plain float64 ndarrays validated by :func:`spd_from_matrix`.
All matrix functions go through a symmetric eigendecomposition and
symmetrize their output, so results stay exactly symmetric under rounding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimMismatchError,
    EigFailureError,
    EmptyInputError,
    NonFiniteError,
    NotPositiveDefiniteError,
)

SPD_TOL = 1e-10

Array = np.ndarray


def symmetrize(a: Array) -> Array:
    return 0.5 * (a + a.T)


def _eigh(a: Array) -> tuple[Array, Array]:
    try:
        return np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise EigFailureError(f"symmetric eigendecomposition failed: {exc}") from exc


def _check_square(a: Array, name: str = "matrix") -> Array:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimMismatchError(f"{name} must be square, got shape {a.shape}")
    return a


def _check_same_dim(p1: Array, p2: Array) -> None:
    if p1.shape != p2.shape:
        raise DimMismatchError(f"dimension mismatch: {p1.shape} vs {p2.shape}")


def spd_from_matrix(raw, tol: float = SPD_TOL) -> Array:
    """Symmetrize ``raw`` and validate positive definiteness.

    The smallest eigenvalue must exceed ``tol * trace / dim`` (a scale-free
    threshold). Returns the validated symmetric matrix.
    """
    a = _check_square(raw)
    if not np.isfinite(a).all():
        raise NonFiniteError("matrix contains NaN or Inf entries")
    s = symmetrize(a)
    w = np.linalg.eigvalsh(s)
    dim = s.shape[0]
    threshold = tol * np.trace(s) / dim
    if w[0] <= threshold:
        raise NotPositiveDefiniteError(
            f"smallest eigenvalue {w[0]:.6g} <= threshold {threshold:.6g}"
        )
    return s


def _apply_eig(p: Array, fn) -> Array:
    """Apply a scalar function to the spectrum of a symmetric matrix."""
    w, u = _eigh(symmetrize(np.asarray(p, dtype=np.float64)))
    return symmetrize((u * fn(w)) @ u.T)


def _require_positive_spectrum(w: Array, op: str) -> None:
    if w[0] <= 0.0:
        raise NotPositiveDefiniteError(f"{op}: spectrum not positive (min {w[0]:.6g})")


def spd_sqrt(p: Array) -> Array:
    """Principal matrix square root of an SPD matrix."""
    w, u = _eigh(symmetrize(np.asarray(p, dtype=np.float64)))
    _require_positive_spectrum(w, "spd_sqrt")
    return symmetrize((u * np.sqrt(w)) @ u.T)


def spd_inv_sqrt(p: Array) -> Array:
    """Inverse principal square root of an SPD matrix."""
    w, u = _eigh(symmetrize(np.asarray(p, dtype=np.float64)))
    _require_positive_spectrum(w, "spd_inv_sqrt")
    return symmetrize((u * (1.0 / np.sqrt(w))) @ u.T)


def spd_log(p: Array) -> Array:
    """Matrix logarithm of an SPD matrix (a symmetric matrix)."""
    w, u = _eigh(symmetrize(np.asarray(p, dtype=np.float64)))
    _require_positive_spectrum(w, "spd_log")
    return symmetrize((u * np.log(w)) @ u.T)


def spd_exp(s: Array) -> Array:
    """Matrix exponential of a symmetric matrix (an SPD matrix)."""
    return _apply_eig(s, np.exp)


def riemannian_distance(p1: Array, p2: Array) -> float:
    """Geodesic distance sqrt(sum log^2 eigenvalues of p1^-1 p2).

    Computed on the symmetric matrix p1^{-1/2} p2 p1^{-1/2}, whose spectrum
    equals that of p1^{-1} p2 but whose eigenproblem is stable. Invariant
    under congruence by any invertible matrix.
    """
    p1 = _check_square(p1, "p1")
    p2 = _check_square(p2, "p2")
    _check_same_dim(p1, p2)
    isq = spd_inv_sqrt(p1)
    w = np.linalg.eigvalsh(symmetrize(isq @ p2 @ isq))
    _require_positive_spectrum(w, "riemannian_distance")
    return float(np.sqrt(np.sum(np.log(w) ** 2)))


@dataclass(frozen=True, eq=False)
class TangentVector:
    """A tangent vector at ``ref``, flattened to length C(C+1)/2.

    The flat layout is the row-major upper triangle
    (d11, sqrt(2)*d12, ..., sqrt(2)*d1C, d22, ..., dCC); the sqrt(2)
    off-diagonal weight makes the Euclidean inner product of flats equal
    the Frobenius inner product of the symmetric matrices.
    """

    ref: Array
    flat: Array

    def __post_init__(self):
        c = self.ref.shape[0]
        expected = c * (c + 1) // 2
        if self.flat.shape != (expected,):
            raise DimMismatchError(
                f"flat length {self.flat.shape} does not match dim {c} "
                f"(expected {expected})"
            )

    @property
    def dim(self) -> int:
        return self.ref.shape[0]


def flatten_sym(s: Array) -> Array:
    """Upper triangle of a symmetric matrix with sqrt(2)-weighted off-diagonals."""
    s = _check_square(s, "symmetric matrix")
    c = s.shape[0]
    iu = np.triu_indices(c)
    weights = np.where(iu[0] == iu[1], 1.0, np.sqrt(2.0))
    return weights * s[iu]


def unflatten_sym(flat: Array) -> Array:
    """Inverse of :func:`flatten_sym`."""
    flat = np.asarray(flat, dtype=np.float64)
    c = int((np.sqrt(1 + 8 * flat.shape[0]) - 1) / 2)
    if c * (c + 1) // 2 != flat.shape[0]:
        raise DimMismatchError(f"length {flat.shape[0]} is not a triangle number")
    s = np.zeros((c, c))
    iu = np.triu_indices(c)
    weights = np.where(iu[0] == iu[1], 1.0, np.sqrt(2.0))
    s[iu] = flat / weights
    s[(iu[1], iu[0])] = s[iu]
    return s


def tangent_map(ref: Array, p: Array) -> TangentVector:
    """Logarithmic map of ``p`` at ``ref``, flattened.

    S = ref^{1/2} log(ref^{-1/2} p ref^{-1/2}) ref^{1/2}.
    """
    ref = _check_square(ref, "ref")
    p = _check_square(p, "p")
    _check_same_dim(ref, p)
    half = spd_sqrt(ref)
    inv_half = spd_inv_sqrt(ref)
    s = symmetrize(half @ spd_log(inv_half @ p @ inv_half) @ half)
    return TangentVector(ref=ref, flat=flatten_sym(s))


def tangent_unmap(v: TangentVector) -> Array:
    """Exponential map inverting :func:`tangent_map`."""
    half = spd_sqrt(v.ref)
    inv_half = spd_inv_sqrt(v.ref)
    s = unflatten_sym(v.flat)
    return symmetrize(half @ spd_exp(inv_half @ s @ inv_half) @ half)


def _check_stack(ps, op: str) -> list[Array]:
    mats = [np.asarray(p, dtype=np.float64) for p in ps]
    if not mats:
        raise EmptyInputError(f"{op}: empty input")
    shape = mats[0].shape
    for m in mats[1:]:
        if m.shape != shape:
            raise DimMismatchError(f"{op}: mixed shapes {shape} vs {m.shape}")
    return mats


def log_euclidean_mean(ps) -> Array:
    """exp of the arithmetic mean of matrix logarithms."""
    mats = _check_stack(ps, "log_euclidean_mean")
    logs = np.mean([spd_log(m) for m in mats], axis=0)
    return spd_exp(logs)


def arithmetic_mean_cov(ps) -> Array:
    """Entrywise average of the matrices."""
    mats = _check_stack(ps, "arithmetic_mean_cov")
    return symmetrize(np.mean(mats, axis=0))
