import numpy as np

from labelalign.spd import spd_exp, symmetrize


def random_spd(rng: np.random.Generator, dim: int, scale: float = 1.0) -> np.ndarray:
    """Well-conditioned random SPD matrix via exp of a scaled symmetric matrix."""
    s = symmetrize(rng.standard_normal((dim, dim))) / np.sqrt(dim)
    return spd_exp(scale * s)


def random_invertible(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Random square matrix, almost surely invertible."""
    while True:
        w = rng.standard_normal((dim, dim))
        if np.linalg.cond(w) < 1e4:
            return w
