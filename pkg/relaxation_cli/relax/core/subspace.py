from typing import Tuple

import numpy as np
import scipy.linalg

RANK_CUTOFF = 1e-10


def null_space_basis(
    matrix: np.ndarray, cutoff: float = RANK_CUTOFF
) -> Tuple[np.ndarray, np.ndarray]:
    """Orthonormal basis of the right null space of ``matrix``.

    Singular values at or below ``cutoff * sigma_max`` count as zero. Returns the
    basis as columns together with all singular values (descending).
    """
    matrix = np.atleast_2d(matrix)
    _, s, vh = scipy.linalg.svd(matrix)
    if s.size == 0 or s[0] == 0.0:
        return np.eye(matrix.shape[1]), s
    rank = int((s > cutoff * s[0]).sum())
    return vh[rank:].T.copy(), s


def numerical_rank(matrix: np.ndarray, cutoff: float = RANK_CUTOFF) -> int:
    s = scipy.linalg.svdvals(np.atleast_2d(matrix))
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int((s > cutoff * s[0]).sum())


def principal_angles(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Principal angles (radians) between the column spans of ``a`` and ``b``.

    Both bases are orthonormalised first; small angles are resolved from sines
    so that angles below 1e-8 are not swamped by the arccos rounding floor.
    """
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    if a.shape[1] == 0 or b.shape[1] == 0:
        return np.zeros(0)
    return np.sort(scipy.linalg.subspace_angles(a, b))[::-1]


def max_principal_angle(a: np.ndarray, b: np.ndarray) -> float:
    """Largest principal angle; subspaces of different dimension are pi/2 apart."""
    if np.atleast_2d(a).shape[1] != np.atleast_2d(b).shape[1]:
        return float(np.pi / 2)
    angles = principal_angles(a, b)
    return float(angles.max()) if angles.size else 0.0
