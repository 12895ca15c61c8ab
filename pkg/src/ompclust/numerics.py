"""Dense linear-algebra kernel used by every other module.

Thin, contract-checked wrappers around LAPACK (via numpy): SVD,
Moore-Penrose pseudoinverse, orthogonal projectors, least squares, and
symmetric eigendecomposition.  All functions are pure and safe to call
concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Relative threshold below which a singular value is treated as zero.
RANK_RTOL = 1e-12
# Symmetry tolerance accepted by symmetric_eigen.
SYMMETRY_TOL = 1e-10


class NumericalError(RuntimeError):
    """A factorization failed to converge."""


def check_matrix(a, name="matrix"):
    """Validate and return `a` as a 2-D float64 array.

    Requires strictly positive dimensions and finite entries.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got ndim={a.ndim}")
    if a.shape[0] == 0 or a.shape[1] == 0:
        raise ValueError(f"{name} must have positive dimensions, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def check_vector(y, name="vector"):
    """Validate and return `y` as a 1-D float64 array with finite entries."""
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got ndim={y.ndim}")
    if y.size == 0:
        raise ValueError(f"{name} must be nonempty")
    if not np.all(np.isfinite(y)):
        raise ValueError(f"{name} contains non-finite entries")
    return y


@dataclass
class SvdResult:
    """Thin SVD a = u @ diag(sigma) @ vt with sigma sorted nonincreasing."""

    u: np.ndarray
    sigma: np.ndarray
    vt: np.ndarray

    def rank(self, rtol=RANK_RTOL):
        """Numerical rank: count of sigma above rtol * sigma[0]."""
        if self.sigma.size == 0 or self.sigma[0] <= 0.0:
            return 0
        return int(np.sum(self.sigma > rtol * self.sigma[0]))


def svd(a):
    """Thin singular value decomposition of a nonempty matrix."""
    a = check_matrix(a)
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge: {exc}") from exc
    return SvdResult(u=u, sigma=s, vt=vt)


def pseudoinverse(a, rtol=RANK_RTOL):
    """Moore-Penrose pseudoinverse via the SVD.

    Singular values at or below rtol * sigma_max are treated as exact
    zeros and left in place (their reciprocal is not taken).
    """
    a = check_matrix(a)
    res = svd(a)
    r = res.rank(rtol)
    if r == 0:
        return np.zeros((a.shape[1], a.shape[0]))
    inv = np.zeros_like(res.sigma)
    inv[:r] = 1.0 / res.sigma[:r]
    return (res.vt.T * inv) @ res.u.T


def projector(a, rtol=RANK_RTOL):
    """Orthogonal projector onto range(a)."""
    res = svd(a)
    r = res.rank(rtol)
    if r == 0:
        n = res.u.shape[0]
        return np.zeros((n, n))
    ur = res.u[:, :r]
    return ur @ ur.T


def lstsq(a, y, rtol=RANK_RTOL):
    """Minimum-norm least-squares solution of a @ c = y.

    Equals pseudoinverse(a) @ y by construction (same SVD path).
    """
    a = check_matrix(a)
    y = check_vector(y)
    if a.shape[0] != y.shape[0]:
        raise ValueError(f"shape mismatch: a has {a.shape[0]} rows, y has {y.shape[0]}")
    res = svd(a)
    r = res.rank(rtol)
    if r == 0:
        return np.zeros(a.shape[1])
    coeffs = res.u[:, :r].T @ y
    coeffs /= res.sigma[:r]
    return res.vt[:r].T @ coeffs


def symmetric_eigen(a, tol=SYMMETRY_TOL):
    """Eigendecomposition of a symmetric matrix.

    Returns (values, vectors) with values sorted nondecreasing and
    orthonormal eigenvectors in the columns of `vectors`.
    """
    a = check_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got {a.shape}")
    asym = np.max(np.abs(a - a.T)) if a.size else 0.0
    scale = max(1.0, np.max(np.abs(a)))
    if asym > tol * scale:
        raise ValueError(f"matrix is not symmetric within {tol} (max asymmetry {asym:.3e})")
    try:
        values, vectors = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"symmetric eigensolver did not converge: {exc}") from exc
    return values, vectors
