"""Dense linear-algebra kernels with an explicit singular-value cutoff.

Every rank decision in the package goes through :func:`numerical_rank` so that
"rank", "range", "kernel" and "pseudoinverse" all agree on which singular
values count as zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonFinite, ShapeMismatch


@dataclass(frozen=True)
class RankTolerance:
    """Singular values at or below ``max(relative_cutoff * s_max, absolute_floor)`` are zero."""

    relative_cutoff: float = 1e-9
    absolute_floor: float = 1e-12

    def __post_init__(self):
        if not (0.0 < self.relative_cutoff < 1.0):
            raise ValueError(f"relative_cutoff must lie in (0, 1), got {self.relative_cutoff}")
        if not self.absolute_floor > 0.0:
            raise ValueError(f"absolute_floor must be positive, got {self.absolute_floor}")

    def cutoff(self, sigma_max: float) -> float:
        return max(self.relative_cutoff * sigma_max, self.absolute_floor)

    def to_dict(self) -> dict:
        return {"relative_cutoff": self.relative_cutoff, "absolute_floor": self.absolute_floor}

    @classmethod
    def from_dict(cls, d: dict) -> "RankTolerance":
        return cls(**{k: float(v) for k, v in d.items()})


DEFAULT_TOL = RankTolerance()


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-D float array."""
    a = np.asarray(m, dtype=float)
    if a.ndim == 1:
        a = a.reshape(1, -1)
    if a.ndim != 2:
        raise ShapeMismatch(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFinite(f"{name} contains NaN or Inf")
    return a


def singular_values(m, tol: RankTolerance = DEFAULT_TOL) -> tuple[np.ndarray, int]:
    """Return all singular values (descending) and how many are kept."""
    a = as_matrix(m)
    if a.size == 0:
        return np.zeros(0), 0
    s = np.linalg.svd(a, compute_uv=False)
    return s, int(np.count_nonzero(s > tol.cutoff(s[0])))


def numerical_rank(m, tol: RankTolerance = DEFAULT_TOL) -> int:
    return singular_values(m, tol)[1]


def _sign_normalize(u: np.ndarray) -> np.ndarray:
    # largest-magnitude entry of each column made positive (first one on ties)
    if u.shape[1] == 0:
        return u
    idx = np.argmax(np.abs(u), axis=0)
    signs = np.sign(u[idx, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    return u * signs


def range_basis(m, tol: RankTolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the numerical column space.

    Columns are the left singular vectors for the kept singular values, in
    descending order, each sign-normalized so that its largest-magnitude entry
    is positive.
    """
    a = as_matrix(m)
    if a.size == 0:
        return np.zeros((a.shape[0], 0))
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    r = int(np.count_nonzero(s > tol.cutoff(s[0])))
    return _sign_normalize(u[:, :r].copy())


def kernel_basis(m, tol: RankTolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the numerical null space (cols x k)."""
    a = as_matrix(m)
    ncols = a.shape[1]
    if a.size == 0:
        return np.eye(ncols)
    _, s, vt = np.linalg.svd(a, full_matrices=True)
    r = int(np.count_nonzero(s > tol.cutoff(s[0])))
    return _sign_normalize(vt[r:].T.copy())


def pseudoinverse(m, tol: RankTolerance = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse, truncated at the same cutoff as :func:`numerical_rank`."""
    a = as_matrix(m)
    if a.size == 0:
        return np.zeros((a.shape[1], a.shape[0]))
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    r = int(np.count_nonzero(s > tol.cutoff(s[0])))
    return (vt[:r].T / s[:r]) @ u[:, :r].T


def projection_residual(v, basis: np.ndarray) -> np.ndarray:
    """Component of ``v`` orthogonal to the span of the orthonormal ``basis``."""
    v = np.asarray(v, dtype=float)
    if basis.shape[1] == 0:
        return v.copy()
    return v - basis @ (basis.T @ v)


def least_squares_propagator(W, W_fwd, tol: RankTolerance = DEFAULT_TOL) -> tuple[np.ndarray, float]:
    """Minimum-norm minimizer of ``||W_fwd - M W||_F`` and the attained residual.

    Args:
        W: q x c matrix of current snapshots.
        W_fwd: q x c matrix of the snapshots one step later.
        tol: cutoff applied to the singular values of ``W``.

    Returns:
        ``(M, residual)`` with ``M = W_fwd @ pinv(W)``.
    """
    W = as_matrix(W, "W")
    W_fwd = as_matrix(W_fwd, "W_fwd")
    if W.shape != W_fwd.shape:
        raise ShapeMismatch(f"W has shape {W.shape} but W_fwd has shape {W_fwd.shape}")
    M = W_fwd @ pseudoinverse(W, tol)
    residual = float(np.linalg.norm(W_fwd - M @ W)) if W.size else 0.0
    return M, residual
