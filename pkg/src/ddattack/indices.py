"""Observability and excitability indices and the horizon lengths derived from them."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import WindowTooSmall
from .linsys import LtiSystem
from .numerics import DEFAULT_TOL, RankTolerance, numerical_rank


@dataclass(frozen=True)
class IndexReport:
    nu: int
    mu: int
    p: int
    mu_of_x0: int | None = None

    @property
    def t_safe_model(self) -> int:
        return self.nu

    @property
    def t_safe_data(self) -> int:
        return self.nu + self.mu

    @property
    def t_safe_heuristic(self) -> int:
        return safe_horizon_heuristic(self.nu, self.mu, self.p)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(
            t_safe_model=self.t_safe_model,
            t_safe_data=self.t_safe_data,
            t_safe_heuristic=self.t_safe_heuristic,
        )
        return d


def _rank_plateau(blocks, tol: RankTolerance, cap: int) -> int:
    """Smallest i such that stacking block i+1 does not raise the rank of blocks 1..i.

    ``blocks`` yields the successive blocks (as rows); the search stops at ``cap``.
    """
    stacked = None
    prev_rank = None
    for i, block in enumerate(blocks, start=1):
        stacked = block if stacked is None else np.vstack([stacked, block])
        r = numerical_rank(stacked, tol)
        if prev_rank is not None and r == prev_rank:
            return i - 1
        if i > cap:
            return i - 1
        prev_rank = r
    raise RuntimeError("block generator ended before the rank stabilized")


def _power_blocks(first: np.ndarray, step):
    cur = first
    while True:
        yield cur
        cur = step(cur)


def _normalized_dynamics(A: np.ndarray) -> np.ndarray:
    # Scaling A by a constant leaves every Krylov span unchanged, while keeping
    # the stacked powers comparable in size for the relative rank cutoff.
    rho = float(np.max(np.abs(np.linalg.eigvals(A)))) if A.size else 0.0
    return A / rho if rho > 0 else A


def observability_index(sys: LtiSystem, tol: RankTolerance = DEFAULT_TOL) -> int:
    """Smallest N with ``rank O_N == rank O_{N+1}``."""
    A = _normalized_dynamics(sys.A)
    return _rank_plateau(_power_blocks(sys.C, lambda M: M @ A), tol, cap=sys.n + 1)


def excitability_index_at(sys: LtiSystem, x, tol: RankTolerance = DEFAULT_TOL) -> int:
    """Krylov length of ``x``: smallest i with ``rank E_i(x) == rank E_{i+1}(x)``.

    Returns 1 for ``x = 0``.
    """
    x = np.asarray(x, dtype=float).reshape(1, -1)
    At = _normalized_dynamics(sys.A).T
    return _rank_plateau(_power_blocks(x, lambda v: v @ At), tol, cap=sys.n + 1)


def excitability_index(sys: LtiSystem, tol: RankTolerance = DEFAULT_TOL) -> int:
    """Degree of the minimal polynomial of ``A``, which is the maximum of ``mu(x)`` over x.

    Found as the first power ``A^d`` whose vectorization adds no rank to
    ``vec(I), vec(A), ..., vec(A^(d-1))``.
    """
    n = sys.n
    As = _normalized_dynamics(sys.A)
    first = np.eye(n).reshape(1, -1)
    return _rank_plateau(_power_blocks(first, lambda v: (v.reshape(n, n) @ As).reshape(1, -1)), tol, cap=n + 1)


def heuristic_window(T: int, p: int) -> int:
    """Window size ``floor((T + 1) / (p + 1))``, the largest N with ``T - N + 1 >= pN``."""
    N = (T + 1) // (p + 1)
    if N < 1:
        raise WindowTooSmall(f"horizon T={T} is too short for p={p} sensors (need T >= p)")
    return N


def safe_horizon_heuristic(nu: int, mu: int, p: int) -> int:
    """Horizon after which the heuristic window reaches the maximal Hankel rank."""
    return max(nu * (p + 1) - 1, -(-mu * (p + 1) // p) - 1)


def index_report(sys: LtiSystem, x0=None, tol: RankTolerance = DEFAULT_TOL) -> IndexReport:
    return IndexReport(
        nu=observability_index(sys, tol),
        mu=excitability_index(sys, tol),
        p=sys.p,
        mu_of_x0=None if x0 is None else excitability_index_at(sys, x0, tol),
    )
