"""Block-Hankel arrangements of output series and their rank (information) profile."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import EmptySeries, NonFinite, WindowTooLarge
from .indices import heuristic_window
from .numerics import DEFAULT_TOL, RankTolerance, singular_values


def as_series(y) -> np.ndarray:
    """Coerce an output series to a ``(T, p)`` float array."""
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        y = y.reshape(-1, 1)
    if y.ndim != 2:
        raise ValueError(f"output series must be (T, p), got shape {y.shape}")
    if not np.all(np.isfinite(y)):
        raise NonFinite("output series contains NaN or Inf")
    return y


@dataclass(frozen=True)
class HankelMatrix:
    N: int
    T: int
    p: int
    data: np.ndarray

    def block(self, i: int, j: int) -> np.ndarray:
        return self.data[i * self.p:(i + 1) * self.p, j]


def hankel_data(y: np.ndarray, N: int) -> np.ndarray:
    T, p = y.shape
    # (T-N+1, p, N) -> column j is y(j), ..., y(j+N-1) stacked
    windows = np.lib.stride_tricks.sliding_window_view(y, N, axis=0)
    return windows.transpose(0, 2, 1).reshape(T - N + 1, N * p).T.copy()


def build_hankel(y, N: int) -> HankelMatrix:
    """The ``pN x (T-N+1)`` matrix whose column j stacks ``y(j), ..., y(j+N-1)``."""
    y = as_series(y)
    T, p = y.shape
    if N < 1:
        raise WindowTooLarge(f"window N must be >= 1, got {N}")
    if N > T:
        raise WindowTooLarge(f"window N={N} exceeds the series length T={T}")
    return HankelMatrix(N=N, T=T, p=p, data=hankel_data(y, N))


class RankPoint(NamedTuple):
    T: int
    N: int
    rank: int
    sigma_min_kept: float


def _rank_at(y: np.ndarray, N: int, T: int, tol: RankTolerance) -> tuple[int, float]:
    s, r = singular_values(hankel_data(y[:T], N), tol)
    return r, float(s[r - 1]) if r else 0.0


def rank_curve(y, tol: RankTolerance = DEFAULT_TOL) -> list[RankPoint]:
    """Rank of ``Y_{N(T),T}`` for ``T = p, ..., len(y)`` with the heuristic window ``N(T)``."""
    y = as_series(y)
    L, p = y.shape
    if L == 0:
        raise EmptySeries("cannot build a rank curve from an empty series")
    if L < p:
        raise EmptySeries(f"need at least p={p} samples for a rank curve, got {L}")
    curve = []
    for T in range(p, L + 1):
        N = heuristic_window(T, p)
        r, smin = _rank_at(y, N, T, tol)
        curve.append(RankPoint(T, N, r, smin))
    return curve


def write_rank_curve_csv(curve, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["T", "N", "rank", "sigma_min_kept"])
        for pt in curve:
            w.writerow([pt.T, pt.N, pt.rank, f"{pt.sigma_min_kept:.17g}"])


def read_rank_curve_csv(path) -> list[RankPoint]:
    with open(path, newline="") as fh:
        return [
            RankPoint(int(row["T"]), int(row["N"]), int(row["rank"]), float(row["sigma_min_kept"]))
            for row in csv.DictReader(fh)
        ]


@dataclass(frozen=True)
class HankelInfoEstimate:
    """Largest Hankel rank seen in a finite series.

    ``gamma`` is a lower estimate of the Hankel information of the infinite
    series; it equals it once ``samples`` covers the minimum horizon of the
    generating system.
    """

    gamma: int
    achieved_at: tuple[int, int] | None  # (N, T); None when gamma == 0
    samples: int
    rank_curve: list[RankPoint] = field(default_factory=list, repr=False)


def hankel_information(y, tol: RankTolerance = DEFAULT_TOL, with_curve: bool = True) -> HankelInfoEstimate:
    """Maximum numerical rank of ``Y_{N,T}`` over all ``1 <= N <= T <= len(y)``.

    For fixed N the rank can only grow with T (columns are appended), so the
    maximum over T is taken at ``T = len(y)``; the earliest ``(T, N)`` pair
    reaching it is then located by bisection on T. Windows whose shape cannot
    beat the running best are skipped.
    """
    y = as_series(y)
    L, p = y.shape
    if L == 0:
        raise EmptySeries("cannot estimate Hankel information of an empty series")
    full_rank = {}
    best = 0
    for N in range(1, L + 1):
        if min(p * N, L - N + 1) <= best:
            continue
        r, _ = _rank_at(y, N, L, tol)
        full_rank[N] = r
        best = max(best, r)
    achieved = None
    if best > 0:
        for N, r in full_rank.items():
            if r != best:
                continue
            lo, hi = N, L  # rank(Y_{N,hi}) == best
            while lo < hi:
                mid = (lo + hi) // 2
                if _rank_at(y, N, mid, tol)[0] == best:
                    hi = mid
                else:
                    lo = mid + 1
            cand = (lo, N)
            if achieved is None or cand < achieved:
                achieved = cand
        achieved = (achieved[1], achieved[0])
    curve = rank_curve(y, tol) if with_curve and L >= p else []
    return HankelInfoEstimate(gamma=best, achieved_at=achieved, samples=L, rank_curve=curve)


def saturation_time(curve) -> int | None:
    """First T at which the rank curve attains its final maximum."""
    if not curve:
        return None
    top = max(pt.rank for pt in curve)
    return next(pt.T for pt in curve if pt.rank == top)
