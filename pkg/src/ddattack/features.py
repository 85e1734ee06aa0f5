"""Feature bases for output windows and the linear dynamics of feature vectors.

A feature basis ``S`` is an orthonormal ``pN x q`` matrix spanning the windows
a nominal system can produce; the feature vector of window k is
``w(k) = S^T y_{k:k+N-1}``. Nominal feature vectors evolve linearly,
``w(k+1) = M w(k)``, with ``M`` either derived from the model or fitted to data.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import EmptySeries, TooFewSamples, WindowBelowObservabilityIndex, WindowTooLarge
from .hankel import HankelMatrix, as_series, build_hankel
from .indices import observability_index
from .linsys import LtiSystem, observability_matrix
from .numerics import DEFAULT_TOL, RankTolerance, least_squares_propagator, pseudoinverse, range_basis


@dataclass(frozen=True)
class FeatureBasis:
    window: int
    basis: np.ndarray
    provenance: Literal["model-based", "data-driven"]

    @property
    def q(self) -> int:
        return self.basis.shape[1]


@dataclass(frozen=True)
class FeatureDynamics:
    M: np.ndarray
    fit_residual: float = 0.0

    @property
    def q(self) -> int:
        return self.M.shape[0]

    def to_json(self) -> str:
        return json.dumps({"q": self.q, "M": self.M.ravel().tolist(), "fit_residual": self.fit_residual})

    @classmethod
    def from_json(cls, text: str) -> "FeatureDynamics":
        d = json.loads(text)
        q = int(d["q"])
        return cls(M=np.asarray(d["M"], dtype=float).reshape(q, q), fit_residual=float(d["fit_residual"]))


def model_feature_basis(sys: LtiSystem, N: int, tol: RankTolerance = DEFAULT_TOL) -> FeatureBasis:
    return FeatureBasis(N, range_basis(observability_matrix(sys, N), tol), "model-based")


def data_feature_basis(h: HankelMatrix, tol: RankTolerance = DEFAULT_TOL) -> FeatureBasis:
    if h.data.size == 0:
        raise EmptySeries("Hankel matrix is empty")
    return FeatureBasis(h.N, range_basis(h.data, tol), "data-driven")


def feature_sequence(basis: FeatureBasis, y) -> np.ndarray:
    """Feature vectors ``w(0), ..., w(len(y) - N)`` as the rows of a ``(K, q)`` array."""
    y = as_series(y)
    N = basis.window
    if len(y) < N:
        raise WindowTooLarge(f"series of length {len(y)} is shorter than the window {N}")
    windows = np.lib.stride_tricks.sliding_window_view(y, N, axis=0)
    stacked = windows.transpose(0, 2, 1).reshape(len(y) - N + 1, -1)
    if stacked.shape[1] != basis.basis.shape[0]:
        raise WindowTooLarge(
            f"windows have length {stacked.shape[1]} but the basis expects {basis.basis.shape[0]}"
        )
    return stacked @ basis.basis


def assemble_shifted_pair(w) -> tuple[np.ndarray, np.ndarray]:
    """Snapshot matrices ``W = [w(0) .. w(c-1)]`` and ``W_fwd = [w(1) .. w(c)]``."""
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] < 2:
        raise TooFewSamples("need at least two feature vectors")
    return w[:-1].T.copy(), w[1:].T.copy()


def fit_feature_dynamics(W, W_fwd, tol: RankTolerance = DEFAULT_TOL) -> FeatureDynamics:
    M, residual = least_squares_propagator(W, W_fwd, tol)
    return FeatureDynamics(M=M, fit_residual=residual)


def model_feature_dynamics(
    sys: LtiSystem, basis: FeatureBasis, tol: RankTolerance = DEFAULT_TOL, nu: int | None = None
) -> FeatureDynamics:
    """``M = (S^T O_N) A (S^T O_N)^+`` for a model-based basis.

    Raises:
        WindowBelowObservabilityIndex: if the basis window is shorter than the
            observability index, where the recursion need not hold.
    """
    if nu is None:
        nu = observability_index(sys, tol)
    if basis.window < nu:
        raise WindowBelowObservabilityIndex(
            f"window N={basis.window} is below the observability index {nu}"
        )
    G = basis.basis.T @ observability_matrix(sys, basis.window)
    return FeatureDynamics(M=G @ sys.A @ pseudoinverse(G, tol), fit_residual=0.0)


def learn_from_outputs(y, N: int, T: int | None = None, tol: RankTolerance = DEFAULT_TOL):
    """Fit a data-driven basis and feature dynamics for horizon ``T``.

    The basis spans ``Col(Y_{N,T})`` (samples ``0 .. T-1``). The snapshot pair
    ``W = [w(0) .. w(T-N)]``, ``W_fwd = [w(1) .. w(T-N+1)]`` also needs sample
    ``T``, so ``y`` must hold at least ``T + 1`` samples. ``T`` defaults to
    ``len(y) - 1``.
    """
    y = as_series(y)
    if T is None:
        T = len(y) - 1
    if len(y) < T + 1:
        raise TooFewSamples(f"horizon T={T} needs {T + 1} samples, got {len(y)}")
    basis = data_feature_basis(build_hankel(y[:T], N), tol)
    W, W_fwd = assemble_shifted_pair(feature_sequence(basis, y[:T + 1]))
    return basis, fit_feature_dynamics(W, W_fwd, tol)
