"""Discrete-time LTI systems ``x(k+1) = A x(k) + B u(k)``, ``y(k) = C x(k) + D u(k)``.

Time series are plain arrays with time along axis 0: an output series is a
``(T, p)`` array, an input series a ``(T, m)`` array. A "stacked" window
``y_{r:s}`` is the flattening ``(y(r), ..., y(s))`` of length ``p (s - r + 1)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BadDimensions, DimensionMismatch, NonFinite


@dataclass(frozen=True, eq=False)
class LtiSystem:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray | None = None

    def __post_init__(self):
        A, B, C = (np.array(M, dtype=float, ndmin=2) for M in (self.A, self.B, self.C))
        # omitted feedthrough means D = 0
        D = np.zeros((C.shape[0], B.shape[1])) if self.D is None else np.array(self.D, dtype=float, ndmin=2)
        n = A.shape[0]
        if A.ndim != 2 or A.shape != (n, n):
            raise DimensionMismatch(f"A must be square, got {A.shape}")
        if B.shape[0] != n:
            raise DimensionMismatch(f"B must have {n} rows, got {B.shape}")
        if C.shape[1] != n:
            raise DimensionMismatch(f"C must have {n} columns, got {C.shape}")
        if D.shape != (C.shape[0], B.shape[1]):
            raise DimensionMismatch(f"D must be {C.shape[0]}x{B.shape[1]}, got {D.shape}")
        for name, M in zip("ABCD", (A, B, C, D)):
            if not np.all(np.isfinite(M)):
                raise NonFinite(f"{name} contains NaN or Inf")
            M.setflags(write=False)
            object.__setattr__(self, name, M)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.C.shape[0]

    def __eq__(self, other):
        if not isinstance(other, LtiSystem):
            return NotImplemented
        return all(np.array_equal(getattr(self, k), getattr(other, k)) for k in "ABCD")

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "p": self.p,
            "A": self.A.ravel().tolist(),
            "B": self.B.ravel().tolist(),
            "C": self.C.ravel().tolist(),
            "D": self.D.ravel().tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LtiSystem":
        try:
            n, m, p = int(d["n"]), int(d["m"]), int(d["p"])
            shapes = {"A": (n, n), "B": (n, m), "C": (p, n), "D": (p, m)}
            mats = {}
            for k, shape in shapes.items():
                flat = np.asarray(d.get(k, np.zeros(shape)) if k == "D" else d[k], dtype=float).ravel()
                if flat.size != shape[0] * shape[1]:
                    raise BadDimensions(f"{k} has {flat.size} entries, expected {shape[0]}x{shape[1]}")
                mats[k] = flat.reshape(shape)
        except KeyError as exc:
            raise BadDimensions(f"system description is missing field {exc}") from None
        return cls(**mats)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n")

    @classmethod
    def load(cls, path) -> "LtiSystem":
        return cls.from_dict(json.loads(Path(path).read_text()))


def companion_system(n: int, m: int, p: int, seed: int) -> LtiSystem:
    """Companion-form test system with randomly selected actuators and sensors.

    ``A`` has an identity block on its superdiagonal and a last row of ``-1``;
    the columns of ``B`` and the rows of ``C`` are distinct standard basis
    vectors drawn with ``numpy.random.default_rng(seed)``; ``D = 0``.
    """
    if n < 2 or not (1 <= m <= n) or not (1 <= p <= n):
        raise BadDimensions(f"need n >= 2, 1 <= m <= n, 1 <= p <= n; got n={n}, m={m}, p={p}")
    A = np.zeros((n, n))
    A[:-1, 1:] = np.eye(n - 1)
    A[-1, :] = -1.0
    rng = np.random.default_rng(seed)
    actuators = rng.choice(n, size=m, replace=False)
    sensors = rng.choice(n, size=p, replace=False)
    eye = np.eye(n)
    return LtiSystem(A, eye[:, actuators], eye[sensors], np.zeros((p, m)))


def _input_array(sys: LtiSystem, u, horizon: int) -> np.ndarray:
    if u is None:
        return np.zeros((horizon, sys.m))
    u = np.asarray(u, dtype=float)
    if u.ndim == 1 and sys.m == 1:
        u = u.reshape(-1, 1)
    if u.ndim != 2 or u.shape[1] != sys.m:
        raise DimensionMismatch(f"input series must have shape (T, {sys.m}), got {u.shape}")
    out = np.zeros((horizon, sys.m))
    k = min(horizon, u.shape[0])
    out[:k] = u[:k]
    return out


def simulate(sys: LtiSystem, x0, u=None, horizon: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Run the recursion for ``horizon`` steps.

    Inputs shorter than the horizon are zero-extended; ``u=None`` means no input.

    Returns:
        ``(y, x)`` with ``y`` of shape ``(horizon, p)`` and ``x`` of shape
        ``(horizon, n)`` holding ``x(0) .. x(horizon - 1)``.
    """
    x0 = np.asarray(x0, dtype=float).ravel()
    if x0.size != sys.n:
        raise DimensionMismatch(f"x0 must have length {sys.n}, got {x0.size}")
    if horizon is None:
        if u is None:
            raise ValueError("horizon is required when no input series is given")
        horizon = len(u)
    u = _input_array(sys, u, horizon)
    xs = np.empty((horizon, sys.n))
    ys = np.empty((horizon, sys.p))
    x = x0
    for k in range(horizon):
        xs[k] = x
        ys[k] = sys.C @ x + sys.D @ u[k]
        x = sys.A @ x + sys.B @ u[k]
    return ys, xs


def observability_matrix(sys: LtiSystem, N: int) -> np.ndarray:
    """``[C; CA; ...; CA^(N-1)]``, shape ``(pN, n)``."""
    if N < 1:
        raise BadDimensions(f"window N must be >= 1, got {N}")
    blocks = [sys.C]
    for _ in range(N - 1):
        blocks.append(blocks[-1] @ sys.A)
    return np.vstack(blocks)


def markov_parameters(sys: LtiSystem, count: int) -> list[np.ndarray]:
    """``[D, CB, CAB, ..., CA^(count-2)B]``."""
    out = [sys.D]
    CAk = sys.C
    for _ in range(count - 1):
        out.append(CAk @ sys.B)
        CAk = CAk @ sys.A
    return out


def input_coupling_matrix(sys: LtiSystem, N: int) -> np.ndarray:
    """Block lower-triangular Toeplitz map from ``u_{0:N-1}`` to ``y_{0:N-1}``, shape ``(pN, mN)``."""
    if N < 1:
        raise BadDimensions(f"window N must be >= 1, got {N}")
    p, m = sys.p, sys.m
    h = markov_parameters(sys, N)
    out = np.zeros((p * N, m * N))
    for i in range(N):
        for j in range(i + 1):
            out[i * p:(i + 1) * p, j * m:(j + 1) * m] = h[i - j]
    return out


def windowed_output(sys: LtiSystem, x0, u_window, N: int) -> np.ndarray:
    """Stacked outputs ``O_N x0 + C_N u_window`` over a window of size ``N``."""
    x0 = np.asarray(x0, dtype=float).ravel()
    u_window = np.asarray(u_window, dtype=float).ravel()
    if x0.size != sys.n:
        raise DimensionMismatch(f"x0 must have length {sys.n}, got {x0.size}")
    if u_window.size != sys.m * N:
        raise DimensionMismatch(f"u_window must have length {sys.m * N}, got {u_window.size}")
    return observability_matrix(sys, N) @ x0 + input_coupling_matrix(sys, N) @ u_window


def stack_window(y: np.ndarray, start: int, N: int) -> np.ndarray:
    """``y_{start:start+N-1}`` flattened."""
    return np.asarray(y[start:start + N], dtype=float).reshape(-1)
