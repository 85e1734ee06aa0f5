"""Attack scenarios and (un)detectability checks.

An attack is an input sequence that is zero before ``start``. It is invisible
to a monitor exactly when the output deviation it causes is zero, i.e. when
every window ``u_{T:T+N-1}`` lies in the kernel of the input-coupling matrix
``C_N``.

The condition is checked for every ``N`` up to ``L + n``, where ``L`` is the
attack length. Beyond ``T + L`` the input is zero, and the deviation of the
remaining outputs is ``O_j`` applied to the state deviation at ``T + L``.
By Cayley-Hamilton, ``O_n`` has the same kernel as every longer ``O_j``.
So ``n`` more steps settle the infinite quantifier. For a single-sample
attack this gives ``N_max = n + 1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, RegimeViolation
from .indices import excitability_index, observability_index
from .linsys import LtiSystem, input_coupling_matrix, observability_matrix
from .numerics import DEFAULT_TOL, RankTolerance, kernel_basis, numerical_rank, projection_residual, range_basis


@dataclass(frozen=True)
class AttackScenario:
    """Input injected from ``start`` on; ``inputs[i]`` is ``u(start + i)``.

    An all-zero scenario is allowed and acts as the no-attack reference.
    """

    start: int
    inputs: np.ndarray
    label: str = ""

    def __post_init__(self):
        u = np.array(self.inputs, dtype=float, ndmin=2)
        if self.start < 0:
            raise ValueError(f"attack start must be nonnegative, got {self.start}")
        object.__setattr__(self, "inputs", u)

    @property
    def m(self) -> int:
        return self.inputs.shape[1]

    @property
    def duration(self) -> int:
        """Index one past the last nonzero sample, relative to ``start``."""
        nz = np.flatnonzero(np.any(self.inputs != 0, axis=1))
        return int(nz[-1]) + 1 if nz.size else 0

    def input_series(self, horizon: int) -> np.ndarray:
        """Dense ``(horizon, m)`` input array, zero outside the attack."""
        u = np.zeros((horizon, self.m))
        stop = min(horizon, self.start + len(self.inputs))
        if stop > self.start:
            u[self.start:stop] = self.inputs[:stop - self.start]
        return u

    def window(self, N: int) -> np.ndarray:
        """Stacked ``u_{start:start+N-1}``, zero-padded past the recorded samples."""
        w = np.zeros((N, self.m))
        k = min(N, len(self.inputs))
        w[:k] = self.inputs[:k]
        return w.reshape(-1)

    def to_dict(self) -> dict:
        return {"start": self.start, "inputs": self.inputs.tolist(), "label": self.label}

    @classmethod
    def from_dict(cls, d: dict) -> "AttackScenario":
        return cls(start=int(d["start"]), inputs=np.asarray(d["inputs"], dtype=float), label=d.get("label", ""))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "AttackScenario":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class DetectabilityVerdict:
    detectable: bool
    # largest relative output deviation found and the window where it occurs
    residual: float
    bound: float
    window: int | None = None
    details: dict = field(default_factory=dict)


def _check_system(sys: LtiSystem, scenario: AttackScenario) -> None:
    if scenario.m != sys.m:
        raise DimensionMismatch(f"attack has {scenario.m} input channels, system has {sys.m}")


def check_early_detectability(
    sys: LtiSystem, scenario: AttackScenario, T: int, tol: RankTolerance = DEFAULT_TOL
) -> DetectabilityVerdict:
    """Detectability of an attack over ``{0, ..., T-1}`` with ``T`` at most the observability index.

    In that range an attack is visible only if its output contribution
    ``C_T u_{0:T-1}`` cannot be produced by some initial state, i.e. if it has
    a component outside ``Col(O_T)``.
    """
    _check_system(sys, scenario)
    nu = observability_index(sys, tol)
    if T > nu:
        raise RegimeViolation(f"early detectability applies for T <= {nu}, got T={T}")
    u = scenario.input_series(T).reshape(-1)
    v = input_coupling_matrix(sys, T) @ u
    res = float(np.linalg.norm(projection_residual(v, range_basis(observability_matrix(sys, T), tol))))
    bound = tol.cutoff(float(np.linalg.norm(v)))
    return DetectabilityVerdict(detectable=res > bound, residual=res, bound=bound, window=T)


def _left_invertible(sys: LtiSystem, tol: RankTolerance) -> bool:
    # injective input-output map: rank C_{n+1} - rank C_n == m
    n = sys.n
    return numerical_rank(input_coupling_matrix(sys, n + 1), tol) - numerical_rank(
        input_coupling_matrix(sys, n), tol
    ) == sys.m


def check_undetectable(
    sys: LtiSystem,
    scenario: AttackScenario,
    N_max: int | None = None,
    tol: RankTolerance = DEFAULT_TOL,
    nu: int | None = None,
    mu: int | None = None,
) -> DetectabilityVerdict:
    """Decide whether an attack starting after the data-driven safe time is undetectable.

    The attack is undetectable iff ``||C_N u_{T:T+N-1}|| <= tol * ||C_N||_F * ||u||``
    for ``N = 1 .. N_max`` (default: attack length plus ``n``). The verdict's
    ``details`` also record whether the system is left invertible, since a
    nonzero finite-duration undetectable attack can only exist when it is not.
    """
    _check_system(sys, scenario)
    nu = observability_index(sys, tol) if nu is None else nu
    mu = excitability_index(sys, tol) if mu is None else mu
    if scenario.start < nu + mu + 1:
        raise RegimeViolation(
            f"attack starts at {scenario.start}, before the data-driven safe time {nu + mu + 1}"
        )
    if N_max is None:
        N_max = scenario.duration + sys.n
    worst_ratio, worst_N, worst_dev, worst_bound = -1.0, None, 0.0, 0.0
    detected_at = None
    for N in range(1, N_max + 1):
        CN = input_coupling_matrix(sys, N)
        u = scenario.window(N)
        dev = float(np.linalg.norm(CN @ u))
        bound = max(
            tol.relative_cutoff * float(np.linalg.norm(CN)) * float(np.linalg.norm(u)), tol.absolute_floor
        )
        if dev / bound > worst_ratio:
            worst_ratio, worst_N, worst_dev, worst_bound = dev / bound, N, dev, bound
        if dev > bound and detected_at is None:
            detected_at = N
    left_inv = _left_invertible(sys, tol)
    detectable = detected_at is not None
    details = {
        "first_detecting_window": detected_at,
        "N_max": N_max,
        "left_invertible": left_inv,
        # nonzero finite attacks can only hide in systems that are not left invertible
        "consistent_with_left_invertibility": detectable or not left_inv or scenario.duration == 0,
    }
    return DetectabilityVerdict(
        detectable=detectable,
        residual=worst_dev,
        bound=worst_bound,
        window=detected_at if detectable else worst_N,
        details=details,
    )


def undetectable_input_space(sys: LtiSystem, N: int, tol: RankTolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of input windows of length ``N`` that leave no trace in the outputs.

    These are the vectors of ``Ker(C_N)`` whose state deviation at the end of
    the window is also unobservable, so the outputs after the attack are
    untouched as well.
    """
    n = sys.n
    # state deviation after the window: sum_j A^(N-1-j) B u(j)
    reach = np.hstack([np.linalg.matrix_power(sys.A, N - 1 - j) @ sys.B for j in range(N)])
    constraint = np.vstack([input_coupling_matrix(sys, N), observability_matrix(sys, n) @ reach])
    return kernel_basis(constraint, tol)


def synthesize_undetectable(sys: LtiSystem, N: int, tol: RankTolerance = DEFAULT_TOL) -> np.ndarray | None:
    """A unit-norm undetectable input window of length ``N`` (stacked), or ``None`` if none exists."""
    if N < 1:
        raise ValueError(f"window N must be >= 1, got {N}")
    K = undetectable_input_space(sys, N, tol)
    if K.shape[1] == 0:
        return None
    return K[:, 0] / np.linalg.norm(K[:, 0])
