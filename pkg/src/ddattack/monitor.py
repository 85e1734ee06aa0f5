"""Online Attack / No-Attack classification of output streams.

Both monitors predict the newest output window from the previous measured one,
``y_hat_{k-N+1:k} = S M S^T y_{k-N:k-1}``, and report the infinity-norm of the
prediction error as the residual ``r(k)``; ``r(k) > threshold`` is an Attack.

The model-based monitor takes ``S`` and ``M`` from the system matrices with
``N`` equal to the observability index. The data-driven monitor first collects
outputs until the rank of the heuristic Hankel matrix stops growing, then
learns ``S`` and ``M`` from the data collected up to the start of that plateau.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch
from .features import (
    FeatureBasis,
    FeatureDynamics,
    learn_from_outputs,
    model_feature_basis,
    model_feature_dynamics,
)
from .hankel import as_series, hankel_data
from .indices import heuristic_window, observability_index
from .linsys import LtiSystem, observability_matrix
from .numerics import DEFAULT_TOL, RankTolerance, numerical_rank, projection_residual, range_basis

COLLECTING = "Collecting"
ARMED = "Armed"


class Verdict(str, enum.Enum):
    ATTACK = "Attack"
    NO_ATTACK = "NoAttack"


class Evaluation(NamedTuple):
    k: int
    residual: float
    verdict: Verdict


@dataclass(frozen=True)
class MonitorConfig:
    """Monitor settings.

    ``window=None`` selects the heuristic window ``floor((T+1)/(p+1))`` (the
    model-based monitor uses the observability index instead);
    ``training_horizon=None`` arms the data-driven monitor automatically once
    the Hankel rank has not grown for ``patience`` samples (default ``p + 1``).
    """

    threshold: float = 1e-6
    window: int | None = None
    training_horizon: int | None = None
    patience: int | None = None

    def __post_init__(self):
        if not self.threshold >= 0:
            raise ValueError(f"threshold must be nonnegative, got {self.threshold}")
        if self.window is not None and self.window < 1:
            raise ValueError(f"fixed window must be >= 1, got {self.window}")
        if self.training_horizon is not None and self.training_horizon < 1:
            raise ValueError(f"training horizon must be >= 1, got {self.training_horizon}")
        if self.patience is not None and self.patience < 1:
            raise ValueError(f"patience must be >= 1, got {self.patience}")

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "window": "heuristic" if self.window is None else self.window,
            "training_horizon": "auto" if self.training_horizon is None else self.training_horizon,
            "patience": self.patience,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MonitorConfig":
        window = d.get("window", "heuristic")
        horizon = d.get("training_horizon", "auto")
        patience = d.get("patience")
        return cls(
            threshold=float(d.get("threshold", 1e-6)),
            window=None if window in (None, "heuristic") else int(window),
            training_horizon=None if horizon in (None, "auto") else int(horizon),
            patience=None if patience is None else int(patience),
        )


@dataclass
class MonitorState:
    phase: str = COLLECTING
    buffer: list = field(default_factory=list)
    basis: FeatureBasis | None = None
    dynamics: FeatureDynamics | None = None
    armed_at: int | None = None
    # window predictor S M S^T, cached once armed
    predictor: np.ndarray | None = None
    # rank-plateau bookkeeping for automatic arming
    best_rank: int = -1
    plateau_start: int | None = None
    # model-based monitors also keep the observability-matrix basis of short prefixes
    prefix_bases: dict = field(default_factory=dict)

    @property
    def time(self) -> int:
        return len(self.buffer)

    @property
    def window(self) -> int | None:
        return None if self.basis is None else self.basis.window

    def outputs(self) -> np.ndarray:
        return np.asarray(self.buffer, dtype=float)


def _append(state: MonitorState, y_k, p: int | None = None) -> None:
    y_k = np.atleast_1d(np.asarray(y_k, dtype=float))
    if y_k.ndim != 1:
        raise DimensionMismatch(f"an output sample must be a vector, got shape {y_k.shape}")
    expected = p if p is not None else (len(state.buffer[0]) if state.buffer else None)
    if expected is not None and y_k.size != expected:
        raise DimensionMismatch(f"output sample has length {y_k.size}, expected {expected}")
    state.buffer.append(y_k)


def _arm(state: MonitorState, basis: FeatureBasis, dynamics: FeatureDynamics, armed_at: int) -> None:
    S = basis.basis
    state.basis = basis
    state.dynamics = dynamics
    state.predictor = S @ dynamics.M @ S.T
    state.armed_at = armed_at
    state.phase = ARMED


def _classify(k: int, r: float, cfg: MonitorConfig) -> Evaluation:
    return Evaluation(k, r, Verdict.ATTACK if r > cfg.threshold else Verdict.NO_ATTACK)


def prediction_error(state: MonitorState, k: int) -> np.ndarray:
    """Measured minus predicted window ``y_{k-N+1:k}``; needs an armed state and ``k >= N``."""
    N = state.window
    y = state.buffer
    prev = np.concatenate(y[k - N:k])
    cur = np.concatenate(y[k - N + 1:k + 1])
    return cur - state.predictor @ prev


def _residual(state: MonitorState, k: int) -> float:
    err = prediction_error(state, k)
    return float(np.max(np.abs(err))) if err.size else 0.0


def data_monitor_step(
    state: MonitorState, cfg: MonitorConfig, y_k, tol: RankTolerance = DEFAULT_TOL
) -> tuple[MonitorState, list[Evaluation]]:
    """Feed one output sample to a data-driven monitor.

    Returns the (updated) state and the evaluations that became available.
    Usually that is one evaluation per sample once armed. At the moment of
    automatic arming it also includes the back-filled evaluations for samples
    between the end of the training data and the current time.
    """
    _append(state, y_k)
    T = state.time
    if state.phase == ARMED:
        return state, [_classify(T - 1, _residual(state, T - 1), cfg)]

    y = state.outputs()
    p = y.shape[1]

    def window_for(horizon):
        return cfg.window if cfg.window is not None else heuristic_window(horizon, p)

    # training on horizon T uses samples 0 .. T (T + 1 of them)
    train_T = None
    if cfg.training_horizon is not None:
        if T > cfg.training_horizon:
            train_T = cfg.training_horizon
    elif T >= (p if cfg.window is None else cfg.window):
        patience = cfg.patience if cfg.patience is not None else p + 1
        r = numerical_rank(hankel_data(y, window_for(T)), tol)
        if r > state.best_rank:
            state.best_rank, state.plateau_start = r, T
        elif T - state.plateau_start >= patience:
            train_T = state.plateau_start

    if train_T is None or train_T < window_for(train_T):
        return state, []
    basis, dynamics = learn_from_outputs(y, window_for(train_T), train_T, tol)
    _arm(state, basis, dynamics, train_T)
    start = max(train_T, basis.window)
    return state, [_classify(k, _residual(state, k), cfg) for k in range(start, T)]


def model_monitor_step(
    sys: LtiSystem, state: MonitorState, cfg: MonitorConfig, y_k, tol: RankTolerance = DEFAULT_TOL
) -> tuple[MonitorState, list[Evaluation]]:
    """Feed one output sample to a model-based monitor.

    The monitor is armed from the start with ``N`` equal to the observability
    index (or ``cfg.window`` if that is larger) and ``armed_at = N``. Before a
    full window is available, the residual is the distance of the output prefix
    ``y_{0:k}`` from the column space of ``O_{k+1}``. Afterwards it is the
    larger of the one-step prediction error and the distance of the current
    window from ``Col(O_N)``.
    """
    if state.basis is None:
        nu = observability_index(sys, tol)
        N = max(nu, cfg.window or nu)
        basis = model_feature_basis(sys, N, tol)
        _arm(state, basis, model_feature_dynamics(sys, basis, tol, nu=nu), N)
    _append(state, y_k, p=sys.p)
    k = state.time - 1
    N = state.window
    S = state.basis.basis
    if k < N - 1:
        Sk = state.prefix_bases.get(k)
        if Sk is None:
            Sk = state.prefix_bases[k] = range_basis(observability_matrix(sys, k + 1), tol)
        r = float(np.max(np.abs(projection_residual(np.concatenate(state.buffer), Sk))))
        return state, [_classify(k, r, cfg)]
    cur = np.concatenate(state.buffer[k - N + 1:k + 1])
    r = float(np.max(np.abs(projection_residual(cur, S))))
    if k >= N:
        r = max(r, _residual(state, k))
    return state, [_classify(k, r, cfg)]


@dataclass
class DetectionReport:
    evaluations: list[Evaluation]
    threshold: float
    armed_at: int | None
    N: int | None
    q: int | None
    kind: str
    attack_window_unprotected: bool = False

    @property
    def residuals(self) -> list[tuple[int, float]]:
        return [(e.k, e.residual) for e in self.evaluations]

    @property
    def verdicts(self) -> list[tuple[int, Verdict]]:
        return [(e.k, e.verdict) for e in self.evaluations]

    @property
    def first_detection(self) -> int | None:
        return next((e.k for e in self.evaluations if e.verdict is Verdict.ATTACK), None)

    def residual_at(self, k: int) -> float | None:
        return next((e.residual for e in self.evaluations if e.k == k), None)

    def summary(self) -> dict:
        return {
            "monitor": self.kind,
            "armed_at": self.armed_at,
            "first_detection": self.first_detection,
            "threshold": self.threshold,
            "N": self.N,
            "q": self.q,
            "attack_window_unprotected": self.attack_window_unprotected,
        }

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k", "residual", "verdict"])
            for e in self.evaluations:
                w.writerow([e.k, f"{e.residual:.17g}", e.verdict.value])


def read_residual_csv(path) -> list[Evaluation]:
    with open(path, newline="") as fh:
        return [Evaluation(int(r["k"]), float(r["residual"]), Verdict(r["verdict"])) for r in csv.DictReader(fh)]


def run_monitor(
    y,
    cfg: MonitorConfig = MonitorConfig(),
    sys: LtiSystem | None = None,
    tol: RankTolerance = DEFAULT_TOL,
    attack_start: int | None = None,
) -> DetectionReport:
    """Run a monitor over a whole output series.

    With ``sys`` the model-based monitor is used, otherwise the data-driven
    one. If ``attack_start`` is given (known only in simulation), the report
    flags attacks that begin inside the training data or before the monitor
    armed at all. Such attacks cannot be detected.
    """
    y = as_series(y)
    state = MonitorState()
    evaluations: list[Evaluation] = []
    for y_k in y:
        if sys is None:
            state, out = data_monitor_step(state, cfg, y_k, tol)
        else:
            state, out = model_monitor_step(sys, state, cfg, y_k, tol)
        evaluations.extend(out)
    # training covers samples 0 .. armed_at, so an attack at armed_at already leaks into it
    unprotected = attack_start is not None and (state.armed_at is None or attack_start <= state.armed_at)
    return DetectionReport(
        evaluations=evaluations,
        threshold=cfg.threshold,
        armed_at=state.armed_at,
        N=state.window,
        q=None if state.basis is None else state.basis.q,
        kind="data-driven" if sys is None else "model-based",
        attack_window_unprotected=unprotected,
    )
