"""Experiment configuration and the pipelines behind the CLI subcommands.

A configuration is a JSON object::

    {
      "seed": 14,
      "system": {"companion": {"n": 50, "m": 5, "p": 10}},
      "x0": {"seed": 7},
      "horizon": 300,
      "attack": {"start": 249, "inputs": [[0, 0, 0, 1, 0]]},
      "monitor": {"threshold": 1e-6, "window": "heuristic", "training_horizon": "auto"},
      "tolerance": {"relative_cutoff": 1e-9, "absolute_floor": 1e-12},
      "synthesize": {"N": 3}
    }

``system`` is either a companion generator description (drawn with the top-level
``seed``), a path ``{"file": "system.json"}`` resolved against the config's
directory, or an inline system object. ``x0`` is an explicit list, a
``{"seed": s}`` object, or omitted, in which case it is drawn from ``seed``.
Seeded initial states have unit norm.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .attacks import AttackScenario, check_undetectable, synthesize_undetectable
from .errors import BadDimensions, ConfigError
from .hankel import hankel_information, saturation_time, write_rank_curve_csv
from .indices import index_report
from .linsys import LtiSystem, companion_system, simulate
from .monitor import MonitorConfig, run_monitor
from .numerics import RankTolerance

FIXTURE_SEED = 14
BUILTIN_CONFIGS = {"companion50": "companion50.json"}


@dataclass
class ExperimentConfig:
    system: dict
    seed: int = FIXTURE_SEED
    x0: list | dict | None = None
    horizon: int = 300
    attack: AttackScenario | None = None
    monitor: MonitorConfig = field(default_factory=MonitorConfig)
    tolerance: RankTolerance = field(default_factory=RankTolerance)
    synthesize: dict = field(default_factory=dict)
    base_dir: Path = field(default_factory=Path.cwd)

    @classmethod
    def from_dict(cls, d: dict, base_dir=None) -> "ExperimentConfig":
        if "system" not in d:
            raise ConfigError("config has no 'system' entry")
        try:
            return cls(
                system=d["system"],
                seed=int(d.get("seed", FIXTURE_SEED)),
                x0=d.get("x0"),
                horizon=int(d.get("horizon", 300)),
                attack=None if d.get("attack") is None else AttackScenario.from_dict(d["attack"]),
                monitor=MonitorConfig.from_dict(d.get("monitor", {})),
                tolerance=RankTolerance.from_dict(d.get("tolerance", {})),
                synthesize=dict(d.get("synthesize", {})),
                base_dir=Path(base_dir) if base_dir is not None else Path.cwd(),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid config: {exc}") from exc

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        if str(path) in BUILTIN_CONFIGS:
            text = resources.files("ddattack").joinpath("data", BUILTIN_CONFIGS[str(path)]).read_text()
            return cls.from_dict(json.loads(text))
        path = Path(path)
        try:
            d = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(d, base_dir=path.parent)

    def with_overrides(self, seed=None, threshold=None, tol_rel=None) -> "ExperimentConfig":
        cfg = self
        if seed is not None:
            cfg = replace(cfg, seed=int(seed))
        if threshold is not None:
            cfg = replace(cfg, monitor=replace(cfg.monitor, threshold=float(threshold)))
        if tol_rel is not None:
            cfg = replace(cfg, tolerance=replace(cfg.tolerance, relative_cutoff=float(tol_rel)))
        return cfg

    def build_system(self) -> LtiSystem:
        desc = self.system
        if isinstance(desc, str):
            desc = {"file": desc}
        if "companion" in desc:
            g = desc["companion"]
            try:
                return companion_system(int(g["n"]), int(g["m"]), int(g["p"]), self.seed)
            except KeyError as exc:
                raise BadDimensions(f"companion generator needs n, m, p; missing {exc}") from None
        if "file" in desc:
            path = self.base_dir / desc["file"]
            try:
                return LtiSystem.load(path)
            except OSError as exc:
                raise ConfigError(f"cannot read system file {path}: {exc}") from exc
        return LtiSystem.from_dict(desc)

    def initial_state(self, n: int) -> np.ndarray:
        if isinstance(self.x0, (list, tuple)):
            x0 = np.asarray(self.x0, dtype=float)
            if x0.size != n:
                raise BadDimensions(f"x0 has length {x0.size}, system has n={n}")
            return x0
        seed = self.x0.get("seed") if isinstance(self.x0, dict) else None
        rng = np.random.default_rng((self.seed, 1) if seed is None else int(seed))
        x0 = rng.standard_normal(n)
        return x0 / np.linalg.norm(x0)


def _dump(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2) + "\n")


def run_generate(cfg: ExperimentConfig, out: Path) -> dict:
    sys = cfg.build_system()
    out.mkdir(parents=True, exist_ok=True)
    sys.save(out / "system.json")
    return {"system_json": str(out / "system.json"), "seed": cfg.seed, "n": sys.n, "m": sys.m, "p": sys.p}


def run_indices(cfg: ExperimentConfig, out: Path) -> dict:
    sys = cfg.build_system()
    x0 = cfg.initial_state(sys.n)
    summary = {"seed": cfg.seed, **index_report(sys, x0, cfg.tolerance).to_dict()}
    out.mkdir(parents=True, exist_ok=True)
    _dump(summary, out / "indices.json")
    return summary


def run_rank_curve(cfg: ExperimentConfig, out: Path) -> dict:
    sys = cfg.build_system()
    x0 = cfg.initial_state(sys.n)
    y, _ = simulate(sys, x0, None, cfg.horizon)
    info = hankel_information(y, cfg.tolerance)
    out.mkdir(parents=True, exist_ok=True)
    write_rank_curve_csv(info.rank_curve, out / "rank_curve.csv")
    summary = {
        "seed": cfg.seed,
        "horizon": cfg.horizon,
        "gamma": info.gamma,
        "gamma_achieved_at": None if info.achieved_at is None else list(info.achieved_at),
        "final_rank": info.rank_curve[-1].rank if info.rank_curve else None,
        "saturation_T": saturation_time(info.rank_curve),
        "indices": index_report(sys, x0, cfg.tolerance).to_dict(),
    }
    _dump(summary, out / "rank_curve.json")
    return summary


def run_monitor_experiment(cfg: ExperimentConfig, out: Path) -> dict:
    sys = cfg.build_system()
    x0 = cfg.initial_state(sys.n)
    attack = cfg.attack
    u = None if attack is None else attack.input_series(cfg.horizon)
    y, _ = simulate(sys, x0, u, cfg.horizon)
    start = None if attack is None else attack.start
    model = run_monitor(y, cfg.monitor, sys=sys, tol=cfg.tolerance, attack_start=start)
    data = run_monitor(y, cfg.monitor, tol=cfg.tolerance, attack_start=start)
    info = hankel_information(y if attack is None else y[: attack.start], cfg.tolerance)
    out.mkdir(parents=True, exist_ok=True)
    model.write_csv(out / "residuals_model.csv")
    data.write_csv(out / "residuals_data.csv")
    write_rank_curve_csv(info.rank_curve, out / "rank_curve.csv")
    summary = {
        "seed": cfg.seed,
        "horizon": cfg.horizon,
        "attack": None if attack is None else attack.to_dict(),
        "indices": index_report(sys, x0, cfg.tolerance).to_dict(),
        "gamma": info.gamma,
        "rank_saturation_T": saturation_time(info.rank_curve),
        "model_based": model.summary(),
        "data_driven": data.summary(),
    }
    _dump(summary, out / "summary.json")
    return summary


def run_synthesize(cfg: ExperimentConfig, out: Path) -> dict:
    sys = cfg.build_system()
    rep = index_report(sys, tol=cfg.tolerance)
    N = int(cfg.synthesize.get("N", sys.n + 1))
    start = int(cfg.synthesize.get("start", max(rep.t_safe_data, rep.t_safe_heuristic) + 1))
    window = synthesize_undetectable(sys, N, cfg.tolerance)
    out.mkdir(parents=True, exist_ok=True)
    summary = {"seed": cfg.seed, "N": N, "start": start, "undetectable_exists": window is not None}
    if window is not None:
        scenario = AttackScenario(start, window.reshape(N, sys.m), label=f"undetectable window N={N}")
        verdict = check_undetectable(sys, scenario, tol=cfg.tolerance, nu=rep.nu, mu=rep.mu)
        (out / "attack.json").write_text(scenario.to_json() + "\n")
        summary.update(
            attack_json=str(out / "attack.json"),
            detectable=verdict.detectable,
            max_output_deviation=verdict.residual,
            left_invertible=verdict.details["left_invertible"],
        )
    _dump(summary, out / "synthesize.json")
    return summary


def simulate_experiment(cfg: ExperimentConfig):
    """System, initial state and simulated outputs for a config (attack included)."""
    sys = cfg.build_system()
    x0 = cfg.initial_state(sys.n)
    u = None if cfg.attack is None else cfg.attack.input_series(cfg.horizon)
    y, x = simulate(sys, x0, u, cfg.horizon)
    return sys, x0, y, x

