"""Monte-Carlo sweeps over trajectory length for a set of estimators."""

from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .errors import InvalidInputError, SingularGramError, SysIdError
from .estimators import (
    METHODS,
    bc_estimate,
    default_ho_kalman_horizon,
    estimation_errors,
    iv_estimate,
    ls_estimate,
    ho_kalman_estimate,
)
from .literals import cyclic_shift, dense_literal, parse_matrix, stacked_identity
from .numerics import RngStream, as_matrix
from .system import LinearSystem, simulate

log = logging.getLogger(__name__)

CSV_HEADER = ["estimator", "T", "trial", "err_A", "err_B", "err_max", "gram_condition", "failed"]
SUMMARY_HEADER = ["estimator", "T", "median", "q25", "q75", "n_ok", "n_failed"]
BUILTINS = ("paper-nonautonomous", "paper-autonomous", "scalar-benchmark")

SigmaEtaHat = Union[str, dict, np.ndarray]


@dataclass
class ExperimentConfig:
    system: LinearSystem
    estimators: tuple[str, ...]
    T_grid: tuple[int, ...]
    trials: int = 20
    master_seed: int = 0
    sigma_eta_hat: SigmaEtaHat = "exact"
    ho_kalman_k: Optional[int] = None
    delta: float = 0.05
    description: str = ""

    def __post_init__(self):
        self.estimators = tuple(self.estimators)
        self.T_grid = tuple(int(T) for T in self.T_grid)
        bad = [e for e in self.estimators if e not in METHODS]
        if bad:
            raise InvalidInputError(f"unknown estimators {bad}; choose from {list(METHODS)}")
        if not self.estimators or len(set(self.estimators)) != len(self.estimators):
            raise InvalidInputError("estimators must be a non-empty list without duplicates")
        if not self.T_grid or any(T < 1 for T in self.T_grid):
            raise InvalidInputError("T_grid must be a non-empty list of positive integers")
        if any(b <= a for a, b in zip(self.T_grid, self.T_grid[1:])):
            raise InvalidInputError("T_grid must be strictly increasing")
        if self.trials < 1:
            raise InvalidInputError("trials must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise InvalidInputError("master_seed must be a 64-bit unsigned integer")
        if self.system.autonomous and "HoKalman" in self.estimators:
            raise InvalidInputError("HoKalman needs inputs and cannot run on an autonomous system")
        if self.ho_kalman_k is not None and self.ho_kalman_k < 2:
            raise InvalidInputError("ho_kalman_k must be >= 2")
        if not 0.0 < self.delta < 1.0:
            raise InvalidInputError("delta must lie in (0, 1)")
        self.resolved_sigma_eta_hat()

    def resolved_sigma_eta_hat(self) -> np.ndarray:
        choice = self.sigma_eta_hat
        n = self.system.n
        if isinstance(choice, str):
            if choice != "exact":
                raise InvalidInputError(f"unknown sigma_eta_hat token {choice!r}")
            S = self.system.sigma_eta
        elif isinstance(choice, dict) and "perturb" in choice:
            eps = float(choice["perturb"])
            if eps < 0:
                raise InvalidInputError("perturbation size must be non-negative")
            S = self.system.sigma_eta + eps * np.eye(n)
        elif isinstance(choice, np.ndarray):
            S = as_matrix(choice, name="sigma_eta_hat")
        else:
            S = parse_matrix(choice, name="sigma_eta_hat")
        if S.shape != (n, n):
            raise InvalidInputError(f"sigma_eta_hat must be {n}x{n}, got {S.shape}")
        return S

    def to_dict(self) -> dict:
        choice = self.sigma_eta_hat
        if isinstance(choice, np.ndarray):
            choice = dense_literal(choice)
        return {
            "system": self.system.to_dict(),
            "estimators": list(self.estimators),
            "T_grid": list(self.T_grid),
            "trials": self.trials,
            "master_seed": self.master_seed,
            "sigma_eta_hat": choice,
            "sigma_eta_hat_resolved": dense_literal(self.resolved_sigma_eta_hat()),
            "ho_kalman_k": self.ho_kalman_k,
            "delta": self.delta,
            "description": self.description,
        }


_CONFIG_KEYS = {
    "builtin", "system", "estimators", "T_grid", "trials", "master_seed",
    "sigma_eta_hat", "ho_kalman_k", "delta", "description",
}


def config_from_dict(d: dict) -> ExperimentConfig:
    """Parse a JSON config; ``{"builtin": name, ...}`` starts from a built-in and overrides fields."""
    unknown = set(d) - _CONFIG_KEYS - {"sigma_eta_hat_resolved"}
    if unknown:
        raise InvalidInputError(f"unknown config fields: {sorted(unknown)}")
    if "builtin" in d:
        base = builtin_config(d["builtin"])
        fields = {k: getattr(base, k) for k in _CONFIG_KEYS - {"builtin"}}
    else:
        fields = {}
    for key, value in d.items():
        if key in ("builtin", "sigma_eta_hat_resolved"):
            continue
        fields[key] = LinearSystem.from_dict(value) if key == "system" else value
    if "system" not in fields or "estimators" not in fields or "T_grid" not in fields:
        raise InvalidInputError("config needs system, estimators and T_grid (or a builtin)")
    return ExperimentConfig(**fields)


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return config_from_dict(json.load(fh))


def builtin_config(name: str) -> ExperimentConfig:
    """Ready-made configurations: the 20-state cyclic-shift systems and a scalar benchmark."""
    if name in ("paper-nonautonomous", "paper-autonomous"):
        n = 20
        A = cyclic_shift(n, 0.8)
        eye = np.eye(n)
        if name == "paper-nonautonomous":
            system = LinearSystem(A, stacked_identity(n, 10), eye, np.eye(10), eye)
            estimators = ("LS", "HoKalman", "IV", "BC")
            description = (
                "Non-autonomous 20-state system, A = 0.8 * cyclic shift, B = [I_10; 0]. "
                "Input covariance set to I_10 to match B (the original listing gives I_5, "
                "which is inconsistent with a 20x10 B)."
            )
        else:
            system = LinearSystem(A, None, eye, None, eye)
            estimators = ("LS", "IV", "BC")
            description = "Autonomous 20-state system, A = 0.8 * cyclic shift, unit noise covariances."
        return ExperimentConfig(
            system=system,
            estimators=estimators,
            T_grid=(500, 2000, 8000),
            trials=20,
            master_seed=2024,
            description=description,
        )
    if name == "scalar-benchmark":
        one = np.ones((1, 1))
        return ExperimentConfig(
            system=LinearSystem(0.5 * one, one, one, one, one),
            estimators=("LS", "IV", "BC", "HoKalman"),
            T_grid=(1000, 10000, 100000),
            trials=50,
            master_seed=2024,
            description="Scalar benchmark: a = 0.5, b = 1, unit covariances.",
        )
    raise InvalidInputError(f"unknown builtin config {name!r}; choose from {list(BUILTINS)}")


@dataclass
class Record:
    estimator: str
    T: int
    trial: int
    err_A: Optional[float]
    err_B: Optional[float]
    err_max: Optional[float]
    gram_condition: Optional[float]
    failed: bool
    reason: str = field(default="", compare=False)

    def sort_key(self):
        return (METHODS.index(self.estimator), self.T, self.trial)


@dataclass
class SummaryRow:
    estimator: str
    T: int
    median: float
    q25: float
    q75: float
    n_ok: int
    n_failed: int


@dataclass
class ExperimentResult:
    records: list[Record]
    summary: list[SummaryRow]
    config_echo: dict

    def summary_for(self, estimator: str) -> list[SummaryRow]:
        return [row for row in self.summary if row.estimator == estimator]

    def medians(self, estimator: str) -> dict[int, float]:
        return {row.T: row.median for row in self.summary_for(estimator)}


def _run_estimator(name: str, traj, cfg: ExperimentConfig, sigma_eta_hat: np.ndarray):
    if name == "LS":
        return ls_estimate(traj)
    if name == "IV":
        return iv_estimate(traj)
    if name == "BC":
        return bc_estimate(traj, sigma_eta_hat)
    return ho_kalman_estimate(traj, cfg.ho_kalman_k)


def run_trial(cfg: ExperimentConfig, trial: int) -> list[Record]:
    """All (estimator, T) records for one trial.

    Every T uses the same streams, so shorter trajectories are prefixes of
    longer ones, and every estimator sees the same trajectory.
    """
    sigma_eta_hat = cfg.resolved_sigma_eta_hat()
    stream = RngStream(cfg.master_seed, "trajectory", trial)
    records = []
    for T in cfg.T_grid:
        traj = simulate(cfg.system, T, stream)
        for name in cfg.estimators:
            try:
                est = _run_estimator(name, traj, cfg, sigma_eta_hat)
            except (SysIdError, np.linalg.LinAlgError) as exc:
                cond = exc.condition if isinstance(exc, SingularGramError) else None
                records.append(Record(name, T, trial, None, None, None, cond, True, str(exc)))
                continue
            err_A, err_B = estimation_errors(est, cfg.system)
            err_max = err_A if err_B is None else max(err_A, err_B)
            records.append(Record(name, T, trial, err_A, err_B, err_max, est.gram_condition, False))
    return records


def summarize(records: list[Record], cfg: ExperimentConfig) -> list[SummaryRow]:
    rows = []
    for name in sorted(cfg.estimators, key=METHODS.index):
        for T in cfg.T_grid:
            group = [r for r in records if r.estimator == name and r.T == T]
            ok = np.array([r.err_max for r in group if not r.failed], dtype=np.float64)
            if ok.size:
                q25, med, q75 = np.percentile(ok, [25, 50, 75])
            else:
                q25 = med = q75 = float("nan")
            rows.append(SummaryRow(name, T, float(med), float(q25), float(q75), int(ok.size), len(group) - int(ok.size)))
    return rows


def run_experiment(cfg: ExperimentConfig, *, workers: int = 1) -> ExperimentResult:
    """Run every trial and aggregate.

    Estimator failures (singular Gram matrices, too-short trajectories)
    are stored as failed records. Results do not depend on ``workers``.
    """
    trials = range(cfg.trials)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(run_trial, [cfg] * cfg.trials, trials))
    else:
        chunks = [run_trial(cfg, trial) for trial in trials]
    records = sorted((r for chunk in chunks for r in chunk), key=Record.sort_key)
    n_failed = sum(r.failed for r in records)
    if n_failed:
        log.info("%d of %d estimator runs failed", n_failed, len(records))
    return ExperimentResult(records, summarize(records, cfg), cfg.to_dict())


def _fmt(value: Optional[float]) -> str:
    return "" if value is None else format(value, ".17g")


def _parse(text: str) -> Optional[float]:
    return None if text == "" else float(text)


def emit_csv(res: ExperimentResult, path) -> None:
    """Write one row per record, ordered by (estimator, T, trial)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in sorted(res.records, key=Record.sort_key):
            writer.writerow([
                r.estimator, r.T, r.trial,
                _fmt(r.err_A), _fmt(r.err_B), _fmt(r.err_max), _fmt(r.gram_condition),
                "true" if r.failed else "false",
            ])


def read_csv(path) -> list[Record]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != CSV_HEADER:
            raise InvalidInputError(f"unexpected records header {header}")
        return [
            Record(row[0], int(row[1]), int(row[2]), _parse(row[3]), _parse(row[4]),
                   _parse(row[5]), _parse(row[6]), row[7] == "true")
            for row in reader
        ]


def emit_summary_csv(res: ExperimentResult, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_HEADER)
        for s in res.summary:
            writer.writerow([s.estimator, s.T, _fmt(s.median), _fmt(s.q25), _fmt(s.q75), s.n_ok, s.n_failed])


def write_outputs(res: ExperimentResult, out_dir) -> dict[str, Path]:
    """Write records.csv, summary.csv, plot.svg and config_echo.json into ``out_dir``."""
    from .plot import emit_svg_plot

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "records": out / "records.csv",
        "summary": out / "summary.csv",
        "plot": out / "plot.svg",
        "config": out / "config_echo.json",
    }
    emit_csv(res, paths["records"])
    emit_summary_csv(res, paths["summary"])
    emit_svg_plot(res, paths["plot"])
    with open(paths["config"], "w") as fh:
        json.dump(res.config_echo, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths
