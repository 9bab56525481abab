"""Trajectory CSV and JSON document helpers used by the CLI."""

from __future__ import annotations

import csv
import json

import numpy as np

from .errors import InvalidInputError
from .system import Trajectory


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_trajectory_csv(traj: Trajectory, path, *, emit_noise: bool = False) -> None:
    """Columns ``t, x_*, xhat_*, u_*`` and, with ``emit_noise``, ``w_*, eta_*``.

    Inputs and process noise are blank on the final row ``t = T``.
    """
    n, m, T = traj.n, traj.m, traj.T
    if emit_noise and not traj.has_noise:
        raise InvalidInputError("trajectory carries no noise realizations")
    if traj.states is None:
        raise InvalidInputError("trajectory carries no states")
    header = ["t"] + [f"x_{i}" for i in range(n)] + [f"xhat_{i}" for i in range(n)] + [f"u_{j}" for j in range(m)]
    if emit_noise:
        header += [f"w_{i}" for i in range(n)] + [f"eta_{i}" for i in range(n)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for t in range(T + 1):
            row = [str(t)]
            row += [_fmt(v) for v in traj.states[t]]
            row += [_fmt(v) for v in traj.observations[t]]
            row += [_fmt(v) for v in traj.inputs[t]] if t < T else [""] * m
            if emit_noise:
                row += [_fmt(v) for v in traj.process_noise[t]] if t < T else [""] * n
                row += [_fmt(v) for v in traj.observation_noise[t]]
            writer.writerow(row)


def read_trajectory_csv(path) -> Trajectory:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 3:
        raise InvalidInputError(f"{path}: need a header and at least two time steps")
    header = rows[0]
    body = rows[1:]

    def block(prefix: str) -> list[int]:
        return [i for i, name in enumerate(header) if name.startswith(prefix) and name[len(prefix):].isdigit()]

    def matrix(cols: list[int], nrows: int) -> np.ndarray:
        try:
            return np.array([[float(r[c]) for c in cols] for r in body[:nrows]], dtype=np.float64).reshape(nrows, len(cols))
        except (ValueError, IndexError) as exc:
            raise InvalidInputError(f"{path}: malformed numeric field ({exc})") from None

    xhat_cols = block("xhat_")
    if not xhat_cols:
        raise InvalidInputError(f"{path}: no xhat_* columns")
    T = len(body) - 1
    x_cols, u_cols = block("x_"), block("u_")
    w_cols, eta_cols = block("w_"), block("eta_")
    traj = Trajectory(
        states=matrix(x_cols, T + 1) if len(x_cols) == len(xhat_cols) else None,
        observations=matrix(xhat_cols, T + 1),
        inputs=matrix(u_cols, T),
    )
    if w_cols and eta_cols:
        traj.process_noise = matrix(w_cols, T)
        traj.observation_noise = matrix(eta_cols, T + 1)
    return traj


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: invalid JSON ({exc})") from None


def write_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
