"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 runtime or numerical error,
3 assumption check failed (``check`` only). JSON goes to stdout,
diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys

from .bounds import (
    BoundConfig,
    bc_error_bound,
    bc_sample_threshold,
    iv_error_bound,
    iv_sample_threshold,
    kappa_constants,
    system_constants,
)
from .errors import (
    AssumptionViolationError,
    BelowThresholdError,
    InvalidInputError,
    NotApplicableError,
    SysIdError,
)
from .estimators import bc_estimate, ho_kalman_estimate, iv_estimate, ls_estimate
from .experiment import builtin_config, BUILTINS, load_config, run_experiment, write_outputs
from .files import read_json, read_trajectory_csv, write_json, write_trajectory_csv
from .literals import parse_matrix
from .numerics import RngStream
from .system import LinearSystem, check_assumptions, simulate

log = logging.getLogger("noisy_sysid")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME, EXIT_ASSUMPTION = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _finite(v):
    if v is None:
        return None
    return v if math.isfinite(v) else None


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n")


def _load_system(path) -> LinearSystem:
    return LinearSystem.from_dict(read_json(path))


def cmd_simulate(args) -> int:
    system = _load_system(args.system)
    traj = simulate(system, args.T, RngStream(args.seed, "trajectory", args.trial), diagnostics=args.emit_noise)
    write_trajectory_csv(traj, args.out, emit_noise=args.emit_noise)
    _emit({"out": str(args.out), "n": traj.n, "m": traj.m, "T": traj.T, "seed": args.seed, "trial": args.trial})
    return EXIT_OK


def cmd_estimate(args) -> int:
    if args.method == "bc" and args.sigma_eta_hat is None:
        raise UsageError("estimate --method bc requires --sigma-eta-hat")
    if args.k is not None and args.method != "hokalman":
        raise UsageError("--k only applies to --method hokalman")
    traj = read_trajectory_csv(args.traj)
    if args.method == "ls":
        est = ls_estimate(traj)
    elif args.method == "iv":
        est = iv_estimate(traj)
    elif args.method == "bc":
        est = bc_estimate(traj, parse_matrix(read_json(args.sigma_eta_hat), name="sigma_eta_hat"))
    else:
        est = ho_kalman_estimate(traj, args.k)
    write_json(est.to_dict(), args.out)
    _emit({"out": str(args.out), "method": est.method, "gram_condition": est.gram_condition, "T_used": est.T_used})
    return EXIT_OK


def cmd_check(args) -> int:
    system = _load_system(args.system)
    report = check_assumptions(system, args.eps_eta, allow_unstable=True)
    _emit(report.to_dict())
    if not report.all_ok:
        log.warning("assumption check failed")
        return EXIT_ASSUMPTION
    return EXIT_OK


def cmd_bounds(args) -> int:
    system = _load_system(args.system)
    cfg = BoundConfig(delta=args.delta, c1=args.c1, c2=args.c2)
    k = system_constants(system)
    out = {
        "psi": k.psi, "psi_A": k.psi_A, "rho_A": k.rho_A, "phi_R": k.phi_R, "phi_A": k.phi_A, "phi_u": k.phi_u,
        "kappa1": None, "kappa2": None, "T_threshold_iv": None, "T_threshold_bc": None,
        "delta": cfg.delta, "c1": cfg.c1, "c2": cfg.c2,
    }
    notices = []
    try:
        kappa1, kappa2 = kappa_constants(k, cfg)
    except NotApplicableError as exc:
        notices.append(str(exc))
    else:
        out.update(
            kappa1=_finite(kappa1),
            kappa2=_finite(kappa2),
            T_threshold_iv=_finite(iv_sample_threshold(k, cfg)),
            T_threshold_bc=_finite(bc_sample_threshold(k, cfg)),
        )
        if args.T is not None:
            out["T"] = args.T
            out["eps_eta"] = args.eps_eta
            for key, fn in (
                ("iv_error_bound", lambda: iv_error_bound(k, cfg, args.T)),
                ("bc_error_bound", lambda: bc_error_bound(k, cfg, args.T, args.eps_eta)),
            ):
                try:
                    out[key] = _finite(fn())
                except (BelowThresholdError, AssumptionViolationError) as exc:
                    out[key] = None
                    notices.append(f"{key}: {exc}")
    for key in ("kappa1", "kappa2", "T_threshold_iv", "T_threshold_bc"):
        if out[key] is None and not notices:
            notices.append(f"{key} is infinite (an assumption constant is zero)")
    out["notices"] = notices
    for note in notices:
        log.warning(note)
    _emit(out)
    return EXIT_OK


def cmd_experiment(args) -> int:
    if (args.config is None) == (args.builtin is None):
        raise UsageError("experiment needs exactly one of --config or --builtin")
    cfg = load_config(args.config) if args.config else builtin_config(args.builtin)
    res = run_experiment(cfg, workers=args.workers)
    paths = write_outputs(res, args.out_dir)
    failed = sum(r.failed for r in res.records)
    _emit({"outputs": {k: str(v) for k, v in paths.items()}, "records": len(res.records), "failed": failed})
    return EXIT_OK


def _nonneg_float(text: str) -> float:
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def _pos_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="noisy-sysid", description="Identify linear systems from noisy state observations.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a trajectory to CSV")
    p.add_argument("--system", required=True)
    p.add_argument("--T", type=_pos_int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--emit-noise", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="estimate (A, B) from a trajectory CSV")
    p.add_argument("--method", choices=("ls", "iv", "bc", "hokalman"), required=True)
    p.add_argument("--traj", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--sigma-eta-hat")
    p.add_argument("--k", type=int)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("check", help="evaluate assumption constants")
    p.add_argument("--system", required=True)
    p.add_argument("--eps-eta", type=_nonneg_float, default=0.0)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("bounds", help="evaluate theoretical constants and bounds")
    p.add_argument("--system", required=True)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--c1", type=float, default=1.0)
    p.add_argument("--c2", type=float, default=1.0)
    p.add_argument("--T", type=_pos_int)
    p.add_argument("--eps-eta", type=_nonneg_float, default=0.0)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("experiment", help="run a Monte-Carlo sweep")
    p.add_argument("--config")
    p.add_argument("--builtin", choices=BUILTINS)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--workers", type=_pos_int, default=1)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvalidInputError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SysIdError, OSError, ValueError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
