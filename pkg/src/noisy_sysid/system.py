"""Linear system model, trajectory simulation and assumption constants."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.signal

from .errors import InvalidInputError, NotApplicableError, UnstableSystemError
from .literals import dense_literal, parse_matrix
from .numerics import (
    RngStream,
    as_matrix,
    draw_gaussian,
    min_singular_value,
    operator_norm,
    psd_factor,
)

RANK_TOL = 1e-8


@dataclass(frozen=True)
class LinearSystem:
    """``x_{t+1} = A x_t + B u_t + w_t``, observed as ``xhat_t = x_t + eta_t``.

    ``B`` and ``sigma_u`` are ``None`` for an autonomous system.
    """

    A: np.ndarray
    B: Optional[np.ndarray]
    sigma_w: np.ndarray
    sigma_u: Optional[np.ndarray]
    sigma_eta: np.ndarray

    def __post_init__(self):
        A = as_matrix(self.A, name="A")
        n = A.shape[0]
        if A.shape != (n, n):
            raise InvalidInputError(f"A must be square, got {A.shape}")
        object.__setattr__(self, "A", A)
        for name in ("sigma_w", "sigma_eta"):
            S = as_matrix(getattr(self, name), name=name)
            if S.shape != (n, n):
                raise InvalidInputError(f"{name} must be {n}x{n}, got {S.shape}")
            psd_factor(S)
            object.__setattr__(self, name, S)
        if (self.B is None) != (self.sigma_u is None):
            raise InvalidInputError("B and sigma_u must both be given or both be absent")
        if self.B is not None:
            B = as_matrix(self.B, name="B")
            if B.shape[0] != n or B.shape[1] == 0:
                raise InvalidInputError(f"B must be {n}xm with m >= 1, got {B.shape}")
            m = B.shape[1]
            Su = as_matrix(self.sigma_u, name="sigma_u")
            if Su.shape != (m, m):
                raise InvalidInputError(f"sigma_u must be {m}x{m}, got {Su.shape}")
            psd_factor(Su)
            object.__setattr__(self, "B", B)
            object.__setattr__(self, "sigma_u", Su)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return 0 if self.B is None else self.B.shape[1]

    @property
    def autonomous(self) -> bool:
        return self.B is None

    @property
    def E(self) -> np.ndarray:
        """Stacked ``[A B]`` (just ``A`` when autonomous)."""
        return self.A if self.B is None else np.hstack([self.A, self.B])

    @classmethod
    def from_dict(cls, d: dict) -> LinearSystem:
        unknown = set(d) - {"A", "B", "sigma_w", "sigma_u", "sigma_eta"}
        if unknown:
            raise InvalidInputError(f"unknown system fields: {sorted(unknown)}")
        try:
            A = parse_matrix(d["A"], name="A")
            sigma_w = parse_matrix(d["sigma_w"], name="sigma_w")
            sigma_eta = parse_matrix(d["sigma_eta"], name="sigma_eta")
        except KeyError as exc:
            raise InvalidInputError(f"system is missing field {exc.args[0]!r}") from None
        B = d.get("B")
        sigma_u = d.get("sigma_u")
        return cls(
            A=A,
            B=None if B is None else parse_matrix(B, name="B"),
            sigma_w=sigma_w,
            sigma_u=None if sigma_u is None else parse_matrix(sigma_u, name="sigma_u"),
            sigma_eta=sigma_eta,
        )

    def to_dict(self) -> dict:
        return {
            "A": dense_literal(self.A),
            "B": None if self.B is None else dense_literal(self.B),
            "sigma_w": dense_literal(self.sigma_w),
            "sigma_u": None if self.sigma_u is None else dense_literal(self.sigma_u),
            "sigma_eta": dense_literal(self.sigma_eta),
        }


@dataclass
class Trajectory:
    """Simulated data, time-major.

    ``states`` and ``observations`` have shape ``(T+1, n)``, ``inputs``
    has shape ``(T, m)``. ``process_noise`` ``(T, n)`` and
    ``observation_noise`` ``(T+1, n)`` are only populated when the
    trajectory was simulated with ``diagnostics=True``.
    """

    states: Optional[np.ndarray]
    observations: np.ndarray
    inputs: np.ndarray
    process_noise: Optional[np.ndarray] = field(default=None, repr=False)
    observation_noise: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        self.observations = np.asarray(self.observations, dtype=np.float64)
        if self.observations.ndim != 2 or self.observations.shape[0] < 2:
            raise InvalidInputError("observations must have shape (T+1, n) with T >= 1")
        T = self.observations.shape[0] - 1
        inputs = np.asarray(self.inputs, dtype=np.float64)
        if inputs.size == 0:
            inputs = np.zeros((T, 0))
        if inputs.ndim != 2 or inputs.shape[0] != T:
            raise InvalidInputError(f"inputs must have shape ({T}, m), got {inputs.shape}")
        self.inputs = inputs

    @property
    def T(self) -> int:
        return self.observations.shape[0] - 1

    @property
    def n(self) -> int:
        return self.observations.shape[1]

    @property
    def m(self) -> int:
        return self.inputs.shape[1]

    @property
    def has_noise(self) -> bool:
        return self.process_noise is not None and self.observation_noise is not None


def _propagate(A: np.ndarray, drive: np.ndarray) -> np.ndarray:
    """States ``x_0 = 0, x_{t+1} = A x_t + drive_t``."""
    T, n = drive.shape
    x = np.zeros((T + 1, n))
    if n == 1:
        x[1:, 0] = scipy.signal.lfilter([1.0], [1.0, -A[0, 0]], drive[:, 0])
        return x
    At = A.T
    for t in range(T):
        x[t + 1] = x[t] @ At + drive[t]
    return x


def simulate(
    sys: LinearSystem,
    T: int,
    stream: RngStream,
    *,
    inputs=None,
    diagnostics: bool = False,
) -> Trajectory:
    """Simulate ``T`` steps from ``x_0 = 0``.

    Inputs, process noise and observation noise come from the child
    streams ``u``, ``w`` and ``eta`` of ``stream``. Passing ``inputs``
    (shape ``(T, m)``) replaces the random inputs; the other noise
    streams are unaffected.
    """
    if not isinstance(T, (int, np.integer)) or T < 1:
        raise InvalidInputError(f"T must be a positive integer, got {T!r}")
    n, m = sys.n, sys.m
    w = draw_gaussian(stream.child("w"), psd_factor(sys.sigma_w), T)
    eta = draw_gaussian(stream.child("eta"), psd_factor(sys.sigma_eta), T + 1)
    if sys.autonomous:
        if inputs is not None and np.size(inputs) > 0:
            raise InvalidInputError("autonomous systems take no inputs")
        u = np.zeros((T, 0))
        drive = w
    else:
        if inputs is None:
            u = draw_gaussian(stream.child("u"), psd_factor(sys.sigma_u), T)
        else:
            u = np.array(inputs, dtype=np.float64).reshape(T, m)
        drive = u @ sys.B.T + w
    x = _propagate(sys.A, drive)
    assert x.shape == (T + 1, n)
    return Trajectory(
        states=x,
        observations=x + eta,
        inputs=u,
        process_noise=w if diagnostics else None,
        observation_noise=eta if diagnostics else None,
    )


def controllability_matrix(sys: LinearSystem) -> np.ndarray:
    """``[B, AB, ..., A^{n-1} B]``."""
    if sys.autonomous:
        raise NotApplicableError("controllability matrix is undefined for an autonomous system")
    blocks = [sys.B]
    for _ in range(sys.n - 1):
        blocks.append(sys.A @ blocks[-1])
    return np.hstack(blocks)


def spectral_radius(A) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(np.asarray(A, dtype=np.float64)))))


def stability_constants(
    A,
    tol: float = 1e-10,
    *,
    rho_A: Optional[float] = None,
    max_horizon: int = 1_000_000,
) -> tuple[float, float, int]:
    """Certify ``||A^t|| <= psi_A * rho_A**(t-1)`` for all ``t >= 1``.

    ``rho_A`` defaults to the midpoint between the spectral radius and 1.
    Powers are scanned until the ratio ``||A^t|| / rho_A**(t-1)`` falls
    below ``tol`` times the running maximum. Returns
    ``(psi_A, rho_A, horizon_used)``.
    """
    A = as_matrix(A, name="A")
    if A.shape[0] != A.shape[1]:
        raise InvalidInputError("A must be square")
    rho = spectral_radius(A)
    if rho >= 1.0:
        raise UnstableSystemError(rho)
    if rho_A is None:
        rho_A = 0.5 * (1.0 + rho)
    elif not rho < rho_A < 1.0:
        raise InvalidInputError(f"rho_A must lie in (spectral radius {rho:.6g}, 1)")
    psi = 1.0
    P = A.copy()
    # track log of rho_A^(t-1) to avoid underflow on long horizons
    log_rho = np.log(rho_A)
    for t in range(1, max_horizon + 1):
        norm = operator_norm(P)
        ratio = 0.0 if norm == 0.0 else float(np.exp(np.log(norm) - (t - 1) * log_rho))
        psi = max(psi, ratio)
        if ratio < tol * psi:
            return psi, rho_A, t
        P = P @ A
    raise InvalidInputError(f"stability horizon search did not converge within {max_horizon} steps")


@dataclass
class AssumptionReport:
    psi_A: Optional[float]
    rho_A: Optional[float]
    phi_R: Optional[float]
    phi_A: float
    phi_u: Optional[float]
    psi_eta: float
    eps_eta: float
    controllable: Optional[bool]
    a_invertible: bool
    input_magnitude_ok: Optional[bool]
    horizon_used: Optional[int]
    stable: bool = True
    spectral_radius: float = 0.0

    @property
    def iv_ready(self) -> bool:
        """Stability, controllability and invertible A hold."""
        return self.stable and self.a_invertible and self.controllable is not False

    @property
    def bc_ready(self) -> bool:
        """Stability, controllability and the input-magnitude condition hold."""
        return self.stable and self.controllable is not False and self.input_magnitude_ok is not False

    @property
    def all_ok(self) -> bool:
        return self.iv_ready and self.bc_ready

    def to_dict(self) -> dict:
        return {
            "psi_A": self.psi_A,
            "rho_A": self.rho_A if self.stable else "unstable",
            "spectral_radius": self.spectral_radius,
            "phi_R": self.phi_R,
            "phi_A": self.phi_A,
            "phi_u": self.phi_u,
            "psi_eta": self.psi_eta,
            "eps_eta": self.eps_eta,
            "controllable": self.controllable,
            "a_invertible": self.a_invertible,
            "input_magnitude_ok": self.input_magnitude_ok,
            "horizon_used": self.horizon_used,
            "verdicts": {
                "stable": self.stable,
                "iv_assumptions_ok": self.iv_ready,
                "bc_assumptions_ok": self.bc_ready,
            },
        }


def input_magnitude_requirement(phi_R: float, psi_eta: float, eps_eta: float) -> float:
    """Smallest input covariance eigenvalue that makes bias compensation well-posed."""
    denom = min(phi_R**2, 6.0)
    return float("inf") if denom == 0.0 else 32.0 * (psi_eta + eps_eta) / denom


def check_assumptions(sys: LinearSystem, eps_eta: float = 0.0, *, allow_unstable: bool = False) -> AssumptionReport:
    """Evaluate every assumption constant for ``sys``.

    An unstable ``A`` raises :class:`UnstableSystemError` unless
    ``allow_unstable`` is set, in which case the report carries
    ``stable=False`` and no stability constants.
    """
    if eps_eta < 0:
        raise InvalidInputError("eps_eta must be non-negative")
    rho = spectral_radius(sys.A)
    try:
        psi_A, rho_A, horizon = stability_constants(sys.A)
        stable = True
    except UnstableSystemError:
        if not allow_unstable:
            raise
        psi_A = rho_A = horizon = None
        stable = False
    phi_A = min_singular_value(sys.A)
    a_invertible = phi_A > RANK_TOL * operator_norm(sys.A)
    psi_eta = max(operator_norm(sys.sigma_eta), 1.0)
    if sys.autonomous:
        phi_R = phi_u = controllable = input_ok = None
    else:
        R = controllability_matrix(sys)
        phi_R = min_singular_value(R)
        controllable = bool(phi_R > RANK_TOL * operator_norm(R))
        phi_u = float(np.linalg.eigvalsh(sys.sigma_u)[0])
        input_ok = bool(phi_u >= input_magnitude_requirement(phi_R, psi_eta, eps_eta))
    return AssumptionReport(
        psi_A=psi_A,
        rho_A=rho_A,
        phi_R=phi_R,
        phi_A=phi_A,
        phi_u=phi_u,
        psi_eta=psi_eta,
        eps_eta=float(eps_eta),
        controllable=controllable,
        a_invertible=bool(a_invertible),
        input_magnitude_ok=input_ok,
        horizon_used=horizon,
        stable=stable,
        spectral_radius=rho,
    )
