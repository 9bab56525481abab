"""Sample-size thresholds and high-probability error bounds for IV and BC.

The absolute constants ``c1`` and ``c2`` only have known existence, not
known values. They default to 1, so the numbers produced here are useful
for their scaling in ``T``, ``n`` and ``m`` and not as calibrated bounds.
``delta`` is used as given inside the logarithms; the overall failure
probability of the IV bound is ``11 * delta`` (``9 * delta`` for BC).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import AssumptionViolationError, BelowThresholdError, InvalidInputError, NotApplicableError
from .numerics import min_singular_value, operator_norm
from .system import LinearSystem, controllability_matrix, input_magnitude_requirement, stability_constants


@dataclass
class SystemConstants:
    psi: float
    psi_B: float
    psi_u: float
    psi_w: float
    psi_eta: float
    phi_u: Optional[float]
    psi_A: float
    rho_A: float
    phi_R: Optional[float]
    phi_A: float
    n: int
    m: int

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class BoundConfig:
    delta: float = 0.05
    c1: float = 1.0
    c2: float = 1.0
    kappa2_override: Optional[float] = None

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise InvalidInputError(f"delta must lie strictly inside (0, 1), got {self.delta}")
        if self.c1 <= 0 or self.c2 <= 0:
            raise InvalidInputError("c1 and c2 must be positive")


def system_constants(sys: LinearSystem) -> SystemConstants:
    psi_A, rho_A, _ = stability_constants(sys.A)
    psi_w = max(operator_norm(sys.sigma_w), 1.0)
    psi_eta = max(operator_norm(sys.sigma_eta), 1.0)
    if sys.autonomous:
        psi_B = psi_u = 1.0
        phi_u = phi_R = None
        # no input channel: psi reduces to max(psi_w, psi_eta)
        psi = max(psi_w, psi_eta)
    else:
        psi_B = max(operator_norm(sys.B), 1.0)
        psi_u = max(operator_norm(sys.sigma_u), 1.0)
        phi_u = float(np.linalg.eigvalsh(sys.sigma_u)[0])
        phi_R = min_singular_value(controllability_matrix(sys))
        psi = max(psi_B**2 * psi_u + psi_w, psi_eta)
    return SystemConstants(
        psi=psi,
        psi_B=psi_B,
        psi_u=psi_u,
        psi_w=psi_w,
        psi_eta=psi_eta,
        phi_u=phi_u,
        psi_A=psi_A,
        rho_A=rho_A,
        phi_R=phi_R,
        phi_A=min_singular_value(sys.A),
        n=sys.n,
        m=sys.m,
    )


def _input_constants(k: SystemConstants) -> tuple[float, float]:
    if k.phi_u is None or k.phi_R is None:
        raise NotApplicableError("bounds need an input channel (phi_u, phi_R undefined for autonomous systems)")
    return k.phi_R, k.phi_u


def kappa_constants(k: SystemConstants, cfg: BoundConfig) -> tuple[float, float]:
    """Return ``(kappa1, kappa2)``.

    Infinite when ``phi_R`` or ``phi_u`` is zero.
    """
    phi_R, phi_u = _input_constants(k)
    if not k.rho_A < 1.0:
        raise InvalidInputError("rho_A must be < 1")
    if phi_R == 0.0 or phi_u <= 0.0:
        kappa1 = kappa2 = math.inf
    else:
        d = cfg.delta
        gap = 1.0 - k.rho_A**2
        ratio = k.psi / phi_u
        kappa1 = (
            k.psi_A
            * max(math.sqrt(ratio), ratio)
            * math.sqrt((min(phi_R**2, 1.0) * phi_u + 1.0) / (min(phi_R**6, 1.0) * phi_u))
            * math.sqrt(math.log(5.0 * k.psi * k.psi_A**2 / (gap * d) * k.n * math.log(4.0 / d)))
        )
        log9 = math.log(9.0 * k.n / d)
        kappa2 = (
            k.psi**2 * k.psi_A**4 / (min(phi_R**4, 1.0) * phi_u**2 * gap)
            * log9
            * math.log(9.0 * k.psi * k.psi_A**4 / (gap * d) * (k.m + k.n) * log9)
        )
    if cfg.kappa2_override is not None:
        kappa2 = cfg.kappa2_override
    return kappa1, kappa2


def iv_sample_threshold(k: SystemConstants, cfg: BoundConfig) -> float:
    """Smallest ``T`` for which the IV bound applies; ``inf`` if ``A`` is singular."""
    _, kappa2 = kappa_constants(k, cfg)
    scale = min(k.phi_A**2, 1.0)
    if scale == 0.0:
        return math.inf
    return cfg.c2 * kappa2 / scale * k.n * (k.m + k.n) ** 2


def bc_sample_threshold(k: SystemConstants, cfg: BoundConfig) -> float:
    _, kappa2 = kappa_constants(k, cfg)
    return cfg.c2 * kappa2 * k.n * (k.m + k.n) ** 2


def iv_error_bound(k: SystemConstants, cfg: BoundConfig, T: int, *, strict: bool = True) -> float:
    """``c1 * kappa1 / min(phi_A, 1) * sqrt((m + n) / T)``.

    With ``strict`` (default), ``T`` below :func:`iv_sample_threshold`
    raises :class:`BelowThresholdError`.
    """
    if T <= 0:
        raise InvalidInputError("T must be positive")
    if strict:
        threshold = iv_sample_threshold(k, cfg)
        if T < threshold:
            raise BelowThresholdError(T, threshold)
    kappa1, _ = kappa_constants(k, cfg)
    scale = min(k.phi_A, 1.0)
    if scale == 0.0:
        return math.inf
    return cfg.c1 * kappa1 / scale * math.sqrt((k.m + k.n) / T)


def bc_error_floor(k: SystemConstants, cfg: BoundConfig, eps_eta: float) -> float:
    """The part of the BC bound that does not shrink with ``T``."""
    phi_R, phi_u = _input_constants(k)
    denom = min(phi_R**2, 1.0) * phi_u
    if eps_eta == 0.0:
        return 0.0
    return math.inf if denom == 0.0 else cfg.c1 * eps_eta / denom


def bc_error_bound(k: SystemConstants, cfg: BoundConfig, T: int, eps_eta: float, *, strict: bool = True) -> float:
    """``c1 * eps_eta / (min(phi_R^2, 1) phi_u) + c1 * kappa1 * sqrt((m + n) / T)``.

    With ``strict``, also enforces the sample threshold and the
    input-magnitude condition.
    """
    if T <= 0:
        raise InvalidInputError("T must be positive")
    if eps_eta < 0:
        raise InvalidInputError("eps_eta must be non-negative")
    phi_R, phi_u = _input_constants(k)
    if strict:
        required = input_magnitude_requirement(phi_R, k.psi_eta, eps_eta)
        if phi_u < required:
            raise AssumptionViolationError(
                f"input covariance too small for bias compensation: phi_u={phi_u:.6g} < {required:.6g}"
            )
        threshold = bc_sample_threshold(k, cfg)
        if T < threshold:
            raise BelowThresholdError(T, threshold)
    kappa1, _ = kappa_constants(k, cfg)
    return bc_error_floor(k, cfg, eps_eta) + cfg.c1 * kappa1 * math.sqrt((k.m + k.n) / T)
