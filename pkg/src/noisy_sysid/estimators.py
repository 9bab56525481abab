"""Closed-form estimators of ``E = [A B]`` from noisy state observations.

All estimators take a :class:`~noisy_sysid.system.Trajectory` and only read
``observations`` and ``inputs``; ground-truth states and noise are touched
only by :func:`ls_bias_decomposition`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    CorrectionSingularError,
    DiagnosticsUnavailableError,
    InsufficientDataError,
    InvalidInputError,
    NotApplicableError,
)
from .literals import dense_literal, parse_matrix
from .numerics import as_matrix, condition_number, min_singular_value, operator_norm, solve_right
from .system import LinearSystem, Trajectory

METHODS = ("LS", "IV", "BC", "HoKalman")


@dataclass
class Estimate:
    A_hat: np.ndarray
    B_hat: Optional[np.ndarray]
    method: str
    gram_condition: float
    T_used: int
    diagnostics: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.A_hat.shape[0]

    @property
    def m(self) -> int:
        return 0 if self.B_hat is None else self.B_hat.shape[1]

    @property
    def E_hat(self) -> np.ndarray:
        return self.A_hat if self.B_hat is None else np.hstack([self.A_hat, self.B_hat])

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "n": self.n,
            "m": self.m,
            "A_hat": dense_literal(self.A_hat),
            "B_hat": None if self.B_hat is None else dense_literal(self.B_hat),
            "gram_condition": self.gram_condition,
            "T_used": self.T_used,
        }

    @classmethod
    def from_dict(cls, d: dict) -> Estimate:
        B = d.get("B_hat")
        return cls(
            A_hat=parse_matrix(d["A_hat"], name="A_hat"),
            B_hat=None if B is None else parse_matrix(B, name="B_hat"),
            method=d["method"],
            gram_condition=float(d["gram_condition"]),
            T_used=int(d["T_used"]),
        )


@dataclass
class BiasDecomposition:
    """``E_LS = E + delta1 - delta2``: a vanishing part and a persistent offset."""

    delta1: np.ndarray
    delta2: np.ndarray


def _split(E: np.ndarray, n: int, m: int) -> tuple[np.ndarray, Optional[np.ndarray]]:
    return E[:, :n], (E[:, n:] if m else None)


def _regressors(traj: Trajectory) -> np.ndarray:
    """Rows ``zhat_t = [xhat_t; u_t]`` for ``t = 0..T-1``."""
    return np.hstack([traj.observations[:-1], traj.inputs])


def _need(T: int, minimum: int, method: str):
    if T < minimum:
        raise InsufficientDataError(f"{method} needs T >= {minimum}, got T={T}")


def _as_trajectory(observations) -> Trajectory:
    obs = np.asarray(observations, dtype=np.float64)
    if obs.ndim == 1:
        obs = obs[:, None]
    return Trajectory(states=None, observations=obs, inputs=np.zeros((obs.shape[0] - 1, 0)))


def ls_estimate(traj: Trajectory) -> Estimate:
    """Naive least squares of ``xhat_{t+1}`` on ``[xhat_t; u_t]``.

    Consistent only without observation noise.
    """
    n, m, T = traj.n, traj.m, traj.T
    _need(T, n + m, "LS")
    Z = _regressors(traj)
    gram = Z.T @ Z
    E = solve_right(traj.observations[1:].T @ Z, gram)
    A_hat, B_hat = _split(E, n, m)
    return Estimate(A_hat, B_hat, "LS", condition_number(gram), T, {"gram": gram})


def ls_estimate_autonomous(observations) -> Estimate:
    return ls_estimate(_as_trajectory(observations))


def ls_bias_decomposition(traj: Trajectory, true_sys: LinearSystem) -> BiasDecomposition:
    """Split the LS error into ``delta1`` (decays with T) and ``delta2`` (does not).

    Needs the realized noise, so ``traj`` must come from
    ``simulate(..., diagnostics=True)``.
    """
    if not traj.has_noise or traj.states is None:
        raise DiagnosticsUnavailableError("bias decomposition needs a trajectory simulated with diagnostics=True")
    n, m, T = traj.n, traj.m, traj.T
    if (true_sys.n, true_sys.m) != (n, m):
        raise InvalidInputError("system and trajectory dimensions differ")
    _need(T, n + m, "LS")
    A = true_sys.A
    Zhat = _regressors(traj)
    Z = np.hstack([traj.states[:-1], traj.inputs])
    eta = traj.observation_noise
    w = traj.process_noise
    eta_pad = np.hstack([eta[:-1], np.zeros((T, m))])
    gram = Zhat.T @ Zhat
    A_eta = eta[:-1] @ A.T  # rows A eta_t
    num1 = -A_eta.T @ Z + w.T @ Zhat + eta[1:].T @ Zhat
    num2 = A_eta.T @ eta_pad
    return BiasDecomposition(solve_right(num1, gram), solve_right(num2, gram))


def iv_estimate(traj: Trajectory) -> Estimate:
    """Instrumental-variable estimate with instrument ``[xhat_{t-1}; u_t]``.

    Sums run over ``t = 1..T-1`` because the instrument needs the previous
    observation. For an autonomous trajectory this is the lagged-state
    estimator ``(sum xhat_{t+1} xhat_{t-1}^T)(sum xhat_t xhat_{t-1}^T)^{-1}``.
    The cross-Gram degenerates when ``A`` is (nearly) singular.
    """
    n, m, T = traj.n, traj.m, traj.T
    _need(T, n + m + 1, "IV")
    X = traj.observations
    U = traj.inputs[1:]
    Z = np.hstack([X[1:-1], U])
    I = np.hstack([X[:-2], U])
    cross = Z.T @ I
    E = solve_right(X[2:].T @ I, cross, what="IV cross-Gram")
    A_hat, B_hat = _split(E, n, m)
    # scale-free; shrinks like 1/sqrt(T) when the instrument is uncorrelated with the regressor
    correlation = min_singular_value(cross) / np.sqrt(operator_norm(Z.T @ Z) * operator_norm(I.T @ I))
    return Estimate(A_hat, B_hat, "IV", condition_number(cross), T - 1, {"instrument_correlation": correlation})


def iv_estimate_autonomous(observations) -> Estimate:
    return iv_estimate(_as_trajectory(observations))


def bc_estimate(traj: Trajectory, sigma_eta_hat) -> Estimate:
    """Bias-compensated least squares.

    Right-multiplies the LS estimate by the inverse of
    ``I - S (Gram / T)^{-1}``, where ``S`` holds ``sigma_eta_hat`` in its
    state block and zeros elsewhere.
    """
    n, m, T = traj.n, traj.m, traj.T
    S_hat = as_matrix(sigma_eta_hat, name="sigma_eta_hat")
    if S_hat.shape != (n, n):
        raise InvalidInputError(f"sigma_eta_hat must be {n}x{n}, got {S_hat.shape}")
    ls = ls_estimate(traj)
    gram = ls.diagnostics["gram"]
    S = np.zeros((n + m, n + m))
    S[:n, :n] = S_hat
    correction = np.eye(n + m) - solve_right(S, gram / T)
    E = solve_right(ls.E_hat, correction, what="bias-compensation correction", error=CorrectionSingularError)
    A_hat, B_hat = _split(E, n, m)
    diag = {"correction_condition": condition_number(correction)}
    return Estimate(A_hat, B_hat, "BC", ls.gram_condition, T, diag)


def bc_estimate_autonomous(observations, sigma_eta_hat) -> Estimate:
    return bc_estimate(_as_trajectory(observations), sigma_eta_hat)


def default_ho_kalman_horizon(n: int) -> int:
    return n + 1


def ho_kalman_estimate(traj: Trajectory, k: Optional[int] = None) -> Estimate:
    """Markov-parameter baseline for the identity-observer case.

    Regresses ``xhat_t`` on the input window ``[u_{t-1}; ...; u_{t-k}]``
    and the window-start observation ``xhat_{t-k}`` over ``t = k..T-1``,
    reads ``B`` off the first Markov block, and fits ``A`` from the shift
    relation ``A [G_0 .. G_{k-2}] = [G_1 .. G_{k-1}]``. With ``C = I`` the
    observability factor is trivial, so no Hankel SVD is needed.
    """
    n, m, T = traj.n, traj.m, traj.T
    if m == 0:
        raise NotApplicableError("Ho-Kalman needs inputs")
    if k is None:
        k = default_ho_kalman_horizon(n)
    if k < 2:
        raise InvalidInputError(f"Ho-Kalman horizon must be >= 2, got {k}")
    _need(T, k * m + n, "HoKalman")
    U = traj.inputs
    X = traj.observations
    rows = T - k
    # column block i holds u_{t-1-i} for t = k..T-1
    window = np.hstack([U[k - 1 - i : T - 1 - i] for i in range(k)])
    Phi = np.hstack([window, X[: rows]])
    Y = X[k:T]
    if rows < Phi.shape[1]:
        raise InsufficientDataError(f"HoKalman has {rows} regression rows for {Phi.shape[1]} unknowns")
    gram = Phi.T @ Phi
    coef = solve_right(Y.T @ Phi, gram, what="Ho-Kalman input Gram")
    G = [coef[:, i * m : (i + 1) * m] for i in range(k)]
    left = np.hstack(G[:-1])
    right = np.hstack(G[1:])
    A_hat = np.linalg.lstsq(left.T, right.T, rcond=None)[0].T
    diag = {"markov_parameters": G, "shift_condition": condition_number(left @ left.T)}
    return Estimate(A_hat, G[0].copy(), "HoKalman", condition_number(gram), rows, diag)


def estimation_error(est: Estimate, sys: LinearSystem) -> float:
    """``max(||A - A_hat||, ||B - B_hat||)`` in operator norm."""
    return max(v for v in estimation_errors(est, sys) if v is not None)


def estimation_errors(est: Estimate, sys: LinearSystem) -> tuple[float, Optional[float]]:
    """Per-block operator-norm errors ``(err_A, err_B)``; ``err_B`` is ``None`` when autonomous."""
    if est.A_hat.shape != sys.A.shape or est.m != sys.m:
        raise InvalidInputError("estimate and system dimensions differ")
    err_A = operator_norm(sys.A - est.A_hat)
    if sys.autonomous:
        return err_A, None
    return err_A, operator_norm(sys.B - est.B_hat)
