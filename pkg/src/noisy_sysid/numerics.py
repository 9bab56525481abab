"""Dense matrix primitives and seeded Gaussian sampling.

Matrices are plain 2-D ``float64`` numpy arrays. :func:`as_matrix` is the
single validation point: it copies, checks finiteness and returns a
read-only array so values can be shared across threads.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InvalidInputError, NotPSDError, SingularGramError

#: Gram inversions above this 2-norm condition number are refused.
MAX_CONDITION = 1e12
PSD_TOL = 1e-10


def as_matrix(M, *, name: str = "matrix") -> np.ndarray:
    """Validate ``M`` and return an immutable 2-D float64 copy.

    1-D input is not promoted; callers must be explicit about shape.
    """
    arr = np.array(M, dtype=np.float64, copy=True)
    if arr.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


def _checked(M, name: str) -> np.ndarray:
    arr = np.asarray(M, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise InvalidInputError(f"{name} must be a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return arr


def singular_values(M) -> np.ndarray:
    """All singular values, descending."""
    return np.linalg.svd(_checked(M, "M"), compute_uv=False)


def min_singular_value(M) -> float:
    """Smallest singular value over ``min(rows, cols)``."""
    return float(singular_values(M)[-1])


def operator_norm(M) -> float:
    return float(singular_values(M)[0])


def condition_number(D) -> float:
    s = singular_values(D)
    if s[-1] == 0.0:
        return float("inf")
    return float(s[0] / s[-1])


def solve_right(N, D, *, what: str = "Gram matrix", error=SingularGramError) -> np.ndarray:
    """Return ``X`` with ``X @ D = N`` using an LU factorization of ``D``.

    Raises ``error`` (a :class:`SingularGramError` subclass) when the
    condition number of ``D`` exceeds :data:`MAX_CONDITION`.
    """
    N = _checked(N, "N")
    D = _checked(D, "D")
    if D.shape[0] != D.shape[1]:
        raise InvalidInputError(f"D must be square, got {D.shape}")
    if N.shape[1] != D.shape[0]:
        raise InvalidInputError(f"N has {N.shape[1]} columns but D is {D.shape[0]}x{D.shape[0]}")
    cond = condition_number(D)
    if not cond <= MAX_CONDITION:
        raise error(f"{what} is singular or ill-conditioned", cond)
    # X D = N  <=>  D^T X^T = N^T
    lu, piv = scipy.linalg.lu_factor(D.T, check_finite=False)
    return scipy.linalg.lu_solve((lu, piv), N.T, check_finite=False).T


def psd_factor(S) -> np.ndarray:
    """Return ``L`` with ``L @ L.T == S`` for a symmetric PSD ``S``.

    Uses a symmetric eigendecomposition so singular covariances work;
    eigenvalues in ``[-1e-10, 0)`` are clamped to zero.
    """
    S = _checked(S, "S")
    if S.shape[0] != S.shape[1]:
        raise InvalidInputError(f"covariance must be square, got {S.shape}")
    scale = max(1.0, float(np.max(np.abs(S))))
    if np.max(np.abs(S - S.T)) > 1e-9 * scale:
        raise InvalidInputError("covariance is not symmetric")
    S = 0.5 * (S + S.T)
    w, V = np.linalg.eigh(S)
    if w[0] < -PSD_TOL:
        raise NotPSDError(float(w[0]))
    w = np.clip(w, 0.0, None)
    return V * np.sqrt(w)


@dataclass(frozen=True)
class RngStream:
    """Named, stateless description of a random stream.

    The generator seed is derived by hashing ``master_seed``, ``stream_label``
    and ``trial_index`` together, so streams are independent of call order
    and of how trials are distributed over workers.
    """

    master_seed: int
    stream_label: str
    trial_index: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed < 2**64:
            raise InvalidInputError("master_seed must be a 64-bit unsigned integer")
        if self.trial_index < 0:
            raise InvalidInputError("trial_index must be non-negative")

    def child(self, label: str) -> RngStream:
        return RngStream(self.master_seed, f"{self.stream_label}/{label}", self.trial_index)

    def seed(self) -> int:
        key = f"{self.master_seed}|{self.stream_label}|{self.trial_index}".encode()
        return int.from_bytes(hashlib.sha256(key).digest()[:16], "little")

    def generator(self) -> np.random.Generator:
        # PCG64 integer stream; numpy's ziggurat turns it into normals.
        return np.random.Generator(np.random.PCG64(self.seed()))


def draw_gaussian(stream: RngStream, cov_factor, count: int) -> np.ndarray:
    """Draw ``count`` i.i.d. vectors ``L g`` with ``g ~ N(0, I)``.

    Returns an array of shape ``(count, n)``; row ``i`` is the i-th draw.
    Draws are filled row by row, so a longer request extends a shorter one
    with the same stream.
    """
    L = _checked(cov_factor, "cov_factor")
    if L.shape[0] != L.shape[1]:
        raise InvalidInputError(f"cov_factor must be square, got {L.shape}")
    if count < 0:
        raise InvalidInputError("count must be non-negative")
    g = stream.generator().standard_normal((count, L.shape[1]))
    return g @ L.T
