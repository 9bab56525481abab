"""Structured matrix literals used in JSON config and output files."""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError
from .numerics import as_matrix


def cyclic_shift(dim: int, scale: float = 1.0) -> np.ndarray:
    """``scale * [[0, 1], [I_{dim-1}, 0]]``: ones on the subdiagonal and top-right corner."""
    S = np.zeros((dim, dim))
    S[1:, :-1] = np.eye(dim - 1)
    S[0, -1] = 1.0
    return scale * S


def stacked_identity(rows: int, cols: int, scale: float = 1.0) -> np.ndarray:
    """``scale * [I_cols; 0]`` of shape ``(rows, cols)``."""
    if cols > rows:
        raise InvalidInputError("stacked_identity needs rows >= cols")
    return scale * np.eye(rows, cols)


def _int(literal: dict, key: str) -> int:
    try:
        value = literal[key]
    except KeyError:
        raise InvalidInputError(f"matrix literal of kind {literal.get('kind')!r} needs {key!r}") from None
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise InvalidInputError(f"{key!r} must be a non-negative integer, got {value!r}")
    return value


def parse_matrix(literal, *, name: str = "matrix") -> np.ndarray:
    """Build a matrix from a literal.

    Accepts nested lists (dense) or a dict with ``kind`` one of ``dense``,
    ``identity``, ``cyclic_shift``, ``stacked_identity`` or ``zero``.
    """
    if isinstance(literal, list):
        return as_matrix(literal, name=name)
    if not isinstance(literal, dict) or "kind" not in literal:
        raise InvalidInputError(f"{name}: expected a matrix literal, got {literal!r}")
    kind = literal["kind"]
    scale = float(literal.get("scale", 1.0))
    if kind == "dense":
        rows, cols = _int(literal, "rows"), _int(literal, "cols")
        data = literal.get("data", [])
        if len(data) != rows * cols:
            raise InvalidInputError(f"{name}: dense literal has {len(data)} entries, expected {rows * cols}")
        M = np.array(data, dtype=np.float64).reshape(rows, cols)
    elif kind == "identity":
        M = scale * np.eye(_int(literal, "dim"))
    elif kind == "cyclic_shift":
        M = cyclic_shift(_int(literal, "dim"), scale)
    elif kind == "stacked_identity":
        M = stacked_identity(_int(literal, "rows"), _int(literal, "cols"), scale)
    elif kind == "zero":
        M = np.zeros((_int(literal, "rows"), _int(literal, "cols")))
    else:
        raise InvalidInputError(f"{name}: unknown matrix literal kind {kind!r}")
    return as_matrix(M, name=name)


def dense_literal(M) -> dict:
    M = np.asarray(M, dtype=np.float64)
    return {"kind": "dense", "rows": M.shape[0], "cols": M.shape[1], "data": [float(v) for v in M.ravel()]}
