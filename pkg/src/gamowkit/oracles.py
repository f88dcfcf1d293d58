"""Brute-force reference computations, kept independent of the closed forms."""

from __future__ import annotations

import math

import numpy as np

__all__ = ["expm_series", "two_sided_evolution"]

MAX_ORACLE_DIM = 64


def expm_series(a: np.ndarray, terms: int = 30) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a truncated Taylor series.

    Deliberately naive: no Pade, no Jordan structure.  Limited to small
    matrices.
    """
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("expm_series needs a square matrix")
    if n > MAX_ORACLE_DIM:
        raise ValueError(f"oracle limited to dimension {MAX_ORACLE_DIM}")
    norm = np.linalg.norm(a, 1)
    squarings = max(0, math.ceil(math.log2(norm / 0.25))) if norm > 0.25 else 0
    b = a / 2.0**squarings
    out = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    for k in range(1, terms + 1):
        term = term @ b / k
        out = out + term
    for _ in range(squarings):
        out = out @ out
    return out


def two_sided_evolution(ket_generator: np.ndarray, w: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i A t) W exp(-i A t)^dagger`` with ``A`` the ket action of H."""
    u = expm_series(-1j * t * np.asarray(ket_generator, dtype=complex))
    return u @ np.asarray(w, dtype=complex) @ u.conj().T
