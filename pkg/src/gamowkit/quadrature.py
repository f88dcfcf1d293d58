"""Oscillatory quadrature on energy grids."""

from __future__ import annotations

import numpy as np
from scipy.interpolate import CubicSpline

__all__ = ["fourier_trapezoid", "fourier_filon"]

# below this |t h| the moment recursion loses digits; use the Taylor series
_SERIES_CUTOFF = 0.5
_SERIES_TERMS = 40


def fourier_trapezoid(energies: np.ndarray, weights: np.ndarray, density: np.ndarray,
                      times: np.ndarray) -> np.ndarray:
    """``sum_i w_i rho_i exp(-i E_i t)`` for each ``t``: the discrete spectrum."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    phase = np.exp(-1j * np.outer(times, energies))
    return phase @ (weights * density)


def _moments(h: float, t: float) -> np.ndarray:
    """``M_k = int_0^h s^k exp(-i t s) ds`` for k = 0..3."""
    x = -1j * t
    if abs(t * h) < _SERIES_CUTOFF:
        out = np.zeros(4, dtype=complex)
        for k in range(4):
            term = h ** (k + 1)
            acc = 0j
            for m in range(_SERIES_TERMS):
                acc += term / (k + m + 1)
                term *= x * h / (m + 1)
            out[k] = acc
        return out
    e = np.exp(x * h)
    m0 = (e - 1) / x
    m1 = (h * e - m0) / x
    m2 = (h * h * e - 2 * m1) / x
    m3 = (h**3 * e - 3 * m2) / x
    return np.array([m0, m1, m2, m3])


def fourier_filon(energies: np.ndarray, density: np.ndarray, times: np.ndarray) -> np.ndarray:
    """``int rho(E) exp(-i E t) dE`` with ``rho`` a not-a-knot cubic spline.

    Each spline piece is integrated exactly against the oscillating kernel,
    so accuracy does not degrade as ``t`` grows past the grid's Nyquist
    scale.  Requires a uniform grid.
    """
    energies = np.asarray(energies, dtype=float)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    h = energies[1] - energies[0]
    density = np.asarray(density)
    if np.iscomplexobj(density):
        return (fourier_filon(energies, density.real, times)
                + 1j * fourier_filon(energies, density.imag, times))
    spline = CubicSpline(energies, density)
    c3, c2, c1, c0 = spline.c  # highest power first, local variable s = E - E_j
    left = energies[:-1]
    out = np.empty(len(times), dtype=complex)
    for i, t in enumerate(times):
        m = _moments(h, t)
        local = c0 * m[0] + c1 * m[1] + c2 * m[2] + c3 * m[3]
        if t == 0:
            out[i] = np.sum(local)
        else:
            out[i] = np.sum(local * np.exp(-1j * t * left))
    return out

