"""Born probabilities, decay curves and the Hilbert-space survival comparison.

Gamow curves are *rates* for generalized states and are never renormalised.
The pairing between a detector wave function ``psi^-`` and the Gamow-Jordan
kets of a pole is taken through analytic continuation::

    <psi^-|z^->^(k) = (Gamma^k / k!) * conj(psi^(k)(conj(z_R)))

``psi^-`` is upper Hardy, so it continues to ``conj(z_R) = E_R + i Gamma/2``;
``z -> conj(psi(conj z))`` is then analytic around ``z_R`` itself.  For
``k = 0`` this is the usual ``<psi^-|psi^G> = sqrt(2 pi Gamma) conj(psi(conj z_R))``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ._parallel import map_chunks
from .errors import CausalityError, ConfigError, NotHardyError, ShapeError
from .evolution import evolve_state_operator, unitary_evolve
from .hardy import (
    DEFAULT_TOL,
    EnergyGrid,
    HalfPlane,
    WaveFunction,
    analytic_continue,
    hardy_membership,
)
from .jordan import (
    CompositeBasis,
    StateOperator,
    assemble_hamiltonian,
    build_W_G,
    build_W_PT,
)
from .quadrature import fourier_filon, fourier_trapezoid
from .smatrix import PoleSpec

__all__ = [
    "DecayCurve",
    "fit_decay_rate",
    "gamow_fit_window",
    "lifetime_from_curve",
    "born_overlap",
    "trace_complex",
    "trace_probability",
    "pole_amplitudes",
    "observable_dyad",
    "gamow_wavefunction",
    "breit_wigner_wavefunction",
    "gamow_decay_curve",
    "hilbert_survival_curve",
    "picture_equivalence_check",
]

log = logging.getLogger(__name__)

IMAG_REPORT = 1e-10


@dataclass(frozen=True, eq=False)
class DecayCurve:
    times: np.ndarray
    values: np.ndarray
    gamma_fit: float
    fit_residual: float
    window: tuple[float, float]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape or t.ndim != 1:
            raise ShapeError("times and values must be 1-d arrays of equal length")
        if len(t) > 1 and np.any(np.diff(t) <= 0):
            raise ConfigError("times must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ShapeError("curve values must be finite")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @property
    def lifetime(self) -> float:
        return 1.0 / self.gamma_fit

    def sidecar(self) -> dict:
        return {
            "gamma_fit": self.gamma_fit,
            "fit_residual": self.fit_residual,
            "window": list(self.window),
            **self.metadata,
        }


def gamow_fit_window(gamma: float) -> tuple[float, float]:
    return (0.5 / gamma, 5.0 / gamma)


def fit_decay_rate(times, values, window: tuple[float, float] | None = None):
    """Log-linear least squares ``log P = a - gamma t`` over ``window``.

    Returns ``(gamma, intercept, max_abs_log_residual, window_used)``.  When
    fewer than two positive samples fall into the window, all positive
    samples are used.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    usable = v > 0
    sel = usable
    if window is not None:
        sel = usable & (t >= window[0] - 1e-12 * abs(window[0])) & (t <= window[1] * (1 + 1e-12))
        if np.count_nonzero(sel) < 2:
            sel = usable
    if np.count_nonzero(sel) < 2:
        return float("nan"), float("nan"), float("nan"), (float("nan"), float("nan"))
    ts, ys = t[sel], np.log(v[sel])
    A = np.stack([np.ones_like(ts), -ts], axis=1)
    (intercept, gamma), *_ = np.linalg.lstsq(A, ys, rcond=None)
    resid = float(np.max(np.abs(ys - (intercept - gamma * ts))))
    return float(gamma), float(intercept), resid, (float(ts[0]), float(ts[-1]))


def lifetime_from_curve(curve: DecayCurve) -> float:
    """Time for the sampled curve to fall by a factor ``e`` from its first sample.

    Interpolates linearly in ``log P`` between the bracketing samples, which
    is exact for a pure exponential.
    """
    t, v = curve.times, curve.values
    if len(t) < 2 or v[0] <= 0:
        raise ValueError("need at least two samples and a positive first value")
    target = math.log(v[0]) - 1.0
    logs = np.log(np.where(v > 0, v, np.nan))
    for i in range(1, len(t)):
        if logs[i] <= target:
            frac = (logs[i - 1] - target) / (logs[i - 1] - logs[i])
            return float(t[i - 1] + frac * (t[i] - t[i - 1]) - t[0])
    raise ValueError("curve never falls by a factor e within its time range")


def _same_grid(a: WaveFunction, b: WaveFunction) -> EnergyGrid:
    if not a.grid.same_as(b.grid):
        raise ShapeError("wave functions live on different grids")
    return a.grid


def born_overlap(psi: WaveFunction, phi: WaveFunction) -> float:
    """``|int conj(psi(E)) phi(E) dE|^2`` by grid quadrature."""
    grid = _same_grid(psi, phi)
    amp = np.sum(grid.weights * np.conj(psi.samples) * phi.samples)
    return float(abs(amp) ** 2)


def trace_complex(Lam: StateOperator, W: StateOperator) -> complex:
    """``Tr(Lambda W)`` with continuum integrals weighted by the grid measure."""
    if not Lam.basis.same_as(W.basis):
        raise ShapeError("operators live on different bases")
    d = Lam.basis.trace_weights()
    weighted = (d[:, None] * W.matrix) * d[None, :]
    return complex(np.sum(Lam.matrix * weighted.T))


def trace_probability(Lam: StateOperator, W: StateOperator) -> float:
    """Real part of :func:`trace_complex`; a non-negligible imaginary part is logged."""
    val = trace_complex(Lam, W)
    if abs(val.imag) > IMAG_REPORT * max(1.0, abs(val.real)):
        log.warning("Tr(Lambda W) has imaginary residual %.3g", val.imag)
    return val.real


def pole_amplitudes(psi: WaveFunction, pole: PoleSpec, *, tol: float = DEFAULT_TOL,
                    check: bool = True) -> np.ndarray:
    """``<psi^-|z^->^(k)`` for ``k = 0 .. order-1`` (unit chain vectors)."""
    if check:
        report = hardy_membership(psi, HalfPlane.UPPER, tol)
        if not report.is_hardy:
            raise NotHardyError("detector wave function must be upper Hardy")
    w = pole.position.conjugate()
    out = np.empty(pole.order, dtype=complex)
    for k in range(pole.order):
        deriv = analytic_continue(psi, HalfPlane.UPPER, w, derivative=k, check=False)
        out[k] = pole.gamma**k / math.factorial(k) * deriv.conjugate()
    return out


def observable_dyad(psi: WaveFunction, basis: CompositeBasis, *, tol: float = DEFAULT_TOL,
                    check: bool = True) -> StateOperator:
    """``|psi^-><psi^-|`` on a composite basis.

    Continuum entries are ``psi(E_i) conj(psi(E_j))``; pole-block coordinates
    come from :func:`pole_amplitudes`, so that ``Tr(Lambda W)`` reproduces
    ``<psi^-|W|psi^->`` for pole-term states.
    """
    if check and basis.blocks:
        report = hardy_membership(psi, HalfPlane.UPPER, tol)
        if not report.is_hardy:
            raise NotHardyError("detector wave function must be upper Hardy")
    v = np.zeros(basis.dimension, dtype=complex)
    for j, pole in enumerate(basis.blocks):
        v[basis.block_slice(j)] = np.conj(pole_amplitudes(psi, pole, check=False))
    if basis.grid is not None:
        if not basis.grid.same_as(psi.grid):
            raise ShapeError("wave function grid differs from the basis continuum")
        v[basis.continuum_slice] = psi.samples
    return StateOperator(basis, np.outer(v, np.conj(v)))


def gamow_wavefunction(pole: PoleSpec, grid: EnergyGrid) -> WaveFunction:
    """Energy representative of ``psi^G``: ``i sqrt(Gamma/2pi) / (E - z_R)``.

    Its quadrature overlap with an upper-Hardy ``psi`` tends to
    ``<psi|psi^G>``; ``|.|^2`` is the normalised Breit-Wigner profile.
    """
    from .hardy import Rational

    amp = 1j * math.sqrt(pole.gamma / (2 * math.pi))
    return WaveFunction.from_rational(grid, Rational([amp], [-pole.position, 1.0]))


def breit_wigner_wavefunction(pole: PoleSpec, grid: EnergyGrid) -> WaveFunction:
    """Breit-Wigner amplitude truncated to the grid and normalised there."""
    return gamow_wavefunction(pole, grid).normalized()


def _check_times(times, allow_negative: bool = False) -> np.ndarray:
    t = np.atleast_1d(np.asarray(times, dtype=float))
    if not allow_negative:
        bad = t[~(t >= 0)]
        if len(bad):
            raise CausalityError(float(bad[0]))
    return t


def gamow_decay_curve(psi: WaveFunction, pole: PoleSpec, times, *,
                      operator: str = "gamow", tol: float = DEFAULT_TOL) -> DecayCurve:
    """Detection rate ``Tr(|psi^-><psi^-| W(t))`` of a pole-term state, ``t >= 0``.

    ``operator="gamow"`` evolves ``|psi^G><psi^G|``; ``"W_PT"`` evolves the
    full pole-term operator (complex symmetric for order >= 2, so the
    modulus of the complex trace is reported).  The state operator is
    evolved at every time; the exponential law is not inserted by hand.
    """
    t = _check_times(times)
    if operator == "gamow":
        W = build_W_G(pole)
    elif operator == "W_PT":
        W = build_W_PT(pole)
    else:
        raise ConfigError(f"unknown operator {operator!r}; use 'gamow' or 'W_PT'")
    Lam = observable_dyad(psi, W.basis, tol=tol)
    H = assemble_hamiltonian(W.basis)
    raw = np.array([trace_complex(Lam, evolve_state_operator(W, H, ti)) for ti in t])
    values = raw.real if operator == "gamow" else np.abs(raw)
    window = gamow_fit_window(pole.gamma)
    gamma, _, resid, used = fit_decay_rate(t, values, window)
    meta = {"operator": operator, "normalised": False, "pole": pole.to_dict(), "fit_window_used": list(used)}
    return DecayCurve(t, values, gamma, resid, window, meta)


def hilbert_survival_curve(phi: WaveFunction, times, *, method: str = "filon",
                           fit_window: tuple[float, float] | None = None,
                           allow_negative: bool = False) -> DecayCurve:
    """Survival probability ``|int exp(-iEt) |phi(E)|^2 dE|^2`` of a Hilbert-space state.

    ``method="filon"`` integrates a cubic-spline interpolant of the energy
    density exactly against the phase (continuum semantics);
    ``method="discrete"`` sums over grid points, i.e. treats the grid as a
    discrete spectrum.  The result is divided by the squared norm from the
    same rule, so ``P(0) = 1``.
    """
    t = _check_times(times, allow_negative)
    density = np.abs(phi.samples) ** 2
    e = phi.grid.energies
    if method == "filon":
        if not phi.grid.is_uniform:
            raise ConfigError("filon quadrature needs a uniform grid")

        def amp(ts):
            return fourier_filon(e, density, ts)
    elif method == "discrete":
        w = phi.grid.weights

        def amp(ts):
            return fourier_trapezoid(e, w, density, ts)
    else:
        raise ConfigError(f"unknown method {method!r}")
    norm = amp(np.array([0.0]))[0].real
    if norm <= 0:
        raise ValueError("wave function has zero norm")
    values = np.abs(map_chunks(amp, t)) ** 2 / norm**2
    gamma, _, resid, used = fit_decay_rate(t, values, fit_window)
    win = fit_window if fit_window is not None else used
    meta = {"method": method, "fit_window_used": list(used)}
    return DecayCurve(t, values, gamma, resid, tuple(win), meta)


def picture_equivalence_check(psi: WaveFunction, phi: WaveFunction, t: float) -> float:
    """``| |<psi|phi(t)>|^2 - |<psi(t)|phi>|^2 |`` with the Heisenberg observable
    ``psi(t) = U(t)^dagger psi``; any real ``t``."""
    _same_grid(psi, phi)
    schroedinger = born_overlap(psi, unitary_evolve(phi, t))
    heisenberg = born_overlap(unitary_evolve(psi, -t), phi)
    return abs(schroedinger - heisenberg)
