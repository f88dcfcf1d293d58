"""Energy wave functions and numerical Hardy-class tests.

Conventions
-----------
Energies and times are reciprocal (hbar = 1).  The Fourier transform used
throughout is ``F(t) = int f(E) exp(-i E t) dE``.  A function is *upper*
Hardy (boundary value of a function analytic and square integrable in the
upper half of the complex energy plane) iff ``F`` is supported on
``t >= 0``; *lower* Hardy iff ``F`` is supported on ``t <= 0``.

Physicists' labels are mirrored: prepared in-state wave functions
``phi+(E)`` must be **lower** Hardy, detected out-observable wave functions
``psi-(E)`` must be **upper** Hardy.  Many references use the opposite
pairing, so check the sign before porting data.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigError,
    DomainError,
    GridError,
    NotHardyError,
    ResolutionError,
    ShapeError,
)

__all__ = [
    "EnergyGrid",
    "Rational",
    "WaveFunction",
    "HalfPlane",
    "HardyReport",
    "TailModel",
    "fit_tail_model",
    "hilbert_transform",
    "hardy_membership",
    "analytic_continue",
    "basis_synthesize",
    "basis_project",
    "DEFAULT_TOL",
]

DEFAULT_TOL = 1e-6
#: relative edge amplitude below which the grid is treated as decayed
EDGE_DECAY = 1e-8
TAPER_FRACTION = 0.1
PAD_FACTOR = 4
TAIL_TERMS = 12
#: distance of the tail-model pole from the axis, as a fraction of the window
TAIL_OFFSET = 0.05
TAIL_MISFIT = 1e-3


@dataclass(frozen=True, eq=False)
class EnergyGrid:
    """Discretisation of the continuous spectrum ``[e0, e_max]``.

    Uniform unless explicit ``points`` are given.  Weights are the
    trapezoid rule, so they sum to ``e_max - e0``.
    """

    e0: float
    e_max: float
    n: int
    points: np.ndarray | None = None

    def __post_init__(self):
        if self.points is not None:
            pts = np.array(self.points, dtype=float)
            if pts.ndim != 1 or len(pts) != self.n:
                raise GridError("points must be a 1-d array of length n")
            if np.any(np.diff(pts) <= 0):
                raise GridError("grid points must be strictly increasing")
            if pts[0] != self.e0 or pts[-1] != self.e_max:
                raise GridError("points must start at e0 and end at e_max")
            pts.setflags(write=False)
            object.__setattr__(self, "points", pts)
        if not (np.isfinite(self.e0) and np.isfinite(self.e_max)):
            raise GridError("grid bounds must be finite")
        if not self.e0 < self.e_max:
            raise GridError(f"need e0 < e_max, got {self.e0} >= {self.e_max}")
        if int(self.n) != self.n or self.n < 2:
            raise GridError(f"need n >= 2 points, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def energies(self) -> np.ndarray:
        if self.points is not None:
            return self.points
        e = np.linspace(self.e0, self.e_max, self.n)
        e.setflags(write=False)
        return e

    @property
    def is_uniform(self) -> bool:
        if self.points is None:
            return True
        d = np.diff(self.points)
        return bool(np.allclose(d, d[0], rtol=1e-10, atol=0))

    @property
    def spacing(self) -> float:
        """Uniform spacing; raises GridError on a non-uniform grid."""
        if not self.is_uniform:
            raise GridError("grid is not uniform")
        return (self.e_max - self.e0) / (self.n - 1)

    @property
    def weights(self) -> np.ndarray:
        e = self.energies
        d = np.diff(e)
        w = np.zeros(self.n)
        w[:-1] += d / 2
        w[1:] += d / 2
        w.setflags(write=False)
        return w

    def same_as(self, other: "EnergyGrid") -> bool:
        return (
            self.n == other.n
            and self.e0 == other.e0
            and self.e_max == other.e_max
            and np.array_equal(self.energies, other.energies)
        )

    def to_dict(self) -> dict:
        return {"e0": self.e0, "e_max": self.e_max, "n": self.n}

    @classmethod
    def from_dict(cls, d: dict) -> "EnergyGrid":
        try:
            return cls(float(d["e0"]), float(d["e_max"]), int(d["n"]))
        except (KeyError, TypeError) as exc:
            raise GridError(f"malformed grid spec {d!r}") from exc


def _as_coeffs(c) -> np.ndarray:
    arr = []
    for x in c:
        if isinstance(x, (list, tuple)):
            if len(x) != 2:
                raise ConfigError(f"complex coefficient must be [re, im], got {x!r}")
            arr.append(complex(float(x[0]), float(x[1])))
        else:
            arr.append(complex(x))
    out = np.array(arr, dtype=complex)
    if out.ndim != 1 or len(out) == 0:
        raise ConfigError("coefficient list must be non-empty")
    return out


@dataclass(frozen=True, eq=False)
class Rational:
    """Rational function ``num(E) / den(E)`` of a complex variable.

    Coefficients are in ascending powers: ``num = [a0, a1, ...]`` means
    ``a0 + a1 E + ...``.
    """

    num: np.ndarray
    den: np.ndarray

    def __post_init__(self):
        num = _as_coeffs(self.num)
        den = np.trim_zeros(_as_coeffs(self.den), "b")
        if len(den) == 0:
            raise ConfigError("denominator is identically zero")
        num.setflags(write=False)
        den.setflags(write=False)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @classmethod
    def from_poles(cls, poles, residues, constant: complex = 0.0) -> "Rational":
        """Build ``constant + sum_j residues[j] / (E - poles[j])``."""
        poles = np.asarray(poles, dtype=complex)
        residues = np.asarray(residues, dtype=complex)
        if poles.shape != residues.shape:
            raise ShapeError("poles and residues must have equal length")
        P = np.polynomial.polynomial
        den = np.array([1.0 + 0j])
        for p in poles:
            den = P.polymul(den, [-p, 1.0])
        num = constant * den
        for j, a in enumerate(residues):
            part = np.array([a], dtype=complex)
            for m, p in enumerate(poles):
                if m != j:
                    part = P.polymul(part, [-p, 1.0])
            num = P.polyadd(num, part)
        return cls(num, den)

    def __call__(self, z):
        P = np.polynomial.polynomial
        z = np.asarray(z, dtype=complex)
        return P.polyval(z, self.num) / P.polyval(z, self.den)

    @property
    def poles(self) -> np.ndarray:
        if len(self.den) == 1:
            return np.array([], dtype=complex)
        return np.polynomial.polynomial.polyroots(self.den)

    def to_dict(self) -> dict:
        return {
            "num": [[c.real, c.imag] for c in self.num],
            "den": [[c.real, c.imag] for c in self.den],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Rational":
        if "poles" in d:
            return cls.from_poles(
                _as_coeffs(d["poles"]),
                _as_coeffs(d["residues"]),
                complex(*d["constant"]) if isinstance(d.get("constant"), list)
                else complex(d.get("constant", 0.0)),
            )
        try:
            return cls(d["num"], d["den"])
        except KeyError as exc:
            raise ConfigError(f"rational spec needs num/den or poles/residues: {d!r}") from exc


@dataclass(frozen=True, eq=False)
class WaveFunction:
    """Complex energy wave function sampled on an :class:`EnergyGrid`."""

    grid: EnergyGrid
    samples: np.ndarray
    closed_form: Rational | None = None

    def __post_init__(self):
        s = np.array(self.samples, dtype=complex)
        if s.shape != (self.grid.n,):
            raise ShapeError(f"expected {self.grid.n} samples, got shape {s.shape}")
        if not np.all(np.isfinite(s)):
            raise ConfigError("samples must be finite")
        if self.closed_form is not None:
            ref = self.closed_form(self.grid.energies)
            scale = np.max(np.abs(s)) if len(s) else 0.0
            if np.max(np.abs(s - ref)) > 1e-12 * scale:
                raise ConfigError("samples disagree with the closed form")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @classmethod
    def from_rational(cls, grid: EnergyGrid, rational: Rational) -> "WaveFunction":
        return cls(grid, rational(grid.energies), rational)

    @classmethod
    def from_callable(cls, grid: EnergyGrid, fn) -> "WaveFunction":
        return cls(grid, np.asarray(fn(grid.energies), dtype=complex))

    @property
    def energies(self) -> np.ndarray:
        return self.grid.energies

    def norm(self) -> float:
        return math.sqrt(float(np.sum(self.grid.weights * np.abs(self.samples) ** 2)))

    def normalized(self) -> "WaveFunction":
        nrm = self.norm()
        if nrm == 0:
            raise ValueError("cannot normalise the zero function")
        return WaveFunction(self.grid, self.samples / nrm)

    def scaled(self, alpha: complex) -> "WaveFunction":
        return WaveFunction(self.grid, alpha * self.samples)

    def __add__(self, other: "WaveFunction") -> "WaveFunction":
        if not self.grid.same_as(other.grid):
            raise ShapeError("wave functions live on different grids")
        return WaveFunction(self.grid, self.samples + other.samples)

    def __call__(self, e):
        """Evaluate at real energies: exact for closed forms, spline otherwise."""
        if self.closed_form is not None:
            return self.closed_form(e)
        from scipy.interpolate import CubicSpline

        en = self.grid.energies
        e_arr = np.asarray(e, dtype=float)
        if np.any(e_arr < en[0]) or np.any(e_arr > en[-1]):
            raise DomainError("energy outside the grid")
        return CubicSpline(en, self.samples)(e_arr)


class HalfPlane(enum.Enum):
    UPPER = "upper"
    LOWER = "lower"

    @property
    def sign(self) -> int:
        return 1 if self is HalfPlane.UPPER else -1

    @property
    def opposite(self) -> "HalfPlane":
        return HalfPlane.LOWER if self is HalfPlane.UPPER else HalfPlane.UPPER

    @classmethod
    def parse(cls, value) -> "HalfPlane":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError as exc:
            raise ConfigError(f"half-plane must be 'upper' or 'lower', got {value!r}") from exc


@dataclass(frozen=True)
class HardyReport:
    is_hardy: bool
    titchmarsh_residual: float
    wrong_side_leakage: float
    tolerance_used: float
    half_plane: HalfPlane = HalfPlane.UPPER
    warnings: tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "half_plane": self.half_plane.value,
            "is_hardy": self.is_hardy,
            "titchmarsh_residual": self.titchmarsh_residual,
            "wrong_side_leakage": self.wrong_side_leakage,
            "tolerance_used": self.tolerance_used,
            "warnings": list(self.warnings),
        }


# ---------------------------------------------------------------------------
# tail model


@dataclass(frozen=True)
class TailModel:
    """``m(E) = sum_k coeffs[k-1] / (E - center)**k``.

    ``center`` sits off the axis on the side opposite to the half-plane the
    model belongs to, so ``m`` is itself Hardy for that half-plane and its
    Hilbert transform, Fourier support and analytic continuation are known
    in closed form.
    """

    coeffs: np.ndarray
    center: complex

    def __call__(self, z, derivative: int = 0):
        z = np.asarray(z, dtype=complex)
        u = z - self.center
        out = np.zeros_like(u)
        for j, a in enumerate(self.coeffs, start=1):
            if a == 0:
                continue
            fac = (-1) ** derivative * math.factorial(j + derivative - 1) / math.factorial(j - 1)
            out = out + a * fac * u ** (-(j + derivative))
        return out


def _taper(n: int, fraction: float = TAPER_FRACTION) -> np.ndarray:
    w = np.ones(n)
    m = int(round(fraction * n))
    if m > 0:
        ramp = 0.5 * (1.0 - np.cos(np.pi * np.arange(m) / m))
        w[:m] = ramp
        w[n - m:] = ramp[::-1]
    return w


def fit_tail_model(f: WaveFunction, hp: HalfPlane | str = HalfPlane.UPPER,
                   terms: int = TAIL_TERMS) -> TailModel:
    """Least-squares fit of the slow asymptotic tail of ``f``.

    The fit uses the outer taper zones at both ends of the window.  For a
    function that already decays at the edges the coefficients come out
    negligible and the model is harmless.
    """
    hp = HalfPlane.parse(hp)
    e = f.grid.energies
    n = len(e)
    width = e[-1] - e[0]
    center = 0.5 * (e[0] + e[-1]) - 1j * hp.sign * TAIL_OFFSET * width
    m = max(int(round(TAPER_FRACTION * n)), terms + 1)
    if 2 * m > n:
        return TailModel(np.zeros(terms, dtype=complex), center)
    idx = np.r_[0:m, n - m:n]
    basis = np.stack([(e[idx] - center) ** -k for k in range(1, terms + 1)], axis=1)
    scale = np.abs(basis).max(axis=0)
    target = f.samples[idx]
    coef, *_ = np.linalg.lstsq(basis / scale, target, rcond=None)
    misfit = np.linalg.norm(basis @ (coef / scale) - target)
    if misfit > TAIL_MISFIT * np.linalg.norm(target):
        # edges are not a smooth rational tail (e.g. oscillating); taper only
        return TailModel(np.zeros(terms, dtype=complex), center)
    return TailModel(coef / scale, center)


def _require_uniform(f: WaveFunction) -> float:
    if not f.grid.is_uniform:
        raise GridError("FFT-based operations need a uniform grid")
    if f.grid.n < 16:
        raise ResolutionError(f"need at least 16 grid points, got {f.grid.n}")
    return f.grid.spacing


def _fft_hilbert(values: np.ndarray) -> np.ndarray:
    """Discrete Hilbert transform of samples with unit spacing.

    Linear convolution with the band-limited kernel ``2/(pi k)`` (odd ``k``),
    done by zero-padded FFT so that nothing wraps around the window.
    """
    n = len(values)
    size = PAD_FACTOR * n
    kernel = np.zeros(size)
    k = np.arange(1, n, 2)
    kernel[k] = 2.0 / (np.pi * k)
    kernel[size - k] = -kernel[k]
    return np.fft.ifft(np.fft.fft(values, size) * np.fft.fft(kernel))[:n]


def _hilbert_samples(f: WaveFunction, model: TailModel) -> tuple[np.ndarray, np.ndarray]:
    # H[m] = -i*m for an upper-Hardy model, +i*m for a lower one.
    side = 1 if model.center.imag < 0 else -1
    m = model(f.grid.energies)
    rest = f.samples - m
    return _fft_hilbert(rest * _taper(len(rest))) - 1j * side * m, rest


def hilbert_transform(f: WaveFunction) -> WaveFunction:
    """Principal-value Hilbert transform ``H[f](x) = (1/pi) pv int f(s)/(x-s) ds``.

    The slowly decaying part of ``f`` is captured by a fitted Hardy tail
    model whose transform is exact; the remainder is transformed by a
    zero-padded (factor 4) FFT under a raised-cosine taper on the outer 10%
    of the window.  With this sign convention ``H[f] = -i f`` for upper
    Hardy ``f`` and ``H[cos] = sin``.

    Raises
    ------
    GridError
        If the grid is not uniform.
    ResolutionError
        If the grid has fewer than 16 points.
    """
    _require_uniform(f)
    out, _ = _hilbert_samples(f, fit_tail_model(f, HalfPlane.UPPER))
    return WaveFunction(f.grid, out)


def _edge_warnings(f: WaveFunction) -> tuple[str, ...]:
    peak = np.max(np.abs(f.samples))
    edge = max(abs(f.samples[0]), abs(f.samples[-1]))
    if peak > 0 and edge > EDGE_DECAY * peak:
        return (
            f"slow decay at grid edge (|f(edge)|/max|f| = {edge / peak:.3g} > {EDGE_DECAY:g}); "
            "asymptotic tail model used",
        )
    return ()


def hardy_membership(f: WaveFunction, hp: HalfPlane | str = HalfPlane.UPPER,
                     tol: float = DEFAULT_TOL) -> HardyReport:
    """Decide numerically whether ``f`` is a Hardy function for ``hp``.

    Two independent criteria must both hold within ``tol``:

    * Titchmarsh: ``Im f = +H[Re f]`` (upper) or ``-H[Re f]`` (lower); the
      residual is the relative L2 mismatch.
    * Paley-Wiener: the fraction of ``|F(t)|^2`` mass on ``t < 0`` (upper)
      or ``t > 0`` (lower).
    """
    hp = HalfPlane.parse(hp)
    if not tol > 0:
        raise ConfigError(f"tolerance must be positive, got {tol!r}")
    h = _require_uniform(f)
    w = f.grid.weights
    total = float(np.sum(w * np.abs(f.samples) ** 2))
    if total == 0.0:
        return HardyReport(True, 0.0, 0.0, tol, hp)

    model = fit_tail_model(f, hp)
    hf, rest = _hilbert_samples(f, model)
    mismatch = f.samples.imag - hp.sign * hf.real
    residual = math.sqrt(float(np.sum(w * mismatch**2)) / total)

    # The model's transform vanishes on the forbidden side, so only the
    # remainder can leak there.
    n = f.grid.n
    size = PAD_FACTOR * n
    spec = np.fft.fft(rest * _taper(n), size)
    t = np.fft.fftfreq(size, d=h)
    bad = t < 0 if hp is HalfPlane.UPPER else t > 0
    leakage = float(np.sum(np.abs(spec[bad]) ** 2) / size) * h / total

    ok = residual <= tol and leakage <= tol
    return HardyReport(ok, residual, leakage, tol, hp, _edge_warnings(f))


def analytic_continue(f: WaveFunction, hp: HalfPlane | str, z: complex,
                      derivative: int = 0, *, tol: float = DEFAULT_TOL,
                      check: bool = True) -> complex:
    """Continue a Hardy function off the real axis by Cauchy's integral.

    ``f(z) = +-(1/2 pi i) int f(E)/(E - z) dE`` with ``+`` for the upper
    and ``-`` for the lower half-plane.  ``derivative=k`` returns the k-th
    derivative.  The fitted tail model is continued exactly, so slowly
    decaying rational functions are not truncated at the window edges.
    """
    hp = HalfPlane.parse(hp)
    z = complex(z)
    h = _require_uniform(f)
    if derivative < 0:
        raise ConfigError("derivative order must be non-negative")
    if hp.sign * z.imag <= 0:
        raise DomainError(f"z = {z} is not inside the {hp.value} half-plane")
    if abs(z.imag) <= h:
        raise DomainError(f"|Im z| = {abs(z.imag):g} is within one grid spacing ({h:g}) of the axis")
    if check:
        report = hardy_membership(f, hp, tol)
        if not report.is_hardy:
            raise NotHardyError(
                f"function is not {hp.value}-Hardy (residual {report.titchmarsh_residual:.3g}, "
                f"leakage {report.wrong_side_leakage:.3g})"
            )
    model = fit_tail_model(f, hp)
    e = f.grid.energies
    rest = f.samples - model(e)
    kernel = (e - z) ** (-(derivative + 1))
    integral = np.sum(f.grid.weights * rest * kernel)
    cauchy = hp.sign * math.factorial(derivative) * integral / (2j * math.pi)
    return complex(cauchy + model(z, derivative))


def basis_synthesize(samples, grid: EnergyGrid) -> WaveFunction:
    """Vector with the given energy wave function ``<E|f>``.

    In the discretised representation a vector is its wave function; inner
    products carry the grid's trapezoid weights.
    """
    arr = np.asarray(samples, dtype=complex)
    if arr.shape != (grid.n,):
        raise ShapeError(f"expected {grid.n} samples, got shape {arr.shape}")
    return WaveFunction(grid, arr)


def basis_project(f: WaveFunction) -> list[complex]:
    """Wave-function values ``<E_i|f>`` at the grid points."""
    return [complex(x) for x in f.samples]
