"""Unitary S-matrix models built from Blaschke-type pole factors.

A model is ``S(z) = b(z) * prod_j ((z - conj(z_j)) / (z - z_j)) ** r_j`` with
resonance poles ``z_j = E_j - i Gamma_j / 2`` of order ``r_j``.  Each factor
has modulus one on the real axis, so the model is unitary there exactly; the
closed form plays the role of the second-sheet continuation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, ContourOverlapError, PoleEvaluationError
from .hardy import Rational

__all__ = [
    "PoleSpec",
    "SMatrixModel",
    "evaluate",
    "contour_coefficient",
    "laurent_coefficient",
    "pole_residues",
    "load_model",
    "save_model",
]

CONTOUR_NODES = 512
POLE_EPS = 1e-12


@dataclass(frozen=True)
class PoleSpec:
    """Resonance pole at ``e_r - i*gamma/2`` of integer order ``order``."""

    e_r: float
    gamma: float
    order: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.e_r) and math.isfinite(self.gamma)):
            raise ConfigError("pole parameters must be finite")
        if not self.gamma > 0:
            raise ConfigError(f"width gamma must be positive, got {self.gamma}")
        if int(self.order) != self.order or self.order < 1:
            raise ConfigError(f"pole order must be an integer >= 1, got {self.order}")
        object.__setattr__(self, "order", int(self.order))

    @property
    def position(self) -> complex:
        return complex(self.e_r, -self.gamma / 2)

    @property
    def lifetime(self) -> float:
        return 1.0 / self.gamma

    def to_dict(self) -> dict:
        return {"e_r": self.e_r, "gamma": self.gamma, "order": self.order}

    @classmethod
    def from_dict(cls, d: dict) -> "PoleSpec":
        try:
            return cls(float(d["e_r"]), float(d["gamma"]), int(d.get("order", 1)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed pole spec {d!r}") from exc


@dataclass(frozen=True)
class SMatrixModel:
    poles: tuple[PoleSpec, ...] = ()
    background: Rational | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "poles", tuple(self.poles))
        bg = self.background
        if bg is None:
            return
        if np.any(bg.poles.imag <= 0):
            raise ConfigError("background may only have singularities in the upper half-plane")
        x = np.linspace(-50.0, 50.0, 1001)
        if np.max(np.abs(np.abs(bg(x)) - 1.0)) > 1e-10:
            raise ConfigError("background must have unit modulus on the real axis")

    def __call__(self, z):
        return evaluate(self, z)

    def to_dict(self) -> dict:
        out = {"poles": [p.to_dict() for p in self.poles]}
        if self.background is not None:
            out["background"] = self.background.to_dict()
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "SMatrixModel":
        if not isinstance(d, dict):
            raise ConfigError("model must be a JSON object")
        poles = [PoleSpec.from_dict(p) for p in d.get("poles", [])]
        bg = d.get("background")
        return cls(tuple(poles), Rational.from_dict(bg) if bg else None)


def evaluate(model: SMatrixModel, z):
    """``S(z)`` for scalar or array ``z``."""
    z_arr = np.asarray(z, dtype=complex)
    out = np.ones_like(z_arr)
    for p in model.poles:
        zr = p.position
        dist = np.abs(z_arr - zr)
        if np.any(dist <= POLE_EPS):
            raise PoleEvaluationError(f"S evaluated at its pole {zr}")
        out = out * ((z_arr - zr.conjugate()) / (z_arr - zr)) ** p.order
    if model.background is not None:
        bg = model.background
        den = np.polynomial.polynomial.polyval(z_arr, bg.den)
        if np.any(np.abs(den) <= POLE_EPS):
            raise PoleEvaluationError("S evaluated at a background singularity")
        out = out * bg(z_arr)
    return out if out.ndim else complex(out)


def _singularities(model: SMatrixModel) -> list[complex]:
    pts = [p.position for p in model.poles]
    if model.background is not None:
        pts.extend(complex(x) for x in model.background.poles)
    return pts


def contour_coefficient(model: SMatrixModel, center: complex, radius: float,
                        power: int, nodes: int = CONTOUR_NODES) -> complex:
    """Laurent coefficient ``a_power`` of ``S`` about ``center``.

    ``a_n = (1/2 pi i) oint S(z) (z - center)^(-n-1) dz`` on a circle of the
    given radius, by the trapezoid rule (spectrally accurate on circles).
    """
    theta = 2 * np.pi * np.arange(nodes) / nodes
    u = radius * np.exp(1j * theta)
    vals = evaluate(model, center + u)
    return complex(np.mean(vals * u ** (-power)))


def laurent_coefficient(model: SMatrixModel, pole: PoleSpec, power: int,
                        radius: float | None = None, nodes: int = CONTOUR_NODES) -> complex:
    radius = pole.gamma / 4 if radius is None else radius
    zr = pole.position
    for s in _singularities(model):
        if s == zr:
            continue
        if abs(abs(s - zr) - radius) < 3 * radius:
            raise ContourOverlapError(
                f"singularity at {s} lies within {3 * radius:g} of the contour around {zr}"
            )
    return contour_coefficient(model, zr, radius, power, nodes)


def pole_residues(model: SMatrixModel, pole: PoleSpec, radius: float | None = None,
                  nodes: int = CONTOUR_NODES) -> list[complex]:
    """Principal-part coefficients ``[a_-1, ..., a_-r]`` of ``S`` at ``pole``."""
    if pole not in model.poles:
        raise ConfigError(f"{pole} is not a pole of the model")
    return [laurent_coefficient(model, pole, -k, radius, nodes) for k in range(1, pole.order + 1)]


def load_model(path) -> SMatrixModel:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return SMatrixModel.from_dict(data)


def save_model(model: SMatrixModel, path) -> None:
    Path(path).write_text(json.dumps(model.to_dict(), indent=2, sort_keys=True) + "\n")
