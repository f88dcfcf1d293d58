"""Causal semigroup evolution of Gamow-Jordan states and the unitary group.

Semigroup entry points (anything acting on Gamow-Jordan kets, pole-term
state operators or Lippmann-Schwinger functionals) accept ``t >= 0`` only
and raise :class:`~gamowkit.errors.CausalityError` otherwise.
:func:`unitary_evolve` is the Hilbert-space group and takes any real ``t``.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CausalityError, NotHardyError, ShapeError
from .hardy import DEFAULT_TOL, HalfPlane, WaveFunction, hardy_membership
from .jordan import (
    CompositeBasis,
    HamiltonianMatrix,
    JordanKetCoeffs,
    StateOperator,
    assemble_hamiltonian,
    build_W_PT,
)
from .oracles import expm_series, two_sided_evolution
from .smatrix import PoleSpec

__all__ = [
    "EvolutionReport",
    "UNDERFLOW_EXPONENT",
    "ket_propagator",
    "bra_propagator",
    "evolve_jordan_ket",
    "evolve_jordan_bra",
    "evolve_state_operator",
    "evolve_W_PT",
    "unitary_evolve",
    "ls_ket_action",
    "semigroup_composition_check",
    "run_evolution",
]

#: decay exponents Gamma*t beyond this are flushed to an exact zero
UNDERFLOW_EXPONENT = 700.0


def _check_time(t: float) -> float:
    t = float(t)
    if not t >= 0:
        raise CausalityError(t)
    return t


def _decays_out(pole: PoleSpec, t: float) -> bool:
    return pole.gamma * t > UNDERFLOW_EXPONENT


def ket_propagator(pole: PoleSpec, t: float) -> np.ndarray:
    """Matrix of ``exp(-i H t)`` on the ket coefficients of one Jordan block.

    Entry ``[j, k] = exp(-i z t) (-i Gamma t)^(k-j) / (k-j)!`` for ``k >= j``,
    i.e. ``|k> -> exp(-i z t) sum_nu (Gamma^nu / nu!) (-i t)^nu |k - nu>``.
    """
    t = _check_time(t)
    r = pole.order
    out = np.zeros((r, r), dtype=complex)
    if _decays_out(pole, t):
        return out
    phase = np.exp(-1j * pole.position * t)
    x = -1j * pole.gamma * t
    for nu in range(r):
        coef = phase * x**nu / math.factorial(nu)
        out += coef * np.eye(r, k=nu)
    return out


def bra_propagator(pole: PoleSpec, t: float) -> np.ndarray:
    """Matrix ``R`` with ``<^-z|^(l) exp(iHt) = sum_m R[l, m] <^-z|^(m)``.

    ``R[l, m] = exp(i z* t) (i Gamma t)^(l-m) / (l-m)!`` for ``l >= m``.  It
    equals the conjugate transpose of :func:`ket_propagator`.
    """
    t = _check_time(t)
    r = pole.order
    out = np.zeros((r, r), dtype=complex)
    if _decays_out(pole, t):
        return out
    phase = np.exp(1j * pole.position.conjugate() * t)
    x = 1j * pole.gamma * t
    for nu in range(r):
        out += phase * x**nu / math.factorial(nu) * np.eye(r, k=-nu)
    return out


def evolve_jordan_ket(s: JordanKetCoeffs, t: float) -> JordanKetCoeffs:
    """Semigroup evolution ``exp(-i H^x t) F`` of a Gamow-Jordan ket, ``t >= 0``."""
    return JordanKetCoeffs(s.pole, ket_propagator(s.pole, t) @ s.coeffs)


def evolve_jordan_bra(s: JordanKetCoeffs, t: float) -> JordanKetCoeffs:
    """Conjugate path: coefficients of ``(sum_l c_l <^-z|^(l)) exp(iHt)``, ``t >= 0``."""
    return JordanKetCoeffs(s.pole, s.coeffs @ bra_propagator(s.pole, t))


def _propagators(basis: CompositeBasis, t: float):
    blocks = [(basis.block_slice(j), ket_propagator(p, t), bra_propagator(p, t))
              for j, p in enumerate(basis.blocks)]
    if basis.grid is not None:
        e = basis.grid.energies
        blocks.append((basis.continuum_slice, np.exp(-1j * e * t), np.exp(1j * e * t)))
    return blocks


def evolve_state_operator(W: StateOperator, H: HamiltonianMatrix, t: float) -> StateOperator:
    """``W(t) = exp(-i H^x t) W exp(i H t)`` for ``t >= 0``.

    The ket side uses the closed Jordan-chain propagator and the bra side its
    conjugate-path counterpart; continuum coordinates pick up diagonal phases.
    """
    t = _check_time(t)
    if not W.basis.same_as(H.basis):
        raise ShapeError("state operator and Hamiltonian live on different bases")
    blocks = _propagators(W.basis, t)
    m = W.matrix
    out = np.zeros_like(m)
    for si, left, _ in blocks:
        for sj, _, right in blocks:
            sub = m[si, sj]
            if not np.any(sub):
                continue
            sub = left[:, None] * sub if left.ndim == 1 else left @ sub
            sub = sub * right[None, :] if right.ndim == 1 else sub @ right
            out[si, sj] = sub
    return StateOperator(W.basis, out)


def evolve_W_PT(pole: PoleSpec, t: float) -> StateOperator:
    """Time-evolved pole-term operator; equals ``exp(-Gamma t) W_PT``."""
    w = build_W_PT(pole)
    return evolve_state_operator(w, assemble_hamiltonian(w.basis), t)


def unitary_evolve(f: WaveFunction, t: float) -> WaveFunction:
    """Schroedinger-picture group evolution ``exp(-i E t) f(E)``, any real ``t``."""
    return WaveFunction(f.grid, f.samples * np.exp(-1j * f.grid.energies * float(t)))


def ls_ket_action(psi: WaveFunction, energy: float, t: float, *,
                  tol: float = DEFAULT_TOL, check: bool = True) -> complex:
    """``<psi^-(t)|E^-> = exp(-i E t) conj(psi(E))``, defined for ``t >= 0`` only.

    ``psi`` must be upper Hardy; a plain Schwartz-space wave function defines
    an ordinary Dirac ket, whose evolution is the two-sided group instead.
    """
    t = _check_time(t)
    if check:
        report = hardy_membership(psi, HalfPlane.UPPER, tol)
        if not report.is_hardy:
            raise NotHardyError(
                "Lippmann-Schwinger action needs an upper-Hardy observable wave function"
            )
    value = complex(np.asarray(psi(energy)))
    return complex(np.exp(-1j * energy * t) * value.conjugate())


def semigroup_composition_check(s: JordanKetCoeffs, t1: float, t2: float) -> float:
    """``||U(t2) U(t1) s - U(t1 + t2) s|| / ||s||``."""
    _check_time(t1)
    _check_time(t2)
    nrm = s.norm()
    if nrm == 0:
        return 0.0
    two_step = evolve_jordan_ket(evolve_jordan_ket(s, t1), t2).coeffs
    one_step = evolve_jordan_ket(s, t1 + t2).coeffs
    return float(np.linalg.norm(two_step - one_step) / nrm)


@dataclass(frozen=True)
class EvolutionReport:
    input_hash: str
    t: float
    mode: str
    output: object
    diagnostics: dict = field(default_factory=dict)


def _digest(arr: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(arr, dtype=complex).tobytes()).hexdigest()


def run_evolution(obj, t: float, *, H: HamiltonianMatrix | None = None,
                  oracle: bool = False) -> EvolutionReport:
    """Evolve a ket, state operator or wave function and collect diagnostics.

    With ``oracle=True`` the closed form is compared against a dense
    matrix exponential (pole blocks only, dimension <= 64).
    """
    diag: dict = {}
    if isinstance(obj, JordanKetCoeffs):
        out = evolve_jordan_ket(obj, t)
        mode = "semigroup_ket"
        before, after = obj.norm(), out.norm()
        diag["underflow"] = _decays_out(obj.pole, float(t))
        if oracle:
            gen = assemble_hamiltonian(CompositeBasis((obj.pole,))).ket_action
            ref = expm_series(-1j * float(t) * gen) @ obj.coeffs
            diag["residual"] = float(np.linalg.norm(out.coeffs - ref) / max(before, 1e-300))
        digest = _digest(obj.coeffs)
    elif isinstance(obj, StateOperator):
        H = H if H is not None else assemble_hamiltonian(obj.basis)
        out = evolve_state_operator(obj, H, t)
        mode = "semigroup_operator"
        before = float(np.linalg.norm(obj.matrix))
        after = float(np.linalg.norm(out.matrix))
        diag["underflow"] = any(_decays_out(p, float(t)) for p in obj.basis.blocks)
        if oracle:
            if obj.basis.grid is not None:
                raise ShapeError("oracle comparison is limited to pole-only bases")
            ref = two_sided_evolution(H.ket_action, obj.matrix, float(t))
            diag["residual"] = float(np.linalg.norm(out.matrix - ref) / max(before, 1e-300))
        digest = _digest(obj.matrix)
    elif isinstance(obj, WaveFunction):
        out = unitary_evolve(obj, t)
        mode = "unitary"
        before, after = obj.norm(), out.norm()
        digest = _digest(obj.samples)
    else:
        raise TypeError(f"cannot evolve {type(obj).__name__}")
    diag["norm_before"] = before
    diag["norm_after"] = after
    return EvolutionReport(digest, float(t), mode, out, diag)
