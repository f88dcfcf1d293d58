"""Gamow-Jordan bases, block Hamiltonians and pole-term state operators.

Coordinates
-----------
Block ``j`` of a :class:`CompositeBasis` holds the Gamow-Jordan vectors
``|z^->^(0) ... |z^->^(r-1)`` of one pole; the continuum block holds the grid
energies.  A ket ``F = sum_k c_k |z^->^(k)`` is stored by its coefficients
``c``.  The chain is ``H|k> = z|k> + Gamma|k-1>``, which makes the action of
``H`` on ket coefficients *upper* bidiagonal.  :attr:`HamiltonianMatrix.data`
stores the transposed (lower, Gamma on the subdiagonal) matrix, i.e. the
matrix acting on the column of amplitudes ``<psi|z^->^(k)``; use
:attr:`HamiltonianMatrix.ket_action` for kets.

Bras ``<^-z|^(k)`` pair bilinearly with block coordinates: the dyad
``|k><l|`` is the matrix unit ``e_k e_l^T``.  Since block coordinates are
real unit vectors this coincides with ``e_k e_l^dagger``.

Continuum entries of a state operator are kernel samples ``W(E_i, E_j)``;
traces carry the grid weights (see :func:`gamowkit.born.trace_probability`).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ShapeError
from .hardy import EnergyGrid
from .smatrix import PoleSpec

__all__ = [
    "JordanKetCoeffs",
    "CompositeBasis",
    "HamiltonianMatrix",
    "StateOperator",
    "assemble_hamiltonian",
    "gamow_ket",
    "verify_generalized_eigen",
    "build_W_n",
    "build_W_PT",
    "build_W_G",
    "jordan_block",
    "identity_operator",
    "embed_block_operator",
    "MAX_DIMENSION",
]

MAX_DIMENSION = 4096


@dataclass(frozen=True, eq=False)
class JordanKetCoeffs:
    pole: PoleSpec
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (self.pole.order,):
            raise ShapeError(f"need {self.pole.order} coefficients, got shape {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))


@dataclass(frozen=True, eq=False)
class CompositeBasis:
    """Jordan blocks (declaration order) followed by an optional continuum."""

    blocks: tuple[PoleSpec, ...] = ()
    grid: EnergyGrid | None = None

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))

    @property
    def pole_dimension(self) -> int:
        return sum(p.order for p in self.blocks)

    @property
    def dimension(self) -> int:
        return self.pole_dimension + (self.grid.n if self.grid is not None else 0)

    def block_slice(self, index: int) -> slice:
        start = sum(p.order for p in self.blocks[:index])
        return slice(start, start + self.blocks[index].order)

    @property
    def continuum_slice(self) -> slice:
        return slice(self.pole_dimension, self.dimension)

    def trace_weights(self) -> np.ndarray:
        """Per-coordinate measure: 1 on pole blocks, quadrature weights on the continuum."""
        d = np.ones(self.dimension)
        if self.grid is not None:
            d[self.continuum_slice] = self.grid.weights
        return d

    def same_as(self, other: "CompositeBasis") -> bool:
        if self.blocks != other.blocks:
            return False
        if (self.grid is None) != (other.grid is None):
            return False
        return self.grid is None or self.grid.same_as(other.grid)

    def to_dict(self) -> dict:
        return {
            "poles": [p.to_dict() for p in self.blocks],
            "grid": self.grid.to_dict() if self.grid is not None else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CompositeBasis":
        grid = EnergyGrid.from_dict(d["grid"]) if d.get("grid") else None
        return cls(tuple(PoleSpec.from_dict(p) for p in d.get("poles", [])), grid)


def _matrix_to_json(m: np.ndarray) -> list:
    return [[[float(x.real), float(x.imag)] for x in row] for row in m]


def _matrix_from_json(rows, dim: int) -> np.ndarray:
    if dim > MAX_DIMENSION:
        raise ShapeError(f"dimension {dim} exceeds the cap of {MAX_DIMENSION}")
    arr = np.asarray(rows, dtype=float)
    if arr.shape != (dim, dim, 2):
        raise ShapeError(f"matrix must be {dim}x{dim} of [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


@dataclass(frozen=True, eq=False)
class HamiltonianMatrix:
    basis: CompositeBasis
    data: np.ndarray

    def __post_init__(self):
        d = np.array(self.data, dtype=complex)
        n = self.basis.dimension
        if d.shape != (n, n):
            raise ShapeError(f"matrix shape {d.shape} does not match basis dimension {n}")
        d.setflags(write=False)
        object.__setattr__(self, "data", d)

    @property
    def ket_action(self) -> np.ndarray:
        """Matrix of ``H`` acting on ket coefficients (Gamma on the superdiagonal)."""
        return self.data.T

    def block(self, index: int) -> np.ndarray:
        s = self.basis.block_slice(index)
        return self.data[s, s]

    def to_dict(self) -> dict:
        return {"basis": self.basis.to_dict(), "matrix": _matrix_to_json(self.data)}

    @classmethod
    def from_dict(cls, d: dict) -> "HamiltonianMatrix":
        basis = CompositeBasis.from_dict(d["basis"])
        return cls(basis, _matrix_from_json(d["matrix"], basis.dimension))


@dataclass(frozen=True, eq=False)
class StateOperator:
    basis: CompositeBasis
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        n = self.basis.dimension
        if m.shape != (n, n):
            raise ShapeError(f"matrix shape {m.shape} does not match basis dimension {n}")
        if not np.all(np.isfinite(m)):
            raise ShapeError("state operator entries must be finite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def block_trace(self) -> complex:
        """Trace over the pole blocks only."""
        s = slice(0, self.basis.pole_dimension)
        return complex(np.trace(self.matrix[s, s]))

    def scaled(self, alpha: complex) -> "StateOperator":
        return StateOperator(self.basis, alpha * self.matrix)

    def to_dict(self) -> dict:
        return {"basis": self.basis.to_dict(), "matrix": _matrix_to_json(self.matrix)}

    @classmethod
    def from_dict(cls, d: dict) -> "StateOperator":
        basis = CompositeBasis.from_dict(d["basis"])
        return cls(basis, _matrix_from_json(d["matrix"], basis.dimension))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()) + "\n")

    @classmethod
    def load(cls, path) -> "StateOperator":
        return cls.from_dict(json.loads(Path(path).read_text()))


def jordan_block(pole: PoleSpec) -> np.ndarray:
    """``r x r`` block with ``z_R`` on the diagonal and Gamma below it."""
    r = pole.order
    return pole.position * np.eye(r, dtype=complex) + pole.gamma * np.eye(r, k=-1)


def assemble_hamiltonian(basis: CompositeBasis) -> HamiltonianMatrix:
    n = basis.dimension
    if n > MAX_DIMENSION:
        raise ShapeError(f"dimension {n} exceeds the cap of {MAX_DIMENSION}")
    data = np.zeros((n, n), dtype=complex)
    for j, pole in enumerate(basis.blocks):
        s = basis.block_slice(j)
        data[s, s] = jordan_block(pole)
    if basis.grid is not None:
        c = basis.continuum_slice
        data[c, c] = np.diag(basis.grid.energies)
    return HamiltonianMatrix(basis, data)


def gamow_ket(pole: PoleSpec) -> JordanKetCoeffs:
    """Normalised zeroth-order Gamow ket ``sqrt(2 pi Gamma) |z^->^(0)``."""
    c = np.zeros(pole.order, dtype=complex)
    c[0] = math.sqrt(2 * math.pi * pole.gamma)
    return JordanKetCoeffs(pole, c)


def verify_generalized_eigen(H: HamiltonianMatrix, pole: PoleSpec, k: int,
                             power: int | None = None) -> float:
    """``||(H - z_R)^(k+1) e_k||`` for the k-th chain vector of ``pole``.

    ``power`` overrides the exponent (used to show the degree is exactly
    ``k + 1``).
    """
    if not 0 <= k < pole.order:
        raise IndexError(f"chain index {k} out of range for order {pole.order}")
    try:
        index = H.basis.blocks.index(pole)
    except ValueError:
        raise ShapeError(f"{pole} is not a block of this Hamiltonian") from None
    s = H.basis.block_slice(index)
    shifted = H.ket_action - pole.position * np.eye(H.basis.dimension)
    v = np.zeros(H.basis.dimension, dtype=complex)
    v[s.start + k] = 1.0
    for _ in range(k + 1 if power is None else power):
        v = shifted @ v
    return float(np.linalg.norm(v))


def _pole_basis(pole: PoleSpec) -> CompositeBasis:
    return CompositeBasis((pole,))


def build_W_n(pole: PoleSpec, n: int) -> StateOperator:
    """``W^(n) = sum_{k=0}^n |z^->^(k) <^-z|^(n-k)`` on the pole's block."""
    if not 0 <= n < pole.order:
        raise IndexError(f"n = {n} out of range for order {pole.order}")
    r = pole.order
    m = np.zeros((r, r), dtype=complex)
    for k in range(n + 1):
        m[k, n - k] = 1.0
    return StateOperator(_pole_basis(pole), m)


def build_W_PT(pole: PoleSpec) -> StateOperator:
    """Pole-term state operator ``2 pi Gamma sum_n C(r, n+1) (-i)^n W^(n)``."""
    r = pole.order
    m = np.zeros((r, r), dtype=complex)
    for n in range(r):
        m = m + math.comb(r, n + 1) * (-1j) ** n * build_W_n(pole, n).matrix
    return StateOperator(_pole_basis(pole), 2 * math.pi * pole.gamma * m)


def build_W_G(pole: PoleSpec) -> StateOperator:
    """Gamow dyad ``|psi^G><psi^G|`` (equal to ``W_PT`` for a first-order pole)."""
    c = gamow_ket(pole).coeffs
    return StateOperator(_pole_basis(pole), np.outer(c, c))


def identity_operator(basis: CompositeBasis) -> StateOperator:
    """Identity in kernel form: ``1`` on pole blocks, ``delta_ij / w_i`` on the continuum."""
    d = np.ones(basis.dimension, dtype=complex)
    if basis.grid is not None:
        d[basis.continuum_slice] = 1.0 / basis.grid.weights
    return StateOperator(basis, np.diag(d))


def embed_block_operator(op: StateOperator, basis: CompositeBasis,
                         block: int = 0) -> StateOperator:
    """Place a single-pole operator into block ``block`` of a larger basis."""
    if op.basis.grid is not None or len(op.basis.blocks) != 1:
        raise ShapeError("only single-pole block operators can be embedded")
    if basis.blocks[block] != op.basis.blocks[0]:
        raise ShapeError("block pole does not match the operator's pole")
    m = np.zeros((basis.dimension, basis.dimension), dtype=complex)
    s = basis.block_slice(block)
    m[s, s] = op.matrix
    return StateOperator(basis, m)
