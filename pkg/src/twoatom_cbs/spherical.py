"""Spherical tensor helpers and the atomic level scheme.

Convention: ``e_{+1} = -(x + i y)/sqrt(2)``, ``e_0 = z``,
``e_{-1} = (x - i y)/sqrt(2)``, so that ``conj(e_q) = (-1)**q e_{-q}``.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

_SQRT2 = np.sqrt(2.0)

#: Cartesian components of the spherical unit vectors, keyed by q.
SPHERICAL_UNIT = {
    -1: np.array([1.0, -1.0j, 0.0]) / _SQRT2,
    0: np.array([0.0, 0.0, 1.0], dtype=complex),
    +1: -np.array([1.0, 1.0j, 0.0]) / _SQRT2,
}


class Level(IntEnum):
    """Sublevels of the J=0 -> J=1 transition, numbered as in the level scheme."""

    GROUND = 1
    EXCITED_MINUS = 2
    EXCITED_ZERO = 3
    EXCITED_PLUS = 4

    @property
    def m(self):
        """Magnetic quantum number; ``None`` for the J=0 ground state."""
        return {1: None, 2: -1, 3: 0, 4: +1}[int(self)]

    @property
    def is_excited(self) -> bool:
        return self is not Level.GROUND


@dataclass(frozen=True)
class SphericalVector:
    """Complex 3-vector stored by its spherical components ``sum_q c_q e_q``."""

    minus: complex = 0.0
    zero: complex = 0.0
    plus: complex = 0.0

    def __getitem__(self, q: int) -> complex:
        return {-1: self.minus, 0: self.zero, 1: self.plus}[q]

    @classmethod
    def unit(cls, q: int) -> "SphericalVector":
        return cls(**{{-1: "minus", 0: "zero", 1: "plus"}[q]: 1.0})

    @classmethod
    def from_cartesian(cls, v) -> "SphericalVector":
        v = np.asarray(v, dtype=complex)
        # c_q = conj(e_q) . v since the basis is orthonormal under the Hermitian product
        return cls(*(complex(np.vdot(SPHERICAL_UNIT[q], v)) for q in (-1, 0, 1)))

    def to_cartesian(self) -> np.ndarray:
        return sum(self[q] * SPHERICAL_UNIT[q] for q in (-1, 0, 1))

    def dot(self, other: "SphericalVector") -> complex:
        """Bilinear (non-conjugating) scalar product, ``a . b``."""
        # e_q . e_q' = (-1)**q delta_{q,-q'}
        return complex(sum((-1) ** q * self[q] * other[-q] for q in (-1, 0, 1)))

    def conj(self) -> "SphericalVector":
        # conj(sum c_q e_q) = sum conj(c_q) (-1)**q e_{-q}
        return SphericalVector(
            minus=-np.conj(self.plus), zero=np.conj(self.zero), plus=-np.conj(self.minus)
        )

    def norm(self) -> float:
        return float(np.linalg.norm(self.to_cartesian()))


def transverse_projector(n_hat) -> np.ndarray:
    """Cartesian projector ``1 - n n`` onto the plane orthogonal to ``n_hat``."""
    n = np.asarray(n_hat, dtype=float)
    return np.eye(3) - np.outer(n, n)
