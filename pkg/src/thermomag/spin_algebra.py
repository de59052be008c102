"""Spin operators, y-rotations and axis projections for arbitrary spin length.

Matrices are dense and written in the S_z eigenbasis ordered M = S, S-1, ..., -S.
Units: hbar = 1, so spin operators are dimensionless.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_TWO_S = 100  # S <= 50; dense matrices only


@dataclass(frozen=True)
class SpinLength:
    """Spin length stored as the integer 2S."""

    twoS: int

    def __post_init__(self):
        if isinstance(self.twoS, bool) or int(self.twoS) != self.twoS:
            raise ValueError(f"twoS must be an integer, got {self.twoS!r}")
        object.__setattr__(self, "twoS", int(self.twoS))
        if self.twoS < 1:
            raise ValueError(f"twoS must be >= 1, got {self.twoS}")
        if self.twoS > MAX_TWO_S:
            raise ValueError(
                f"twoS={self.twoS} exceeds the dense-matrix envelope (twoS <= {MAX_TWO_S})"
            )

    @classmethod
    def from_spin(cls, S: float) -> "SpinLength":
        two = 2 * S
        if abs(two - round(two)) > 1e-12:
            raise ValueError(f"S must be a half-integer, got {S}")
        return cls(int(round(two)))

    @property
    def S(self) -> float:
        return self.twoS / 2

    @property
    def dim(self) -> int:
        return self.twoS + 1

    @property
    def m_values(self) -> np.ndarray:
        """Magnetic quantum numbers S, S-1, ..., -S."""
        return _m_values(self.twoS)

    def __str__(self):
        return f"S={self.twoS}/2" if self.twoS % 2 else f"S={self.twoS // 2}"


@dataclass(frozen=True)
class AxisVector:
    x: float
    y: float
    z: float

    def __post_init__(self):
        norm = np.sqrt(self.x**2 + self.y**2 + self.z**2)
        if not np.isfinite(norm) or abs(norm - 1.0) > 1e-12:
            raise ValueError(f"axis must have unit norm, |n| = {norm!r}")

    @classmethod
    def from_angles(cls, polar: float, azimuth: float = 0.0) -> "AxisVector":
        """Unit vector with the given polar angle from z and azimuth about z."""
        st = np.sin(polar)
        return cls(st * np.cos(azimuth), st * np.sin(azimuth), np.cos(polar))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def dot(self, other: "AxisVector") -> float:
        return float(self.as_array() @ other.as_array())


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@lru_cache(maxsize=None)
def _m_values(twoS: int) -> np.ndarray:
    return _frozen(twoS / 2 - np.arange(twoS + 1, dtype=float))


@lru_cache(maxsize=None)
def _spin_matrices(twoS: int):
    S = twoS / 2
    m = _m_values(twoS)
    # <M+1|S_+|M> sits on the first superdiagonal in the S..-S ordering
    raising = np.diag(np.sqrt(S * (S + 1) - m[1:] * (m[1:] + 1)), k=1)
    sx = (raising + raising.T) / 2
    sy = (raising - raising.T) / 2j
    sz = np.diag(m)
    return tuple(_frozen(op.astype(complex)) for op in (sx, sy, sz))


def build_spin_matrices(s: SpinLength):
    """Return (S_x, S_y, S_z) as read-only complex arrays."""
    return _spin_matrices(s.twoS)


@lru_cache(maxsize=None)
def _sy_eig(twoS: int):
    # -i S_y is real antisymmetric; diagonalize the Hermitian S_y once per spin length
    w, v = np.linalg.eigh(_spin_matrices(twoS)[1])
    return _frozen(w), _frozen(v)


def rotation_y(s: SpinLength, angle: float) -> np.ndarray:
    """Wigner small-d matrix exp(-i S_y angle) (real, unitary)."""
    if not np.isfinite(angle):
        raise ValueError(f"rotation angle must be finite, got {angle!r}")
    w, v = _sy_eig(s.twoS)
    u = (v * np.exp(-1j * w * angle)) @ v.conj().T
    return u.real.copy()


def rotation_y_generator(s: SpinLength) -> np.ndarray:
    """Real antisymmetric matrix -i S_y, so d/dangle rotation_y = (-i S_y) rotation_y."""
    return (-1j * _spin_matrices(s.twoS)[1]).real.copy()


def rotation_z(s: SpinLength, angle: float) -> np.ndarray:
    return np.diag(np.exp(-1j * angle * s.m_values))


def axis_projection(sx, sy, sz, n: AxisVector) -> np.ndarray:
    """Spin projection n . S."""
    if not isinstance(n, AxisVector):
        n = AxisVector(*n)
    return n.x * sx + n.y * sy + n.z * sz
