"""Gibbs state of a spin in a Zeeman field.

The field axis is tilted by ``theta`` from the lab z axis within the xz plane and
the populations are p_M = exp(-delta*M)/Z over the eigenstates |M_Z> of the
field-axis projection S_Z.  With delta > 0 the ground state is M_Z = -S; negative
delta describes a population-inverted spin.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spin_algebra import SpinLength, rotation_y

# Below this |delta| the coth expressions cancel catastrophically; use direct sums.
DELTA_SWITCH = 1e-2


@dataclass(frozen=True)
class ParamPoint:
    """Local estimation context: field angle, reduced gap and their lambda-derivatives."""

    theta: float
    delta: float
    theta_dot: float = 0.0
    delta_dot: float = 0.0

    def __post_init__(self):
        for name in ("theta", "delta", "theta_dot", "delta_dot"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def identifiable(self) -> bool:
        return self.theta_dot != 0.0 or self.delta_dot != 0.0


@dataclass(frozen=True)
class ThermalSpinState:
    s: SpinLength
    delta: float
    populations: np.ndarray = field(repr=False)
    mean_SZ: float
    mean_SZ2: float
    mean_SX2: float
    var_SZ: float

    @property
    def m_values(self) -> np.ndarray:
        return self.s.m_values


def boltzmann_populations(s: SpinLength, delta: float) -> np.ndarray:
    """Populations ordered M = S..-S, normalized without overflow."""
    if not np.isfinite(delta):
        raise ValueError(f"delta must be finite, got {delta!r}")
    expo = -delta * s.m_values
    w = np.exp(expo - expo.max())
    return w / w.sum()


def thermal_state(s: SpinLength, delta: float) -> ThermalSpinState:
    p = boltzmann_populations(s, delta)
    p.setflags(write=False)
    m = s.m_values
    mean = float(p @ m)
    mean2 = float(p @ m**2)
    var = float(p @ (m - mean) ** 2)
    return ThermalSpinState(
        s=s,
        delta=float(delta),
        populations=p,
        mean_SZ=mean,
        mean_SZ2=mean2,
        mean_SX2=0.5 * (s.S * (s.S + 1) - mean2),
        var_SZ=var,
    )


def closed_form_moments(s: SpinLength, delta: float):
    """<S_Z>, <S_Z^2>, <S_X^2> from the coth (Brillouin) expressions.

    Falls back to direct summation for |delta| <= DELTA_SWITCH.
    """
    S = s.S
    if abs(delta) <= DELTA_SWITCH:
        st = thermal_state(s, delta)
        return st.mean_SZ, st.mean_SZ2, st.mean_SX2

    def coth(a):
        return 1.0 / np.tanh(a * delta)

    mean = 0.5 * coth(0.5) - (S + 0.5) * coth(S + 0.5)
    mean2 = S * (S + 1) + coth(0.5) * mean
    return float(mean), float(mean2), float(0.5 * (S * (S + 1) - mean2))


def density_matrix(state: ThermalSpinState, theta: float) -> np.ndarray:
    """rho = U(theta) diag(p) U(theta)^T in the lab basis (real symmetric)."""
    u = rotation_y(state.s, theta)
    return (u * state.populations) @ u.T
