"""Symmetric logarithmic derivative, quantum Fisher information and the optimal axis."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spin_algebra import SpinLength, build_spin_matrices, rotation_y
from .thermal_state import ParamPoint, ThermalSpinState


class UnidentifiableError(ValueError):
    """Both theta_dot and delta_dot vanish: nothing depends on lambda."""


@dataclass(frozen=True)
class QfiReport:
    H: float
    h_C: float
    h_Q: float
    phi_opt: float
    twoS: int

    @property
    def hC_norm(self) -> float:
        """h_C / [S(S+1)]; equals 1/3 at delta = 0."""
        S = self.twoS / 2
        return self.h_C / (S * (S + 1))

    @property
    def hQ_norm(self) -> float:
        """h_Q / (2S); tends to 1 at low temperature."""
        return self.h_Q / self.twoS


def field_frame_operators(s: SpinLength, theta: float):
    """S_X, S_Y, S_Z of the field frame expressed in the lab basis."""
    sx, sy, sz = build_spin_matrices(s)
    u = rotation_y(s, theta)
    return u @ sx @ u.T, sy.copy(), u @ sz @ u.T


def _check_delta(state: ThermalSpinState, point: ParamPoint):
    if abs(state.delta - point.delta) > 1e-12 * max(1.0, abs(point.delta)):
        raise ValueError(
            f"state delta {state.delta} does not match point delta {point.delta}"
        )


def sld_operator(state: ThermalSpinState, point: ParamPoint) -> np.ndarray:
    """L = delta_dot (<S_Z> - S_Z) - 2 theta_dot tanh(delta/2) S_X in the lab basis.

    The identity term keeps Tr(rho L) = 0; it does not change the optimal observable.
    """
    _check_delta(state, point)
    SX, _, SZ = field_frame_operators(state.s, point.theta)
    eye = np.eye(state.s.dim)
    return point.delta_dot * (state.mean_SZ * eye - SZ) - 2 * point.theta_dot * np.tanh(
        point.delta / 2
    ) * SX


def optimal_angle(point: ParamPoint) -> float:
    """Offset of the optimal measurement axis from the field axis, in (-pi/2, pi/2].

    Solves delta_dot tan(phi) = 2 theta_dot tanh(delta/2); the result does not
    depend on the spin length.
    """
    if not point.identifiable:
        raise UnidentifiableError("theta_dot and delta_dot are both zero")
    phi = np.arctan2(2 * point.theta_dot * np.tanh(point.delta / 2), point.delta_dot)
    return fold_axis_angle(phi)


def fold_axis_angle(phi: float) -> float:
    """Reduce an axis angle to (-pi/2, pi/2]; S_O and -S_O are the same measurement."""
    folded = phi - np.pi * np.ceil(phi / np.pi - 0.5)
    if folded <= -np.pi / 2:
        folded += np.pi
    return float(folded)


def qfi(state: ThermalSpinState, point: ParamPoint) -> QfiReport:
    _check_delta(state, point)
    h_c = state.var_SZ
    h_q = 4 * state.mean_SX2 * np.tanh(point.delta / 2) ** 2
    H = h_c * point.delta_dot**2 + h_q * point.theta_dot**2
    phi = optimal_angle(point) if point.identifiable else float("nan")
    return QfiReport(H=float(H), h_C=float(h_c), h_Q=float(h_q), phi_opt=phi, twoS=state.s.twoS)


def _check_m(s: SpinLength, m_z: float) -> float:
    two_m = 2 * m_z
    if abs(two_m - round(two_m)) > 1e-12 or (round(two_m) - s.twoS) % 2:
        raise ValueError(f"M_Z={m_z} is not a valid projection for {s}")
    if abs(m_z) > s.S:
        raise ValueError(f"M_Z={m_z} out of range for {s}")
    return round(two_m) / 2


def pure_state_qfi(s: SpinLength, m_z: float, theta_dot: float) -> float:
    """QFI of the eigenstate |M_Z>: 2 theta_dot^2 [S(S+1) - M_Z^2]."""
    m = _check_m(s, m_z)
    return 2 * theta_dot**2 * (s.S * (s.S + 1) - m**2)
