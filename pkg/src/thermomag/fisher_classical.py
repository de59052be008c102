"""Classical Fisher information of projective spin measurements.

A measurement axis is fixed in the lab.  It is specified relative to the field
axis at the true parameter value: polar angle ``theta + phi`` and azimuth
``gamma`` (``gamma = 0`` keeps the axis in the xz plane).  When lambda moves the
field, the axis stays put, so the in-plane overlaps depend only on ``phi``.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from .fisher_quantum import optimal_angle, pure_state_qfi, qfi
from .spin_algebra import (
    AxisVector,
    SpinLength,
    rotation_y,
    rotation_y_generator,
    rotation_z,
)
from .thermal_state import ParamPoint, ThermalSpinState

P_FLOOR = 1e-14
DP_NEGLIGIBLE = 1e-10


class DegenerateMeasurementError(ValueError):
    """The measurement carries no usable signal (zero variance or 0/0 ratio)."""


class FisherPathologyError(ArithmeticError):
    """An outcome has vanishing probability but non-vanishing derivative."""


@dataclass(frozen=True)
class MeasurementAxis:
    phi: float
    gamma: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.phi) and np.isfinite(self.gamma)):
            raise ValueError("axis angles must be finite")

    @property
    def in_plane(self) -> bool:
        return self.gamma == 0.0

    def lab_vector(self, theta: float) -> AxisVector:
        return AxisVector.from_angles(theta + self.phi, self.gamma)


@dataclass(frozen=True)
class CfiReport:
    F: float
    A_tt: float
    A_dd: float
    A_dt: float
    P: float


@dataclass(frozen=True)
class FisherReport:
    H: float
    h_C: float
    h_Q: float
    F: float
    A_tt: float
    A_dd: float
    A_dt: float
    P: float
    phi_opt: float

    def as_dict(self):
        return asdict(self)


@lru_cache(maxsize=4096)
def _in_plane_tables(twoS: int, phi: float):
    s = SpinLength(twoS)
    d = rotation_y(s, phi)
    dd = rotation_y_generator(s) @ d
    w = d * d
    # p depends on theta only through the relative angle phi = theta_axis - theta
    dw_dtheta = -2 * d * dd
    w.setflags(write=False)
    dw_dtheta.setflags(write=False)
    return w, dw_dtheta


def _general_tables(s: SpinLength, theta: float, axis: MeasurementAxis):
    alpha = theta + axis.phi
    o = rotation_y(s, -alpha) @ rotation_z(s, -axis.gamma) @ rotation_y(s, theta)
    do = o @ rotation_y_generator(s)
    return np.abs(o) ** 2, 2 * np.real(np.conj(o) * do)


def overlap_tables(s: SpinLength, theta: float, axis: MeasurementAxis):
    """|<M_O|M_Z>|^2 and its theta-derivative, rows M_O = S..-S, columns M_Z = S..-S."""
    if axis.in_plane:
        return _in_plane_tables(s.twoS, float(axis.phi))
    return _general_tables(s, theta, axis)


def outcome_probabilities(state: ThermalSpinState, theta: float, axis: MeasurementAxis):
    w, _ = overlap_tables(state.s, theta, axis)
    return w @ state.populations


def probability_derivatives(state: ThermalSpinState, theta: float, axis: MeasurementAxis):
    """Return (dp/dtheta, dp/ddelta) for the outcome distribution."""
    w, dw = overlap_tables(state.s, theta, axis)
    p = state.populations
    return dw @ p, w @ ((state.mean_SZ - state.m_values) * p)


def _fisher_terms(p, dp_t, dp_d):
    small = p < P_FLOOR
    if np.any(small):
        bad = small & ((np.abs(dp_t) >= DP_NEGLIGIBLE) | (np.abs(dp_d) >= DP_NEGLIGIBLE))
        if np.any(bad):
            k = int(np.flatnonzero(bad)[0])
            raise FisherPathologyError(
                f"outcome {k}: p={p[k]:.3e} below floor with dp/dtheta={dp_t[k]:.3e}, "
                f"dp/ddelta={dp_d[k]:.3e}"
            )
    keep = ~small
    p, dp_t, dp_d = p[keep], dp_t[keep], dp_d[keep]
    return (
        float(np.sum(dp_t**2 / p)),
        float(np.sum(dp_d**2 / p)),
        float(np.sum(dp_t * dp_d / p)),
    )


def cfi(state: ThermalSpinState, point: ParamPoint, axis: MeasurementAxis) -> CfiReport:
    p = outcome_probabilities(state, point.theta, axis)
    dp_t, dp_d = probability_derivatives(state, point.theta, axis)
    a_tt, a_dd, a_dt = _fisher_terms(p, dp_t, dp_d)
    td, dd = point.theta_dot, point.delta_dot
    F = a_tt * td**2 + a_dd * dd**2 + 2 * a_dt * td * dd
    try:
        P = ensemble_precision(state, point, axis)
    except DegenerateMeasurementError:
        P = float("nan")
    return CfiReport(F=F, A_tt=a_tt, A_dd=a_dd, A_dt=a_dt, P=P)


def _axis_cosines(theta: float, axis: MeasurementAxis):
    if axis.in_plane:
        return np.cos(axis.phi), np.sin(axis.phi)
    n_o = axis.lab_vector(theta).as_array()
    n_z = np.array([np.sin(theta), 0.0, np.cos(theta)])
    n_x = np.array([np.cos(theta), 0.0, -np.sin(theta)])
    return float(n_o @ n_z), float(n_o @ n_x)


def ensemble_precision(state: ThermalSpinState, point: ParamPoint, axis: MeasurementAxis) -> float:
    """|d<S_O>/dlambda|^2 / Var(S_O) from the thermal moments."""
    c_z, c_x = _axis_cosines(point.theta, axis)
    var_o = (1 - c_z**2) * state.mean_SX2 + c_z**2 * state.var_SZ
    if not var_o > 0:
        raise DegenerateMeasurementError("Var(S_O) = 0: eigenstate measured along its own axis")
    signal = point.theta_dot * c_x * state.mean_SZ - point.delta_dot * c_z * state.var_SZ
    return float(signal**2 / var_o)


def pure_state_cfi(
    s: SpinLength,
    m_z: float,
    theta_dot: float,
    axis_lab: AxisVector,
    n_X: AxisVector,
    n_Y: AxisVector,
) -> float:
    """CFI of S_O for the eigenstate |M_Z>, any measurement direction."""
    h = pure_state_qfi(s, m_z, theta_dot)
    ox, oy = axis_lab.dot(n_X), axis_lab.dot(n_Y)
    denom = ox**2 + oy**2
    if denom < 1e-24:
        raise DegenerateMeasurementError("measurement axis parallel to the field axis")
    return ox**2 / denom * h


def qubit_closed_form(point: ParamPoint, phi: float) -> float:
    """Fisher information (= ensemble precision) of a spin-1/2 along offset phi."""
    t = np.tanh(point.delta / 2)
    num = 2 * point.theta_dot * np.sin(phi) * t + point.delta_dot * np.cos(phi) * (1 - t**2)
    den = 4 * (np.sin(phi) ** 2 + np.cos(phi) ** 2 * (1 - t**2))
    return float(num**2 / den)


def fisher_report(state: ThermalSpinState, point: ParamPoint, axis: MeasurementAxis) -> FisherReport:
    q = qfi(state, point)
    c = cfi(state, point, axis)
    return FisherReport(
        H=q.H, h_C=q.h_C, h_Q=q.h_Q, F=c.F, A_tt=c.A_tt, A_dd=c.A_dd, A_dt=c.A_dt, P=c.P,
        phi_opt=q.phi_opt,
    )


def optimal_axis(point: ParamPoint) -> MeasurementAxis:
    return MeasurementAxis(optimal_angle(point))
