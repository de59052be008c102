"""Brute-force reference implementations of the Fisher quantities.

Nothing here uses the closed-form modules: density matrices come from a matrix
exponential, derivatives from finite differences, the SLD from solving the
Lyapunov-type equation in the eigenbasis of rho, and CFI probabilities from a
dense eigensolve of S_O.  Slow by design; used by tests and ``thermomag verify``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .spin_algebra import AxisVector, SpinLength, axis_projection, build_spin_matrices

P_FLOOR = 1e-14
DP_NEGLIGIBLE = 1e-10
# fourth-order central stencil: (-f(2h) + 8 f(h) - 8 f(-h) + f(-2h)) / 12h
_STENCIL = ((2, -1.0), (1, 8.0), (-1, -8.0), (-2, 1.0))


@dataclass(frozen=True)
class OracleReport:
    H_oracle: float
    F_oracle: float
    sld_oracle: np.ndarray
    max_abs_dev: float  # residual of d rho = (L rho + rho L)/2 for sld_oracle


def default_steps(delta: float):
    """Finite-difference steps (theta, delta) for the partial derivatives of rho."""
    return 1e-4, 1e-4 * max(1.0, abs(delta))


def gibbs_matrix(s: SpinLength, theta: float, delta: float) -> np.ndarray:
    """exp(-delta S_Z)/Z with S_Z = n_Z . S, built by matrix exponentials."""
    sx, sy, sz = build_spin_matrices(s)
    u = expm(-1j * theta * sy)
    h = u @ sz @ u.conj().T
    # largest exponent is |delta| S; subtract it to stay finite
    g = expm(-delta * h - abs(delta) * s.S * np.eye(s.dim))
    g = (g + g.conj().T) / 2
    return g / np.trace(g).real


def _fd(f, step):
    return sum(c * f(k * step) for k, c in _STENCIL) / (12 * step)


def lambda_derivative_fd(f, point, steps=None):
    """d f(theta, delta) / d lambda as theta_dot df/dtheta + delta_dot df/ddelta."""
    h_t, h_d = default_steps(point.delta) if steps is None else steps
    out = 0.0
    if point.theta_dot:
        out = out + point.theta_dot * _fd(lambda e: f(point.theta + e, point.delta), h_t)
    if point.delta_dot:
        out = out + point.delta_dot * _fd(lambda e: f(point.theta, point.delta + e), h_d)
    return out


def rho_derivative_fd(s: SpinLength, point, steps=None) -> np.ndarray:
    """d rho / d lambda by central differences in theta and delta."""
    d = lambda_derivative_fd(lambda th, de: gibbs_matrix(s, th, de), point, steps)
    d = np.zeros((s.dim, s.dim), dtype=complex) + d
    return (d + d.conj().T) / 2


def sld_lyapunov(rho: np.ndarray, drho: np.ndarray) -> np.ndarray:
    """Solve d rho = (L rho + rho L)/2 in the eigenbasis of rho."""
    p, v = np.linalg.eigh(rho)
    p = np.clip(p, 0.0, None)
    d = v.conj().T @ drho @ v
    den = p[:, None] + p[None, :]
    ok = den > P_FLOOR
    l_eig = np.zeros_like(d, dtype=complex)
    l_eig[ok] = 2 * d[ok] / den[ok]
    L = v @ l_eig @ v.conj().T
    return (L + L.conj().T) / 2


def sld_residual(L: np.ndarray, rho: np.ndarray, drho: np.ndarray) -> float:
    return float(np.abs(drho - 0.5 * (L @ rho + rho @ L)).max())


def qfi_oracle(s: SpinLength, point, steps=None) -> float:
    rho = gibbs_matrix(s, point.theta, point.delta)
    L = sld_lyapunov(rho, rho_derivative_fd(s, point, steps))
    return float(np.trace(rho @ L @ L).real)


def _projectors(s: SpinLength, n: AxisVector):
    _, vecs = np.linalg.eigh(axis_projection(*build_spin_matrices(s), n))
    return vecs


def cfi_oracle(s: SpinLength, point, axis_lab: AxisVector, steps=None) -> float:
    """Sum (dp/dlambda)^2 / p for the eigenbasis of n . S, n fixed in the lab."""
    vecs = _projectors(s, axis_lab)

    def probs(theta, delta):
        rho = gibbs_matrix(s, theta, delta)
        return np.einsum("ik,ij,jk->k", vecs.conj(), rho, vecs).real

    p = probs(point.theta, point.delta)
    dp = np.zeros_like(p) + lambda_derivative_fd(probs, point, steps)
    small = p < P_FLOOR
    if np.any(small & (np.abs(dp) >= DP_NEGLIGIBLE)):
        raise ArithmeticError("outcome with p below floor but non-negligible derivative")
    return float(np.sum(dp[~small] ** 2 / p[~small]))


def oracle_report(s: SpinLength, point, axis_lab: AxisVector) -> OracleReport:
    rho = gibbs_matrix(s, point.theta, point.delta)
    drho = rho_derivative_fd(s, point)
    L = sld_lyapunov(rho, drho)
    return OracleReport(
        H_oracle=float(np.trace(rho @ L @ L).real),
        F_oracle=cfi_oracle(s, point, axis_lab),
        sld_oracle=L,
        max_abs_dev=sld_residual(L, rho, drho),
    )
