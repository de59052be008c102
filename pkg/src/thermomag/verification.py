"""Seeded comparison of the closed forms against the brute-force oracles."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import fisher_quantum, oracle
from .fisher_classical import MeasurementAxis, cfi
from .spin_algebra import SpinLength
from .thermal_state import ParamPoint, density_matrix, thermal_state

TOLERANCES = {
    "qfi_vs_oracle": 1e-8,  # relative
    "sld_residual": 1e-9,  # max abs entry
    "oracle_sld_residual": 1e-9,
    "cfi_vs_oracle": 1e-6,  # relative
    "phi_opt_saturates_H": 1e-8,  # relative
    "phi_opt_is_max": 1e-9,  # absolute slack over the scan
    "chain_P_le_F_le_H": 1e-9,
}


@dataclass
class Check:
    name: str
    tolerance: float
    worst: float = 0.0
    worst_instance: dict | None = None

    def record(self, value, instance):
        if not np.isfinite(value) or value > self.worst:
            self.worst = float(value)
            self.worst_instance = instance

    @property
    def passed(self):
        return bool(np.isfinite(self.worst) and self.worst <= self.tolerance)


@dataclass
class VerifyReport:
    trials: int
    seed: int
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def random_instance(rng, max_twoS=12):
    return {
        "twoS": int(rng.integers(1, max_twoS + 1)),
        "theta": float(rng.uniform(0, np.pi)),
        "delta": float(rng.uniform(-5, 5)),
        "theta_dot": float(rng.uniform(-2, 2)),
        "delta_dot": float(rng.uniform(-2, 2)),
        "phi": float(rng.uniform(-np.pi / 2, np.pi / 2)),
        "gamma": float(rng.uniform(-np.pi, np.pi)) if rng.random() < 0.25 else 0.0,
    }


def run_verification(trials=200, seed=2024, max_twoS=12, phi_scan=720) -> VerifyReport:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    checks = {name: Check(name, tol) for name, tol in TOLERANCES.items()}
    rng = np.random.default_rng(seed)
    scan = np.linspace(-np.pi / 2, np.pi / 2, phi_scan, endpoint=False)
    for _ in range(trials):
        inst = random_instance(rng, max_twoS)
        s = SpinLength(inst["twoS"])
        pt = ParamPoint(inst["theta"], inst["delta"], inst["theta_dot"], inst["delta_dot"])
        st = thermal_state(s, pt.delta)
        axis = MeasurementAxis(inst["phi"], inst["gamma"])

        q = fisher_quantum.qfi(st, pt)
        rho = density_matrix(st, pt.theta)
        drho = oracle.rho_derivative_fd(s, pt)
        rep = oracle.oracle_report(s, pt, axis.lab_vector(pt.theta))
        checks["qfi_vs_oracle"].record(_rel(q.H, rep.H_oracle), inst)
        L = fisher_quantum.sld_operator(st, pt)
        checks["sld_residual"].record(oracle.sld_residual(L, rho, drho), inst)
        checks["oracle_sld_residual"].record(rep.max_abs_dev, inst)

        c = cfi(st, pt, axis)
        checks["cfi_vs_oracle"].record(
            abs(c.F - rep.F_oracle) / max(abs(rep.F_oracle), 1e-12 * max(q.H, 1e-300)), inst
        )
        chain = max(c.P - c.F, c.F - q.H, 0.0) if np.isfinite(c.P) else max(c.F - q.H, 0.0)
        checks["chain_P_le_F_le_H"].record(chain, inst)

        phi_opt = fisher_quantum.optimal_angle(pt)
        f_opt = cfi(st, pt, MeasurementAxis(phi_opt)).F
        checks["phi_opt_saturates_H"].record(_rel(f_opt, q.H), {**inst, "phi_opt": phi_opt})
        f_scan = max(cfi(st, pt, MeasurementAxis(float(p))).F for p in scan)
        checks["phi_opt_is_max"].record(max(f_scan - f_opt, 0.0), {**inst, "phi_opt": phi_opt})
    return VerifyReport(trials=trials, seed=seed, checks=list(checks.values()))
