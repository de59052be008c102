"""Grid sweeps behind the figure commands."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .fisher_classical import MeasurementAxis, cfi
from .fisher_quantum import qfi
from .spin_algebra import SpinLength
from .thermal_state import ParamPoint, thermal_state


@dataclass(frozen=True)
class GridSpec:
    min: float
    max: float
    count: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.count < 2:
            raise ValueError(f"grid count must be >= 2, got {self.count}")
        if not self.min < self.max:
            raise ValueError(f"grid min {self.min} must be below max {self.max}")
        if self.spacing not in ("linear", "log"):
            raise ValueError(f"spacing must be 'linear' or 'log', got {self.spacing!r}")
        if self.spacing == "log" and self.min <= 0:
            raise ValueError("log spacing requires min > 0")

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.min, self.max, self.count)
        return np.linspace(self.min, self.max, self.count)


FIG1_COLUMNS = ("delta", "twoS", "hC_norm", "hQ_norm")
FIG2_COLUMNS = ("delta", "phi", "A_tt_norm", "A_dd_norm", "F_over_H")
FIG2_EXTRA = ("A_tt", "A_dd", "A_dt", "F", "H", "P")


def _fig1_row(args):
    twoS, delta = args
    s = SpinLength(twoS)
    q = qfi(thermal_state(s, delta), ParamPoint(0.0, delta, 1.0, 1.0))
    return {"delta": delta, "twoS": twoS, "hC_norm": q.hC_norm, "hQ_norm": q.hQ_norm}


def _fig2_row(args):
    twoS, delta, phi, rate = args
    s = SpinLength(twoS)
    st = thermal_state(s, delta)
    pt = ParamPoint(0.0, delta, rate, rate)
    q = qfi(st, pt)
    c = cfi(st, pt, MeasurementAxis(phi))
    S = s.S
    return {
        "delta": delta,
        "phi": phi,
        "A_tt_norm": c.A_tt / (2 * S),
        "A_dd_norm": c.A_dd / (S * (S + 1) / 3),
        "F_over_H": c.F / q.H,
        "A_tt": c.A_tt,
        "A_dd": c.A_dd,
        "A_dt": c.A_dt,
        "F": c.F,
        "H": q.H,
        "P": c.P,
    }


def _run(fn, tasks, jobs):
    if jobs <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        # map preserves task order whatever the completion order
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def figure1_rows(twoS_values, delta_grid: GridSpec, jobs: int = 1):
    """Normalized h_C/[S(S+1)] and h_Q/(2S) versus delta for each spin length."""
    tasks = [(int(t), float(d)) for t in twoS_values for d in delta_grid.values()]
    return _run(_fig1_row, tasks, jobs)


def figure2_rows(twoS: int, delta_grid: GridSpec, phi_grid: GridSpec, rate: float = 1.0, jobs: int = 1):
    """CFI decomposition over a (delta, phi) grid with theta_dot = delta_dot = rate.

    A_tt is normalized to 2S, A_dd to S(S+1)/3, and F to the QFI.
    """
    tasks = [
        (int(twoS), float(d), float(p), float(rate))
        for d in delta_grid.values()
        for p in phi_grid.values()
    ]
    return _run(_fig2_row, tasks, jobs)
