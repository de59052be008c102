"""Monte Carlo estimation of lambda from repeated projective spin measurements.

Each replication draws ``shots`` outcomes of S_O, finds the maximum-likelihood
estimate of lambda, and the spread of the estimates is compared with the
Cramer-Rao bound 1/(N F).
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq

from .fisher_classical import (
    MeasurementAxis,
    cfi,
    outcome_probabilities,
    probability_derivatives,
)
from .fisher_quantum import UnidentifiableError, optimal_angle
from .spin_algebra import SpinLength
from .thermal_state import ParamPoint, thermal_state

log = logging.getLogger(__name__)

KINDS = ("intensity", "orientation", "mixed")
GOLDEN = (np.sqrt(5) - 1) / 2


class MultimodalLikelihoodError(ValueError):
    pass


@dataclass(frozen=True)
class Parameterization:
    """theta(lambda) = theta0 + theta_slope*lambda, delta(lambda) = delta0 + delta_slope*lambda."""

    kind: str
    theta0: float
    theta_slope: float
    delta0: float
    delta_slope: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        expected = {
            "intensity": self.theta_slope == 0 and self.delta_slope != 0,
            "orientation": self.delta_slope == 0 and self.theta_slope != 0,
            "mixed": self.delta_slope != 0 and self.theta_slope != 0,
        }[self.kind]
        if not expected:
            raise ValueError(
                f"slopes (theta {self.theta_slope}, delta {self.delta_slope}) "
                f"inconsistent with kind={self.kind!r}"
            )

    def point(self, lam: float) -> ParamPoint:
        return ParamPoint(
            theta=self.theta0 + self.theta_slope * lam,
            delta=self.delta0 + self.delta_slope * lam,
            theta_dot=self.theta_slope,
            delta_dot=self.delta_slope,
        )


@dataclass(frozen=True)
class LikelihoodModel:
    """Outcome distribution of a lab-fixed axis as a function of lambda.

    The axis has polar angle ``axis_polar`` and azimuth ``axis_azimuth`` in the lab.
    """

    s: SpinLength
    param: Parameterization
    axis_polar: float
    axis_azimuth: float = 0.0

    def _axis(self, theta):
        return MeasurementAxis(self.axis_polar - theta, self.axis_azimuth)

    def probabilities(self, lam: float) -> np.ndarray:
        pt = self.param.point(lam)
        return outcome_probabilities(thermal_state(self.s, pt.delta), pt.theta, self._axis(pt.theta))

    def dprob(self, lam: float) -> np.ndarray:
        pt = self.param.point(lam)
        d_t, d_d = probability_derivatives(
            thermal_state(self.s, pt.delta), pt.theta, self._axis(pt.theta)
        )
        return pt.theta_dot * d_t + pt.delta_dot * d_d

    def fisher(self, lam: float) -> float:
        pt = self.param.point(lam)
        return cfi(thermal_state(self.s, pt.delta), pt, self._axis(pt.theta)).F

    def loglik(self, counts, lam: float) -> float:
        p = self.probabilities(lam)
        with np.errstate(divide="ignore"):
            terms = np.where(counts > 0, counts * np.log(np.clip(p, 0, None)), 0.0)
        return float(terms.sum())

    def score(self, counts, lam: float) -> float:
        p = self.probabilities(lam)
        nz = counts > 0
        return float(np.sum(counts[nz] * self.dprob(lam)[nz] / p[nz]))


def sample_outcomes(state, theta, axis, n, seed) -> np.ndarray:
    """Counts of n projective outcomes, ordered M_O = S..-S.

    ``seed`` may be an int, a SeedSequence or a Generator.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    p = np.clip(outcome_probabilities(state, theta, axis), 0.0, None)
    return rng.multinomial(n, p / p.sum())


def _golden_max(f, a, b, tol):
    x1, x2 = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = f(x2)
    return 0.5 * (a + b)


def mle_estimate(counts, model: LikelihoodModel, search_interval, grid_points: int = 64) -> float:
    """Maximum-likelihood lambda on the interval.

    A coarse grid checks unimodality and brackets the maximum, golden-section
    refines it to 1e-10 of the interval, and the root of the score polishes the
    last digits that the flat top of the likelihood hides from golden-section.
    """
    lo, hi = map(float, search_interval)
    if not lo < hi:
        raise ValueError(f"empty search interval {search_interval}")
    counts = np.asarray(counts, dtype=float)
    grid = np.linspace(lo, hi, grid_points)
    ll = np.array([model.loglik(counts, x) for x in grid])
    finite = ll[np.isfinite(ll)]
    if finite.size == 0 or np.ptp(finite) <= 1e-12 * (1 + np.abs(finite).max()):
        raise UnidentifiableError("likelihood is flat on the search interval")
    top = ll.max()
    ties = np.flatnonzero(ll >= top - 1e-12 * (1 + abs(top)))
    centre = 0.5 * (lo + hi)
    i = int(ties[np.argmin(np.abs(grid[ties] - centre))])
    if _count_peaks(ll) > 1:
        raise MultimodalLikelihoodError("likelihood has several maxima on the search interval")

    a, b = grid[max(i - 1, 0)], grid[min(i + 1, grid_points - 1)]
    x = _golden_max(lambda t: model.loglik(counts, t), a, b, 1e-10 * (hi - lo))
    s_a, s_b = model.score(counts, a), model.score(counts, b)
    if s_a > 0 > s_b:
        x = brentq(lambda t: model.score(counts, t), a, b, xtol=1e-15, rtol=1e-15)
    return float(x)


def _count_peaks(ll):
    """Local maxima of a sampled curve, endpoints included; plateaus count once."""
    d = np.diff(ll)
    tol = 1e-9 * (1 + np.abs(ll[np.isfinite(ll)]).max())
    sgn = np.sign(np.where(np.abs(d) > tol, d, 0.0))
    sgn = sgn[sgn != 0]
    if sgn.size == 0:
        return 1
    inner = int(np.sum((sgn[:-1] > 0) & (sgn[1:] < 0)))
    return inner + int(sgn[0] < 0) + int(sgn[-1] > 0)


@dataclass(frozen=True)
class SimConfig:
    twoS: int
    kind: str
    theta0: float
    theta_slope: float
    delta0: float
    delta_slope: float
    lambda_true: float = 0.0
    phi: float | str = "opt"
    gamma: float = 0.0
    shots: int = 10_000
    replications: int = 500
    seed: int = 0
    search_min: float | None = None
    search_max: float | None = None
    band_low: float = 0.85
    band_high: float = 1.30
    grid_points: int = 64
    jobs: int = 1

    def __post_init__(self):
        if self.shots < 1 or self.replications < 2:
            raise ValueError("shots must be >= 1 and replications >= 2")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        if not self.band_low < self.band_high:
            raise ValueError("band_low must be below band_high")
        if self.phi != "opt" and not np.isfinite(self.phi):
            raise ValueError(f"phi must be 'opt' or a finite angle, got {self.phi!r}")
        SpinLength(self.twoS)
        self.parameterization

    @property
    def parameterization(self) -> Parameterization:
        return Parameterization(self.kind, self.theta0, self.theta_slope, self.delta0, self.delta_slope)

    def axis_offset(self) -> float:
        if self.phi == "opt":
            return optimal_angle(self.parameterization.point(self.lambda_true))
        return float(self.phi)

    def model(self) -> LikelihoodModel:
        theta_true = self.parameterization.point(self.lambda_true).theta
        return LikelihoodModel(
            SpinLength(self.twoS), self.parameterization, theta_true + self.axis_offset(), self.gamma
        )


@dataclass(frozen=True)
class SimResult:
    twoS: int
    kind: str
    phi: float
    gamma: float
    n_shots: int
    replications: int
    lambda_true: float
    lambda_hat_mean: float
    lambda_hat_var: float
    fisher: float
    crb: float
    ratio_var_to_crb: float
    band: tuple = field(default=(0.85, 1.30))
    within_band: bool = False
    seed: int = 0

    def as_dict(self):
        d = asdict(self)
        d["band"] = list(self.band)
        return d


def _replicate(args):
    cfg, interval, seq = args
    model = cfg.model()
    rng = np.random.default_rng(seq)
    pt = cfg.parameterization.point(cfg.lambda_true)
    state = thermal_state(model.s, pt.delta)
    counts = sample_outcomes(state, pt.theta, model._axis(pt.theta), cfg.shots, rng)
    return mle_estimate(counts, model, interval, cfg.grid_points)


def run_experiment(cfg: SimConfig) -> SimResult:
    model = cfg.model()
    F = model.fisher(cfg.lambda_true)
    S = model.s.S
    # round-off floor relative to the largest attainable information
    scale = 2 * S * cfg.theta_slope**2 + S * (S + 1) * cfg.delta_slope**2
    if not F > 1e-12 * scale:
        raise UnidentifiableError(f"Fisher information is {F}; lambda cannot be estimated")
    crb = 1.0 / (cfg.shots * F)
    width = 12 * np.sqrt(crb)
    interval = (
        cfg.lambda_true - width if cfg.search_min is None else cfg.search_min,
        cfg.lambda_true + width if cfg.search_max is None else cfg.search_max,
    )
    seqs = np.random.SeedSequence(cfg.seed).spawn(cfg.replications)
    jobs = [(cfg, interval, seq) for seq in seqs]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            est = list(pool.map(_replicate, jobs, chunksize=max(1, len(jobs) // (4 * cfg.jobs))))
    else:
        est = [_replicate(j) for j in jobs]
    est = np.array(est)
    var = float(est.var(ddof=1))
    ratio = var / crb
    log.info("replications=%d var=%.4g crb=%.4g ratio=%.4f", cfg.replications, var, crb, ratio)
    return SimResult(
        twoS=cfg.twoS,
        kind=cfg.kind,
        phi=cfg.axis_offset(),
        gamma=cfg.gamma,
        n_shots=cfg.shots,
        replications=cfg.replications,
        lambda_true=cfg.lambda_true,
        lambda_hat_mean=float(est.mean()),
        lambda_hat_var=var,
        fisher=F,
        crb=crb,
        ratio_var_to_crb=ratio,
        band=(cfg.band_low, cfg.band_high),
        within_band=bool(cfg.band_low <= ratio <= cfg.band_high),
        seed=cfg.seed,
    )
