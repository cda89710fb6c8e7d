"""Minimum-total-power allocation of data, source noise and destination noise.

Bob's SNR floor fixes the data power ``c = phi * p_src``. Given ``phi``, the
outage constraint can be inverted in closed form for the smallest DAN
power, so the problem reduces to minimising
``g(phi) = p_dan(phi) + c / phi`` over ``phi``. Because ``g`` is not known
to be unimodal, a dense grid locates the basin and golden-section search
refines it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import outage
from .beamform import DegenerateChannelError, snr_bob
from .channel import apply_path_loss
from .config import SystemParams

PHI_MIN = 1e-4
PHI_TOL = 1e-6
BISECT_RTOL = 1e-12
CONSTRAINT_RTOL = 1e-9


class InfeasibleError(ValueError):
    """The outage target cannot be met (beta >= 1)."""


@dataclass(frozen=True)
class PowerAllocation:
    p_dan: float
    p_src: float
    phi: float

    def __post_init__(self):
        if self.p_dan < 0 or self.p_src <= 0 or not (0 < self.phi <= 1):
            raise ValueError(f"invalid allocation {self}")

    @property
    def data_power(self) -> float:
        return self.phi * self.p_src

    @property
    def san_power(self) -> float:
        return (1.0 - self.phi) * self.p_src

    @property
    def an_power(self) -> float:
        """Artificial-noise power at both ends (SAN + DAN)."""
        return self.p_dan + self.san_power

    @property
    def total(self) -> float:
        return self.p_dan + self.p_src


@dataclass
class OptimizationReport:
    allocation: Optional[PowerAllocation]
    constraint_slack_bob: float
    constraint_slack_eve: float
    feasible: bool
    search_trace: list = field(default_factory=list)


def data_power_requirement(params: SystemParams, h_ab: np.ndarray) -> float:
    """Data power phi*P' that puts Bob's SNR exactly at gamma_b.

    ``h_ab`` is the small-scale channel of the selected receive antenna.
    """
    norm2 = float(np.vdot(h_ab, h_ab).real)
    if not norm2 > 0:
        raise DegenerateChannelError("zero Alice-Bob channel")
    gain = params.lambda0 * params.r_ab ** (-params.kappa)
    return params.gamma_b * params.sigma2_b / (gain * norm2)


def _check_beta(params: SystemParams):
    if not params.beta < 1:
        raise InfeasibleError(f"outage target beta={params.beta} is not attainable")


def required_dan_power(phi, c: float, params: SystemParams):
    """Smallest DAN power meeting the outage target at data share ``phi``.

    Vectorised over ``phi``. Returns 0 where source noise alone suffices.
    """
    _check_beta(params)
    phi = np.asarray(phi, dtype=float)
    lam1, lam2 = outage.lambda_pair(phi, c / phi, params)
    m = params.n_a - 1
    # log R, where R is the factor the DAN term must supply
    log_r = (-params.sigma2_e / lam1 - outage.log_target_complement(params)
             - m * np.log1p(-lam2 / lam1))
    theta = outage.dan_rate(params)
    with np.errstate(over="ignore"):
        abs_b = theta * lam1 * np.expm1(np.maximum(log_r, 0.0) / (params.n_b - 1))
    gain_be = params.lambda0 * params.rbar_be ** (-params.kappa)
    p = abs_b * (params.n_b - 1) / gain_be
    return p[()] if p.ndim == 0 else p


def san_only_phi(c: float, params: SystemParams) -> float:
    """Largest phi meeting the outage target with no DAN (closed form)."""
    _check_beta(params)
    m = params.n_a - 1
    lam1, _ = outage.lambda_pair(1.0, c, params)
    log_t = -params.sigma2_e / lam1 - outage.log_target_complement(params)
    if log_t <= 0:
        return 1.0
    # (1 + (1-phi) gamma_e / (phi m))**m >= T
    ratio = np.expm1(log_t / m) * m / params.gamma_e
    return 1.0 / (1.0 + ratio)


def max_phi_at_dan_power(p_dan: float, c: float, params: SystemParams) -> float:
    """Largest phi whose outage constraint holds at fixed DAN power.

    The outage margin decreases monotonically as phi grows, so bisection
    on phi converges to the feasibility boundary. Returns the feasible end.
    """
    _check_beta(params)

    def margin(phi):
        return float(outage.log_outage_margin(phi, c / phi, p_dan, params))

    if margin(1.0) <= 0:
        return 1.0
    lo = 0.5
    while margin(lo) > 0:
        lo *= 0.5
        if lo < 1e-300:
            return 0.0
    hi = min(1.0, 2.0 * lo)
    while hi - lo > BISECT_RTOL * hi:
        mid = 0.5 * (lo + hi)
        if margin(mid) <= 0:
            lo = mid
        else:
            hi = mid
    return lo


def golden_section(f: Callable[[float], float], a: float, b: float,
                   tol: float = PHI_TOL, trace: Optional[list] = None):
    """Minimise ``f`` on [a, b]; returns (x, f(x))."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    if trace is not None:
        trace += [(c, fc), (d, fd)]
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
            if trace is not None:
                trace.append((c, fc))
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
            if trace is not None:
                trace.append((d, fd))
    return (c, fc) if fc < fd else (d, fd)


def phi_grid(n: int = 1000, phi_min: float = PHI_MIN) -> np.ndarray:
    """Log-spaced in phi near zero and in 1 - phi near one; includes 1."""
    half = n // 2
    low = np.logspace(math.log10(phi_min), math.log10(0.5), half)
    high = 1.0 - np.logspace(math.log10(0.5), -8, n - half)[1:]
    return np.concatenate([low, high, [1.0]])


def _search(g, c: float, params: SystemParams, phi_hi: float, extra: list):
    """Grid + golden-section minimisation of g on [PHI_MIN, phi_hi]."""
    grid = phi_grid()
    grid = grid[grid <= phi_hi]
    grid = np.union1d(grid, [v for v in extra if 0 < v <= phi_hi])
    values = g(grid)
    trace = list(zip(grid.tolist(), values.tolist()))
    i = int(np.argmin(values))
    best_phi, best_val = float(grid[i]), float(values[i])
    lo = float(grid[max(i - 1, 0)])
    hi = float(grid[min(i + 1, len(grid) - 1)])
    if hi > lo:
        phi, val = golden_section(lambda x: float(g(x)), lo, hi,
                                  tol=min(PHI_TOL, PHI_TOL * lo), trace=trace)
        if val < best_val:
            best_phi, best_val = phi, val
    return best_phi, best_val, trace


def _prefer_san_only(phi: float, value: float, c: float, params: SystemParams):
    """Swap in the exact P = 0 boundary point when it is at least as cheap.

    Near that boundary the inverted DAN power carries rounding noise scaled
    by lambda1, so the exact point is compared explicitly.
    """
    phi_san = san_only_phi(c, params)
    if phi_san > 0 and c / phi_san <= value:
        return phi_san, 0.0
    return phi, None


def _report(phi: float, p_dan: float, c: float, params: SystemParams,
            h_ab: np.ndarray, trace) -> OptimizationReport:
    phi = float(phi)
    alloc = PowerAllocation(float(p_dan), c / phi, phi)
    h_hat = apply_path_loss(h_ab, params.lambda0, params.r_ab, params.kappa)
    slack_bob = snr_bob(alloc.phi, alloc.p_src, h_hat, params.sigma2_b) / params.gamma_b - 1.0
    slack_eve = outage.outage_probability(alloc, params) - params.beta
    feasible = slack_bob >= -CONSTRAINT_RTOL and slack_eve >= -CONSTRAINT_RTOL
    return OptimizationReport(alloc, slack_bob, slack_eve, feasible, trace)


def infeasible_report(trace=None) -> OptimizationReport:
    return OptimizationReport(None, math.nan, math.nan, False, trace or [])


def optimize(params: SystemParams, h_ab: np.ndarray) -> OptimizationReport:
    """Joint SAN + DAN allocation minimising P + P'."""
    _check_beta(params)
    c = data_power_requirement(params, h_ab)

    def g(phi):
        return required_dan_power(phi, c, params) + c / np.asarray(phi)

    phi, value, trace = _search(g, c, params, 1.0, [])
    phi, p_dan = _prefer_san_only(phi, value, c, params)
    if p_dan is None:
        p_dan = required_dan_power(phi, c, params)
    return _report(phi, p_dan, c, params, h_ab, trace)


def san_only_allocation(params: SystemParams, h_ab: np.ndarray) -> OptimizationReport:
    """Baseline without destination noise: largest feasible phi, P = 0."""
    _check_beta(params)
    c = data_power_requirement(params, h_ab)
    phi = san_only_phi(c, params)
    if not phi > 0:
        return infeasible_report()
    return _report(phi, 0.0, c, params, h_ab, [(phi, c / phi)])


def optimize_capped(params: SystemParams, h_ab: np.ndarray, p_max: float) -> OptimizationReport:
    """Joint allocation with the DAN power limited to ``p_max``."""
    if p_max < 0:
        raise ValueError(f"p_max must be non-negative, got {p_max}")
    if p_max == 0:
        return san_only_allocation(params, h_ab)
    free = optimize(params, h_ab)
    if free.allocation.p_dan <= p_max:
        return free

    c = data_power_requirement(params, h_ab)
    # required_dan_power grows with phi, so the cap admits phi <= phi_cap
    phi_cap = max_phi_at_dan_power(p_max, c, params)
    if not phi_cap > 0:
        return infeasible_report()

    def g(phi):
        p = np.minimum(required_dan_power(phi, c, params), p_max)
        return p + c / np.asarray(phi)

    phi, value, trace = _search(g, c, params, phi_cap, [phi_cap])
    phi, p_dan = _prefer_san_only(phi, value, c, params)
    if p_dan is None:
        p_dan = min(float(required_dan_power(phi, c, params)), p_max)
    return _report(phi, p_dan, c, params, h_ab, trace)
