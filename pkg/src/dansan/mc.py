"""Monte Carlo estimate of the eavesdropper outage probability.

Trials are split into fixed-size blocks; block ``i`` draws from the stream
``make_rng(seed, i)``, so the estimate depends on (seed, trials) only and
not on how many workers process the blocks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import outage
from .beamform import Beamformer, build_beamformer, select_antenna
from .channel import (MIN_DISTANCE, Point2D, apply_path_loss, make_rng,
                      sample_eve_location, sample_gaussian, sample_gaussian_matrix)
from .config import SystemParams
from .optimizer import PowerAllocation

GEOMETRIES = ("fixed_mean_distances", "random_disk")
BLOCK_TRIALS = 1 << 16
Z_LIMIT = 4.0

# spawn key outside any block index, reserved for the per-call H_AB draw
_KEY_BEAMFORMER = 2**32


@dataclass(frozen=True)
class OutageEstimate:
    estimate: float
    stderr: float
    trials: int
    seed: int


@dataclass(frozen=True)
class ValidationRow:
    allocation: PowerAllocation
    analytic: float
    estimate: float
    stderr: float
    z: float
    flagged: bool


def dan_sampling_mode(params: SystemParams) -> str:
    return "paper_dan" if params.chi_convention == "paper" else "per_complex_entry"


def default_beamformer(params: SystemParams, seed: int) -> Beamformer:
    """Beam for one H_AB draw; Eve's statistics do not depend on its direction."""
    rng = make_rng(seed, _KEY_BEAMFORMER)
    h = sample_gaussian_matrix(rng, params.n_a, params.n_b, params.sigma2_hab)
    return build_beamformer(h, select_antenna(h))


def eve_snr_batch(alloc: PowerAllocation, h_ae_hat: np.ndarray, h_be_hat: np.ndarray,
                  bf: Beamformer, n_b: int, sigma2_e: float = 0.0) -> np.ndarray:
    """Per-antenna Eve SNR for stacked channels (last axis is the antenna
    element axis); zero denominators give ``inf``."""
    beam = np.abs(h_ae_hat.conj() @ bf.t1) ** 2
    san_form = np.einsum("...i,ij,...j->...", h_ae_hat.conj(), bf.c_eta, h_ae_hat).real
    signal = alloc.data_power * beam
    denom = (alloc.san_power * san_form
             + alloc.p_dan / (n_b - 1) * np.sum(np.abs(h_be_hat) ** 2, axis=-1)
             + sigma2_e)
    with np.errstate(divide="ignore", invalid="ignore"):
        snr = signal / denom
    return np.where(denom > 0, snr, np.where(signal > 0, np.inf, 0.0))


def _count_block(rng, n, alloc, params, bf, geometry, eve_noise):
    h_ae = sample_gaussian(rng, (n, params.n_e, params.n_a), params.sigma2_hae)
    h_be = sample_gaussian(rng, (n, params.n_e, params.n_b - 1), params.sigma2_hbe,
                           dan_sampling_mode(params))
    if geometry == "fixed_mean_distances":
        r_ae, r_be = params.rbar_ae, params.rbar_be
    else:
        half = params.r_ab / 2.0
        eve = sample_eve_location(rng, Point2D(0.0, 0.0), params.r_ab, size=n)
        r_ae = np.maximum(np.hypot(eve[:, 0] + half, eve[:, 1]), MIN_DISTANCE)
        r_be = np.maximum(np.hypot(eve[:, 0] - half, eve[:, 1]), MIN_DISTANCE)
    h_ae = apply_path_loss(h_ae, params.lambda0, r_ae, params.kappa)
    h_be = apply_path_loss(h_be, params.lambda0, r_be, params.kappa)

    snr = eve_snr_batch(alloc, h_ae, h_be, bf, params.n_b,
                        params.sigma2_e if eve_noise else 0.0)
    # selection combining: outage only if every antenna is below threshold
    return int(np.count_nonzero(np.all(snr <= params.gamma_e, axis=1)))


def estimate_outage(alloc: PowerAllocation, params: SystemParams,
                    geometry: str = "fixed_mean_distances", trials: int = 100_000,
                    seed: int = 0, workers: int = 1, eve_noise: bool = True,
                    beamformer: Optional[Beamformer] = None) -> OutageEstimate:
    """Fraction of channel draws in which every Eve antenna is in outage.

    ``eve_noise=True`` puts Eve's receiver noise in her SNR denominator,
    which is the event the closed form describes. ``eve_noise=False``
    keeps only the artificial-noise terms.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if geometry not in GEOMETRIES:
        raise ValueError(f"unknown geometry {geometry!r}")
    bf = beamformer or default_beamformer(params, seed)
    starts = range(0, trials, BLOCK_TRIALS)

    def run(i_start):
        i, start = i_start
        n = min(BLOCK_TRIALS, trials - start)
        return _count_block(make_rng(seed, i), n, alloc, params, bf, geometry, eve_noise)

    jobs = list(enumerate(starts))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = sum(pool.map(run, jobs))
    else:
        hits = sum(map(run, jobs))
    p = hits / trials
    return OutageEstimate(p, math.sqrt(p * (1.0 - p) / trials), trials, seed)


def z_score(analytic: float, est: OutageEstimate) -> float:
    """Deviation in units of the binomial standard error under the analytic p."""
    se = math.sqrt(analytic * (1.0 - analytic) / est.trials)
    if se == 0.0:
        return 0.0 if est.estimate == analytic else math.inf
    return (est.estimate - analytic) / se


def default_grid(params: SystemParams) -> list[PowerAllocation]:
    """20 allocations: phi in {0.1,...,0.9} x DAN power in {0,1,2.5,5} mW.

    Data power is the Bob requirement for a channel with |h|^2 = n_a.
    """
    gain = params.lambda0 * params.r_ab ** (-params.kappa)
    c = params.gamma_b * params.sigma2_b / (gain * params.n_a)
    return [PowerAllocation(p_mw * 1e-3, c / phi, phi)
            for phi in (0.1, 0.3, 0.5, 0.7, 0.9)
            for p_mw in (0.0, 1.0, 2.5, 5.0)]


def validate_closed_form(params: SystemParams, grid: Sequence[PowerAllocation],
                         trials: int = 1_000_000, seed: int = 0, workers: int = 1,
                         analytic_convention: Optional[str] = None,
                         eve_noise: bool = True) -> list[ValidationRow]:
    """Compare the analytic outage with Monte Carlo at each allocation.

    Sampling always follows ``params.chi_convention``; passing a different
    ``analytic_convention`` evaluates the closed form under the other one
    (a negative control).
    """
    if not grid:
        raise ValueError("empty validation grid")
    analytic_params = params
    if analytic_convention is not None:
        analytic_params = params.replace(chi_convention=analytic_convention)
    rows = []
    for k, alloc in enumerate(grid):
        p = outage.outage_probability(alloc, analytic_params)
        est = estimate_outage(alloc, params, trials=trials, seed=seed + k,
                              workers=workers, eve_noise=eve_noise)
        z = z_score(p, est)
        rows.append(ValidationRow(alloc, p, est.estimate, est.stderr, z, abs(z) > Z_LIMIT))
    return rows
