"""Parameter sweeps averaged over Alice-Bob channel draws.

Draw ``d`` of H_AB always comes from ``make_rng(seed, d)``, so every sweep
value and method sees the same channels (common random numbers).
"""

from __future__ import annotations

import dataclasses
import hashlib
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import optimizer
from .beamform import build_beamformer, select_antenna
from .channel import Point2D, link_distance, make_rng, sample_gaussian_matrix
from .config import SystemParams, render

SWEEP_VARIABLES = ("beta", "n_e", "antennas", "eve_x", "dan_cap", "gamma_b", "gamma_e")
METHODS = ("dan_san", "san_only")
CSV_COLUMNS = ("sweep_value", "method", "total_an_mw", "p_dan_mw", "p_san_mw",
               "phi", "feasible", "draws", "seed")

ALICE = Point2D(-1000.0, 0.0)
BOB = Point2D(1000.0, 0.0)


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    values: tuple
    channel_draws: int = 200
    seed: int = 0
    output_path: Optional[str] = None

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ValueError(f"unknown sweep variable {self.variable!r}")
        if not self.values:
            raise ValueError("sweep values must be non-empty")
        keys = [_order_key(v) for v in self.values]
        if any(b <= a for a, b in zip(keys, keys[1:])):
            raise ValueError("sweep values must be strictly ordered")
        if self.channel_draws < 1:
            raise ValueError("channel_draws must be >= 1")


@dataclass(frozen=True)
class SweepRow:
    sweep_value: object
    method: str
    total_an: float
    p_dan: float
    p_san: float
    phi: float
    feasible: bool
    draws: int
    seed: int


def _order_key(v):
    # antenna pairs order by total antenna count, then N_A
    return (v[0] + v[1], v[0]) if isinstance(v, tuple) else v


def channel_draw(params: SystemParams, seed: int, d: int) -> np.ndarray:
    """Selected-antenna Alice-Bob channel vector for draw ``d``."""
    h = sample_gaussian_matrix(make_rng(seed, d), params.n_a, params.n_b, params.sigma2_hab)
    return build_beamformer(h, select_antenna(h)).h_ab


def apply_sweep_value(params: SystemParams, variable: str, value) -> SystemParams:
    if variable == "antennas":
        n_a, n_b = value
        return params.replace(n_a=int(n_a), n_b=int(n_b))
    if variable == "eve_x":
        eve = Point2D(float(value), 0.0)
        return params.replace(r_ab=link_distance(ALICE, BOB),
                              rbar_ae=link_distance(eve, ALICE),
                              rbar_be=link_distance(eve, BOB))
    if variable == "dan_cap":
        return params.replace(dan_cap=float(value))
    if variable == "n_e":
        return params.replace(n_e=int(value))
    return params.replace(**{variable: float(value)})


def solve(params: SystemParams, h_ab: np.ndarray, method: str) -> optimizer.OptimizationReport:
    if method == "san_only":
        return optimizer.san_only_allocation(params, h_ab)
    if params.dan_cap is not None:
        return optimizer.optimize_capped(params, h_ab, params.dan_cap)
    return optimizer.optimize(params, h_ab)


def average_over_draws(params: SystemParams, method: str, draws: int, seed: int,
                       fixed_channel: bool = False) -> SweepRow:
    """Mean allocation over channel draws; infeasible if any draw is."""
    reports = [solve(params, channel_draw(params, seed, 0 if fixed_channel else d), method)
               for d in range(draws)]
    if not all(r.feasible for r in reports):
        nan = math.nan
        return SweepRow(None, method, nan, nan, nan, nan, False, draws, seed)
    allocs = [r.allocation for r in reports]
    return SweepRow(None, method,
                    float(np.mean([a.an_power for a in allocs])),
                    float(np.mean([a.p_dan for a in allocs])),
                    float(np.mean([a.san_power for a in allocs])),
                    float(np.mean([a.phi for a in allocs])),
                    True, draws, seed)


def run_sweep(spec: SweepSpec, params: SystemParams, methods: Sequence[str] = METHODS,
              workers: int = 1, fixed_channel: bool = False) -> list[SweepRow]:
    """Rows in (value, method) input order regardless of worker count."""
    jobs = [(v, m) for v in spec.values for m in methods]

    def run(job):
        v, m = job
        row = average_over_draws(apply_sweep_value(params, spec.variable, v), m,
                                 spec.channel_draws, spec.seed, fixed_channel)
        return dataclasses.replace(row, sweep_value=v)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run, jobs))
    return [run(j) for j in jobs]


def config_hash(params: SystemParams) -> str:
    return hashlib.sha256(render(params).encode()).hexdigest()[:16]


def _fmt(x: float) -> str:
    return "" if math.isnan(x) else f"{x:.9g}"


def _fmt_value(v, variable: str) -> str:
    if variable == "antennas":
        return f"{v[0]}x{v[1]}"
    if variable == "dan_cap":
        return f"{v * 1e3:g}"
    return f"{v:g}"


def rows_to_csv(rows: Sequence[SweepRow], params: SystemParams, spec: SweepSpec) -> str:
    buf = io.StringIO()
    buf.write(f"# config_sha256={config_hash(params)} seed={spec.seed} "
              f"variable={spec.variable} draws={spec.channel_draws}\n")
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for r in rows:
        fields = [_fmt_value(r.sweep_value, spec.variable), r.method,
                  _fmt(r.total_an * 1e3), _fmt(r.p_dan * 1e3), _fmt(r.p_san * 1e3),
                  _fmt(r.phi), "true" if r.feasible else "false", str(r.draws), str(r.seed)]
        buf.write(",".join(fields) + "\n")
    return buf.getvalue()


def plot_script(csv_path: str, spec: SweepSpec) -> str:
    """gnuplot commands drawing total AN power per method from the CSV."""
    xlabel = {"beta": "target outage probability", "n_e": "Eve antennas",
              "antennas": "antenna set (N_A x N_B)", "eve_x": "Eve x position (m)",
              "dan_cap": "DAN power cap (mW)", "gamma_b": "gamma_b",
              "gamma_e": "gamma_e"}[spec.variable]
    x = "0" if spec.variable == "antennas" else "1"
    curves = []
    for method, title in (("dan_san", "DAN + SAN"), ("san_only", "SAN only")):
        y = f"(strcol(2) eq '{method}' ? $3 : 1/0)"
        xtic = ":xtic(1)" if spec.variable == "antennas" else ""
        curves.append(f"'{csv_path}' every ::1 using {x}:{y}{xtic} with linespoints title '{title}'")
    return "\n".join([
        "set datafile separator ','",
        f"set xlabel '{xlabel}'",
        "set ylabel 'total AN power (mW)'",
        "set key top left",
        "plot " + ", \\\n     ".join(curves),
        "",
    ])
