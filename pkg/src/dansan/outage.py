"""Closed-form eavesdropper outage probability.

Per Eve antenna the outage event is ``X + b*Y <= sigma2_e`` where

* ``X = h^H a h`` is an indefinite Hermitian form whose kernel has one
  positive eigenvalue ``lambda1`` (the data beam) and ``n_a - 1`` equal
  non-positive eigenvalues ``lambda2`` (source artificial noise), and
* ``Y = |h_BE|^2`` is Gamma(n_b - 1, rate theta), scaled by ``b <= 0``
  (destination artificial noise).

All functions broadcast over numpy arrays. Probabilities close to one are
computed through their log-complement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import SystemParams


@dataclass(frozen=True)
class OutageLaw:
    lambda1: float
    lambda2: float
    b: float
    theta: float
    n_a: int
    n_b: int

    def __post_init__(self):
        if not np.all(np.asarray(self.lambda1) > 0):
            raise ValueError("lambda1 must be positive")
        if np.any(np.asarray(self.lambda2) > 0) or np.any(np.asarray(self.b) > 0):
            raise ValueError("lambda2 and b must be non-positive")
        if not self.theta > 0:
            raise ValueError("theta must be positive")


def dan_rate(params: SystemParams) -> float:
    """Exponential rate of each |h_BE,i|^2 under the configured convention."""
    if params.chi_convention == "paper":
        return 1.0 / (2.0 * params.sigma2_hbe)
    if params.chi_convention == "unit":
        return 1.0 / params.sigma2_hbe
    raise ValueError(f"unknown chi_convention {params.chi_convention!r}")


def _eve_gain(params: SystemParams, r_ae=None) -> float:
    r = params.rbar_ae if r_ae is None else r_ae
    return params.lambda0 * r ** (-params.kappa)


def lambda_pair(phi, p_src, params: SystemParams):
    """Eigenvalues (lambda1, lambda2) of the scaled quadratic-form kernel."""
    g = _eve_gain(params) * params.sigma2_hae
    lam1 = phi * p_src * g / params.gamma_e
    lam2 = -(1.0 - phi) * p_src * g / (params.n_a - 1)
    return lam1, lam2


def coefficient_b(p_dan, params: SystemParams):
    return -p_dan / (params.n_b - 1) * params.lambda0 * params.rbar_be ** (-params.kappa)


def build_law(phi, p_src, p_dan, params: SystemParams) -> OutageLaw:
    lam1, lam2 = lambda_pair(phi, p_src, params)
    return OutageLaw(lam1, lam2, coefficient_b(p_dan, params), dan_rate(params),
                     params.n_a, params.n_b)


def cdf_x(x, lambda1, lambda2, n_a):
    """CDF of the quadratic form with eigenvalues lambda1 (once) and lambda2
    (``n_a - 1`` times), for a CN(0, I) vector."""
    m = n_a - 1
    x, lambda1, lambda2 = np.broadcast_arrays(*(np.asarray(v, dtype=float)
                                                for v in (x, lambda1, lambda2)))
    out = np.empty(x.shape)
    pos = x >= 0
    ratio = -lambda2 / lambda1
    out[pos] = -np.expm1(-x[pos] / lambda1[pos] - m * np.log1p(ratio[pos]))
    neg = ~pos
    if np.any(neg):
        out[neg] = [_cdf_x_negative(xi, l1, l2, m)
                    for xi, l1, l2 in zip(x[neg], lambda1[neg], lambda2[neg])]
    return out[()] if out.ndim == 0 else out


def _cdf_x_negative(x, lam1, lam2, m):
    """Mass below x < 0: P[lam1*E - mu*G <= x], E ~ Exp(1), G ~ Gamma(m, 1).

    Conditioning on E and expanding the Gamma survival function gives a
    finite double sum.
    """
    mu = -lam2
    if mu == 0.0:
        return 0.0
    s = -x / mu
    rho = lam1 / mu
    alpha = 1.0 + rho
    total = 0.0
    for k in range(m):
        for j in range(k + 1):
            total += s ** (k - j) / math.factorial(k - j) * rho ** j / alpha ** (j + 1)
    return math.exp(-s) * total


def pdf_y(y, n_b, theta):
    """Gamma(n_b - 1, rate theta) density of the destination-noise gain."""
    k = n_b - 1
    y = np.asarray(y, dtype=float)
    yy = np.where(y > 0, y, 1.0)
    logf = k * math.log(theta) + (k - 1) * np.log(yy) - theta * yy - math.lgamma(k)
    out = np.where(y > 0, np.exp(logf), 0.0)
    if k == 1:
        out = np.where(y == 0, theta, out)
    return out[()] if out.ndim == 0 else out


def log_ccdf_z(z, law: OutageLaw):
    """log(1 - F_Z(z)) for z >= 0."""
    m = law.n_a - 1
    return (-np.asarray(z, dtype=float) / law.lambda1
            - m * np.log1p(-np.asarray(law.lambda2) / law.lambda1)
            - (law.n_b - 1) * np.log1p(-np.asarray(law.b) / (law.theta * law.lambda1)))


def cdf_z(z, law: OutageLaw):
    """P[X + b Y <= z] for z >= 0."""
    if np.any(np.asarray(z) < 0):
        raise ValueError("cdf_z is only defined here for z >= 0")
    return -np.expm1(log_ccdf_z(z, law))


def eve_outage(phi, p_src, p_dan, params: SystemParams):
    """P[SNR_E <= gamma_e] with selection combining over all Eve antennas.

    Vectorised core of :func:`outage_probability`.
    """
    law = build_law(phi, p_src, p_dan, params)
    per_antenna = cdf_z(params.sigma2_e, law)
    return per_antenna ** params.n_e


def outage_probability(alloc, params: SystemParams) -> float:
    """Eavesdropper outage probability for a power allocation."""
    return float(eve_outage(alloc.phi, alloc.p_src, alloc.p_dan, params))


def log_outage_margin(phi, p_src, p_dan, params: SystemParams):
    """log(1 - F_Z(sigma2_e)) - log(1 - beta**(1/n_e)).

    Non-positive exactly when the outage target is met; this form stays
    accurate when beta is close to one.
    """
    law = build_law(phi, p_src, p_dan, params)
    return log_ccdf_z(params.sigma2_e, law) - log_target_complement(params)


def log_target_complement(params: SystemParams) -> float:
    if params.beta <= 0:
        return 0.0
    # 1 - beta**(1/n_e) without cancellation
    return math.log(-math.expm1(math.log(params.beta) / params.n_e))
