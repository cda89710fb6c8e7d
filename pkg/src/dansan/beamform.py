"""Receive-antenna selection, source beamformer with null-space artificial
noise, and per-link SNR evaluation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class DegenerateChannelError(ValueError):
    """The legitimate channel vector is zero, so no beam can be formed."""


@dataclass(frozen=True)
class Beamformer:
    """Transmit beamformer for one Alice-Bob channel realization.

    ``selected_antenna`` is a 0-based column index into H_AB. ``null_basis``
    has orthonormal columns spanning the complement of ``t1``; ``c_eta`` is
    the covariance of the source artificial noise (trace one).
    """

    selected_antenna: int
    h_ab: np.ndarray
    t1: np.ndarray
    null_basis: np.ndarray
    c_eta: np.ndarray

    @property
    def n_a(self) -> int:
        return self.t1.shape[0]


def select_antenna(h_ab_full: np.ndarray) -> int:
    """Column of largest norm; ties go to the smallest index."""
    h = np.asarray(h_ab_full)
    if h.ndim != 2 or h.size == 0:
        raise ValueError("expected a non-empty N_A x N_B matrix")
    # argmax returns the first maximum
    return int(np.argmax(np.sum(np.abs(h) ** 2, axis=0)))


def orthonormal_complement(t1: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the complement of unit vector ``t1``.

    Uses the Householder reflector mapping e1 onto t1 (up to phase); its
    remaining columns are the basis.
    """
    t1 = np.asarray(t1, dtype=complex)
    n = t1.shape[0]
    x0 = t1[0]
    phase = x0 / abs(x0) if abs(x0) > 0 else 1.0
    v = t1.copy()
    v[0] += phase  # v = t1 - alpha e1 with alpha = -phase
    refl = np.eye(n, dtype=complex) - 2.0 * np.outer(v, v.conj()) / np.vdot(v, v).real
    return refl[:, 1:]


def san_covariance(t1: np.ndarray) -> np.ndarray:
    """Closed form (I - t1 t1^H) / (N_A - 1)."""
    n = t1.shape[0]
    return (np.eye(n) - np.outer(t1, t1.conj())) / (n - 1)


def build_beamformer(h_ab_full: np.ndarray, j: int) -> Beamformer:
    h_ab = np.asarray(h_ab_full)[:, j].astype(complex)
    norm = np.linalg.norm(h_ab)
    if not norm > 0:
        raise DegenerateChannelError(f"column {j} of H_AB is zero")
    if h_ab.shape[0] < 2:
        raise ValueError("source needs at least two antennas for a noise subspace")
    t1 = h_ab / norm
    basis = orthonormal_complement(t1)
    # equal power on every null-space direction
    c_eta = basis @ basis.conj().T / basis.shape[1]
    return Beamformer(j, h_ab, t1, basis, c_eta)


def snr_bob(phi: float, p_src: float, h_ab_hat: np.ndarray, sigma2_b: float) -> float:
    return phi * p_src * float(np.vdot(h_ab_hat, h_ab_hat).real) / sigma2_b


def snr_eve_k(phi: float, p_src: float, p_dan: float, h_ae_hat: np.ndarray,
              h_be_hat: np.ndarray, bf: Beamformer, n_b: int,
              sigma2_e: float = 0.0) -> float:
    """SNR on one eavesdropper antenna.

    With ``sigma2_e=0`` the denominator holds only the two artificial-noise
    terms. Passing Eve's noise variance adds receiver noise. Returns
    ``math.inf`` when the denominator vanishes.
    """
    signal = phi * p_src * abs(np.vdot(h_ae_hat, bf.t1)) ** 2
    san = (1.0 - phi) * p_src * float(np.vdot(h_ae_hat, bf.c_eta @ h_ae_hat).real)
    dan = p_dan / (n_b - 1) * float(np.vdot(h_be_hat, h_be_hat).real)
    denom = san + dan + sigma2_e
    if denom <= 0.0:
        return math.inf if signal > 0 else 0.0
    return signal / denom
