"""Rayleigh channel draws, distance path loss and eavesdropper placement.

Every stochastic function takes an explicit ``numpy.random.Generator``; use
:func:`make_rng` to derive independent, reproducible streams from a seed.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

GAUSSIAN_MODES = ("per_complex_entry", "paper_dan")

# Path-loss model is only meaningful beyond its reference distance; nodes
# that coincide (Eve sitting on Bob) are evaluated at this floor.
MIN_DISTANCE = 1.0


class Point2D(NamedTuple):
    x: float
    y: float


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Stream for ``seed`` split along ``key``; distinct keys never overlap."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def sample_gaussian(rng: np.random.Generator, shape, variance: float,
                    mode: str = "per_complex_entry") -> np.ndarray:
    """Circularly-symmetric complex Gaussian array of any shape.

    ``per_complex_entry`` gives E|h|^2 = variance. ``paper_dan`` gives each
    real and imaginary part the variance ``variance`` (E|h|^2 = 2 variance).
    """
    if not variance > 0:
        raise ValueError(f"variance must be positive, got {variance}")
    if mode == "per_complex_entry":
        scale = np.sqrt(variance / 2.0)
    elif mode == "paper_dan":
        scale = np.sqrt(variance)
    else:
        raise ValueError(f"unknown mode {mode!r}; expected one of {GAUSSIAN_MODES}")
    if isinstance(shape, int):
        shape = (shape,)
    parts = rng.standard_normal(tuple(shape) + (2,))
    return scale * (parts[..., 0] + 1j * parts[..., 1])


def sample_gaussian_matrix(rng: np.random.Generator, rows: int, cols: int,
                           variance: float, mode: str = "per_complex_entry") -> np.ndarray:
    if rows < 1 or cols < 1:
        raise ValueError(f"matrix dimensions must be positive, got {rows}x{cols}")
    return sample_gaussian(rng, (rows, cols), variance, mode)


def path_loss_gain(lambda0: float, r, kappa: float):
    """Power gain lambda0 * r**-kappa (works elementwise on arrays)."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError(f"distance must be positive, got {r}")
    g = lambda0 * r ** (-kappa)
    return float(g) if g.ndim == 0 else g


def apply_path_loss(h: np.ndarray, lambda0: float, r, kappa: float) -> np.ndarray:
    """Scale small-scale gains ``h`` by sqrt(lambda0 * r**-kappa).

    ``r`` may be an array broadcasting against the leading axes of ``h``
    (one distance per batch element).
    """
    amp = np.sqrt(path_loss_gain(lambda0, r, kappa))
    if np.ndim(amp):
        amp = np.reshape(amp, np.shape(amp) + (1,) * (np.ndim(h) - np.ndim(amp)))
    return amp * np.asarray(h)


def distance(p: Point2D, q: Point2D) -> float:
    return float(np.hypot(p[0] - q[0], p[1] - q[1]))


def link_distance(p: Point2D, q: Point2D) -> float:
    """Euclidean distance floored at :data:`MIN_DISTANCE` for path-loss use."""
    return max(distance(p, q), MIN_DISTANCE)


def sample_eve_location(rng: np.random.Generator, center: Point2D, radius: float,
                        size=None):
    """Area-uniform point(s) in the disk of ``radius`` around ``center``.

    Returns a :class:`Point2D` when ``size`` is None, otherwise an array of
    shape ``(size, 2)``.
    """
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    n = 1 if size is None else size
    u = rng.random((n, 2))
    r = radius * np.sqrt(u[:, 0])
    ang = 2.0 * np.pi * u[:, 1]
    pts = np.column_stack((center[0] + r * np.cos(ang), center[1] + r * np.sin(ang)))
    if size is None:
        return Point2D(float(pts[0, 0]), float(pts[0, 1]))
    return pts
