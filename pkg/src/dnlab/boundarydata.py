"""Boundary Dirichlet data generators (constants and seeded trig polynomials)."""

from __future__ import annotations

import numpy as np

from .grid import Grid


def constant_data(grid: Grid, value: float) -> np.ndarray:
    return np.full(grid.n_boundary, float(value))


def trig_data(grid: Grid, cos_coeffs, sin_coeffs) -> np.ndarray:
    """Trigonometric polynomial in the perimeter coordinate.

    f(s) = sum_d cos_coeffs[d-1] cos(2 pi d s / P) + sin_coeffs[d-1] sin(...).
    """
    s = grid.boundary_arclength()
    period = 2.0 * (grid.lx + grid.ly)
    f = np.zeros(grid.n_boundary)
    for d, c in enumerate(cos_coeffs, start=1):
        f += c * np.cos(2 * np.pi * d * s / period)
    for d, c in enumerate(sin_coeffs, start=1):
        f += c * np.sin(2 * np.pi * d * s / period)
    return f


def random_trig_data(grid: Grid, rng: np.random.Generator, amplitude: float,
                     degree: int = 4) -> np.ndarray:
    """Smooth seeded boundary data with sup norm exactly `amplitude`."""
    cos_c = rng.uniform(-1.0, 1.0, degree)
    sin_c = rng.uniform(-1.0, 1.0, degree)
    f = trig_data(grid, cos_c, sin_c)
    peak = np.max(np.abs(f))
    if peak == 0.0:
        return constant_data(grid, amplitude)
    return f * (amplitude / peak)
