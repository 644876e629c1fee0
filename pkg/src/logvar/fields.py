"""Random test fields."""
from __future__ import annotations

import numpy as np

from .grid import Field, Grid


def bump_mixture(grid: Grid, rng: np.random.Generator, n_bumps=(1, 4), signed=True,
                 width=(0.4, 2.0), spread=3.0, amplitude=(0.2, 3.0), min_separation=0.0) -> Field:
    """Sum of Gaussian bumps with random centers, widths, amplitudes and signs.

    ``min_separation`` (in units of the larger width) keeps centers apart so the
    result is not close to a single Gaussian profile.
    """
    k = int(rng.integers(n_bumps[0], n_bumps[1] + 1))
    centers, widths = [], []
    for _ in range(1000 * k):
        if len(centers) == k:
            break
        c = rng.uniform(-spread, spread, grid.dim)
        w = rng.uniform(*width)
        if all(np.linalg.norm(c - c0) >= min_separation * max(w, w0) for c0, w0 in zip(centers, widths)):
            centers.append(c)
            widths.append(w)
    else:
        if len(centers) < k:
            raise ValueError("could not place bumps at the requested separation")
    vals = np.zeros(grid.shape)
    for c, w in zip(centers, widths):
        r2 = sum((x - ci) ** 2 for x, ci in zip(grid.coords, c))
        sign = rng.choice([-1.0, 1.0]) if signed else 1.0
        vals += sign * rng.uniform(*amplitude) * np.exp(-0.5 * r2 / w**2)
    return Field(grid, vals, zero_boundary=True)


def smooth_direction(grid: Grid, rng: np.random.Generator) -> Field:
    """Random smooth perturbation direction (localized, signed)."""
    return bump_mixture(grid, rng, n_bumps=(2, 4), signed=True, amplitude=(0.1, 1.0))
