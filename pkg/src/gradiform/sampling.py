"""Deterministic quasi-random sample plans in the domain ball."""
from __future__ import annotations

import numpy as np
from scipy.stats import qmc


def sample_ball(dim: int, count: int, radius: float = 1.0,
                seed: int = 0) -> np.ndarray:
    """count quasi-random (scrambled Halton) points in the ball |x| <= radius.

    Deterministic for a fixed (dim, count, radius, seed).
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    if dim == 1:
        u = qmc.Halton(d=1, scramble=True, seed=seed).random(count)
        return radius * (2.0 * u - 1.0)
    # direction from a Gaussian quantile map, length from the radial CDF
    u = qmc.Halton(d=dim + 1, scramble=True, seed=seed).random(count)
    from scipy.special import ndtri
    z = ndtri(np.clip(u[:, :dim], 1e-12, 1 - 1e-12))
    norms = np.linalg.norm(z, axis=1)
    norms[norms == 0] = 1.0
    r = radius * u[:, dim] ** (1.0 / dim)
    return (z / norms[:, None]) * r[:, None]
