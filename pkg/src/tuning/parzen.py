"""One-dimensional Parzen estimators on a bounded parameter range"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
from scipy.stats import truncnorm

from src.tuning.space import ParamRange

# Bandwidth floor as a share of the range width
MIN_BANDWIDTH = 0.01


def _components(points: Sequence[float] | np.ndarray, dim: ParamRange) -> tuple[np.ndarray, np.ndarray]:
    """
    Centers and bandwidths in scale coordinates.

    Each bandwidth is the larger gap to its two sorted neighbours, with the
    range bounds standing in for a missing neighbour, clipped to
    [MIN_BANDWIDTH * width, width]. A lone point therefore gets the larger of
    its distances to the bounds, at least half the width.
    """
    centers = np.asarray(dim.to_scale(np.asarray(points, dtype=np.float64)), dtype=np.float64)
    lo, hi = dim.bounds
    width = dim.width
    order = np.argsort(centers, kind="stable")
    fenced = np.concatenate([[lo], centers[order], [hi]])
    gaps = np.diff(fenced)
    widest = np.maximum(gaps[:-1], gaps[1:])
    sigmas = np.empty_like(centers)
    sigmas[order] = np.clip(widest, MIN_BANDWIDTH * width, width)
    return centers, sigmas


def mixture_pdf(
    points: Sequence[float] | np.ndarray, dim: ParamRange, queries: np.ndarray
) -> np.ndarray:
    """
    Density in scale coordinates at raw-valued `queries`.

    Equal-weight mixture of one truncated Gaussian per point plus the uniform
    prior over the range; every component integrates to 1 on the range.
    """
    queries = np.atleast_1d(np.asarray(queries, dtype=np.float64))
    lo, hi = dim.bounds
    inside = (queries >= dim.lower) & (queries <= dim.upper)
    z = np.asarray(dim.to_scale(np.clip(queries, dim.lower, dim.upper)), dtype=np.float64)

    total = np.full(z.shape, 1.0 / dim.width)
    count = len(points)
    if count:
        centers, sigmas = _components(points, dim)
        a = (lo - centers) / sigmas
        b = (hi - centers) / sigmas
        pdfs = truncnorm.pdf(z[:, None], a, b, loc=centers, scale=sigmas)
        total = total + pdfs.sum(axis=1)
    return np.where(inside, total / (count + 1), 0.0)


def parzen_density(points: Sequence[float] | np.ndarray, dim: ParamRange, query: float) -> float:
    return float(mixture_pdf(points, dim, np.array([query]))[0])


def sample_parzen(
    points: Sequence[float] | np.ndarray,
    dim: ParamRange,
    size: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Raw-valued draws from the same mixture `mixture_pdf` evaluates."""
    lo, hi = dim.bounds
    count = len(points)
    draws = rng.uniform(lo, hi, size=size)
    if count:
        centers, sigmas = _components(points, dim)
        choice = rng.integers(0, count + 1, size=size)
        kernel = choice < count
        if kernel.any():
            c, s = centers[choice[kernel]], sigmas[choice[kernel]]
            draws[kernel] = truncnorm.rvs(
                (lo - c) / s, (hi - c) / s, loc=c, scale=s, random_state=rng
            )
    values = np.asarray(dim.from_scale(draws), dtype=np.float64)
    return np.clip(values, dim.lower, dim.upper)
