"""Maximum-modulus estimation: sampled lower bounds, analytic upper bounds."""

import math
from typing import Optional

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from ..utils.errors import InputValidationError
from ..utils.logger import get_logger
from ..utils.parallel import ordered_max, parallel_map, resolve_threads
from .builtin import EntireMap
from .models import MaxModulusReport

logger = get_logger()

BLOCK_POINTS = 4096


def _halton(dim: int, count: int) -> np.ndarray:
    """First `count` unscrambled Halton points, skipping the origin."""
    if count <= 0:
        return np.zeros((0, dim))
    sampler = qmc.Halton(d=dim, scramble=False)
    sampler.fast_forward(1)
    return sampler.random(count)


def sample_ball(n: int, r: float, budget: int) -> np.ndarray:
    """Deterministic, nested sample of the closed ball B_r in C^n.

    n = 1: even slots walk the boundary circle by a van der Corput angle
    sequence (angles 0 and pi come first), odd slots fill the disc on rings.
    n >= 2: the 4n axis points +-r, +-ir per coordinate, then Halton points
    pushed to the sphere. A larger budget always extends a smaller one.
    """
    if n == 1:
        boundary = (budget + 1) // 2
        interior = budget // 2
        angles = 2.0 * np.pi * np.concatenate([[0.0], _halton(1, boundary - 1)[:, 0]]) if boundary else np.zeros(0)
        ring_draws = _halton(2, interior)
        radii = r * np.sqrt(ring_draws[:, 0]) if interior else np.zeros(0)
        thetas = 2.0 * np.pi * ring_draws[:, 1] if interior else np.zeros(0)
        points = np.empty(budget, dtype=np.complex128)
        points[0::2] = r * np.exp(1j * angles)
        points[1::2] = radii * np.exp(1j * thetas)
        return points.reshape(-1, 1)

    axis = []
    for k in range(n):
        for value in (r, -r, 1j * r, -1j * r):
            point = np.zeros(n, dtype=np.complex128)
            point[k] = value
            axis.append(point)
    axis = np.array(axis)
    if budget <= len(axis):
        return axis[:budget]
    gaussian = ndtri(_halton(2 * n, budget - len(axis)))
    norms = np.linalg.norm(gaussian, axis=1, keepdims=True)
    unit = gaussian / np.where(norms == 0, 1.0, norms)
    sphere = r * (unit[:, :n] + 1j * unit[:, n:])
    return np.concatenate([axis, sphere])


def mu_estimate(entire_map: EntireMap, r: float, budget: int = 4096, threads: Optional[int] = None) -> MaxModulusReport:
    """Certified sampled lower bound for log2 mu(f, r), plus the analytic upper bound for builtins."""
    if not r > 0:
        raise InputValidationError("r must be positive", user_message="r must be positive")
    if budget < 1:
        raise InputValidationError("budget must be at least 1", user_message="The sample budget must be at least 1")
    points = sample_ball(entire_map.n, r, budget)
    blocks = [points[start:start + BLOCK_POINTS] for start in range(0, len(points), BLOCK_POINTS)]
    logger.info("Estimating maximum modulus", map=entire_map.name, r=r, budget=budget,
                threads=resolve_threads(threads))

    def block_max(block: np.ndarray):
        values, absorbed = entire_map.log2_abs_points(block)
        return float(np.max(values)), bool(np.any(absorbed))

    results = parallel_map(block_max, blocks, threads)
    lower = ordered_max([value for value, _ in results])
    absorbed = any(flag for _, flag in results)
    upper = entire_map.log2_mu_upper(r)
    if absorbed:
        logger.warning("Absorbed terms while sampling the maximum modulus", map=entire_map.name, r=r)
    return MaxModulusReport(
        r=r,
        log2_mu_lower=lower,
        log2_mu_upper=upper,
        upper_note=entire_map.upper_note if upper is not None else None,
        sample_count=len(points),
        absorbed=absorbed,
    )


def log2_mu(entire_map: EntireMap, r: float, budget: int = 4096, threads: Optional[int] = None) -> float:
    """Best available log2 mu(f, r): the analytic bound when present, else the sampled maximum."""
    report = mu_estimate(entire_map, r, budget, threads)
    if report.log2_mu_upper is not None and math.isfinite(report.log2_mu_upper):
        return report.log2_mu_upper
    return report.log2_mu_lower
