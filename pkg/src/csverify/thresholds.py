"""Thresholds, certified intervals, separating hyperplanes and envelopes for F.

All logs are base 2. Exponents of the form (i-1)i/2 - c_i^2 are kept as
Python integers while c_i is known exactly.
"""

import math
from typing import Optional, Tuple, Union

import numpy as np

from ..arith.xnum import XArray, log2_norm
from ..maps.cornalba import c0_constant, cs_F_array
from ..maps.models import CSParams
from ..utils.errors import InputValidationError
from ..utils.logger import get_logger
from .models import ContainmentResult, CSStructure, SeparationResult

logger = get_logger()

SAMPLE_CAP_LOG2 = 20.0
COMPARE_SLACK = 1e-9
MINORANT_TERMS_PAST_K = 80


def check_delta(delta: float) -> float:
    if not delta > 0:
        raise InputValidationError("delta must be positive", user_message="delta must be positive")
    return math.log2(delta)


def c_square(params: CSParams, i: int) -> Tuple[Optional[int], float, Union[int, float]]:
    """(exact c_i or None, log2 c_i, c_i^2 as int when exact else float)."""
    c = params.value(i)
    log2_c = params.log2_value(i)
    if c is not None:
        return c, log2_c, c * c
    return None, log2_c, 2.0 ** (2.0 * log2_c) if log2_c < 511 else math.inf


def k_merge(delta: float) -> int:
    """Smallest i >= 1 with delta >= 2^(-i(i+1)/2)."""
    log2_delta = check_delta(delta)
    i = 1
    while log2_delta < -i * (i + 1) / 2.0:
        i += 1
    return i


def k_sep(delta: float) -> int:
    """Smallest k >= 1 with C_0 2^((k-1)k/2) > delta."""
    log2_delta = check_delta(delta)
    log2_c0 = math.log2(c0_constant())
    k = 1
    while not log2_c0 + (k - 1) * k / 2.0 > log2_delta:
        k += 1
    return k


def cs_structure(delta: float, params: CSParams) -> CSStructure:
    return CSStructure(c_spec=params.c_spec, delta=delta, c0=c0_constant(),
                       k_merge=k_merge(delta), k_sep=k_sep(delta))


def log2_b(i: int, delta: float, params: CSParams) -> float:
    """log2 of b_i = 2^(c_i - (i-1)i/(2 c_i)) delta^(1/c_i)."""
    c, log2_c, _ = c_square(params, i)
    if c is None:
        return math.inf if log2_c > 1023 else 2.0 ** log2_c
    return c - (i - 1) * i / (2.0 * c) + math.log2(delta) / c


def containment_hypothesis(i: int, delta: float, params: CSParams) -> bool:
    """delta >= 2^((i-1)i/2 - c_i^2)."""
    log2_delta = check_delta(delta)
    _, _, c_sq = c_square(params, i)
    return log2_delta >= (i - 1) * i // 2 - c_sq if isinstance(c_sq, int) else True


def interval_containment(i: int, delta: float, params: CSParams, samples: int = 64) -> ContainmentResult:
    """Certify {2^i} x [0, b_i] inside {|F| <= delta} and spot-check it on F itself."""
    if i < 1:
        raise InputValidationError(f"slice index must be >= 1, got {i}", user_message="i must be at least 1")
    hypothesis = containment_hypothesis(i, delta, params)
    b_log2 = log2_b(i, delta, params)
    c, _, _ = c_square(params, i)
    result = ContainmentResult(i=i, c_i=c, hypothesis=hypothesis, log2_b=b_log2)
    if not hypothesis or samples <= 0 or c is None:
        return result
    top = 2.0 ** min(b_log2, SAMPLE_CAP_LOG2)
    w = XArray.from_complex(np.linspace(0.0, top, samples))
    z = XArray.pow2(i, w.shape)
    g, f, _ = cs_F_array(z, w, params)
    values = log2_norm([g, f])
    sample_max = float(np.max(values))
    result.samples = samples
    result.sample_max_log2 = sample_max
    result.sample_ok = sample_max <= math.log2(delta) + COMPARE_SLACK
    if not result.sample_ok:
        logger.warning("Sampled |F| above delta on a certified interval", i=i, delta=delta, log2_max=sample_max)
    return result


def log2_minorant(k: int) -> float:
    """log2 prod_i |1 - 2^-i x| at x = 2^k + 2^(k-1)."""
    total = 0.0
    for i in range(1, k + MINORANT_TERMS_PAST_K + 1):
        t = math.ldexp(1.5, k - i)
        total += math.log2(t - 1.0) if t > 1.0 else math.log1p(-t) / math.log(2.0)
    return total


def separation_check(k: int, delta: float, samples: int = 0, params: Optional[CSParams] = None) -> SeparationResult:
    """True iff C_0 2^((k-1)k/2) > delta, so {|F| <= delta} misses Re z = 2^k + 2^(k-1)."""
    if k < 1:
        raise InputValidationError(f"k must be >= 1, got {k}", user_message="k must be at least 1")
    log2_delta = check_delta(delta)
    bound = math.log2(c0_constant()) + (k - 1) * k / 2.0
    minorant = log2_minorant(k)
    holds = bound > log2_delta
    result = SeparationResult(
        k=k, delta=delta, holds=holds, log2_bound=bound, log2_minorant=minorant,
        # the chain |F| >= |g| >= h(Re z) >= C_0 2^((k-1)k/2); equality at k <= 2
        minorant_ok=minorant >= bound - 1e-12 and (not holds or minorant > log2_delta),
    )
    if samples > 0:
        params = params or CSParams()
        x = math.ldexp(1.5, k)
        y = np.linspace(-x, x, samples)
        angles = 2.0 * np.pi * np.arange(samples) / samples
        w = np.linspace(0.0, x, samples) * np.exp(1j * angles)
        g, f, _ = cs_F_array(XArray.from_complex(x + 1j * y), XArray.from_complex(w), params)
        sample_min = float(np.min(log2_norm([g, f])))
        result.samples = samples
        result.sample_min_log2 = sample_min
        result.sample_ok = sample_min > log2_delta if holds else None
    return result


def upper_envelope(r: float, delta: float, params: CSParams) -> float:
    """Three-case upper estimate of zeta(F, r, delta)."""
    if not r >= 2:
        raise InputValidationError(f"r must be at least 2, got {r}", user_message="r must be at least 2")
    log2_delta = check_delta(delta)
    lr = math.log2(r)
    if log2_delta >= -1.0:
        return lr
    if log2_delta < -lr * (lr + 1.0) / 2.0:
        return _sum_c(params, lambda i: i <= lr)
    root = math.sqrt(-2.0 * log2_delta)
    return lr + 2.0 - root + _sum_c(params, lambda i: i < root)


def _sum_c(params: CSParams, keep) -> float:
    total = 0
    i = 1
    while keep(i):
        if params.max_index() is not None and i > params.max_index():
            break
        c = params.value(i)
        if c is None:
            return math.inf
        total += c
        i += 1
    return float(total) if total < 2 ** 1023 else math.inf


def lower_envelope(r: float, delta: float) -> float:
    """Two-case lower estimate of zeta(F, r, delta); 0 where it gives nothing."""
    if not r >= 2:
        raise InputValidationError(f"r must be at least 2, got {r}", user_message="r must be at least 2")
    log2_delta = check_delta(delta)
    c0 = c0_constant()
    lr = math.log2(r)
    if delta <= c0:
        return max(0.0, math.floor(lr) - 1.0)
    if log2_delta <= math.log2(c0) + lr * (lr - 1.0) / 2.0:
        return max(0.0, math.floor(lr) - math.sqrt(2.0 * log2_delta - 2.0 * math.log2(c0)) - 2.0)
    return 0.0
