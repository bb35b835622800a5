"""Jacobian determinants of F at its zeros xi_{i,j} = (2^i, 1/j).

    det J_F(xi_{i,j}) = g'(2^i) * d_w f(2^i, 1/j)
                      = (-2^-i g_i(2^i)) * (2^(-c_i^2) g_i(2^i) prod_{l != j} (1/j - 1/l))

and |prod_{l != j} (1/j - 1/l)| = (j-1)! (c-j)! / (j^(c-2) c!).
"""

import math
from typing import Optional

import numpy as np
from scipy.special import gammaln

from ..maps.cornalba import log2_g_slice, mu_cs_bounds
from ..maps.models import CSParams
from ..utils.errors import InputValidationError
from ..utils.logger import get_logger
from .models import FalsificationReport, FalsificationRow, JacobianDecay

logger = get_logger()

LN2 = math.log(2.0)
# beyond this degree the max over j uses |P'(1/j)| <= 1
EXACT_J_SCAN = 4096


def _log2_derivative_factor(j, c: int):
    """log2 |prod_{l != j, l <= c} (1/j - 1/l)|; `j` may be an array."""
    j = np.asarray(j, dtype=np.float64)
    return (gammaln(j) + gammaln(c - j + 1.0) - gammaln(c + 1.0) - (c - 2) * np.log(j)) / LN2


def log2_det(i: int, j: int, params: CSParams) -> float:
    c = params.value(i)
    if c is None:
        # c_i^2 alone drives this below every double
        return -math.inf
    if not 1 <= j <= c:
        raise InputValidationError(f"need 1 <= j <= c_i = {c}, got j={j}", user_message="j must lie in 1..c_i")
    return -i + 2.0 * log2_g_slice(i) - float(c) * c + float(_log2_derivative_factor(j, c))


def jacobian_decay(i: int, j: int, params: CSParams) -> JacobianDecay:
    """log2 |det J_F| at (2^i, 1/j) against -c_i^2 + i^2 - 2i."""
    if i < 1:
        raise InputValidationError(f"slice index must be >= 1, got {i}", user_message="i must be at least 1")
    c = params.value(i)
    value = log2_det(i, j, params)
    threshold = -math.inf if c is None else -float(c) * c + i * i - 2 * i
    verdict = value < threshold if c is not None else True
    return JacobianDecay(i=i, j=j, log2_det=value, log2_threshold=threshold, verdict=verdict)


def _log2_det_max(i: int, params: CSParams) -> float:
    c = params.value(i)
    if c is None:
        return -math.inf
    base = -i + 2.0 * log2_g_slice(i) - float(c) * c
    if c > EXACT_J_SCAN:
        return base
    return base + float(np.max(_log2_derivative_factor(np.arange(1, c + 1), c)))


def falsification(c: float = 1.0, b: float = 1.0, params: Optional[CSParams] = None,
                  max_i: int = 12) -> FalsificationReport:
    """Where |det J_F| >= c mu(F, |xi|)^-b fails at every zero of a slice.

    mu is replaced by its analytic upper bound, so a failure here is a
    failure for the true mu as well. The cutoff is the first i from which
    every slice up to max_i fails.
    """
    if not c > 0 or b < 0:
        raise InputValidationError(f"need c > 0 and b >= 0, got c={c}, b={b}",
                                   user_message="c must be positive and b non-negative")
    params = params or CSParams()
    rows = []
    for i in range(1, max_i + 1):
        if params.max_index() is not None and i > params.max_index():
            break
        det_max = _log2_det_max(i, params)
        rhs = math.log2(c) - b * mu_cs_bounds(math.sqrt(4.0 ** i + 1.0))[1]
        rows.append(FalsificationRow(i=i, log2_det_max=det_max, log2_rhs=rhs, fails=det_max < rhs))
    cutoff = None
    for row in reversed(rows):
        if not row.fails:
            break
        cutoff = row.i
    logger.info("Jacobian falsification", c=c, b=b, cutoff=cutoff, slices=len(rows))
    return FalsificationReport(c=c, b=b, rows=rows, cutoff=cutoff)
