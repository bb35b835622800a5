"""The Cornalba-Shiffman construction with certified truncation.

    g(z)     = prod_{i>=1} (1 - z/2^i)
    g_i(z)   = g(z) without the i-th factor
    P_c(w)   = prod_{j=1..c} (w - 1/j)
    f(z, w)  = sum_{i>=1} 2^(-c_i^2) g_i(z) P_{c_i}(w)
    F(z, w)  = (g(z), f(z, w))

Every truncation index comes from an explicit tail bound, never from
"the terms got small".
"""

import math
from functools import lru_cache
from typing import List, Optional, Tuple

import mpmath
import numpy as np

from config.settings import get_setting
from ..arith.xnum import LogComplex, XArray
from ..utils.logger import get_logger
from .models import CSParams

logger = get_logger()

# terms whose bound is below 2^FLOOR_LOG2 (and 64 bits under the first term) are dropped
FLOOR_LOG2 = -4096.0
MAX_SERIES_TERMS = 4096


@lru_cache(maxsize=None)
def c1_constant() -> float:
    """C_1 = prod_{i>=1} (1 + 2^-i) ~ 2.38423."""
    with mpmath.workdps(40):
        return float(mpmath.qp(-0.5, 0.5))


@lru_cache(maxsize=None)
def q_constant() -> float:
    """prod_{i>=1} (1 - 2^-i) ~ 0.288788."""
    with mpmath.workdps(40):
        return float(mpmath.qp(0.5, 0.5))


@lru_cache(maxsize=None)
def c0_constant() -> float:
    """C_0 = 1/2 prod_{i>=1} (1 - 3 * 2^-(i+1)) ~ 0.0523."""
    with mpmath.workdps(40):
        return float(mpmath.qp(0.75, 0.5) / 2)


def mu_cs_bounds(r: float) -> Tuple[float, float]:
    """Two-sided bound on log2 mu(F, r) for r >= 2, valid for every sequence c_i."""
    if r < 2:
        raise ValueError(f"r must be at least 2, got {r}")
    lr = math.log2(r)
    constant = 4.0 + math.log2(c1_constant())
    return 0.5 * lr * lr - 1.5 * lr + 1.0, 1.5 * lr * lr + 3.5 * lr + constant


def log2_g_slice(i: int) -> float:
    """log2 |g_i(2^i)| from the closed factorization prod_{m<i}(2^m - 1) * prod_{m>=1}(1 - 2^-m)."""
    if i < 1:
        raise ValueError("slice index must be >= 1")
    m = np.arange(1, i, dtype=np.float64)
    return (i - 1) * i / 2.0 + float(np.sum(np.log1p(-np.exp2(-m)))) / math.log(2.0) + math.log2(q_constant())


def g_slice(i: int) -> LogComplex:
    """Signed g_i(2^i) as an extended value; sign is (-1)^(i-1)."""
    mantissa_log = log2_g_slice(i)
    exp2 = math.floor(mantissa_log)
    sign = -1.0 if (i - 1) % 2 else 1.0
    return LogComplex.normalize(sign * 2.0 ** (mantissa_log - exp2), 0.0, exp2)


class _Dual:
    """Value with optional partial derivatives in z and w."""

    __slots__ = ("v", "dz", "dw")

    def __init__(self, v: XArray, dz: Optional[XArray] = None, dw: Optional[XArray] = None):
        self.v, self.dz, self.dw = v, dz, dw

    def __mul__(self, other: "_Dual") -> "_Dual":
        return _Dual(self.v * other.v,
                     _plus(_times(self.dz, other.v), _times(other.dz, self.v)),
                     _plus(_times(self.dw, other.v), _times(other.dw, self.v)))

    def __add__(self, other: "_Dual") -> "_Dual":
        return _Dual(self.v + other.v, _plus(self.dz, other.dz), _plus(self.dw, other.dw))

    def scale2(self, k: int) -> "_Dual":
        return _Dual(self.v.scale2(k),
                     None if self.dz is None else self.dz.scale2(k),
                     None if self.dw is None else self.dw.scale2(k))

    def masked(self, keep: np.ndarray) -> "_Dual":
        zero = XArray.zeros(self.v.shape)
        return _Dual(XArray.where(keep, self.v, zero),
                     None if self.dz is None else XArray.where(keep, self.dz, zero),
                     None if self.dw is None else XArray.where(keep, self.dw, zero))


def _times(a: Optional[XArray], b: XArray) -> Optional[XArray]:
    return None if a is None else a * b


def _plus(a: Optional[XArray], b: Optional[XArray]) -> Optional[XArray]:
    if a is None:
        return b
    if b is None:
        return a
    return a + b


def truncation_indices(z: XArray, tol: float) -> np.ndarray:
    """Per entry, the smallest N with 2|z| 2^-N <= tol/2 (so 2^-N |z| <= 1/2 too); 0 at z = 0."""
    tol = min(tol, 0.5)
    lz = z.log2_abs()
    finite = np.isfinite(lz)
    safe = np.where(finite, lz, 0.0)
    return np.where(finite, np.maximum(0, np.ceil(safe + 2.0 - math.log2(tol))), 0).astype(np.int64)


def log2_growth_bound(z: XArray) -> np.ndarray:
    """log2 of prod_{j>=1} (1 + |z| 2^-j), an upper bound for |g| and every |g_i|."""
    lz = z.log2_abs()
    finite = np.isfinite(lz)
    top = float(np.max(lz[finite])) if np.any(finite) else 0.0
    terms = max(1, int(math.ceil(top)) + 60)
    total = np.zeros(z.shape)
    safe = np.where(finite, lz, -np.inf)
    for j in range(1, terms + 1):
        total += np.logaddexp2(0.0, safe - j)
    # tail: sum_{j>J} log2(1 + x_j) <= |z| 2^-J / ln 2 <= 2^-58
    return np.where(finite, total + 2.0 ** -58, 0.0)


def _factors(z: XArray, n_entry: np.ndarray, derivative: bool) -> List[_Dual]:
    """Factors 1 - z 2^-i up to the largest index; past its own index an entry's factor is exactly 1."""
    shape = z.shape
    one = XArray.ones(shape)
    factors = []
    for i in range(1, int(np.max(n_entry, initial=0)) + 1):
        active = n_entry >= i
        value = XArray.where(active, one - z.scale2(-i), one)
        dz = XArray.where(active, -XArray.pow2(-i, shape), XArray.zeros(shape)) if derivative else None
        factors.append(_Dual(value, dz))
    return factors


def _g_products(z: XArray, tol: float, needed: int, derivative: bool) -> Tuple[_Dual, List[_Dual]]:
    """Truncated g and the slice products g_1..g_needed (prefix/suffix, no division)."""
    factors = _factors(z, truncation_indices(z, tol), derivative)
    n_trunc = len(factors)
    shape = z.shape
    one = _Dual(XArray.ones(shape), XArray.zeros(shape) if derivative else None)

    prefix = [one]
    for factor in factors:
        prefix.append(prefix[-1] * factor)
    g = prefix[-1]

    keep = min(needed, n_trunc)
    suffix = {n_trunc + 1: one}
    running = one
    for i in range(n_trunc, 0, -1):
        running = factors[i - 1] * running
        if i <= keep + 1:
            suffix[i] = running
    slices = []
    for i in range(1, needed + 1):
        if i <= n_trunc:
            slices.append(prefix[i - 1] * suffix[i + 1])
        else:
            # factor i is within tol of 1
            slices.append(g)
    return g, slices


def cs_g_array(z: XArray, tol: float, derivative: bool = False) -> Tuple[XArray, Optional[XArray]]:
    """g on an array, relative tail error <= tol; optionally g'."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    g, _ = _g_products(z, tol, 0, derivative)
    return g.v, g.dz


def cs_g(z: LogComplex, tol: float) -> LogComplex:
    """g(z) truncated where the relative tail error is at most tol."""
    value, _ = cs_g_array(XArray.from_scalars([z]), tol)
    return value.item(0)


def _series_plan(params: CSParams, log2_gb: np.ndarray, big_l: np.ndarray) -> Tuple[int, np.ndarray]:
    """Most terms any entry can use, from the absolute floor alone, plus that floor."""
    floor = None
    for i in range(1, MAX_SERIES_TERMS + 1):
        if params.max_index() is not None and i > params.max_index():
            return i - 1, floor
        c = params.value(i)
        if c is None or c * c >= get_setting("exponent_limit", 2 ** 62):
            return i - 1, floor
        bound = log2_gb + c * big_l - float(c) * c + 1.0
        if floor is None:
            floor = np.minimum(FLOOR_LOG2, bound - 64.0)
        if np.all((c >= big_l + 1.0) & (bound < floor)):
            return i - 1, floor
    logger.warning("Series term cap reached", cap=MAX_SERIES_TERMS)
    return MAX_SERIES_TERMS, floor


def cs_F_array(z: XArray, w: XArray, params: CSParams, jacobian: bool = False):
    """Both components of F on arrays.

    Returns ``(g, f, jac)`` where ``jac`` is None or the 2x2 nested list
    [[dg/dz, dg/dw], [df/dz, df/dw]].

    The series for f stops at the first I with c_{I+1} >= L + 1, where
    L = log2(|w| + 1), and 2 Gb 2^(c L - c^2) <= tol * scale at c = c_{I+1}.
    Gb bounds every |g_i| and (|w| + 1)^c bounds |P_c(w)|. From c >= L + 1 on
    consecutive terms shrink at least 8-fold, so twice the first omitted bound
    covers the whole tail.
    """
    tol = params.truncation_rel_err
    shape = z.shape
    log2_gb = log2_growth_bound(z)
    big_l = np.logaddexp2(0.0, w.log2_abs())
    planned, floor = _series_plan(params, log2_gb, big_l)
    g, slices = _g_products(z, tol, planned, jacobian)

    w_dual = _Dual(w, None, XArray.ones(shape) if jacobian else None)
    poly = _Dual(XArray.ones(shape), None, XArray.zeros(shape) if jacobian else None)
    partial = _Dual(XArray.zeros(shape),
                    XArray.zeros(shape) if jacobian else None,
                    XArray.zeros(shape) if jacobian else None)
    max_log = np.full(shape, -np.inf)
    done = np.zeros(shape, dtype=bool)
    gap = float(get_setting("absorption_gap_bits", 100))
    log2_tol = math.log2(tol)
    c_prev = 0

    for i in range(1, planned + 1):
        c = params.value(i)
        bound = log2_gb + c * big_l - float(c) * c + 1.0
        scale = np.maximum(partial.v.log2_abs(), max_log)
        done |= (c >= big_l + 1.0) & ((bound <= log2_tol + scale) | (bound < floor))
        if np.all(done):
            break
        for j in range(c_prev + 1, c + 1):
            shift = XArray.full(1.0 / j, shape)
            # |w| far below 1/j is within tol of dropping w; not an absorption
            step = w - shift
            step = XArray(step.mant, step.exp2, w.absorbed, normalized=True)
            poly = poly * _Dual(step, None, w_dual.dw)
        c_prev = c
        term = (slices[i - 1] * poly).scale2(-c * c)
        term_log = term.v.log2_abs()
        # far below the largest term: inside the error budget, not an absorption
        keep = ~done & (term_log >= scale - gap)
        partial = partial + term.masked(keep)
        max_log = np.maximum(max_log, np.where(keep, term_log, -np.inf))

    jac = None
    if jacobian:
        zero = XArray.zeros(shape)
        jac = [[g.dz, zero], [partial.dz, partial.dw]]
    return g.v, partial.v, jac


def cs_F(z: LogComplex, w: LogComplex, params: CSParams) -> Tuple[LogComplex, LogComplex]:
    """F(z, w) = (g(z), f(z, w)) at one point."""
    g, f, _ = cs_F_array(XArray.from_scalars([z]), XArray.from_scalars([w]), params)
    return g.item(0), f.item(0)


def slice_count_inside(i: int, r: float, c_i: int) -> int:
    """How many zeros (2^i, 1/j), j <= c_i, lie in the closed ball B_r."""
    room = r * r - 4.0 ** i
    if room < 0:
        return 0
    if room >= 1.0:
        return c_i
    j_min = math.ceil(1.0 / math.sqrt(room)) if room > 0 else c_i + 1
    return max(0, c_i - j_min + 1)


def classical_zero_count(r: float, params: CSParams) -> Tuple[Optional[int], float]:
    """Number of zeros of F in B_r, as (exact count or None, log2 of the count).

    The count grows as fast as the sequence c_i does; the exact integer is
    returned whenever every contributing c_i is known exactly.
    """
    total = 0
    log_terms = []
    exact = True
    i = 1
    while 4.0 ** i <= r * r:
        if params.max_index() is not None and i > params.max_index():
            logger.warning("Explicit c-sequence shorter than the slices inside B_r", r=r, last_index=i - 1)
            break
        c_i = params.value(i)
        if c_i is None:
            exact = False
            log_terms.append(params.log2_value(i))
        else:
            count = slice_count_inside(i, r, c_i)
            total += count
            if count:
                log_terms.append(math.log2(count))
        i += 1
    if not log_terms:
        return 0, float("-inf")
    log_total = float(np.logaddexp2.reduce(np.array(log_terms)))
    return (total if exact else None), log_total


def cs_zeros_inside(r: float, params: CSParams, limit: int = 10 ** 6) -> Optional[List[Tuple[complex, complex]]]:
    """Explicit zero list (2^i, 1/j) in B_r, or None when it would exceed `limit`."""
    count, _ = classical_zero_count(r, params)
    if count is None or count > limit:
        return None
    zeros = []
    i = 1
    while 4.0 ** i <= r * r:
        if params.max_index() is not None and i > params.max_index():
            break
        c_i = params.value(i)
        for j in range(1, c_i + 1):
            if 4.0 ** i + 1.0 / (j * j) <= r * r:
                zeros.append((complex(2.0 ** i), complex(1.0 / j)))
        i += 1
    return zeros
