"""One-variable slices z = 2^i of the Cornalba-Shiffman map.

On a slice every g_k with k != i vanishes, so

    |F(2^i, w)| = 2^(-c_i^2) |g_i(2^i)| |P_{c_i}(w)|

and the sublevel set of F meeting the slice is a sublevel set of one
polynomial in w.
"""

import math
from typing import List, Optional, Tuple

from ..arith.xnum import LogComplex, XArray
from ..maps.builtin import EntireMap, Point
from ..maps.cornalba import cs_g, g_slice, log2_g_slice, slice_count_inside
from ..maps.models import CSParams, MapKind
from ..topology.grid import coarse_count
from ..utils.errors import InputValidationError
from ..utils.logger import get_logger
from .models import CSStructure, SliceCount

logger = get_logger()

# grid counts above this degree cost more than they tell; the zero count is used instead
GRID_SLICE_MAX_C = 64
SLICE_RES_START = 64
SLICE_RES_MAX = 1024
SLICE_DISC_MARGIN = 1.05
# r^2 must stay a finite double
MAX_LOG2_RADIUS = 500.0


class CSSliceMap(EntireMap):
    """w -> f(2^i, w) on the slice z = 2^i."""

    kind = MapKind.CS_F

    def __init__(self, i: int, params: CSParams):
        c = params.value(i)
        if c is None:
            raise InputValidationError(f"c_{i} is too large for an explicit slice polynomial",
                                       user_message="Slice polynomials need an exactly known c_i")
        super().__init__(1, 1, "cs_slice", {"i": i, "c_spec": params.c_spec})
        self.i = i
        self.c = c
        self.scale: LogComplex = g_slice(i)

    def _product(self, w: XArray, derivative: bool) -> Tuple[XArray, Optional[XArray]]:
        p = XArray.ones(w.shape)
        dp = XArray.zeros(w.shape) if derivative else None
        for j in range(1, self.c + 1):
            factor = w - XArray.full(1.0 / j, w.shape)
            if derivative:
                dp = dp * factor + p
            p = p * factor
        return p, dp

    def _scaled(self, value: XArray) -> XArray:
        return (value * XArray.full(self.scale, value.shape)).scale2(-self.c * self.c)

    def evaluate_array(self, coords):
        p, _ = self._product(coords[0], False)
        return [self._scaled(p)]

    def jacobian_array(self, coords):
        _, dp = self._product(coords[0], True)
        return [[self._scaled(dp)]]

    def known_zeros(self, r: float) -> List[Point]:
        return [(complex(1.0 / j),) for j in range(1, self.c + 1) if 1.0 / j <= r]


def check_radius(r: float) -> float:
    """log2 r after range checks."""
    if not r >= 2:
        raise InputValidationError(f"r must be at least 2, got {r}", user_message="r must be at least 2")
    lr = math.log2(r)
    if lr > MAX_LOG2_RADIUS:
        raise InputValidationError(f"log2 r = {lr} exceeds {MAX_LOG2_RADIUS}",
                                   user_message=f"r must not exceed 2^{int(MAX_LOG2_RADIUS)}")
    return lr


def slice_room(i: int, r: float) -> float:
    """Radius of the disc {w : (2^i, w) in B_r}; 0 when the slice misses the ball."""
    x = 2.0 ** i
    return math.sqrt((r - x) * (r + x)) if r > x else 0.0


def slice_indices(r: float, params: CSParams) -> List[int]:
    """Slices meeting B_r, capped by the length of an explicit sequence."""
    indices = []
    i = 1
    while 2.0 ** i < r:
        if params.max_index() is not None and i > params.max_index():
            logger.warning("Explicit c-sequence shorter than the slices inside B_r", r=r, last_index=i - 1)
            break
        indices.append(i)
        i += 1
    return indices


def slice_zeros(i: int, r: float, params: CSParams) -> Optional[int]:
    """Zeros (2^i, 1/j) inside B_r; None when c_i is only known through log2."""
    if not 2.0 ** i < r:
        return 0
    c = params.value(i)
    if c is None:
        return None
    return slice_count_inside(i, r, c)


def g_vanishes(i: int, params: CSParams) -> bool:
    return cs_g(LogComplex.pow2(i), params.truncation_rel_err).is_zero


def sublevel_radius(i: int, delta: float, c: int) -> float:
    """1 + theta^(1/c): outside it |P_c(w)| >= (|w| - 1)^c exceeds theta = delta 2^(c^2) / |g_i(2^i)|."""
    log2_theta = math.log2(delta) + c * c - log2_g_slice(i)
    return 1.0 + 2.0 ** min(log2_theta / c, 1000.0)


def slice_count(i: int, r: float, delta: float, params: CSParams, structure: CSStructure,
                zeros: Optional[int]) -> Tuple[SliceCount, Optional[str]]:
    """Components of the slice sublevel set that carry zeros, plus an assumption note if one was made."""
    if i >= structure.k_merge:
        return SliceCount(i=i, zeros_inside=zeros, components=1, method="merged"), None
    c = params.value(i)
    if c is None or c > GRID_SLICE_MAX_C:
        note = f"slice {i}: c_i too large for a grid count, every zero counted separately"
        return SliceCount(i=i, zeros_inside=zeros, components=zeros or 0, method="classical"), note

    slice_map = CSSliceMap(i, params)
    rho = min(slice_room(i, r), sublevel_radius(i, delta, c) * SLICE_DISC_MARGIN)
    logger.info("Slice grid count", i=i, c=c, rho=rho)
    report = coarse_count(slice_map, rho, delta, res_start=SLICE_RES_START, threads=1,
                          max_res=SLICE_RES_MAX, zeros=slice_map.known_zeros(rho))
    if not report.converged:
        note = f"slice {i}: grid count unconverged at res {report.resolutions[-1]}, every zero counted separately"
        return SliceCount(i=i, zeros_inside=zeros, components=zeros or 0, method="classical",
                          converged=False), note
    return SliceCount(i=i, zeros_inside=zeros, components=report.zeta, method="grid", converged=True), None
