"""Degree-0 sublevel persistence of |f| on B_r.

Vertices are grid cells inside B_r, edges join face-adjacent cells and enter
at the larger endpoint value (lower-star filtration). Components are merged
by the elder rule: the younger one dies, ties broken by cell index.
"""

import csv
import math
from collections import Counter
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import ndimage as ndi

from ..bounds.models import BoundCheck
from ..bounds.taylor import bezout_bound
from ..maps.builtin import EntireMap
from ..utils.errors import BoundDomainError, InputValidationError
from ..utils.logger import get_logger
from .grid import Point, SublevelGrid, resolve_zeros, sample_sublevel
from .models import Bar, Barcode, StabilityVerdict

logger = get_logger()

Source = Union[EntireMap, SublevelGrid]


def _elder_rule(values: np.ndarray, inside: np.ndarray) -> List[Tuple[float, float]]:
    """(birth, death) pairs with positive length, death = inf for survivors."""
    shape = values.shape
    flat = values.reshape(-1)
    ok = inside.reshape(-1)
    keyed = np.where(ok, flat, np.inf)
    order = np.argsort(keyed, kind="stable")
    order = order[ok[order]]
    if order.size == 0:
        return []

    strides = [int(np.prod(shape[axis + 1:])) for axis in range(len(shape))]
    coords = [c.tolist() for c in np.unravel_index(np.arange(flat.size), shape)]
    value_of = flat.tolist()
    rank = [-1] * flat.size
    parent = list(range(flat.size))
    oldest = list(range(flat.size))  # per root: the cell that was born first

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    pairs: List[Tuple[float, float]] = []
    for position, cell in enumerate(order.tolist()):
        rank[cell] = position
        level = value_of[cell]
        for axis, stride in enumerate(strides):
            c = coords[axis][cell]
            for step in (-1, 1):
                if not 0 <= c + step < shape[axis]:
                    continue
                other = cell + step * stride
                if rank[other] < 0:
                    continue
                a, b = find(cell), find(other)
                if a == b:
                    continue
                # elder survives; the younger component dies at this level
                if rank[oldest[a]] < rank[oldest[b]]:
                    elder, younger = a, b
                else:
                    elder, younger = b, a
                birth = value_of[oldest[younger]]
                if level > birth:
                    pairs.append((birth, level))
                parent[younger] = elder
    roots = {find(cell) for cell in order.tolist()}
    for root in sorted(roots, key=lambda x: rank[oldest[x]]):
        pairs.append((value_of[oldest[root]], math.inf))
    return pairs


def _aggregate(pairs: List[Tuple[float, float]]) -> Barcode:
    counts = Counter(pairs)
    return Barcode(bars=[Bar(birth=b, death=d, multiplicity=m) for (b, d), m in sorted(counts.items())])


def _as_grid(source: Source, r: Optional[float], res: Optional[int], threads: Optional[int]) -> SublevelGrid:
    if isinstance(source, SublevelGrid):
        return source
    if source.n != 1:
        raise InputValidationError(
            f"barcode0 on a full grid needs n = 1, got n={source.n}",
            user_message="Barcodes are computed for one-variable maps or precomputed fields",
        )
    if r is None or res is None:
        raise InputValidationError("r and res are required for a map", user_message="Pass r and res")
    return sample_sublevel(source, r, 1.0, res, threads)


def pinned_field(grid: SublevelGrid, zeros: Sequence[Point]) -> np.ndarray:
    """|f| per cell with every zero-carrying cell set to 0."""
    values = grid.abs_values()
    for point in zeros:
        cell = grid.zero_cell(point)
        if cell is not None:
            values[cell] = 0.0
    return values


def barcode0(source: Source, r: Optional[float] = None, res: Optional[int] = None,
             threads: Optional[int] = None, zeros: Optional[Sequence[Point]] = None) -> Barcode:
    """Degree-0 barcode of |f| restricted to B_r (or of a precomputed field).

    Basins that carry a zero are born at 0, the true minimum of |f| there, not
    at the sampled minimum of their cells. For a map the zeros are resolved
    here; for a precomputed grid they are pinned only when passed in.
    """
    grid = _as_grid(source, r, res, threads)
    if zeros is None and not isinstance(source, SublevelGrid):
        zeros = resolve_zeros(source, grid.r, threads)
    values = pinned_field(grid, zeros) if zeros else grid.abs_values()
    barcode = _aggregate(_elder_rule(values, grid.inside))
    logger.info("Barcode computed", bars=barcode.total, cells=int(np.count_nonzero(grid.inside)),
                pinned=len(zeros or []))
    return barcode


def count_long_bars(barcode: Barcode, delta: float) -> int:
    """N_delta: bars of length > delta, infinite bars included."""
    if delta < 0:
        raise InputValidationError("delta must be non-negative", user_message="delta must be >= 0")
    return sum(bar.multiplicity for bar in barcode.bars if bar.length > delta)


def bars_alive_at(barcode: Barcode, t: float) -> int:
    return sum(bar.multiplicity for bar in barcode.bars if bar.birth <= t < bar.death)


def components_at(grid: SublevelGrid, t: float) -> int:
    """Face-connected components of {|f| <= t} on the grid."""
    mask = grid.inside & (grid.abs_values() <= t)
    _, count = ndi.label(mask, structure=ndi.generate_binary_structure(mask.ndim, 1))
    return int(count)


def sup_distance(f_grid: SublevelGrid, g_grid: SublevelGrid) -> float:
    """max over shared cells of ||f| - |g||."""
    if f_grid.values.shape != g_grid.values.shape:
        raise InputValidationError("grids differ in shape", user_message="Both functions must share one grid")
    inside = f_grid.inside & g_grid.inside
    if not np.any(inside):
        return 0.0
    a = f_grid.abs_values()[inside]
    b = g_grid.abs_values()[inside]
    with np.errstate(invalid="ignore"):
        diff = np.abs(a - b)
    diff = np.where(np.isnan(diff), np.inf, diff)
    return float(np.max(diff))


def stability_check(f: Source, g: Source, c: float, epsilon: float, r: Optional[float] = None,
                    res: Optional[int] = None, threads: Optional[int] = None) -> StabilityVerdict:
    """N_{2c}(f) <= N_eps(g) whenever sup||f| - |g|| <= c - eps/2 and c > eps/2 > 0."""
    f_grid = _as_grid(f, r, res, threads)
    g_grid = _as_grid(g, r, res, threads)
    distance = sup_distance(f_grid, g_grid)
    reason = None
    if not epsilon > 0:
        reason = "epsilon must be positive"
    elif not c > epsilon / 2.0:
        reason = "need c > epsilon / 2"
    elif distance > c - epsilon / 2.0:
        reason = f"sampled sup distance {distance:.6g} exceeds c - epsilon/2 = {c - epsilon / 2.0:.6g}"
    if reason is not None:
        logger.warning("Stability check inapplicable", reason=reason)
        return StabilityVerdict(verdict="inapplicable", sup_distance=distance, c=c, epsilon=epsilon, reason=reason)
    count_f = count_long_bars(barcode0(f_grid), 2.0 * c)
    count_g = count_long_bars(barcode0(g_grid), epsilon)
    verdict = "holds" if count_f <= count_g else "fails"
    if verdict == "fails":
        logger.warning("Stability inequality failed", count_f=count_f, count_g=count_g, c=c, epsilon=epsilon)
    return StabilityVerdict(verdict=verdict, sup_distance=distance, c=c, epsilon=epsilon,
                            count_f=count_f, count_g=count_g)


def barcode_bound_check(barcode: Barcode, n: int, a: float, log2_mu_ar: float, delta: float) -> BoundCheck:
    """N_{0,delta} against the explicit counting bound k^n + 5k (10k)^(2n-2)."""
    measured = count_long_bars(barcode, delta)
    try:
        bound = bezout_bound(n, a, log2_mu_ar, delta)
    except BoundDomainError as e:
        return BoundCheck(name="n_delta", measured=measured, reason=e.user_message)
    return BoundCheck(name="n_delta", measured=measured, bound=bound, holds=measured <= bound)


def write_barcode_csv(barcode: Barcode, path: str) -> Path:
    """CSV with header birth,death,multiplicity; infinite deaths as "inf"."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["birth", "death", "multiplicity"])
        for bar in barcode.bars:
            death = "inf" if math.isinf(bar.death) else repr(bar.death)
            writer.writerow([repr(bar.birth), death, bar.multiplicity])
    return target
