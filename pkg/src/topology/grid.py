"""Connected components of {|f| <= delta} within B_r on sampled grids.

Cells tile [-r, r]^(2n) with axes ordered (Re z1, Im z1, Re z2, Im z2, ...).
A cell belongs to B_r when its centre does. Two masked cells are connected
when they share a (2n-1)-face.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage as ndi

from config.settings import get_setting
from ..maps.builtin import EntireMap, Point
from ..utils.errors import InputValidationError, ResolutionCapError
from ..utils.logger import get_logger
from ..utils.parallel import parallel_map, split_range
from ..zeros.winding import locate_zeros
from .models import Component, CountReport

logger = get_logger()

BLOCK_CELLS = 1 << 16


@dataclass
class SublevelGrid:
    """Per-cell log2|f| over a box, the ball clip, and the threshold."""
    values: np.ndarray
    inside: np.ndarray
    log2_delta: float
    r: Optional[float] = None
    res: int = 0
    absorbed: bool = False
    abs_field: Optional[np.ndarray] = None
    _center_norms: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def ndim(self) -> int:
        return self.values.ndim

    @property
    def cell_size(self) -> float:
        return 2.0 * self.r / self.res if self.r else 1.0

    @property
    def mask(self) -> np.ndarray:
        # ties belong to the closed sublevel set
        return self.inside & (self.values <= self.log2_delta)

    def with_delta(self, delta: float) -> "SublevelGrid":
        """Same samples, another threshold."""
        return SublevelGrid(self.values, self.inside, _log2_delta(delta), self.r, self.res,
                            self.absorbed, self.abs_field, self._center_norms)

    def abs_values(self) -> np.ndarray:
        """|f| per cell (+inf outside the ball)."""
        if self.abs_field is not None:
            return np.where(self.inside, self.abs_field, np.inf)
        with np.errstate(over="ignore"):
            return np.where(self.inside, np.exp2(self.values), np.inf)

    def axis_centers(self) -> np.ndarray:
        h = self.cell_size
        return -self.r + (np.arange(self.res) + 0.5) * h

    def center_norms(self) -> np.ndarray:
        if self._center_norms is None:
            if self.r is None:
                self._center_norms = np.zeros(self.values.shape)
            else:
                self._center_norms = np.sqrt(_sum_of_squares(self.axis_centers(), self.ndim))
        return self._center_norms

    def far_corner_norms(self) -> np.ndarray:
        if self.r is None:
            return np.zeros(self.values.shape)
        far = np.abs(self.axis_centers()) + self.cell_size / 2.0
        return np.sqrt(_sum_of_squares(far, self.ndim))

    def cell_of(self, point: Point) -> Optional[Tuple[int, ...]]:
        """Index of the cell containing a point of C^n, or None outside the box."""
        coords = []
        for value in point:
            coords.extend([value.real, value.imag])
        index = []
        for x in coords:
            k = int(math.floor((x + self.r) / self.cell_size))
            if k == self.res and abs(x - self.r) < 1e-12 * max(1.0, self.r):
                k -= 1
            if not 0 <= k < self.res:
                return None
            index.append(k)
        return tuple(index)

    def zero_cell(self, point: Point) -> Optional[Tuple[int, ...]]:
        """Cell that carries a zero: its own cell if masked, else a masked face neighbour."""
        if self.r is not None and math.sqrt(sum(abs(x) ** 2 for x in point)) > self.r:
            return None
        cell = self.cell_of(point)
        if cell is None:
            return None
        mask = self.mask
        if mask[cell]:
            return cell
        for axis in range(self.ndim):
            for step in (-1, 1):
                neighbour = list(cell)
                neighbour[axis] += step
                if 0 <= neighbour[axis] < self.res and mask[tuple(neighbour)]:
                    return tuple(neighbour)
        return None

    @classmethod
    def from_field(cls, abs_values: np.ndarray, delta: float = 0.0) -> "SublevelGrid":
        """Wrap a precomputed |f| field (any dimension, no ball clip)."""
        abs_values = np.asarray(abs_values, dtype=np.float64)
        with np.errstate(divide="ignore"):
            values = np.log2(abs_values)
        return cls(values, np.ones(abs_values.shape, dtype=bool), _log2_delta(delta),
                   None, abs_values.shape[0] if abs_values.ndim else 1, False, abs_values)


@dataclass
class ComponentSet:
    """Labeled components plus the zeros attached to them."""
    labels: np.ndarray
    components: List[Component]
    zeros: List[Point] = field(default_factory=list)
    unattached: List[int] = field(default_factory=list)

    @property
    def zeta(self) -> int:
        return sum(1 for c in self.components if c.contains_zero)

    @property
    def zeta0(self) -> int:
        return sum(1 for c in self.components if c.contains_zero and c.island)

    @property
    def islands(self) -> List[Component]:
        return [c for c in self.components if c.island]

    def islands_without_zero(self) -> int:
        return sum(1 for c in self.components if c.island and not c.contains_zero)


def _log2_delta(delta: float) -> float:
    if delta < 0:
        raise InputValidationError("delta must be non-negative", user_message="delta must be positive")
    return math.log2(delta) if delta > 0 else float("-inf")


def _sum_of_squares(axis_values: np.ndarray, ndim: int) -> np.ndarray:
    total = np.zeros((len(axis_values),) * ndim)
    for axis in range(ndim):
        shape = [1] * ndim
        shape[axis] = len(axis_values)
        total = total + (axis_values ** 2).reshape(shape)
    return total


def _check_resolution(n: int, res: int) -> None:
    if n > 2:
        raise InputValidationError(
            f"Full grids support n <= 2, got n={n}",
            user_message="Grid counting is limited to n <= 2 (4 real dimensions)",
            suggestions=["Use the bezout-bound or mu verbs for higher dimensions"],
        )
    if res < int(get_setting("min_resolution", 16)):
        raise InputValidationError(
            f"Resolution {res} below minimum", user_message=f"res must be at least {get_setting('min_resolution', 16)}"
        )
    cells = res ** (2 * n)
    cap = int(get_setting("max_grid_cells", 2 ** 28))
    if cells > cap:
        raise ResolutionCapError(
            f"Grid of {cells} cells exceeds the cap of {cap}",
            user_message=f"Resolution {res} needs {cells} cells, more than the cap of {cap}",
            suggestions=["Lower --res", "Shrink the radius or use cs-verify for the Cornalba-Shiffman map"],
            context={"res": res, "n": n, "cells": cells},
        )


def sample_sublevel(entire_map: EntireMap, r: float, delta: float, res: int,
                    threads: Optional[int] = None) -> SublevelGrid:
    """Evaluate log2|f| at every cell centre of B_r."""
    if not r > 0:
        raise InputValidationError("r must be positive", user_message="r must be positive")
    if not delta > 0:
        raise InputValidationError("delta must be positive", user_message="delta must be positive")
    _check_resolution(entire_map.n, res)
    ndim = 2 * entire_map.n
    shape = (res,) * ndim
    h = 2.0 * r / res
    axis = -r + (np.arange(res) + 0.5) * h
    norms = np.sqrt(_sum_of_squares(axis, ndim))
    inside = norms <= r
    flat = np.flatnonzero(inside)
    logger.info("Sampling sublevel grid", map=entire_map.name, r=r, delta=delta, res=res, cells=flat.size)

    def evaluate_block(block: slice):
        index = np.unravel_index(flat[block], shape)
        points = np.empty((len(index[0]), entire_map.n), dtype=np.complex128)
        for k in range(entire_map.n):
            points[:, k] = axis[index[2 * k]] + 1j * axis[index[2 * k + 1]]
        return entire_map.log2_abs_points(points)

    blocks = split_range(flat.size, max(1, -(-flat.size // BLOCK_CELLS)))
    results = parallel_map(evaluate_block, blocks, threads) if flat.size else []
    values = np.full(shape, np.inf)
    absorbed = False
    flat_values = values.reshape(-1)
    for block, (block_values, block_absorbed) in zip(blocks, results):
        flat_values[flat[block]] = block_values
        absorbed = absorbed or bool(np.any(block_absorbed))
    grid = SublevelGrid(values, inside, _log2_delta(delta), r, res, absorbed)
    grid._center_norms = norms
    return grid


def components(grid: SublevelGrid) -> ComponentSet:
    """Face-adjacent labeling; labels follow raster order of first cells."""
    mask = grid.mask
    structure = ndi.generate_binary_structure(grid.ndim, 1)
    labels, count = ndi.label(mask, structure=structure)
    if count == 0:
        return ComponentSet(labels, [])
    index = np.arange(1, count + 1)
    sizes = ndi.sum(mask, labels, index)
    slices = ndi.find_objects(labels)
    if grid.r is not None:
        touches = np.asarray(ndi.maximum(grid.far_corner_norms(), labels, index)) >= grid.r
        diagonal = grid.cell_size * math.sqrt(grid.ndim)
        island = np.asarray(ndi.maximum(grid.center_norms(), labels, index)) <= grid.r - diagonal
    else:
        touches = np.zeros(count, dtype=bool)
        island = np.ones(count, dtype=bool)
    comps = [
        Component(
            label=int(label),
            cell_count=int(sizes[label - 1]),
            touches_sphere=bool(touches[label - 1]),
            island=bool(island[label - 1]) and not bool(touches[label - 1]),
            bbox_lo=[s.start for s in slices[label - 1]],
            bbox_hi=[s.stop for s in slices[label - 1]],
        )
        for label in index
    ]
    return ComponentSet(labels, comps)


def attach_zeros(grid: SublevelGrid, comp_set: ComponentSet, zeros: Sequence[Point]) -> ComponentSet:
    """Attach each zero in B_r to the component of its cell (or of a face neighbour)."""
    comp_set.zeros = list(zeros)
    comp_set.unattached = []
    for zero_index, point in enumerate(zeros):
        if grid.r is not None and math.sqrt(sum(abs(x) ** 2 for x in point)) > grid.r:
            continue
        cell = grid.zero_cell(point)
        label = 0 if cell is None else int(comp_set.labels[cell])
        if label:
            comp_set.components[label - 1].zero_indices.append(zero_index)
        else:
            comp_set.unattached.append(zero_index)
    if comp_set.unattached:
        logger.debug("Zeros outside every sampled component", count=len(comp_set.unattached))
    return comp_set


def resolve_zeros(entire_map: EntireMap, r: float, threads: Optional[int] = None) -> List[Point]:
    """Zeros in B_r: the family's explicit list, or argument-principle location for n = 1."""
    known = entire_map.known_zeros(r)
    if known is not None:
        return list(known)
    if entire_map.n != 1:
        raise InputValidationError(
            f"No zero list for {entire_map.name} with n={entire_map.n}",
            user_message="Zeros can only be located automatically for one-variable maps",
            suggestions=["Use a builtin with a known zero set, or n = 1"],
        )
    # box slightly larger than the ball, offset so its edges avoid symmetric zeros
    half = r * 1.0625 + 0.0123
    found = locate_zeros(entire_map, (-half, half, -half, half), threads=threads)
    points: List[Point] = []
    for zero in found.zeros:
        point = complex(zero.re, zero.im)
        if abs(point) <= r:
            points.append((point,))
    return points


def coarse_count(entire_map: EntireMap, r: float, delta: float, res_start: int = 64,
                 threads: Optional[int] = None, max_res: Optional[int] = None,
                 zeros: Optional[Sequence[Point]] = None) -> CountReport:
    """zeta and zeta0, refining the grid until two consecutive resolutions agree."""
    if not delta > 0:
        raise InputValidationError("delta must be positive", user_message="delta must be positive")
    zeros = list(zeros) if zeros is not None else resolve_zeros(entire_map, r, threads)
    cap = int(get_setting("max_grid_cells", 2 ** 28))
    res = res_start
    previous = None
    resolutions: List[int] = []
    converged = False
    absorbed = False
    while True:
        grid = sample_sublevel(entire_map, r, delta, res, threads)
        comp_set = attach_zeros(grid, components(grid), zeros)
        resolutions.append(res)
        absorbed = absorbed or grid.absorbed
        counts = (comp_set.zeta, comp_set.zeta0)
        logger.info("Grid counts", res=res, zeta=counts[0], zeta0=counts[1], components=len(comp_set.components))
        if counts == previous:
            converged = True
            break
        previous = counts
        next_res = res * 2
        if next_res ** (2 * entire_map.n) > cap or (max_res is not None and next_res > max_res):
            logger.warning("Grid counts did not stabilize before the resolution cap",
                           map=entire_map.name, r=r, delta=delta, last_res=res)
            break
        res = next_res
    return CountReport(
        zeta=comp_set.zeta,
        zeta0=comp_set.zeta0,
        converged=converged,
        resolutions=resolutions,
        zeros_located=len(zeros),
        unattached_zeros=len(comp_set.unattached),
        islands_without_zero=comp_set.islands_without_zero(),
        absorbed=absorbed,
        verdicts={"every_island_has_zero": comp_set.islands_without_zero() == 0},
    )


def dump_mask(grid: SublevelGrid, path: str) -> Tuple[Path, Path]:
    """Write the mask as raw uint8 (row-major C order) plus a JSON sidecar."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    grid.mask.astype(np.uint8).tofile(target)
    sidecar = target.with_name(target.name + ".json")
    region = [[-grid.r, grid.r]] * grid.ndim if grid.r is not None else None
    sidecar.write_text(json.dumps({
        "region": region,
        "res": grid.res,
        "delta": 2.0 ** grid.log2_delta if math.isfinite(grid.log2_delta) else 0.0,
        "dims": list(grid.values.shape),
        "byte_order": "row-major C",
        "dtype": "uint8",
    }, sort_keys=True, indent=2))
    logger.info("Mask written", path=str(target), cells=int(grid.mask.size))
    return target, sidecar
