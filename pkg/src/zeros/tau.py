"""tau(f, r, delta): zeros with multiplicity inside islands, by guard-cell contours."""

from typing import Optional

import numpy as np

from config.settings import get_setting
from ..maps.builtin import EntireMap
from ..topology.grid import components, resolve_zeros, attach_zeros, sample_sublevel
from ..utils.errors import ContourUnsafeError, ResolutionCapError
from ..utils.logger import get_logger
from .models import IslandWinding, TauReport
from .winding import require_scalar_map, winding_number

logger = get_logger()

GUARD_CELLS = 1


def _contour_box(grid, lo, hi):
    """Cell-edge rectangle one guard cell outside the bounding box."""
    h = grid.cell_size
    x0 = -grid.r + (lo[0] - GUARD_CELLS) * h
    x1 = -grid.r + (hi[0] + GUARD_CELLS) * h
    y0 = -grid.r + (lo[1] - GUARD_CELLS) * h
    y1 = -grid.r + (hi[1] + GUARD_CELLS) * h
    return (x0, x1, y0, y1)


def _separated(labels: np.ndarray, label: int, lo, hi) -> bool:
    """No other component in the cells the contour runs through or encloses."""
    margin = GUARD_CELLS + 1
    window = labels[max(0, lo[0] - margin):hi[0] + margin, max(0, lo[1] - margin):hi[1] + margin]
    others = (window != 0) & (window != label)
    return not bool(np.any(others))


def tau_report(entire_map: EntireMap, r: float, delta: float, res: int = 256,
               threads: Optional[int] = None) -> TauReport:
    """Sum of island winding numbers, refining the grid when islands crowd each other."""
    require_scalar_map(entire_map)
    zeros = resolve_zeros(entire_map, r, threads)
    cap = int(get_setting("max_grid_cells", 2 ** 28))
    while True:
        grid = sample_sublevel(entire_map, r, delta, res, threads)
        comp_set = attach_zeros(grid, components(grid), zeros)
        islands = []
        crowded = False
        for island in comp_set.islands:
            if not _separated(comp_set.labels, island.label, island.bbox_lo, island.bbox_hi):
                crowded = True
                break
            box = _contour_box(grid, island.bbox_lo, island.bbox_hi)
            try:
                winding = winding_number(entire_map, box)
            except ContourUnsafeError:
                crowded = True
                break
            islands.append(IslandWinding(label=island.label, contour=box, winding=winding))
        if not crowded:
            break
        if (2 * res) ** 2 > cap:
            raise ResolutionCapError(
                f"Islands could not be separated by guard contours up to res={res}",
                user_message="Two components are too close to separate with a safe contour",
                suggestions=["Change delta slightly", "Raise max_grid_cells"],
                context={"res": res, "r": r, "delta": delta},
            )
        logger.info("Islands too close for guard contours, refining", res=res, next_res=2 * res)
        res *= 2
    tau = sum(item.winding for item in islands)
    logger.info("tau computed", map=entire_map.name, r=r, delta=delta, tau=tau, islands=len(islands))
    return TauReport(tau=tau, zeta=comp_set.zeta, zeta0=comp_set.zeta0, res=res, islands=islands)


def tau(entire_map: EntireMap, r: float, delta: float, res: int = 256, threads: Optional[int] = None) -> int:
    """Total multiplicity of zeros lying in islands of {|f| <= delta} within B_r."""
    return tau_report(entire_map, r, delta, res, threads).tau
