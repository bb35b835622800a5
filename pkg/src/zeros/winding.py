"""Argument-principle counting and subdivision search for zeros of f: C -> C."""

import math
from typing import List, Optional, Tuple

import numpy as np

from config.settings import get_setting
from ..arith.xnum import XArray, xc_log2_abs
from ..utils.errors import ContourUnsafeError, InputValidationError
from ..utils.logger import get_logger
from ..utils.parallel import parallel_map
from .models import Box, Zero, ZeroSearch

logger = get_logger()

# off-centre split fractions tried in turn when a child contour is unsafe
SPLIT_FRACTIONS = (0.5, 0.5173, 0.4791, 0.5419, 0.4607)
NEWTON_STEP_TOL = 1e-15
CLUSTER_RADIUS_REL = 1e-6
MIN_PARAMETER_GAP = 2.0 ** -44


def require_scalar_map(entire_map) -> None:
    if entire_map.n != 1 or entire_map.m != 1:
        raise InputValidationError(
            f"Winding numbers need a map C -> C, got n={entire_map.n}, m={entire_map.m}",
            user_message="Zero location and tau are available for one-variable scalar maps only",
        )


def _values(entire_map, points: np.ndarray) -> XArray:
    return entire_map.evaluate_array([XArray.from_complex(points)])[0]


def _boundary_points(box: Box, t: np.ndarray) -> np.ndarray:
    """Counter-clockwise rectangle boundary; edge e is t in [e, e + 1)."""
    x0, x1, y0, y1 = box
    edge = np.floor(t).astype(int) % 4
    s = t - np.floor(t)
    corners = np.array([complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)])
    start = corners[edge]
    stop = corners[(edge + 1) % 4]
    return start + s * (stop - start)


def _initial_parameters(box: Box, count: int) -> np.ndarray:
    x0, x1, y0, y1 = box
    lengths = [x1 - x0, y1 - y0, x1 - x0, y1 - y0]
    perimeter = sum(lengths)
    params = []
    for edge, length in enumerate(lengths):
        m = max(4, int(math.ceil(count * length / perimeter)))
        params.append(edge + np.arange(m) / m)
    return np.concatenate(params)


def _wrap(delta: np.ndarray) -> np.ndarray:
    return (delta + np.pi) % (2.0 * np.pi) - np.pi


def winding_number(entire_map, box: Box, initial_points: Optional[int] = None,
                   max_points: Optional[int] = None) -> int:
    """Zeros inside the rectangle, with multiplicity.

    The boundary is refined until every argument increment between
    neighbouring samples is below pi/2. Hitting the point cap, or an exact
    zero on the boundary, raises ContourUnsafeError.
    """
    require_scalar_map(entire_map)
    x0, x1, y0, y1 = box
    if not (x1 > x0 and y1 > y0):
        raise InputValidationError(f"Degenerate contour box {box}", user_message="Contour box must have positive size")
    initial_points = initial_points or int(get_setting("contour_initial_points", 64))
    max_points = max_points or int(get_setting("contour_max_points", 2 ** 18))

    t = _initial_parameters(box, initial_points)
    values = _values(entire_map, _boundary_points(box, t))
    angles = values.angle()
    log2_abs = values.log2_abs()
    while True:
        if np.any(np.isneginf(log2_abs)):
            raise ContourUnsafeError(
                f"Exact zero on the contour of {box}",
                user_message="The contour passes through a zero",
                suggestions=["Shift or resize the region"],
                context={"box": box},
            )
        steps = _wrap(np.diff(np.concatenate([angles, angles[:1]])))
        coarse = np.abs(steps) >= np.pi / 2
        if not np.any(coarse):
            break
        nxt = np.concatenate([t[1:], [4.0]])
        if len(t) + int(np.count_nonzero(coarse)) > max_points or np.any((nxt - t)[coarse] < MIN_PARAMETER_GAP):
            raise ContourUnsafeError(
                f"Contour refinement cap of {max_points} points reached on {box}",
                user_message="The contour passes too close to a zero",
                suggestions=["Shift or resize the region", "Raise contour_max_points"],
                context={"box": box, "min_log2_abs": float(np.min(log2_abs))},
            )
        mids = 0.5 * (t[coarse] + nxt[coarse])
        mid_values = _values(entire_map, _boundary_points(box, mids))
        order = np.argsort(np.concatenate([t, mids]), kind="stable")
        t = np.concatenate([t, mids])[order]
        angles = np.concatenate([angles, mid_values.angle()])[order]
        log2_abs = np.concatenate([log2_abs, mid_values.log2_abs()])[order]

    total = float(np.sum(steps)) / (2.0 * np.pi)
    winding = int(round(total))
    if abs(total - winding) > 1e-6:
        raise ContourUnsafeError(
            f"Non-integral argument change {total} on {box}",
            user_message="Could not resolve the argument change along the contour",
            context={"box": box},
        )
    logger.debug("Winding number", box=box, winding=winding, points=len(t))
    return winding


def _ratio(num, den) -> Optional[complex]:
    """num / den for LogComplex values, None when den is zero."""
    if den.is_zero:
        return None
    if num.is_zero:
        return 0j
    shift = max(-1074, min(1000, num.exp2 - den.exp2))
    return complex(num.mantissa_re, num.mantissa_im) / complex(den.mantissa_re, den.mantissa_im) * math.ldexp(1.0, shift)


def newton_polish(entire_map, start: complex, box: Optional[Box] = None,
                  max_iterations: Optional[int] = None) -> Tuple[complex, float]:
    """Damped Newton from `start`; returns the point and log2 of the residual."""
    max_iterations = max_iterations or int(get_setting("newton_max_iterations", 200))
    z = start
    (value,) = entire_map.evaluate_array([XArray.from_complex([z])])
    current = value.item(0)
    for _ in range(max_iterations):
        if current.is_zero:
            break
        derivative = entire_map.jacobian_array([XArray.from_complex([z])])[0][0].item(0)
        step = _ratio(current, derivative)
        if step is None:
            break
        damping = 1.0
        accepted = False
        for _ in range(40):
            candidate = z - damping * step
            if box is not None:
                candidate = complex(min(max(candidate.real, box[0]), box[1]), min(max(candidate.imag, box[2]), box[3]))
            trial = entire_map.evaluate_array([XArray.from_complex([candidate])])[0].item(0)
            if xc_log2_abs(trial) < xc_log2_abs(current):
                accepted = True
                break
            damping *= 0.5
        if not accepted:
            break
        moved = abs(candidate - z)
        z, current = candidate, trial
        if moved <= NEWTON_STEP_TOL * (1.0 + abs(z)):
            break
    return z, xc_log2_abs(current)


def _split(box: Box, fraction: float) -> List[Box]:
    x0, x1, y0, y1 = box
    xm = x0 + fraction * (x1 - x0)
    ym = y0 + fraction * (y1 - y0)
    return [(x0, xm, y0, ym), (xm, x1, y0, ym), (x0, xm, ym, y1), (xm, x1, ym, y1)]


def _children(entire_map, box: Box, winding: int) -> Optional[List[Tuple[Box, int]]]:
    for fraction in SPLIT_FRACTIONS:
        try:
            counted = [(child, winding_number(entire_map, child)) for child in _split(box, fraction)]
        except ContourUnsafeError:
            continue
        if sum(w for _, w in counted) == winding:
            return [(child, w) for child, w in counted if w > 0]
    return None


def _cluster(entire_map, box: Box, winding: int) -> Optional[Zero]:
    """A single polished point holding all `winding` zeros of the box, if there is one."""
    x0, x1, y0, y1 = box
    centre = complex(0.5 * (x0 + x1), 0.5 * (y0 + y1))
    point, log2_residual = newton_polish(entire_map, centre, box)
    rho = max(CLUSTER_RADIUS_REL * (1.0 + abs(point)), 1e-300)
    small = (max(x0, point.real - rho), min(x1, point.real + rho),
             max(y0, point.imag - rho), min(y1, point.imag + rho))
    if not (small[1] > small[0] and small[3] > small[2]):
        return None
    try:
        if winding_number(entire_map, small) != winding:
            return None
    except ContourUnsafeError:
        return None
    residual = 2.0 ** log2_residual if log2_residual > -1074 else 0.0
    return Zero(re=point.real, im=point.imag, multiplicity=winding, residual=residual)


def _resolve(entire_map, item: Tuple[Box, int, int], max_depth: int):
    """One search step: a resolved zero, children to refine, or an unresolved box."""
    box, winding, depth = item
    zero = _cluster(entire_map, box, winding)
    if zero is not None:
        return "zero", zero
    if depth >= max_depth:
        return "unresolved", (box, winding)
    children = _children(entire_map, box, winding)
    if children is None:
        return "unresolved", (box, winding)
    return "split", [(child, w, depth + 1) for child, w in children]


def locate_zeros(entire_map, region: Box, max_depth: int = 40, threads: Optional[int] = None) -> ZeroSearch:
    """All zeros in a rectangle, by quadrisection guided by winding numbers.

    Each box is first tried as a cluster: damped Newton from its centre, then a
    tiny box around the polished point must carry the whole winding number.
    Otherwise the box splits in four. Boxes still unresolved at `max_depth`
    make the result partial.
    """
    require_scalar_map(entire_map)
    total = winding_number(entire_map, region)
    logger.info("Locating zeros", map=entire_map.name, region=region, total=total)
    frontier = [(region, total, 0)] if total > 0 else []
    found: List[Zero] = []
    unresolved: List[Tuple[Box, int]] = []
    while frontier:
        results = parallel_map(lambda item: _resolve(entire_map, item, max_depth), frontier, threads)
        frontier = []
        for kind, payload in results:
            if kind == "zero":
                found.append(payload)
            elif kind == "split":
                frontier.extend(payload)
            else:
                unresolved.append(payload)
    found.sort(key=lambda z: (z.re, z.im))
    if unresolved:
        logger.warning("Zero search left boxes unresolved", map=entire_map.name,
                       boxes=len(unresolved), zeros=sum(w for _, w in unresolved))
    return ZeroSearch(
        zeros=found,
        partial=bool(unresolved),
        unresolved_boxes=[box for box, _ in unresolved],
        unresolved_count=sum(w for _, w in unresolved),
    )
