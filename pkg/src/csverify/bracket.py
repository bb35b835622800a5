"""Brackets for zeta(F, r, delta) and upper bounds for zeta0(F, r, delta).

Slices at and beyond the exact tail each meet one component, separated from
its neighbours by clean hyperplanes. Below the tail the bracket counts slice
components without merging (upper) and lets everything up to k_sep merge
into one component (lower).
"""

import csv
import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from ..maps.cornalba import classical_zero_count, mu_cs_bounds
from ..maps.models import CSParams
from ..utils.logger import get_logger
from ..utils.parallel import parallel_map
from .models import IslandAnalysis, SliceCount, SliceVerdict, SweepRow, ZetaBracket
from .slices import check_radius, g_vanishes, slice_count, slice_indices, slice_room, slice_zeros
from .thresholds import (
    check_delta,
    containment_hypothesis,
    cs_structure,
    log2_b,
    lower_envelope,
    upper_envelope,
)

logger = get_logger()

ENVELOPE_SLACK = 1e-9
# b_i is tracked while log2 c_i stays below this
HORIZON_LOG2_C = 1000.0

SWEEP_COLUMNS = [
    "r", "log2_r", "delta", "zeta_lower", "zeta_upper", "envelope_lower", "envelope_upper",
    "mu_lower", "mu_upper", "islands_upper",
]


def zeta_bracket(r: float, delta: float, params: CSParams, threads: Optional[int] = None) -> ZetaBracket:
    """lower <= zeta(F, r, delta) <= upper from the slice structure."""
    check_radius(r)
    check_delta(delta)
    structure = cs_structure(delta, params)
    tail_from = structure.exact_tail_from
    zeros = {i: slice_zeros(i, r, params) for i in slice_indices(r, params)}
    occupied = [i for i, count in zeros.items() if count != 0]
    low = [i for i in occupied if i < tail_from]
    tail = [i for i in occupied if i >= tail_from]
    logger.info("Bracketing zeta", r=r, delta=delta, low_slices=len(low), tail_slices=len(tail),
                k_merge=structure.k_merge, k_sep=structure.k_sep)

    results = parallel_map(lambda i: slice_count(i, r, delta, params, structure, zeros[i]), low, threads)
    slices: List[SliceCount] = [count for count, _ in results]
    assumptions = ["every component of the sublevel set meets some slice z = 2^i"]
    assumptions.extend(note for _, note in results if note)
    slices.extend(SliceCount(i=i, zeros_inside=zeros[i], components=1, method="merged") for i in tail)
    if params.max_index() is not None and 2.0 ** (params.max_index() + 1) < r:
        assumptions.append(f"explicit sequence ends at i={params.max_index()}; later slices ignored")

    upper = sum(s.components for s in slices)
    merged_group = 1 if any(i <= structure.k_sep for i in low) else 0
    lower = merged_group + sum(1 for i in occupied if i > structure.k_sep)

    env_lower = lower_envelope(r, delta)
    env_upper = upper_envelope(r, delta, params)
    verdicts: Dict[str, bool] = {
        "within_envelopes": env_lower <= lower + ENVELOPE_SLACK and upper <= env_upper + ENVELOPE_SLACK,
        "g_vanishes_on_slices": all(g_vanishes(i, params) for i in occupied),
    }
    if not verdicts["within_envelopes"]:
        logger.warning("Bracket outside the envelopes", r=r, delta=delta, lower=lower, upper=upper,
                       envelope_lower=env_lower, envelope_upper=env_upper)
    return ZetaBracket(
        r=r, delta=delta, lower=lower, upper=upper, exact_tail_from=tail_from, tail_count=len(tail),
        envelope_lower=env_lower, envelope_upper=env_upper, slices=slices,
        assumptions=assumptions, verdicts=verdicts,
    )


def _log2_times(log2_x: float, times: int) -> float:
    """log2 applied `times` more times to a number given by its log2."""
    value = log2_x
    for _ in range(times):
        value = math.log2(value) if value > 0 else -math.inf
    return value


def _horizon(params: CSParams) -> List[int]:
    indices = []
    i = 1
    while params.log2_value(i) < HORIZON_LOG2_C:
        indices.append(i)
        i += 1
    return indices


def _first_admissible(indices: List[int], log2_delta: float, log2_bs: Dict[int, float],
                      params: CSParams) -> Optional[int]:
    """Smallest i0 with both containment conditions from i0 on, b_i0 >= 2^i0 and b increasing from i0."""
    def condition(i: int) -> bool:
        c = params.value(i)
        return log2_delta >= -c and log2_delta >= (i - 1) * i // 2 - c * c

    holds_from = {}
    increasing_from = {}
    running_ok, running_inc = True, True
    for position in range(len(indices) - 1, -1, -1):
        i = indices[position]
        running_ok = running_ok and condition(i)
        if position + 1 < len(indices):
            running_inc = running_inc and log2_bs[indices[position + 1]] > log2_bs[i]
        holds_from[i], increasing_from[i] = running_ok, running_inc
    for i in indices:
        if holds_from[i] and increasing_from[i] and log2_bs[i] >= i:
            return i
    return None


def zeta0_analysis(r: float, delta: float, params: CSParams) -> IslandAnalysis:
    """Peninsula verdicts per slice, the structural island bound and, for pow rules, the closed form."""
    lr = check_radius(r)
    check_delta(delta)
    structure = cs_structure(delta, params)
    verdicts: List[SliceVerdict] = []
    upper = 0
    for i in slice_indices(r, params):
        zeros = slice_zeros(i, r, params)
        if zeros == 0:
            continue
        hypothesis = containment_hypothesis(i, delta, params)
        b_log2 = log2_b(i, delta, params)
        room = slice_room(i, r)
        # the certified interval carries every zero of the slice out of B_r
        peninsula = hypothesis and (room == 0.0 or b_log2 > math.log2(room))
        verdicts.append(SliceVerdict(i=i, zeros_inside=zeros, containment=hypothesis, log2_b=b_log2,
                                     verdict="peninsula" if peninsula else "undetermined"))
        if not peninsula:
            upper += 1 if i >= structure.k_merge or zeros is None else zeros

    analysis = IslandAnalysis(r=r, delta=delta, upper=upper, applicable=True, slices=verdicts)
    if params.rule != "pow":
        analysis.applicable = False
        analysis.reason = "closed form needs a pow:lambda,l sequence"
        return analysis
    floor = 1.0
    for _ in range(params.levels):
        floor = 2.0 ** floor if floor < 1024 else math.inf
    if lr < floor:
        analysis.applicable = False
        analysis.reason = f"r below the validity floor 2^{floor:g}"
        logger.warning("Closed-form island bound inapplicable", r=r, reason=analysis.reason)
        return analysis

    log2_delta = min(math.log2(delta), 0.0)
    indices = _horizon(params)
    log2_bs = {i: log2_b(i, 2.0 ** log2_delta, params) for i in indices}
    i0 = _first_admissible(indices, log2_delta, log2_bs, params)
    if i0 is None:
        analysis.applicable = False
        analysis.reason = "no admissible starting slice below the tracking horizon"
        logger.warning("Closed-form island bound inapplicable", r=r, reason=analysis.reason)
        return analysis

    top = log2_bs[i0]
    proof_upper = sum(slice_zeros(i, r, params) or 0 for i in range(1, int(math.floor(min(top, lr))) + 1))
    if lr > top:
        last = max(i for i in indices if i >= i0 and log2_bs[i] <= lr)
        proof_upper += last - i0
    lam, levels = params.lam, params.levels
    excess = max(j - _log2_times(log2_bs[j], levels) / lam for j in indices if j >= i0)
    if top > indices[-1]:
        head_sum = math.inf
    else:
        head_sum = float(sum(params.value(i) for i in range(1, int(math.floor(top)) + 1)))
    m = head_sum - i0 + excess

    analysis.i0 = i0
    analysis.proof_upper = float(proof_upper)
    analysis.m = m
    analysis.closed_form = _log2_times(lr, levels) / lam + m
    analysis.growth_class = "O(" + "log " * (levels + 1) + "r)"
    logger.info("Island analysis", r=r, delta=delta, i0=i0, upper=upper, proof_upper=proof_upper, m=m)
    return analysis


def verify_sweep(radii: Sequence[float], deltas: Sequence[float], params: CSParams,
                 threads: Optional[int] = None) -> List[SweepRow]:
    """One row per (r, delta): bracket, envelopes, analytic mu bounds and the island bound."""
    rows = []
    for delta in deltas:
        for r in radii:
            bracket = zeta_bracket(r, delta, params, threads)
            islands = zeta0_analysis(r, delta, params)
            mu_lower, mu_upper = mu_cs_bounds(r)
            _, zeros_log2 = classical_zero_count(r, params)
            rows.append(SweepRow(
                r=r, log2_r=math.log2(r), delta=delta,
                zeta_lower=bracket.lower, zeta_upper=bracket.upper,
                envelope_lower=bracket.envelope_lower, envelope_upper=bracket.envelope_upper,
                mu_lower=mu_lower, mu_upper=mu_upper, islands_upper=islands.upper, zeros_log2=zeros_log2,
                within_envelopes=bracket.verdicts["within_envelopes"],
            ))
    return rows


def write_sweep_csv(rows: Sequence[SweepRow], path: str, columns: Sequence[str] = SWEEP_COLUMNS) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(columns)
        for row in rows:
            record = row.model_dump()
            writer.writerow([repr(record[column]) if isinstance(record[column], float) else record[column]
                             for column in columns])
    return target
