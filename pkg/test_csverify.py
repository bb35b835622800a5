"""Checks for the structural verifier of the Cornalba-Shiffman map."""

import csv
import tempfile
from pathlib import Path

from src.csverify.bracket import SWEEP_COLUMNS, verify_sweep, write_sweep_csv, zeta0_analysis, zeta_bracket
from src.csverify.jacobian import falsification, jacobian_decay
from src.csverify.slices import slice_indices, slice_room, slice_zeros
from src.csverify.thresholds import (
    cs_structure,
    interval_containment,
    k_merge,
    k_sep,
    log2_minorant,
    lower_envelope,
    separation_check,
    upper_envelope,
)
from src.maps.models import CSParams
from src.utils.errors import InputValidationError

DELTAS = [0.01, 0.05, 0.1, 0.25, 0.6]


def test_thresholds():
    """k_merge and k_sep at delta = 0.1, and their monotonicity."""
    params = CSParams()
    structure = cs_structure(0.1, params)
    assert (structure.k_merge, structure.k_sep, structure.exact_tail_from) == (3, 2, 3)
    assert k_merge(0.6) == 1 and k_sep(0.6) == 4
    print("✅ delta = 0.1: k_merge = 3, k_sep = 2, exact from slice 3")

    grid = [2.0 ** -e for e in range(20, -1, -1)]
    merges = [k_merge(d) for d in grid]
    seps = [k_sep(d) for d in grid]
    assert all(a >= b for a, b in zip(merges, merges[1:]))
    assert all(a <= b for a, b in zip(seps, seps[1:]))
    print("✅ k_merge falls and k_sep rises with delta")


def test_interval_containment():
    """{2^i} x [0, b_i] inside the sublevel set."""
    params = CSParams()
    threshold = interval_containment(2, 2.0 ** -15, params, samples=0)
    assert threshold.hypothesis
    assert abs(threshold.log2_b) < 1e-12
    print("✅ At the threshold delta = 2^(1 - 16), b_2 = 1")

    result = interval_containment(3, 0.1, params)
    assert result.hypothesis and result.c_i == 8
    assert abs(result.b - 148.03) < 0.01
    assert result.sample_ok
    print(f"✅ b_3 ~ {result.b:.2f} and |F| <= delta on the sampled interval")

    below = interval_containment(2, 2.0 ** -16, params)
    assert not below.hypothesis and below.sample_ok is None
    print("✅ Below the threshold nothing is certified")

    try:
        interval_containment(0, 0.1, params)
        raise AssertionError("i = 0 should fail")
    except InputValidationError:
        pass


def test_separation():
    """|F| stays above delta on the separating hyperplanes."""
    assert separation_check(1, 0.01).holds
    assert not separation_check(1, 0.06).holds
    at_two = separation_check(2, 0.1)
    assert abs(at_two.log2_minorant - at_two.log2_bound) < 1e-9
    for k in range(1, 7):
        assert separation_check(k, 0.01).minorant_ok
    assert log2_minorant(5) > separation_check(5, 0.01).log2_bound
    print("✅ C_0 2^((k-1)k/2) > delta, minorant tight at k = 2")

    sampled = separation_check(3, 0.01, samples=64)
    assert sampled.holds and sampled.sample_ok
    print(f"✅ Sampled min log2 |F| = {sampled.sample_min_log2:.3f} on Re z = 12")


def test_envelopes():
    params = CSParams()
    assert lower_envelope(1024.0, 0.01) == 9.0
    assert upper_envelope(1024.0, 0.6, params) == 10.0
    assert abs(lower_envelope(1024.0, 0.1) - 6.63) < 0.01
    assert abs(upper_envelope(1024.0, 0.1, params) - 15.42) < 0.01
    for fn in (lambda: lower_envelope(1.5, 0.1), lambda: upper_envelope(1.5, 0.1, params)):
        try:
            fn()
            raise AssertionError("r < 2 should fail")
        except InputValidationError as e:
            assert e.user_message == "r must be at least 2"
    print("✅ Envelope cases at r = 1024 and rejection of r < 2")


def test_slices():
    params = CSParams()
    assert slice_indices(1024.0, params) == list(range(1, 10))
    assert slice_room(3, 8.0) == 0.0 and slice_room(3, 10.0) == 6.0
    assert slice_zeros(3, 10.0, params) == 8 and slice_zeros(4, 10.0, params) == 0
    short = CSParams(c_spec="explicit:[2, 3, 4]")
    assert slice_indices(1024.0, short) == [1, 2, 3]
    print("✅ Slices meeting B_r and the zeros they carry")


def test_zeta_bracket():
    """Bracket at r = 2^10 and r = 2^20 for delta = 0.1."""
    params = CSParams()
    bracket = zeta_bracket(2.0 ** 10, 0.1, params)
    assert (bracket.lower, bracket.upper) == (8, 9)
    assert bracket.exact_tail_from == 3 and bracket.tail_count == 7
    assert bracket.verdicts["within_envelopes"] and bracket.verdicts["g_vanishes_on_slices"]
    grid_slices = [s for s in bracket.slices if s.method == "grid"]
    assert [s.i for s in grid_slices] == [1, 2] and all(s.components == 1 for s in grid_slices)
    print(f"✅ 8 <= zeta(F, 2^10, 0.1) <= 9 inside [{bracket.envelope_lower:.2f}, {bracket.envelope_upper:.2f}]")

    for k in (20, 25, 30):
        wide = zeta_bracket(2.0 ** k, 0.1, params)
        assert 0.9 <= wide.lower / k and wide.upper / k <= 1.1
        print(f"✅ r = 2^{k}: [{wide.lower}, {wide.upper}] against log2 r = {k}")


def test_sweep_within_envelopes():
    """Every bracket of the sweep sits inside its envelopes."""
    params = CSParams()
    radii = [2.0 ** k for k in range(4, 31, 2)]
    rows = verify_sweep(radii, DELTAS, params)
    assert len(rows) == len(radii) * len(DELTAS)
    for row in rows:
        assert row.within_envelopes, row
        assert row.zeta_lower <= row.zeta_upper
        assert row.mu_lower <= row.mu_upper
    print(f"✅ {len(rows)} rows, all inside the envelopes")

    with tempfile.TemporaryDirectory() as folder:
        path = write_sweep_csv(rows[:3], str(Path(folder) / "sweep.csv"))
        with path.open() as handle:
            table = list(csv.reader(handle))
    assert table[0] == SWEEP_COLUMNS and len(table) == 4
    print("✅ Sweep CSV written")


def test_island_analysis():
    """Peninsulas and the closed-form bound on zeta0."""
    params = CSParams()
    analysis = zeta0_analysis(2.0 ** 64, 0.1, params)
    assert analysis.applicable and analysis.i0 == 2
    assert analysis.upper == 10 and analysis.proof_upper == 10.0
    assert abs(analysis.m - 4.454) < 1e-3
    assert abs(analysis.closed_form - (6.0 + analysis.m)) < 1e-12
    assert analysis.proof_upper <= analysis.closed_form
    assert analysis.growth_class == "O(log log r)"
    peninsulas = [s.i for s in analysis.slices if s.verdict == "peninsula"]
    assert peninsulas == list(range(7, 64))
    print(f"✅ zeta0(F, 2^64, 0.1) <= 10 <= 6 + m = {analysis.closed_form:.3f}")

    faster = zeta0_analysis(2.0 ** 16, 0.1, CSParams(c_spec="pow:1,2"))
    assert faster.applicable and faster.growth_class == "O(log log log r)"
    print("✅ c_i = 2^(2^i) grows like log log log r")

    explicit = zeta0_analysis(2.0 ** 10, 0.1, CSParams(c_spec="explicit:[2, 4, 8, 16, 32, 64, 128, 256, 512]"))
    assert not explicit.applicable and "pow" in explicit.reason
    small = zeta0_analysis(8.0, 0.1, CSParams(c_spec="pow:1,2"))
    assert not small.applicable and "floor" in small.reason
    print("✅ Explicit sequences and radii below the floor are inapplicable")


def test_jacobian():
    """det J_F at the zeros against -c_i^2 + i^2 - 2i."""
    params = CSParams()
    decay = jacobian_decay(1, 1, params)
    assert abs(decay.log2_det + 9.584) < 1e-3
    assert decay.log2_threshold == -5.0 and decay.verdict
    for i in range(1, 11):
        c = params.value(i)
        assert all(jacobian_decay(i, j, params).verdict for j in range(1, c + 1))
    print("✅ Jacobian decay holds at every zero of slices 1 to 10")

    report = falsification(params=params)
    assert report.cutoff == 2
    assert not report.rows[0].fails and all(row.fails for row in report.rows[1:])
    print("✅ Polynomial Jacobian bound fails from slice 2 on")

    slow = CSParams(c_spec="explicit:[" + ", ".join(str(i + 1) for i in range(1, 13)) + "]")
    for i in range(1, 11):
        assert all(jacobian_decay(i, j, slow).verdict for j in range(1, i + 2))
    assert falsification(params=slow).cutoff is None
    print("✅ c_i = i + 1: decay holds, the polynomial bound never fails")

    try:
        falsification(c=0.0)
        raise AssertionError("c = 0 should fail")
    except InputValidationError:
        pass


if __name__ == "__main__":
    print("🧪 Testing the Cornalba-Shiffman verifier\n")
    for check in (test_thresholds, test_interval_containment, test_separation, test_envelopes, test_slices,
                  test_zeta_bracket, test_sweep_within_envelopes, test_island_analysis, test_jacobian):
        print("=" * 50)
        print(check.__doc__.strip() if check.__doc__ else check.__name__)
        print("=" * 50)
        check()
        print()
    print("🎉 Verifier checks completed!")
