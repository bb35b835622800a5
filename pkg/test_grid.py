"""Checks for sampled sublevel sets, their components and the coarse counts."""

import json
import tempfile
from pathlib import Path

import numpy as np

from config.settings import get_setting, update_setting
from src.bounds.taylor import bezout_bound
from src.maps.builtin import ExpressionMap, builtin
from src.maps.modulus import log2_mu
from src.topology.grid import coarse_count, components, dump_mask, resolve_zeros, sample_sublevel
from src.utils.errors import InputValidationError, ResolutionCapError


def test_trivial_masks():
    """Constant maps give an empty or a full mask."""
    five = builtin("polynomial", coeffs=[5])
    grid = sample_sublevel(five, 1.0, 1.0, 32)
    assert not np.any(grid.mask)
    assert components(grid).components == []

    zero = builtin("polynomial", coeffs=[0])
    grid = sample_sublevel(zero, 1.0, 1.0, 32)
    assert np.array_equal(grid.mask, grid.inside)
    comp_set = components(grid)
    assert len(comp_set.components) == 1
    assert comp_set.components[0].touches_sphere and not comp_set.components[0].island
    print("✅ Empty mask for |f| = 5, one sphere-touching component for f = 0")


def test_exponential_islands():
    """e^z + 1 on B_10 at delta = 1/2: four islands around +-i pi, +-3i pi."""
    f = builtin("exp_shift")
    comp_set = components(sample_sublevel(f, 10.0, 0.5, 256))
    assert len(comp_set.components) == 4
    assert all(c.island for c in comp_set.components)
    print("✅ Four disjoint islands")

    report = coarse_count(f, 10.0, 0.5, res_start=64)
    assert (report.zeta, report.zeta0) == (4, 4)
    assert report.converged and len(report.resolutions) >= 2
    assert report.zeros_located == 4 and report.unattached_zeros == 0
    assert report.verdicts["every_island_has_zero"]
    print(f"✅ zeta = zeta0 = 4, converged at res {report.resolutions[-1]}")

    report = coarse_count(f, 2.0, 0.5, res_start=64)
    assert report.zeta == 0 and report.zeros_located == 0
    print("✅ No zeros in B_2, so zeta = 0")


def test_linear_growth():
    """e^z + 1 at delta = 1/2: zeta grows like r / pi and stays below the explicit bound."""
    f = builtin("exp_shift")
    for r in (5.0, 10.0, 20.0, 40.0):
        report = coarse_count(f, r, 0.5, res_start=256)
        assert report.converged
        assert 0.25 <= report.zeta / r <= 0.40
        assert report.zeta <= bezout_bound(1, 2.0, log2_mu(f, 2.0 * r), 0.5)
        print(f"✅ r = {r:g}: zeta = {report.zeta}")


def test_double_zero():
    """z^2 on the unit disc: one component around the double zero."""
    square = builtin("polynomial", coeffs=[0, 0, 1])
    report = coarse_count(square, 1.0, 0.25, res_start=64)
    assert (report.zeta, report.zeta0) == (1, 1)
    assert report.converged
    print("✅ zeta = zeta0 = 1 for z^2")


def test_islands_carry_zeros():
    """Every island of a converged count contains a located zero."""
    maps = [builtin("exp_shift"), builtin("polynomial", coeffs=[0, -0.25, 0, 1]),
            builtin("polynomial", coeffs=[-1, 0, 1]), ExpressionMap(["sin(z1)"], 1), ExpressionMap(["cos(z1)"], 1)]
    configurations = checked = 0
    for entire_map in maps:
        for r in (2.0, 4.0, 6.0, 8.0):
            zeros = resolve_zeros(entire_map, r)
            for delta in (0.1, 0.25, 0.5, 0.75):
                for res_start in (64, 128, 256):
                    report = coarse_count(entire_map, r, delta, res_start=res_start, max_res=1024, zeros=zeros)
                    configurations += 1
                    if not report.converged:
                        continue
                    assert report.verdicts["every_island_has_zero"], (entire_map.name, r, delta, res_start)
                    assert report.islands_without_zero == 0
                    assert report.zeta0 <= report.zeta
                    checked += 1
    assert configurations == 240 and checked >= 200
    print(f"✅ No island without a zero in {checked} of {configurations} counts")


def test_refinement_cap():
    """Unconverged counts come back flagged, not raised."""
    f = builtin("exp_shift")
    report = coarse_count(f, 10.0, 0.5, res_start=32, max_res=32)
    assert report.resolutions == [32]
    assert not report.converged
    print("✅ A single allowed resolution reports converged = False")

    original = get_setting("max_grid_cells")
    update_setting("max_grid_cells", 1024)
    try:
        sample_sublevel(f, 10.0, 0.5, 64)
        raise AssertionError("Should have failed but didn't!")
    except ResolutionCapError as e:
        print(f"✅ Correctly caught resolution cap: {e.user_message}")
    finally:
        update_setting("max_grid_cells", original)


def test_input_validation():
    f = builtin("exp_shift")
    for r, delta in ((10.0, -1.0), (10.0, 0.0), (-1.0, 0.5)):
        try:
            sample_sublevel(f, r, delta, 32)
            raise AssertionError(f"r={r}, delta={delta} should fail")
        except InputValidationError as e:
            assert "must be positive" in e.user_message
    print("✅ Non-positive r and delta are rejected")


def test_dump_mask():
    """Raw uint8 mask plus its JSON sidecar."""
    grid = sample_sublevel(builtin("exp_shift"), 10.0, 0.5, 32)
    with tempfile.TemporaryDirectory() as folder:
        raw, sidecar = dump_mask(grid, str(Path(folder) / "mask"))
        data = np.fromfile(raw, dtype=np.uint8)
        assert data.size == 32 * 32
        assert int(data.sum()) == int(np.count_nonzero(grid.mask))
        meta = json.loads(Path(sidecar).read_text())
        assert meta["res"] == 32
    print("✅ Mask dump matches the grid")


if __name__ == "__main__":
    print("🧪 Testing sublevel grids and coarse counts\n")
    for check in (test_trivial_masks, test_exponential_islands, test_linear_growth, test_double_zero,
                  test_islands_carry_zeros,
                  test_refinement_cap, test_input_validation, test_dump_mask):
        print("=" * 50)
        print(check.__doc__.strip() if check.__doc__ else check.__name__)
        print("=" * 50)
        check()
        print()
    print("🎉 Grid checks completed!")
