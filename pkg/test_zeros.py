"""Checks for winding numbers, zero location and tau."""

import math

import numpy as np

from src.bounds.taylor import tau_bound
from src.maps.builtin import ExpressionMap, builtin
from src.maps.modulus import log2_mu, sample_ball
from src.zeros.isolation import isolation_certificate
from src.zeros.tau import tau, tau_report
from src.zeros.winding import locate_zeros, winding_number
from src.utils.errors import BoundDomainError, ContourUnsafeError, InputValidationError


def test_winding_numbers():
    """Argument principle on rectangles."""
    cube = builtin("polynomial", coeffs=[0, 0, 0, 1])
    assert winding_number(cube, (-1.0, 1.0, -1.0, 1.0)) == 3

    f = builtin("exp_shift")
    assert winding_number(f, (-1.0, 1.0, 2.0, 4.0)) == 1
    assert winding_number(f, (-1.0, 1.0, 4.0, 5.0)) == 0

    pair = builtin("polynomial", coeffs=[-0.25, 0, 1])
    assert winding_number(pair, (-1.0, 1.0, -1.0, 1.0)) == 2
    assert winding_number(pair, (0.25, 0.75, -0.25, 0.25)) == 1
    print("✅ z^3, e^z + 1 and (z - 1/2)(z + 1/2) on boxes")


def test_unsafe_contours():
    square = builtin("polynomial", coeffs=[0, 0, 1])
    try:
        winding_number(square, (0.0, 1.0, -1.0, 1.0))
        raise AssertionError("Should have failed but didn't!")
    except ContourUnsafeError as e:
        print(f"✅ Correctly caught contour through a zero: {e.user_message}")

    try:
        winding_number(builtin("exp_shift", n=2), (-1.0, 1.0, -1.0, 1.0))
        raise AssertionError("n = 2 should be rejected")
    except InputValidationError:
        print("✅ Winding numbers need a scalar one-variable map")


def test_locate_zeros():
    """Subdivision search with Newton polishing."""
    found = locate_zeros(builtin("exp_shift"), (-11.0, 11.0, -11.0, 11.0))
    assert not found.partial
    expected = sorted((2 * k + 1) * math.pi for k in (-2, -1, 0, 1))
    assert len(found.zeros) == 4
    for zero, im in zip(sorted(found.zeros, key=lambda z: z.im), expected):
        assert zero.multiplicity == 1
        assert abs(zero.location - 1j * im) < 1e-10
    print("✅ e^z + 1 on [-11, 11]^2: +-i pi and +-3i pi")

    double = locate_zeros(builtin("polynomial", coeffs=[0, 0, 1]), (-1.0, 1.0, -1.0, 1.0))
    assert len(double.zeros) == 1
    assert double.zeros[0].multiplicity == 2 and abs(double.zeros[0].location) < 1e-10
    print("✅ z^2: one zero of multiplicity 2")

    planted = [0.3 + 0.2j, -0.5 + 0.1j, 0.1 - 0.6j, -0.2 - 0.3j, 0.6 - 0.1j, -0.1 + 0.7j]
    coeffs = np.poly(planted)[::-1]
    found = locate_zeros(builtin("polynomial", coeffs=list(coeffs)), (-0.95, 0.93, -0.97, 0.91))
    assert found.total_multiplicity == 6
    for root in planted:
        assert min(abs(zero.location - root) for zero in found.zeros) < 1e-10
    print("✅ All six planted roots recovered")


def test_tau():
    """Zeros with multiplicity inside islands."""
    report = tau_report(builtin("exp_shift"), 10.0, 0.5, res=128)
    assert report.tau == 4 and report.zeta0 == 4
    assert all(island.winding == 1 for island in report.islands)
    print("✅ tau(e^z + 1, 10, 1/2) = 4")

    assert tau(builtin("polynomial", coeffs=[0, 0, 1]), 1.0, 0.25, res=128) == 2
    print("✅ tau(z^2, 1, 1/4) = 2")

    assert tau(builtin("polynomial", coeffs=[0, 1]), 1.0, 2.0, res=64) == 0
    print("✅ No islands, tau = 0")


def test_tau_within_taylor_bound():
    """tau never exceeds the degree bound k^n of a Taylor model on B_2r."""
    maps = [builtin("exp_shift"), builtin("polynomial", coeffs=[0, -0.25, 0, 1]), ExpressionMap(["sin(z1)"], 1)]
    for entire_map in maps:
        for r in (2.0, 4.0, 6.0, 8.0):
            log2_mu_2r = log2_mu(entire_map, 2 * r)
            for delta in (0.1, 0.25, 0.5):
                report = tau_report(entire_map, r, delta, res=128)
                assert report.zeta0 <= report.tau <= tau_bound(1, 2.0, log2_mu_2r, delta), (entire_map.name, r, delta)
    print("✅ zeta0 <= tau <= k for three maps, four radii and three thresholds")

def test_isolation_balls():
    """|f(xi + z)| stays above the certified floor on spheres inside the isolation ball."""
    f = builtin("exp_shift")
    for xi in (1j * math.pi, -3j * math.pi, 5j * math.pi):
        cert = isolation_certificate(f, [xi])
        assert cert.mu_certified and abs(cert.log2_abs_det) < 1e-12
        mu = 2.0 ** cert.log2_mu
        assert abs(cert.radius * 2.0 * (mu + 1.0) - 1.0) < 1e-12
        assert abs(cert.log2_floor(cert.radius) - cert.log2_delta) < 1e-12
        theta = 2.0 * np.pi * np.arange(256) / 256
        for fraction in (1.0, 0.5, 0.1, 0.01):
            rho = fraction * cert.radius
            points = (xi + rho * np.exp(1j * theta)).reshape(-1, 1)
            values, absorbed = f.log2_abs_points(points)
            assert not np.any(absorbed)
            assert float(np.min(values)) >= cert.log2_floor(rho) - 1e-9, (xi, fraction)
    print(f"✅ e^z + 1: floors hold on circles down to 1% of the radius {cert.radius:.3g}")

    f2 = builtin("exp_shift_n", n=2)
    xi = np.array([1j * math.pi, -1j * math.pi])
    cert = isolation_certificate(f2, list(xi))
    assert cert.mu_certified and cert.log2_residual < cert.log2_delta
    for fraction in (1.0, 0.5, 0.1):
        rho = fraction * cert.radius
        values, _ = f2.log2_abs_points(xi[None, :] + sample_ball(2, rho, 512))
        assert float(np.min(values)) >= cert.log2_floor(rho) - 1e-9
    print(f"✅ (e^z1 + 1, e^z2 + 1): floor holds on spheres of radius up to {cert.radius:.3g}")

    try:
        cert.log2_floor(2.0 * cert.radius)
        raise AssertionError("beyond the radius should fail")
    except InputValidationError:
        pass

    try:
        isolation_certificate(builtin("polynomial", coeffs=[0, 0, 1]), [0.0])
        raise AssertionError("a double zero should fail")
    except BoundDomainError as e:
        assert "degenerate" in e.user_message
    try:
        isolation_certificate(ExpressionMap(["z1*z2"], 2), [0.0, 0.0])
        raise AssertionError("a map C^2 -> C should fail")
    except InputValidationError:
        pass
    assert not isolation_certificate(ExpressionMap(["z1^2 - 1"], 1), [1.0], budget=256).mu_certified
    print("✅ Degenerate zeros and non-square maps refused; sampled mu is marked uncertified")



if __name__ == "__main__":
    print("🧪 Testing zero location and tau\n")
    for check in (test_winding_numbers, test_unsafe_contours, test_locate_zeros, test_tau,
                  test_tau_within_taylor_bound, test_isolation_balls):
        print("=" * 50)
        print(check.__doc__.strip() if check.__doc__ else check.__name__)
        print("=" * 50)
        check()
        print()
    print("🎉 Zero checks completed!")
