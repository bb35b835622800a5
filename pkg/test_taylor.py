"""Checks for the explicit counting bounds and the Taylor models behind them."""

import math

import numpy as np

from src.bounds.taylor import (
    all_bounds,
    bezout_bound,
    choose_degree,
    component_count,
    homology_count,
    max_remainder,
    near_holomorphic_bound,
    remainder_bound,
    tau_bound,
    taylor_coeffs,
    taylor_model,
    zero_count,
    zeta_d_bound,
)
from src.maps.builtin import ExpressionMap, builtin
from src.topology.grid import coarse_count
from src.utils.errors import BoundDomainError, ErrorCategory, InputValidationError


def test_remainder_and_degree():
    """Cauchy remainder and the least admissible degree."""
    assert remainder_bound(2.0, 0, 0.0) == 1.0
    assert remainder_bound(2.0, 10, 5.0) == -4.0
    assert choose_degree(2.0, 0.0, 2.0) == 2
    assert choose_degree(4.0, 10.0, 1.0) == 6
    print("✅ log2(C_a a^-k mu) and the degree solving it below delta/2")

    try:
        remainder_bound(1.0, 3, 0.0)
        raise AssertionError("a = 1 should fail")
    except InputValidationError as e:
        assert e.user_message == "a must be greater than 1"
        print(f"✅ Correctly rejected a = 1: {e.user_message}")


def test_counting_bounds():
    """k^n + 5k(10k)^(2n-2), k^n and 3k(3+2k)^(2n-1) at known degrees."""
    # with a = 16 and delta = 4 the degree is 1, 2, 3 for log2 mu = 4, 8, 12
    assert choose_degree(16.0, 4.0, 4.0) == 1
    assert choose_degree(16.0, 8.0, 4.0) == 2
    assert choose_degree(16.0, 12.0, 4.0) == 3
    assert bezout_bound(1, 16.0, 8.0, 4.0) == 12
    assert bezout_bound(2, 16.0, 12.0, 4.0) == 13509
    assert zeta_d_bound(1, 16.0, 4.0, 4.0) == 15
    assert zeta_d_bound(2, 16.0, 8.0, 4.0) == 2058

    k = choose_degree(2.0, 20.0, 0.1)
    assert tau_bound(1, 2.0, 20.0, 0.1) == k
    assert tau_bound(2, 2.0, 20.0, 0.1) == k * k
    bounds = all_bounds(2, 2.0, 20.0, 0.1)
    assert bounds.degree == k and bounds.tau_bound == k * k
    assert bounds.bezout_bound == k ** 2 + 5 * k * (10 * k) ** 2
    print(f"✅ Bounds at degrees 1, 2, 3 and the full set at k = {k}")


def test_bound_domain():
    try:
        bezout_bound(1, 2.0, 1.0, 4.0)
        raise AssertionError("delta above mu/2 should fail")
    except BoundDomainError as e:
        assert e.category == ErrorCategory.BOUND_DOMAIN
        print(f"✅ Correctly caught out-of-range delta: {e.user_message}")


def test_near_holomorphic():
    """The perturbation only ever raises the bound."""
    plain = bezout_bound(1, 2.0, 20.0, 0.1)
    assert near_holomorphic_bound(1, 2.0, 0.0, 20.0, 0.1) == plain
    assert near_holomorphic_bound(1, 2.0, 0.5, 20.0, 0.1) >= plain
    try:
        near_holomorphic_bound(1, 2.0, 1.0, 20.0, 0.1)
        raise AssertionError("b = 1 should fail")
    except InputValidationError:
        pass
    print("✅ Near-holomorphic bound with b in [0, 1)")


def test_taylor_coefficients():
    """Cauchy integrals by FFT."""
    coeffs = taylor_coeffs(ExpressionMap(["exp(z1)"], 1), 6, 1.0)
    expected = [1.0 / math.factorial(j) for j in range(6)]
    assert np.max(np.abs(coeffs - expected)) < 1e-10

    coeffs = taylor_coeffs(builtin("polynomial", coeffs=[0, 0, 0, 1]), 5, 1.0)
    assert np.max(np.abs(coeffs - [0, 0, 0, 1, 0])) < 1e-12
    print("✅ e^z gives 1/j!, z^3 gives (0, 0, 0, 1, 0)")


def test_taylor_model_remainder():
    """The sampled remainder stays below its certified bound and below delta/2."""
    f = builtin("exp_shift")
    log2_mu_ar = math.log2(math.exp(2.0) + 1.0)
    model = taylor_model(f, 1.0, 2.0, 0.1, log2_mu_ar)
    coeffs = np.array([model.coefficient(j) for j in range(model.degree)])
    sampled = max_remainder(f, coeffs, 1.0)
    assert sampled <= 2.0 ** model.log2_remainder_bound
    assert sampled < 0.05
    print(f"✅ Degree {model.degree}: sampled remainder {sampled:.3g} <= 2^{model.log2_remainder_bound:.3f}")

    zeta = coarse_count(f, 10.0, 0.5, res_start=64).zeta
    log2_mu_20 = f.log2_mu_upper(20.0)
    assert zeta <= bezout_bound(1, 2.0, log2_mu_20, 0.5)
    print("✅ zeta(e^z + 1, 10, 1/2) sits below the explicit bound")

def test_remainder_sweep():
    """Sampled remainder under 2^remainder_bound for k <= 20 over maps, radii and a."""
    cases = (
        ("exp", ExpressionMap(["exp(z1)"], 1), lambda R: math.exp(R)),
        ("sin", ExpressionMap(["sin(z1)"], 1), lambda R: math.cosh(R)),
        ("exp_shift", builtin("exp_shift"), lambda R: math.exp(R) + 1.0),
    )
    checked = 0
    worst = -math.inf
    for name, f, mu_closed_form in cases:
        for r in (0.5, 1.0, 2.0):
            for a in (1.5, 2.0, 4.0):
                log2_mu_ar = math.log2(mu_closed_form(a * r))
                coeffs = taylor_coeffs(f, 20, a * r)
                for k in range(1, 21):
                    sampled = max_remainder(f, coeffs[:k], r, samples=512)
                    bound = 2.0 ** remainder_bound(a, k, log2_mu_ar)
                    assert sampled <= bound * (1.0 + 1e-9) + 1e-14, \
                        f"{name}: r={r}, a={a}, k={k}: {sampled:.3g} > {bound:.3g}"
                    if sampled > 1e-12:
                        worst = max(worst, sampled / bound)
                    checked += 1
    assert checked == 3 * 3 * 3 * 20
    print(f"✅ {checked} remainders below the Cauchy bound, worst ratio {worst:.3g}")


def test_bound_monotonicity():
    """Remainder falls with k and rises with mu; the degree follows."""
    for a in (1.5, 2.0, 4.0, 16.0):
        for log2_mu_ar in (-3.0, 0.0, 7.5, 40.0):
            values = [remainder_bound(a, k, log2_mu_ar) for k in range(30)]
            assert all(later < earlier for earlier, later in zip(values, values[1:]))
            assert remainder_bound(a, 5, log2_mu_ar + 1.0) > remainder_bound(a, 5, log2_mu_ar)
    print("✅ remainder_bound strictly decreasing in k, increasing in log2 mu")

    deltas = (1e-6, 1e-3, 0.01, 0.1, 0.5, 1.0, 4.0)
    for a in (1.5, 2.0, 4.0):
        degrees = [choose_degree(a, 20.0, delta) for delta in deltas]
        assert all(later <= earlier for earlier, later in zip(degrees, degrees[1:])), degrees
    for delta in deltas:
        degrees = [choose_degree(a, 20.0, delta) for a in (1.1, 1.5, 2.0, 4.0, 16.0, 256.0)]
        assert all(later <= earlier for earlier, later in zip(degrees, degrees[1:])), degrees
        degrees = [choose_degree(2.0, log2_mu, delta) for log2_mu in (-10.0, 0.0, 5.0, 20.0, 80.0)]
        assert all(later >= earlier for earlier, later in zip(degrees, degrees[1:])), degrees
    print("✅ choose_degree non-increasing in delta and a, non-decreasing in mu")


def test_degree_of_zero_map():
    """mu(0, ar) = 0 needs only the constant term; nan and +inf are refused."""
    assert choose_degree(2.0, -math.inf, 0.1) == 1
    assert choose_degree(1.5, -math.inf, 1e-9) == 1
    for bad in (math.nan, math.inf):
        try:
            choose_degree(2.0, bad, 0.1)
            raise AssertionError(f"log2 mu = {bad} should fail")
        except InputValidationError as e:
            assert "finite" in e.user_message
    print("✅ Degree 1 for the zero map, non-finite mu rejected")


def test_homology_count_dominates_zero_count():
    """3k(3+2k)^(2n-1) >= k^n for every k <= 100, n <= 3."""
    for n in (1, 2, 3):
        for k in range(1, 101):
            assert homology_count(n, k) >= zero_count(n, k), (n, k)
            assert component_count(n, k) >= zero_count(n, k)
    # in one variable the Betti bound also covers the critical-point term
    assert all(homology_count(1, k) >= component_count(1, k) for k in range(1, 101))
    # from two variables on it does not, starting at k = 1
    assert homology_count(2, 1) == 375 and component_count(2, 1) == 501
    print("✅ Betti bound above k^n at every degree up to 100 in up to 3 variables")



if __name__ == "__main__":
    print("🧪 Testing explicit counting bounds\n")
    for check in (test_remainder_and_degree, test_counting_bounds, test_bound_domain,
                  test_near_holomorphic, test_taylor_coefficients, test_taylor_model_remainder,
                  test_remainder_sweep, test_bound_monotonicity, test_degree_of_zero_map,
                  test_homology_count_dominates_zero_count):
        print("=" * 50)
        print(check.__doc__.strip() if check.__doc__ else check.__name__)
        print("=" * 50)
        check()
        print()
    print("🎉 Bound checks completed!")
