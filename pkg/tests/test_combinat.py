
import pytest

from controllers.combinat import (binom, c, z, z_alternating, k_zero, k_one,
                                  pi_henaut, pi_zero, pi_prime, sizes,
                                  is_calibrated, is_strongly_calibrated,
                                  prop2_check, bound_profile, plain_ratio,
                                  closed_ratio, z_ratio_product,
                                  closed_jet_dimension, pi_prime_curves_top,
                                  pi_prime_curves_one, pi_zero_curves_closed_form,
                                  pi_prime_curves, pi_zero_curves, damiano_bound,
                                  codim_one_bound, BoundProfile)
from models.errors import InvalidParameters, NotDivisible


def test_binomials():
    assert binom(4, 2) == 6
    assert binom(5, 3) == 10
    assert all(binom(n, 0) == 1 for n in range(8))
    assert binom(3, -1) == 0
    assert binom(3, 4) == 0


def test_polynomial_counts():
    assert c(3, 2) == 6
    assert all(c(r, 0) == 1 for r in range(1, 6))
    assert all(c(2, k) == k + 1 for k in range(10))


def test_closed_symbol_counts():
    assert z(3, 2, 1) == 8
    assert z(4, 1, 1) == 10
    assert all(z(n, p, 0) == binom(n, p) for n in range(2, 7) for p in range(1, n + 1))


def test_closed_symbol_count_formulas_agree():
    for n in range(2, 9):
        for p in range(1, n + 1):
            for k in range(9):
                assert binom(n + k, n - p) * c(p, k) == z_alternating(n, p, k)


def test_closed_jet_dimension_sums_layers():
    assert closed_jet_dimension(2, 1, 1) == z(2, 1, 0) + z(2, 1, 1) == 5


def test_thresholds():
    assert k_zero(3, 3, 2, 1) == 2
    assert k_zero(4, 4, 2, 1) == 1
    # ratio 3(k+2)/2 takes 3 then 9/2
    assert k_zero(3, 4, 2, 2) == 0
    assert k_one(3, 4, 2, 2) == 1
    assert k_one(4, 4, 2, 1) == 1
    # ratio (3+h)/2 reaches 3 exactly at h = 3
    assert k_one(3, 3, 2, 1) == 3


def test_threshold_absent_below_first_ratio():
    assert k_zero(4, 1, 2, 1) is None
    assert k_one(4, 1, 2, 1) is None


def test_henaut_bound():
    assert pi_henaut(4, 4, 2, 2) == 1
    assert pi_henaut(4, 1, 2, 1) == 0
    for d in range(1, 11):
        assert pi_henaut(2, d, 1, 1) == max(d - 1, 0) * max(d - 2, 0) // 2


def test_henaut_bound_needs_divisibility():
    with pytest.raises(NotDivisible):
        pi_henaut(3, 4, 2, 1)


def test_rank_bounds():
    assert pi_zero(3, 3, 2, 1) == 6
    assert pi_zero(4, 4, 2, 1) == 4
    assert pi_prime(3, 3, 2, 1) == 8
    assert pi_prime(3, 4, 2, 2) == 1
    for n, q, p in ((3, 2, 1), (4, 2, 2), (5, 3, 2)):
        assert pi_zero(n, 1, q, p) == 0


def test_sizes():
    counts = sizes(4, 4, 2, 1, 1)
    assert (counts.alpha, counts.beta) == (24, 20)
    counts = sizes(3, 4, 2, 2, 0)
    assert (counts.alpha, counts.beta) == (4, 3)
    counts = sizes(5, 3, 2, 1, 0)
    assert (counts.alpha, counts.beta) == (3 * binom(2, 1), binom(5, 1))
    assert sizes(3, 4, 2, 2, 1).alpha_tilde == 4 * (z(2, 2, 0) + z(2, 2, 1))


def test_calibration():
    assert is_calibrated(4, 4, 2, 1)
    assert is_strongly_calibrated(3, 4, 2, 2)
    assert is_calibrated(3, 3, 2, 1)
    assert not is_calibrated(3, 5, 2, 1)
    assert not is_calibrated(4, 1, 2, 1)


def test_prop2():
    assert not prop2_check(3, 3, 2, 1)
    assert prop2_check(3, 4, 2, 2)
    # closed 1-forms in the plane have fewer coefficients than all 1-forms
    assert all(prop2_check(2, d, 1, 1) for d in range(1, 4))
    assert not prop2_check(2, 4, 1, 1)


def test_ratios_strictly_increase():
    for n in range(2, 7):
        for q in range(1, n):
            for p in range(1, q + 1):
                for k in range(8):
                    assert plain_ratio(n, q, p, k) < plain_ratio(n, q, p, k + 1)
                    assert closed_ratio(n, q, p, k) < closed_ratio(n, q, p, k + 1)
                    assert closed_ratio(n, q, p, k) == z_ratio_product(n, q, p, k)


def test_curve_web_closed_forms():
    for d in range(2, 13):
        assert pi_prime(3, d, 2, 2) == pi_prime_curves_top(d)
        assert pi_prime(3, d, 2, 1) == pi_prime_curves_one(d)


def test_published_plain_closed_form_only_matches_at_three():
    assert pi_zero_curves_closed_form(3) == pi_zero(3, 3, 2, 1) == 6
    assert pi_zero(3, 2, 2, 1) == 1
    assert pi_zero(3, 4, 2, 1) == 20
    assert pi_zero_curves_closed_form(2) == 3
    assert pi_zero_curves_closed_form(4) == 10


def test_curve_web_sums():
    for n in range(3, 6):
        for d in range(1, 11):
            for p in range(1, n):
                assert pi_prime(n, d, n - 1, p) == pi_prime_curves(n, d, p)
                assert pi_zero(n, d, n - 1, p) == pi_zero_curves(n, d, p)
    for n in range(3, 7):
        for d in range(1, 13):
            assert pi_prime(n, d, n - 1, n - 1) == damiano_bound(n, d)


def test_hypersurface_webs():
    for n in range(2, 6):
        for d in range(1, 21):
            assert pi_prime(n, d, 1, 1) == codim_one_bound(n, d)


def test_plain_bound_never_exceeds_henaut_bound():
    for n, q in ((4, 2), (6, 3), (4, 1)):
        for p in range(1, q + 1):
            for d in range(1, 11):
                assert pi_zero(n, d, q, p) <= pi_henaut(n, d, q, p)
    assert pi_zero(4, 4, 2, 1) < pi_henaut(4, 4, 2, 1)
    assert pi_zero(4, 6, 2, 1) < pi_henaut(4, 6, 2, 1)


def test_bound_profile():
    profile = bound_profile(3, 3, 2, 1)
    assert (profile.pi0, profile.pi_prime, profile.prop2_ok) == (6, 8, False)
    assert profile.pi_henaut is None
    assert bound_profile(4, 4, 2, 2).pi_henaut == 1
    empty = bound_profile(3, 1, 2, 1)
    assert (empty.pi0, empty.pi_prime) == (0, 0)
    assert BoundProfile.from_dict(profile.to_dict()) == profile


@pytest.mark.parametrize('arguments', [(3, 3, 3, 1), (3, 3, 2, 3), (3, 0, 2, 1), (1, 3, 1, 1), (3, 3, 2, 0)])
def test_bound_profile_rejects_invalid_parameters(arguments):
    with pytest.raises(InvalidParameters):
        bound_profile(*arguments)
