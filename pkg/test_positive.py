import math

import numpy as np
import pytest
from numpy.polynomial import Polynomial
from pydantic import ValidationError

from cursekit.errors import NoDecomposablePartError, ParameterError, PropertyViolation, UnsupportedError
from cursekit.models import SpaceKind, SpaceSpec, Theorem
from cursekit.numerics import maximize_1d
from cursekit.positive import (
    PositiveConstants,
    SplineFamily,
    constants_from_family,
    dp_plus_constants,
    dp_plus_family,
    p2_constants,
    p2_ctilde_at,
    p2_family,
    p2_norm,
    p2_norm_bound,
    positive_rule_bound,
    w1_chord_family,
    w1_closed_form_cp,
)
from cursekit.spaces import worst_case_function

CTILDE_Q = {2: 1.00016, 3: 1.00098, 4: 1.00161, 5: 1.00195, 10: 1.00204, 100: 1.00039, 1000: 1.00004}
CP_A_HALF = {2: 1.0198, 3: 1.01023, 4: 1.00465, 5: 1.00208, 10: 1.00004}


def no_anchor(p=2.0, a=0.5):
    return SpaceSpec(kind=SpaceKind.NO_ANCHOR_SOBOLEV, p=p, a=a)


@pytest.mark.parametrize("q, expected", sorted(CTILDE_Q.items()))
def test_p2_table(q, expected):
    consts = p2_constants(float(q))
    assert abs(consts.c_tilde - expected) <= 1e-4
    assert consts.details["c_star"] < consts.details["u_q"] < 0.5


def test_p2_constants_q2_by_hand():
    consts = p2_constants(2.0)
    assert consts.details["u_q"] == pytest.approx(1 / 64, rel=1e-12)
    assert consts.details["c_star"] == pytest.approx(1 / 128, rel=1e-12)
    assert consts.beta == pytest.approx(1 - 1 / 1536, rel=1e-14)
    assert consts.c_tilde == pytest.approx((1 - 1 / 3072) ** -0.5, rel=1e-12)


@pytest.mark.parametrize("q", [2.0, 3.0, 5.0, 10.0])
def test_c_star_is_grid_maximizer(q):
    consts = p2_constants(q)
    grid = np.linspace(0.0, consts.details["u_q"], 10_002)[1:-1]
    best = max(p2_ctilde_at(float(c), q) for c in grid)
    assert best <= consts.c_tilde + 1e-10


def test_p2_ctilde_tends_to_one():
    values = [p2_constants(q).c_tilde for q in (10.0, 100.0, 1000.0, 10_000.0)]
    assert all(x > y for x, y in zip(values, values[1:]))
    assert values[-1] - 1 < 1e-5


def test_bound_family_matches_closed_forms():
    for q in (2.0, 5.0):
        expected = p2_constants(q)
        consts = constants_from_family(p2_family(expected.details["c_star"], q, norm="bound"))
        assert consts.c_tilde == pytest.approx(expected.c_tilde, rel=1e-12)
        assert consts.beta == pytest.approx(expected.beta, abs=1e-10)


def test_p2_norm_simple_polynomials():
    assert p2_norm(Polynomial([1.0]), 2.0) == pytest.approx(1.0)
    assert p2_norm(Polynomial([0.0, 1.0]), 2.0) == pytest.approx(math.sqrt(4 / 3))
    # sign change at 1/2 inside the interval
    assert p2_norm(Polynomial([-0.5, 1.0]), 3.0) == pytest.approx((2 * 0.5**4 / 4 + 1.0) ** (1 / 3))


def test_norm_bound_dominates_quadrature():
    c, q = 0.2, 3.0
    fam = p2_family(c, q)
    bound = p2_norm_bound(c, q)
    for y in np.linspace(0.0, 1.0, 21):
        assert fam.norm_of(float(y)) <= bound + 1e-12


def test_large_c_breaks_the_family():
    fam = p2_family(0.05, 2.0)
    assert maximize_1d(fam.integral_of, 0.0, 1.0).value == pytest.approx(1 - 0.05 / 12, abs=1e-10)
    # the derivative terms push the norm above ||h1|| = 1
    assert fam.norm_of(0.5) > 1.0
    with pytest.raises(PropertyViolation):
        constants_from_family(fam, grid_points=101)


def test_p2_refusals():
    with pytest.raises(ParameterError):
        p2_family(0.6, 2.0)
    with pytest.raises(ParameterError):
        p2_family(0.1, 2.0, norm="sup")
    with pytest.raises(UnsupportedError):
        p2_constants(math.inf)
    with pytest.raises(ParameterError):
        p2_constants(1.0)


def _flat_family(evaluate, name="flat"):
    return SplineFamily(
        name=name,
        evaluate=evaluate,
        norm_of=lambda y: 1.0,
        integral_of=lambda y: 1.0,
        h1_at=lambda y: 1.0,
        domain=(0.0, 1.0),
        norm_h1=1.0,
        I_h1=1.0,
    )


def test_degenerate_families_are_rejected():
    with pytest.raises(PropertyViolation):
        constants_from_family(_flat_family(lambda y, x: 1.0))
    with pytest.raises(PropertyViolation) as info:
        _flat_family(lambda y, x: 1.0 - 2.0 * (y - x) ** 2).check()
    assert "nonnegativity" in str(info.value)
    with pytest.raises(PropertyViolation):
        _flat_family(lambda y, x: 0.5).check()


def test_positive_constants_validation():
    with pytest.raises(ValidationError):
        PositiveConstants(alpha=1.0, beta=0.5, norm_h1=1.0, I_h1=1.0, c_tilde=2.0)
    with pytest.raises(ValidationError):
        PositiveConstants(alpha=0.5, beta=0.5, norm_h1=1.0, I_h1=1.0, c_tilde=1.5)
    ok = PositiveConstants(alpha=0.5, beta=0.8, norm_h1=1.0, I_h1=1.0, c_tilde=1.25)
    assert ok.c_tilde == 1.25


@pytest.mark.parametrize("p, expected", sorted(CP_A_HALF.items()))
def test_cp_table_from_decomposition(p, expected):
    spec = no_anchor(p=float(p))
    consts = dp_plus_constants(worst_case_function(spec), spec.q)
    assert abs(consts.c_tilde - expected) <= 1e-4
    assert abs(consts.c_tilde - w1_closed_form_cp(float(p), 0.5)) <= 1e-8


def test_cp_closed_form_by_hand():
    assert w1_closed_form_cp(2.0, 0.5) == pytest.approx(math.sqrt(1.04), rel=1e-14)
    # a = 0.3: (3 + 0.3^3 + 0.7^3) / (3 + 0.7^3)
    assert w1_closed_form_cp(2.0, 0.3) == pytest.approx(math.sqrt(3.37 / 3.343), rel=1e-12)
    assert w1_closed_form_cp(2.0, 0.3) < w1_closed_form_cp(2.0, 0.5)
    with pytest.raises(ParameterError):
        w1_closed_form_cp(2.0, 1.0)
    with pytest.raises(UnsupportedError):
        w1_closed_form_cp(1.0, 0.5)


def test_decomposition_sides_balance_at_half():
    spec = no_anchor()
    consts = dp_plus_constants(worst_case_function(spec), spec.q)
    assert consts.details["norm_part0"] == pytest.approx(consts.details["norm_part1"], rel=1e-10)
    assert consts.c_tilde > 1


def test_dp_plus_refusals():
    poly2 = worst_case_function(SpaceSpec(kind=SpaceKind.POLY2, q=2.0))
    with pytest.raises(NoDecomposablePartError):
        dp_plus_constants(poly2, 2.0)
    with pytest.raises(ParameterError):
        dp_plus_constants(worst_case_function(no_anchor()), 3.0)


@pytest.mark.parametrize("a", [0.3, 0.5])
def test_dp_plus_family_agrees_with_constants(a):
    dec = worst_case_function(no_anchor(a=a))
    direct = dp_plus_constants(dec, dec.q)
    via_family = constants_from_family(dp_plus_family(dec))
    assert via_family.c_tilde == pytest.approx(direct.c_tilde, rel=1e-8)


def test_chord_family_gives_valid_constant():
    fam = w1_chord_family(no_anchor())
    fam.check()
    consts = constants_from_family(fam)
    assert consts.c_tilde > 1
    assert consts.alpha < consts.norm_h1
    with pytest.raises(ParameterError):
        w1_chord_family(SpaceSpec(kind=SpaceKind.ANCHORED_SOBOLEV, q=2.0))


def test_positive_rule_bound_empty_rule():
    consts = p2_constants(2.0)
    cert = positive_rule_bound(consts, 0, 10)
    assert cert.theorem == Theorem.THM5
    assert cert.bound_normalized == 0.5
    assert cert.initial_error == 1.0
    assert cert.bound_absolute == 0.5


def test_positive_rule_bound_literal_formula():
    consts = p2_constants(2.0)
    cert = positive_rule_bound(consts, 1, 100)
    expected = (1 - consts.beta**100) / (2 * max(1.0, consts.alpha**100))
    assert cert.bound_normalized == pytest.approx(expected, rel=1e-9)
    assert positive_rule_bound(consts, 10**6, 10).bound_normalized == 0.0


def test_positive_rule_bound_nonincreasing_in_n():
    consts = p2_constants(2.0)
    values = [positive_rule_bound(consts, n, 20_000).bound_normalized for n in (0, 1, 3, 10, 30, 100, 10**4)]
    assert all(x >= y for x, y in zip(values, values[1:]))
    assert values[1] > 0.4
    with pytest.raises(ParameterError):
        positive_rule_bound(consts, -1, 5)
