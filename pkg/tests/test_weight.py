import pytest
from mpmath import mp

from jacgap import (
    Precision,
    WeightParams,
    complement_rule,
    lower_incomplete_beta,
    moment,
    weight_eval,
)

PREC = Precision(192)


def test_params_validate():
    with pytest.raises(ValueError):
        WeightParams("0", "0.3")
    with pytest.raises(ValueError):
        WeightParams("1", "1")
    with pytest.raises(ValueError):
        WeightParams("1", "-0.1")


def test_weight_vanishes_in_gap():
    wp = WeightParams("1.5", "0.4")
    with mp.workprec(192):
        assert weight_eval("0.2", wp, PREC) == 0
        assert weight_eval("-0.39", wp, PREC) == 0
        got = weight_eval("0.5", wp, PREC)
        want = (1 - mp.mpf("0.25")) ** mp.mpf("1.5")
        assert abs(got - want) < mp.mpf(2) ** -180


def test_moment_odd_is_zero():
    wp = WeightParams("2", "0.3")
    assert moment(1, wp, PREC) == 0
    assert moment(7, wp, PREC) == 0


def test_moment_against_quadrature():
    # the closed Beta form and the Gauss rules are independent routes
    wp = WeightParams("1.25", "0.35")
    rule = complement_rule(wp, 32, PREC)
    with mp.workprec(192):
        for k in (0, 2, 4):
            direct = moment(k, wp, PREC)
            quad = rule.integrate(lambda x: x**k)
            # the folded (1+x)^alpha factor converges geometrically, not exactly
            assert abs(direct - quad) / direct < mp.mpf(2) ** -150


def test_moment_closed_gap():
    # a = 0 collapses to the classical full-interval Beta integral
    wp = WeightParams("0.75", "0")
    with mp.workprec(192):
        want = mp.beta(mp.mpf("0.5"), mp.mpf("1.75"))
        assert abs(moment(0, wp, PREC) - want) / want < mp.mpf(2) ** -180


def test_complement_rule_mass_and_symmetry():
    wp = WeightParams("1", "0.3")
    rule = complement_rule(wp, 20, PREC)
    with mp.workprec(192):
        assert abs(rule.mass() - moment(0, wp, PREC)) < mp.mpf(2) ** -170
        assert rule.size() == 40
        assert all(abs(x) > mp.mpf("0.3") for x, _ in rule.points())
        odd = rule.integrate(lambda x: x**3)
        assert abs(odd) < mp.mpf(2) ** -170


def test_complement_rule_exponent_override():
    # integrating (1 - x^2) against the alpha-1 rule recovers the alpha mass
    wp = WeightParams("1.5", "0.25")
    with mp.workprec(192):
        shifted = complement_rule(wp, 40, PREC, exponent=mp.mpf("0.5"))
        got = shifted.integrate(lambda x: 1 - x * x)
        assert abs(got - moment(0, wp, PREC)) < mp.mpf(2) ** -150


def test_incomplete_beta_cross_library():
    # mpmath's betainc is an oracle here, not a dependency of the package code
    with mp.workprec(192):
        for p, q, x in (("0.5", "2", "0.09"), ("1.5", "3.5", "0.7"), ("2", "0.5", "0.99")):
            got = lower_incomplete_beta(p, q, x, PREC)
            want = mp.betainc(mp.mpf(p), mp.mpf(q), 0, mp.mpf(x))
            assert abs(got - want) / abs(want) < mp.mpf(2) ** -170


def test_incomplete_beta_endpoints():
    with mp.workprec(192):
        assert lower_incomplete_beta("0.5", "1.5", "0", PREC) == 0
        full = lower_incomplete_beta("0.5", "1.5", "1", PREC)
        assert abs(full - mp.beta(mp.mpf("0.5"), mp.mpf("1.5"))) < mp.mpf(2) ** -180


def test_incomplete_beta_validates():
    with pytest.raises(ValueError):
        lower_incomplete_beta("0", "1", "0.5", PREC)
    with pytest.raises(ValueError):
        lower_incomplete_beta("1", "1", "1.5", PREC)
