import pytest
from mpmath import mp

from jacgap import (
    aux_residuals,
    identity_residuals,
    identity_sweep,
    ladder_coeffs,
    ladder_state,
    lowering_residual,
    states_upto,
)

TOL = lambda: mp.mpf(10) ** -30


def test_state_modes_agree(table_mid):
    # formula vs quadrature is the independent cross-check for Rt, rt
    with mp.workprec(256):
        for n in (0, 1, 4, 9):
            f = ladder_state(table_mid, n, mode="formula")
            q = ladder_state(table_mid, n, mode="quadrature")
            scale = max(abs(f.Rt), abs(f.rt), mp.mpf(1))
            assert abs(f.Rt - q.Rt) / scale < TOL()
            assert abs(f.rt - q.rt) / scale < TOL()


def test_state_conventions(table_mid):
    with mp.workprec(256):
        s0 = ladder_state(table_mid, 0)
        assert s0.r == 0
        s3 = ladder_state(table_mid, 3)
        assert s3.R > 0


def test_identity_residuals_all_small(table_mid):
    with mp.workprec(256):
        for n in (1, 2, 7):
            res = identity_residuals(table_mid, n)
            assert set(res) == {
                "S1", "S2", "S2p", "s11", "s12", "s21", "s22",
                "rn", "rn1", "eq3", "eq4", "eq5", "pna",
            }
            worst = max(res.values())
            assert worst < TOL(), (n, {k: mp.nstr(v, 4) for k, v in res.items()})


def test_sweep_matches_single(table_mid):
    with mp.workprec(256):
        sweep = identity_sweep(table_mid, 2, 6)
        single = identity_residuals(table_mid, 4)
        assert set(sweep[4]) == set(single)
        for k in single:
            # running sums accumulate in a different order, so allow rounding
            assert abs(sweep[4][k] - single[k]) < mp.mpf(2) ** -240


def test_sweep_validates_range(table_mid):
    with pytest.raises(ValueError):
        identity_sweep(table_mid, 0, 4)
    with pytest.raises(ValueError):
        identity_sweep(table_mid, 3, 2)
    with pytest.raises(ValueError):
        identity_sweep(table_mid, 1, 12)  # needs state at n+1


def test_aux_residuals_small(table_mid):
    with mp.workprec(256):
        for n in (1, 5):
            res = aux_residuals(table_mid, n)
            assert res["aux1"] < TOL()
            assert res["aux2"] < TOL()


def test_ladder_coeffs_pole_guard(table_mid):
    with mp.workprec(256):
        s = ladder_state(table_mid, 3)
        with pytest.raises(ValueError):
            ladder_coeffs(s, mp.mpf("0.3"))  # z = a sits on a pole
        c = ladder_coeffs(s, mp.mpf("0.55"))
        assert c.n == 3


def test_lowering_residual_real_and_complex(table_mid):
    with mp.workprec(256):
        for z in (mp.mpf("0.62"), mp.mpc("0.4", "0.3")):
            res = lowering_residual(table_mid, 5, z)
            assert abs(res) < mp.mpf(10) ** -18


def test_states_upto_is_a_sweep(table_mid):
    states = states_upto(table_mid, 6)
    assert [s.n for s in states] == list(range(7))
    with mp.workprec(256):
        direct = ladder_state(table_mid, 6)
        assert states[6].R == direct.R
