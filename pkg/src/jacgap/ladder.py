"""Ladder quantities of the gapped weight and the identity suite.

Each degree n carries four scalars (R, r, Rt, rt) built from boundary
values and norms of the monic polynomials; A_n(z) and B_n(z) assemble
them into the rational coefficients of the lowering relation
P_n' = beta_n A_n P_{n-1} - B_n P_n.  `identity_residuals` evaluates the
two supplementary conditions, their sum rule, and the scalar identities
they imply, each normalized by its largest term, so a correct pipeline
reports residuals at the level of arithmetic rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from mpmath import mp

from .numerics import DEFAULT_PREC, Precision, fd_step
from .orthopoly import RecurrenceTable
from .weight import complement_rule

__all__ = [
    "LadderState",
    "LadderCoeffs",
    "DEFAULT_Z_SAMPLES",
    "ladder_state",
    "states_upto",
    "ladder_coeffs",
    "identity_residuals",
    "identity_sweep",
    "aux_residuals",
    "lowering_residual",
]

DEFAULT_Z_SAMPLES = (
    mp.mpf("0.7"),
    mp.mpc(0, "0.9"),
    mp.mpc("0.5", "0.5"),
    mp.mpf("2.0"),
    mp.mpc(0, "1.5"),
)

_POLE_CLEARANCE = mp.mpf("0.05")


@dataclass(frozen=True)
class LadderState:
    """Scalar ladder data at one degree: boundary mass R, cross term r,
    and their tilde companions from the weight's interior log-derivative."""

    n: int
    a: object
    R: object
    r: object
    Rt: object
    rt: object


@dataclass(frozen=True)
class LadderCoeffs:
    """Rational ladder coefficients A_n(z), B_n(z) at one point z."""

    n: int
    z: object
    A: object
    B: object


def _check_degree(table: RecurrenceTable, n: int, need_next: bool = False):
    hi = table.n_max - 1 if need_next else table.n_max
    if not isinstance(n, int) or n < 0 or n > hi:
        raise ValueError(f"degree n={n!r} outside [0, {hi}] for this table")


def ladder_state(table: RecurrenceTable, n: int, mode: str = "formula") -> LadderState:
    """Ladder scalars at degree n.

    mode="formula" uses the closed forms for Rt and rt; mode="quadrature"
    integrates their defining integrals against a rule with the weight
    exponent lowered by one, providing an independent cross-check.
    """
    _check_degree(table, n)
    if mode not in ("formula", "quadrature"):
        raise ValueError(f"unknown mode {mode!r}")
    wp = table.wp
    with mp.workprec(table.bits):
        a = wp.a
        alpha = wp.alpha
        w0a = (1 - a * a) ** alpha
        pn = table.boundary[n]
        R = 2 * pn * pn * w0a / table.h[n]
        if n == 0:
            r = mp.mpf(0)
        else:
            r = 2 * pn * table.boundary[n - 1] * w0a / table.h[n - 1]
        if mode == "formula":
            Rt = -(a * R + 2 * n + 2 * alpha + 1)
            rt = -(r + n)
        else:
            Rt, rt = _aux_by_quadrature(table, n)
        return LadderState(n, a, R, r, Rt, rt)


def _aux_by_quadrature(table: RecurrenceTable, n: int):
    """Rt and rt from their integral definitions.

    The integrand divides the weight by x^2 - 1, so the rule is built for
    the exponent alpha - 1 and the sign of the division flips the result.
    """
    wp = table.wp
    prec = Precision(table.bits)
    rule = complement_rule(wp, table.nodes_per_interval, prec, exponent=wp.alpha - 1)
    sum_nn = mp.mpf(0)
    sum_xc = mp.mpf(0)
    for x, w in rule.points():
        prev = mp.mpf(0)
        cur = mp.mpf(1)
        for k in range(n):
            prev, cur = cur, x * cur - table.beta[k] * prev
        sum_nn += w * cur * cur
        sum_xc += w * x * cur * prev
    Rt = -2 * wp.alpha * sum_nn / table.h[n]
    rt = mp.mpf(0) if n == 0 else -2 * wp.alpha * sum_xc / table.h[n - 1]
    return Rt, rt


def states_upto(table: RecurrenceTable, n_hi: int) -> list:
    """Formula-mode states for degrees 0..n_hi in one linear sweep."""
    _check_degree(table, n_hi)
    return [ladder_state(table, n) for n in range(n_hi + 1)]


def _check_pole_clearance(z, a):
    for pole in (a, -a, mp.mpf(1), mp.mpf(-1)):
        if abs(z - pole) < _POLE_CLEARANCE:
            raise ValueError(f"z sample {z} within {_POLE_CLEARANCE} of pole {pole}")


def ladder_coeffs(state: LadderState, z) -> LadderCoeffs:
    """A_n(z) and B_n(z) from the scalar state; z must clear the poles."""
    zv = mp.mpmathify(z)
    a = state.a
    _check_pole_clearance(zv, a)
    d_gap = zv * zv - a * a
    d_one = zv * zv - 1
    A = a * state.R / d_gap + state.Rt / d_one
    B = zv * state.r / d_gap + zv * state.rt / d_one
    return LadderCoeffs(state.n, zv, A, B)


def _residual(terms):
    scale = max(abs(t) for t in terms)
    if scale == 0:
        return mp.mpf(0)
    return abs(mp.fsum(terms)) / scale


def _v0p(z, alpha):
    return 2 * alpha * z / (1 - z * z)


def identity_sweep(table: RecurrenceTable, n_lo: int, n_hi: int, z_samples=None) -> dict:
    """Identity residuals for every degree in [n_lo, n_hi] at once.

    Returns {n: {name: residual}}.  The sweep shares the per-degree states
    and the running sums over lower degrees, so its cost is linear in n_hi
    rather than quadratic.
    """
    _check_degree(table, n_lo, need_next=True)
    _check_degree(table, n_hi, need_next=True)
    if n_lo < 1 or n_hi < n_lo:
        raise ValueError("need 1 <= n_lo <= n_hi <= n_max - 1")
    zs = DEFAULT_Z_SAMPLES if z_samples is None else tuple(z_samples)

    out = {}
    with mp.workprec(table.bits):
        wp = table.wp
        a = wp.a
        alpha = wp.alpha
        a2m1 = a * a - 1
        states = states_upto(table, n_hi + 1)
        zs = [mp.mpmathify(z) for z in zs]
        for z in zs:
            _check_pole_clearance(z, a)
        coeffs = [[ladder_coeffs(st, z) for z in zs] for st in states]
        v0 = [_v0p(z, alpha) for z in zs]

        sum_R = mp.fsum(states[j].R for j in range(n_lo))
        sum_A = [mp.fsum(coeffs[j][i].A for j in range(n_lo)) for i in range(len(zs))]

        for n in range(n_lo, n_hi + 1):
            sn = states[n]
            sm = states[n - 1]
            sp = states[n + 1]
            bn = table.beta[n]
            bp = table.beta[n + 1]
            K = 2 * n + 2 * alpha + 1
            res = {}

            s1 = s2 = s2p = mp.mpf(0)
            for i, z in enumerate(zs):
                cn = coeffs[n][i]
                cm = coeffs[n - 1][i]
                cp = coeffs[n + 1][i]
                s1 = max(s1, _residual([cp.B, cn.B, -z * cn.A, v0[i]]))
                s2 = max(s2, _residual([1, z * (cp.B - cn.B), -bp * cp.A, bn * cm.A]))
                s2p = max(
                    s2p,
                    _residual([cn.B**2, v0[i] * cn.B, sum_A[i], -bn * cn.A * cm.A]),
                )
            res["S1"] = s1
            res["S2"] = s2
            res["S2p"] = s2p

            res["s11"] = _residual([sp.r, sn.r, -a * sn.R])
            res["s12"] = _residual([sn.Rt, -sp.rt, -sn.rt, 2 * alpha])
            res["s21"] = _residual([a * (sp.r - sn.r), -bp * sp.R, bn * sm.R])
            res["s22"] = _residual([
                sp.r - sn.r + 1,
                -a * (bp * sp.R - bn * sm.R),
                -(K + 2) * bp,
                (K - 2) * bn,
            ])
            res["rn"] = _residual([sn.r**2, -bn * sn.R * sm.R])
            res["rn1"] = _residual([
                sn.r**2,
                2 * (n + alpha) * sn.r,
                n * (n + 2 * alpha),
                -bn * (a * sn.R + K) * (a * sm.R + K - 2),
            ])
            res["eq3"] = _residual([
                -a2m1 * sn.r**2,
                2 * (n + alpha) * sn.r,
                n * (n + 2 * alpha),
                -(K - 2) * a * bn * sn.R,
                -K * a * bn * sm.R,
                -K * (K - 2) * bn,
            ])
            res["eq4"] = _residual([
                -a2m1 * sn.r**2,
                2 * (n + alpha) * a * a * sn.r,
                -a * a2m1 * sum_R,
                -(K - 2) * a * bn * sn.R,
                -K * a * bn * sm.R,
            ])
            res["eq5"] = _residual([
                a * a2m1 * sum_R,
                -2 * (n + alpha) * a2m1 * sn.r,
                -K * (K - 2) * bn,
                n * (n + 2 * alpha),
            ])
            res["pna"] = _residual([
                2 * table.p_coef[n],
                -a2m1 * sn.r,
                -K * bn,
                mp.mpf(n),
            ])
            out[n] = res

            sum_R += sn.R
            for i in range(len(zs)):
                sum_A[i] += coeffs[n][i].A
    return out


def identity_residuals(table: RecurrenceTable, n: int, z_samples=None) -> dict:
    """Normalized residuals of every ladder identity at degree n.

    z-dependent identities report the worst residual over the z samples.
    """
    return identity_sweep(table, n, n, z_samples)[n]


def aux_residuals(table: RecurrenceTable, n: int) -> dict:
    """Cross-check of quadrature-mode Rt, rt against their closed forms."""
    _check_degree(table, n)
    with mp.workprec(table.bits):
        st = ladder_state(table, n)
        rtq, rtq2 = _aux_by_quadrature(table, n)
        alpha = table.wp.alpha
        return {
            "aux1": _residual([rtq, st.a * st.R, 2 * n + 2 * alpha + 1]),
            "aux2": _residual([rtq2, st.r, mp.mpf(n)]),
        }


def lowering_residual(table: RecurrenceTable, n: int, z, step=None) -> object:
    """Mismatch of the lowering relation against a finite-difference P_n'.

    Differentiation runs along the real direction, which is valid for
    complex z as well since P_n is a polynomial.
    """
    _check_degree(table, n)
    if n < 1:
        raise ValueError("lowering relation needs n >= 1")
    from .orthopoly import eval_monic

    with mp.workprec(table.bits):
        zv = mp.mpmathify(z)
        h = fd_step(Precision(table.bits)) if step is None else mp.mpf(step)
        vals = [eval_monic(table, n, zv + k * h).value for k in (-2, -1, 0, 1, 2)]
        dfd = (vals[0] - 8 * vals[1] + 8 * vals[3] - vals[4]) / (12 * h)
        st = ladder_state(table, n)
        c = ladder_coeffs(st, zv)
        ev = eval_monic(table, n, zv)
        lower = table.beta[n] * c.A * ev.value_prev
        keep = c.B * ev.value
        scale = max(abs(dfd), abs(lower), abs(keep))
        if scale == 0:
            return mp.mpf(0)
        return abs(dfd - (lower - keep)) / scale
