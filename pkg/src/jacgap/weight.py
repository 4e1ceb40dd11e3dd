"""The deformed Jacobi weight (1-x^2)^alpha restricted to |x| >= a.

Moments of the weight are evaluated through the incomplete Beta function
(computed by its continued fraction, with no quadrature involved), while
`complement_rule` builds Gauss rules on the two support intervals so the
two routes can cross-check each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from mpmath import mp

from .errors import NonconvergenceError
from .numerics import DEFAULT_PREC, Precision, QuadRule, gauss_jacobi_rule

__all__ = [
    "WeightParams",
    "ComplementRule",
    "weight_eval",
    "complement_rule",
    "moment",
    "lower_incomplete_beta",
]

_STRING_CONVERSION_BITS = 1024


def _param(x):
    """Exact numeric parameter; decimal strings round once at a fixed width."""
    if isinstance(x, str):
        with mp.workprec(_STRING_CONVERSION_BITS):
            return mp.mpf(x)
    return mp.mpf(x)


@dataclass(frozen=True)
class WeightParams:
    """Exponent alpha > 0 and half-gap 0 <= a < 1."""

    alpha: object
    a: object = 0

    def __post_init__(self):
        object.__setattr__(self, "alpha", _param(self.alpha))
        object.__setattr__(self, "a", _param(self.a))
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not (0 <= self.a < 1):
            raise ValueError(f"half-gap a must lie in [0, 1), got {self.a}")


def weight_eval(x, wp: WeightParams, prec: Precision = DEFAULT_PREC):
    """Weight value at x in [-1, 1]; zero strictly inside the excluded gap."""
    with mp.workprec(prec.bits):
        xv = mp.mpf(x)
        if abs(xv) > 1:
            raise ValueError(f"x={x} outside [-1, 1]")
        if abs(xv) < wp.a:
            return mp.mpf(0)
        return (1 - xv * xv) ** wp.alpha


@dataclass(frozen=True)
class ComplementRule:
    """Mirrored Gauss rules over (-1, -a) and (a, 1).

    Weights absorb (1-x^2)^alpha entirely, with `alpha` recording the
    exponent actually built in (it may differ from the weight's own when
    integrating against a modified density).
    """

    left: QuadRule
    right: QuadRule
    alpha: object

    def points(self):
        yield from zip(self.left.nodes, self.left.weights)
        yield from zip(self.right.nodes, self.right.weights)

    def integrate(self, f):
        return mp.fsum(w * f(x) for x, w in self.points())

    def mass(self):
        return self.left.mass() + self.right.mass()

    def size(self):
        return len(self.left) + len(self.right)


def complement_rule(wp: WeightParams, m: int, prec: Precision = DEFAULT_PREC,
                    exponent=None) -> ComplementRule:
    """m-point Gauss rules on each support interval of the gapped weight.

    The endpoint factor (1-x)^e is handled exactly by a Gauss-Jacobi rule
    mapped onto (a, 1); the analytic companion factor (1+x)^e is folded
    into the weights, and the left interval is the mirror image.  Pass
    `exponent` to integrate against (1-x^2)^e with e != alpha (any e > -1),
    as needed for densities divided by 1-x^2.
    """
    with mp.workprec(prec.bits):
        e = wp.alpha if exponent is None else mp.mpf(exponent)
        if not e > -1:
            raise ValueError(f"exponent must exceed -1, got {e}")
        base = gauss_jacobi_rule(m, e, 0, prec)
        a = wp.a
        half = (1 - a) / 2
        scale = half ** (e + 1)
        xs = []
        ws = []
        for u, v in zip(base.nodes, base.weights):
            x = (1 + a) / 2 + half * u
            xs.append(x)
            ws.append(scale * v * (1 + x) ** e)
        right = QuadRule(tuple(xs), tuple(ws), (a, mp.mpf(1)))
        left = QuadRule(
            tuple(-x for x in reversed(xs)),
            tuple(reversed(ws)),
            (mp.mpf(-1), -a),
        )
        return ComplementRule(left, right, e)


def _beta_cf(p, q, x, bits):
    """Continued fraction for the lower incomplete Beta, by the modified
    Lentz scheme; valid for x below the (p+1)/(p+q+2) crossover."""
    eps = mp.mpf(2) ** (4 - bits)
    tiny = mp.mpf(2) ** (-8 * bits)
    qab = p + q
    qap = p + 1
    qam = p - 1
    c = mp.mpf(1)
    d = 1 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1 / d
    h = d
    budget = 64 * bits + 1000
    for m in range(1, budget):
        m2 = 2 * m
        aa = m * (q - m) * x / ((qam + m2) * (p + m2))
        d = 1 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1 / d
        h *= d * c
        aa = -(p + m) * (qab + m) * x / ((p + m2) * (qap + m2))
        d = 1 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1 / d
        step = d * c
        h *= step
        if abs(step - 1) < eps:
            return h
    raise NonconvergenceError("incomplete beta continued fraction", budget)


def lower_incomplete_beta(p, q, x, prec: Precision = DEFAULT_PREC):
    """Unregularized lower incomplete Beta over [0, x], for p, q > 0."""
    with mp.workprec(prec.bits):
        p = mp.mpf(p)
        q = mp.mpf(q)
        x = mp.mpf(x)
        if not (p > 0 and q > 0):
            raise ValueError("incomplete beta needs positive parameters")
        if not (0 <= x <= 1):
            raise ValueError(f"argument x={x} outside [0, 1]")
        if x == 0:
            return mp.mpf(0)
        if x == 1:
            return mp.beta(p, q)
        front = x**p * (1 - x) ** q
        if x < (p + 1) / (p + q + 2):
            return front * _beta_cf(p, q, x, prec.bits) / p
        return mp.beta(p, q) - (1 - x) ** q * x**p * _beta_cf(q, p, 1 - x, prec.bits) / q


def moment(k: int, wp: WeightParams, prec: Precision = DEFAULT_PREC):
    """k-th moment of the gapped weight over [-1, 1].

    Odd moments vanish by symmetry; even ones reduce to a difference of
    Beta integrals after substituting u = x^2, so no quadrature enters.
    """
    if not isinstance(k, int) or k < 0:
        raise ValueError(f"moment order must be a nonnegative integer, got {k!r}")
    with mp.workprec(prec.bits):
        if k % 2 == 1:
            return mp.mpf(0)
        s = k // 2
        p = s + mp.mpf(1) / 2
        q = wp.alpha + 1
        full = mp.beta(p, q)
        if wp.a == 0:
            return full
        return full - lower_incomplete_beta(p, q, wp.a * wp.a, prec)
