"""Monic orthogonal polynomials for the gapped weight.

The three-term recurrence x P_n = P_{n+1} + beta_n P_{n-1} (the diagonal
term vanishes by symmetry) is recovered with the discretized Stieltjes
procedure: inner products are taken against `complement_rule`, and the
per-interval node count doubles until two successive tables agree to
2^(-bits/2) in every recurrence coefficient.  The finer table is kept,
so the returned coefficients are accurate essentially to working
precision, not merely to the doubling threshold.
"""

from __future__ import annotations

from dataclasses import dataclass
from mpmath import mp

from .errors import NonconvergenceError, PrecisionLossError
from .numerics import DEFAULT_PREC, Precision
from .weight import WeightParams, complement_rule

__all__ = ["RecurrenceTable", "PolyEval", "build_table", "eval_monic"]

_MAX_NODES_PER_INTERVAL = 2**14


@dataclass(frozen=True)
class RecurrenceTable:
    """Recurrence data for degrees 0..n_max at one parameter point.

    beta[0] is a zero sentinel (the recurrence never uses it); h[n] is the
    squared norm of P_n; p_coef[n] is the coefficient of x^(n-2) in P_n;
    boundary[n] caches P_n evaluated at the gap edge x = a.
    """

    wp: WeightParams
    n_max: int
    bits: int
    nodes_per_interval: int
    beta: tuple
    h: tuple
    p_coef: tuple
    boundary: tuple

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("n_max must be at least 1")
        want = self.n_max + 1
        for name in ("beta", "h", "p_coef", "boundary"):
            if len(getattr(self, name)) != want:
                raise ValueError(f"{name} must have length n_max + 1")


@dataclass(frozen=True)
class PolyEval:
    """Value of P_n and P_(n-1) at one point."""

    n: int
    x: object
    value: object
    value_prev: object


def _stieltjes_pass(wp: WeightParams, n_max: int, m: int, bits: int):
    """One discretized-Stieltjes sweep on an m-point-per-interval rule."""
    rule = complement_rule(wp, m, Precision(bits))
    xs = list(rule.left.nodes) + list(rule.right.nodes)
    ws = list(rule.left.weights) + list(rule.right.weights)
    h = [mp.fsum(ws)]
    beta = [mp.mpf(0)]
    p_prev = [mp.mpf(1)] * len(xs)
    p_cur = list(xs)
    for n in range(1, n_max + 1):
        hn = mp.fsum(w * p * p for w, p in zip(ws, p_cur))
        if not hn > 0:
            raise PrecisionLossError(
                f"squared norm underflow at degree {n} (a={wp.a}, alpha={wp.alpha})",
                suggested_bits=2 * bits,
            )
        h.append(hn)
        beta.append(hn / h[n - 1])
        if n < n_max:
            bn = beta[n]
            p_next = [x * pc - bn * pp for x, pc, pp in zip(xs, p_cur, p_prev)]
            p_prev, p_cur = p_cur, p_next
    return beta, h


def _pow2_at_least(k: int) -> int:
    m = 32
    while m < k:
        m *= 2
    return m


_TABLE_CACHE: dict = {}


def _slice(table: RecurrenceTable, n_max: int) -> RecurrenceTable:
    if n_max == table.n_max:
        return table
    k = n_max + 1
    return RecurrenceTable(
        table.wp, n_max, table.bits, table.nodes_per_interval,
        table.beta[:k], table.h[:k], table.p_coef[:k], table.boundary[:k],
    )


def build_table(wp: WeightParams, n_max: int, prec: Precision = DEFAULT_PREC) -> RecurrenceTable:
    """Recurrence table for degrees up to n_max, converged in node count."""
    if not isinstance(n_max, int) or n_max < 1:
        raise ValueError(f"n_max must be a positive integer, got {n_max!r}")
    key = (wp.alpha, wp.a, prec.bits)
    cached = _TABLE_CACHE.get(key)
    if cached is not None and cached.n_max >= n_max:
        return _slice(cached, n_max)

    bits = prec.bits
    with mp.workprec(bits):
        target = mp.mpf(2) ** -(bits // 2)
        m = _pow2_at_least(n_max + 12)
        beta, h = _stieltjes_pass(wp, n_max, m, bits)
        while True:
            if 2 * m > _MAX_NODES_PER_INTERVAL:
                raise NonconvergenceError("build_table: node-doubling cap", m)
            beta2, h2 = _stieltjes_pass(wp, n_max, 2 * m, bits)
            worst = max(
                abs(b1 - b2) / abs(b2) for b1, b2 in zip(beta[1:], beta2[1:])
            )
            worst = max(worst, abs(h[0] - h2[0]) / h2[0])
            m *= 2
            beta, h = beta2, h2
            if worst <= target:
                break

        p_coef = [mp.mpf(0), mp.mpf(0)]
        for n in range(1, n_max):
            p_coef.append(p_coef[n] - beta[n])

        a = wp.a
        bprev = mp.mpf(1)
        bcur = mp.mpf(a)
        boundary = [bprev, bcur]
        for n in range(1, n_max):
            bnext = a * bcur - beta[n] * bprev
            bprev, bcur = bcur, bnext
            boundary.append(bcur)

        table = RecurrenceTable(
            wp, n_max, bits, m,
            tuple(beta), tuple(h), tuple(p_coef), tuple(boundary),
        )
    if cached is None or cached.n_max < n_max:
        _TABLE_CACHE[key] = table
    return table


def eval_monic(table: RecurrenceTable, n: int, x) -> PolyEval:
    """Evaluate P_n (and P_(n-1)) at a real or complex point."""
    if not isinstance(n, int) or n < 0:
        raise ValueError(f"degree must be a nonnegative integer, got {n!r}")
    if n > table.n_max:
        raise ValueError(f"degree {n} exceeds table n_max {table.n_max}")
    with mp.workprec(table.bits):
        xv = mp.mpmathify(x)
        prev = mp.mpf(0)
        cur = mp.mpf(1)
        for k in range(n):
            prev, cur = cur, xv * cur - table.beta[k] * prev
        return PolyEval(n, xv, cur, prev)
