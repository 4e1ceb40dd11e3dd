"""Extended-precision primitives: precision policy, Gauss-Jacobi rules,
small dense determinants and finite-difference stencils.

Everything here is a pure function of its arguments plus the requested
binary precision; no state leaks between calls except value caches keyed
by the full argument tuple.
"""

from __future__ import annotations

from dataclasses import dataclass
from mpmath import mp

from .errors import NonconvergenceError

__all__ = [
    "Precision",
    "QuadRule",
    "gauss_jacobi_rule",
    "small_det",
    "fd_derivative",
    "as_mpf",
    "fd_step",
]

_MAX_DET_DIM = 512
_NEWTON_BUDGET = 120


@dataclass(frozen=True)
class Precision:
    """Working precision in bits of mantissa."""

    bits: int = 256

    def __post_init__(self):
        if not isinstance(self.bits, int) or self.bits < 64:
            raise ValueError(f"precision needs an integer bit count >= 64, got {self.bits!r}")

    def eps(self):
        with mp.workprec(self.bits):
            return mp.mpf(2) ** (1 - self.bits)


DEFAULT_PREC = Precision()


def as_mpf(x, prec: Precision = DEFAULT_PREC):
    """Convert to mpf, rounding decimal strings at the requested precision."""
    with mp.workprec(prec.bits):
        return mp.mpf(x)


def fd_step(prec: Precision):
    """Default finite-difference step: a quarter of the precision budget."""
    with mp.workprec(prec.bits):
        return mp.mpf(2) ** -(prec.bits // 4)


@dataclass(frozen=True)
class QuadRule:
    """Nodes and weights approximating an integral over `interval`.

    Weights carry the full weight function, so sum(w * f(x)) approximates
    the weighted integral of f directly.
    """

    nodes: tuple
    weights: tuple
    interval: tuple

    def __post_init__(self):
        lo, hi = self.interval
        if len(self.nodes) != len(self.weights):
            raise ValueError("nodes and weights differ in length")
        prev = None
        for x in self.nodes:
            if not (lo < x < hi):
                raise ValueError(f"node {x} outside open interval ({lo}, {hi})")
            if prev is not None and not (x > prev):
                raise ValueError("nodes must be strictly increasing")
            prev = x
        for w in self.weights:
            if not (w > 0):
                raise ValueError("weights must be positive")

    def __len__(self):
        return len(self.nodes)

    def integrate(self, f):
        return mp.fsum(w * f(x) for x, w in zip(self.nodes, self.weights))

    def mass(self):
        return mp.fsum(self.weights)


def _monic_jacobi_coeffs(m, p, q):
    """Diagonal a_k and squared off-diagonal b_k of the monic three-term
    recurrence for the weight (1-x)^p (1+x)^q on (-1, 1), plus total mass."""
    mu0 = mp.mpf(2) ** (p + q + 1) * mp.beta(p + 1, q + 1)
    ak = [(q - p) / (p + q + 2)]
    bk = [mp.mpf(0)]
    symmetric = p == q
    for k in range(1, m + 1):
        s = 2 * k + p + q
        if k == 1:
            b = 4 * (p + 1) * (q + 1) / ((p + q + 2) ** 2 * (p + q + 3))
        else:
            b = 4 * k * (k + p) * (k + q) * (k + p + q) / (s**2 * (s + 1) * (s - 1))
        bk.append(b)
        ak.append(mp.mpf(0) if symmetric else (q * q - p * p) / (s * (s + 2)))
    return ak, bk, mu0


def _orthonormal_eval(x, m, ak, sb, p0):
    """Value and derivative of the degree-m orthonormal polynomial, plus the
    sum of squares over degrees 0..m-1 (the inverse Christoffel weight)."""
    pkm1 = mp.mpf(0)
    pk = p0
    dkm1 = mp.mpf(0)
    dk = mp.mpf(0)
    sumsq = mp.mpf(0)
    for k in range(m):
        sumsq += pk * pk
        t = x - ak[k]
        pk1 = (t * pk - sb[k] * pkm1) / sb[k + 1]
        dk1 = (pk + t * dk - sb[k] * dkm1) / sb[k + 1]
        pkm1, pk = pk, pk1
        dkm1, dk = dk, dk1
    return pk, dk, sumsq


_RULE_CACHE: dict = {}


def gauss_jacobi_rule(m, p, q, prec: Precision = DEFAULT_PREC) -> QuadRule:
    """Gauss rule with m nodes for the weight (1-x)^p (1+x)^q on (-1, 1).

    Exact for polynomials of degree <= 2m - 1; requires p, q > -1.  Nodes
    are roots of the degree-m orthonormal polynomial, found by Newton
    iteration seeded from a cosine grid at 64 bits and re-polished at
    doubling precisions up to the working precision.  Weights come from
    the Christoffel sum of squares and are positive by construction.
    """
    if not isinstance(m, int) or m < 1:
        raise ValueError(f"node count must be a positive integer, got {m!r}")
    with mp.workprec(prec.bits):
        pv = mp.mpf(p)
        qv = mp.mpf(q)
    if not (pv > -1 and qv > -1):
        raise ValueError(f"Jacobi exponents must exceed -1, got p={p}, q={q}")
    key = (m, pv, qv, prec.bits)
    cached = _RULE_CACHE.get(key)
    if cached is not None:
        return cached

    ladder = [min(64, prec.bits)]
    while ladder[-1] < prec.bits:
        ladder.append(min(2 * ladder[-1], prec.bits))

    with mp.workprec(prec.bits):
        ak, bk, mu0 = _monic_jacobi_coeffs(m, pv, qv)
        sb = [mp.sqrt(b) for b in bk]
        p0 = 1 / mp.sqrt(mu0)

        with mp.workprec(ladder[0]):
            denom = m + (pv + qv + 1) / 2
            roots = [mp.cos(mp.pi * (k + mp.mpf(3) / 4 + pv / 2) / denom) for k in range(m)]

        for bits in ladder:
            with mp.workprec(bits):
                tol = mp.mpf(2) ** (8 - bits)
                for i, x in enumerate(roots):
                    x = mp.mpf(x)
                    steps = 0
                    while True:
                        val, der, _ = _orthonormal_eval(x, m, ak, sb, p0)
                        if der == 0:
                            raise NonconvergenceError("gauss_jacobi_rule: zero derivative", steps)
                        dx = val / der
                        x = x - dx
                        steps += 1
                        if abs(dx) <= tol:
                            break
                        if steps > _NEWTON_BUDGET:
                            raise NonconvergenceError(
                                "gauss_jacobi_rule: Newton stall", _NEWTON_BUDGET, dx
                            )
                    roots[i] = x

        nodes = list(reversed(roots))
        weights = []
        for x in nodes:
            _, _, sumsq = _orthonormal_eval(x, m, ak, sb, p0)
            weights.append(1 / sumsq)

        total = mp.fsum(weights)
        drift = abs(total / mu0 - 1)
        if drift > mp.mpf(2) ** (24 - prec.bits) * (m * m + 16):
            raise NonconvergenceError("gauss_jacobi_rule: mass check", m, drift)

        rule = QuadRule(tuple(nodes), tuple(weights), (mp.mpf(-1), mp.mpf(1)))
    _RULE_CACHE[key] = rule
    return rule


def small_det(rows, prec: Precision = DEFAULT_PREC):
    """Determinant of a small dense matrix by partially pivoted elimination.

    Accepts any nested sequence of numbers; dimension is capped at 512.
    The permutation sign is tracked exactly, so the sign of a well-scaled
    determinant is reliable even when the value underflows gradually.
    """
    a = [list(row) for row in rows]
    n = len(a)
    if n == 0:
        raise ValueError("empty matrix")
    if n > _MAX_DET_DIM:
        raise ValueError(f"matrix dimension {n} exceeds cap {_MAX_DET_DIM}")
    for row in a:
        if len(row) != n:
            raise ValueError("matrix must be square")
    with mp.workprec(prec.bits):
        a = [[x if isinstance(x, mp.mpc) else mp.mpf(x) for x in row] for row in a]
        sign = 1
        det = mp.mpf(1)
        for col in range(n):
            piv = max(range(col, n), key=lambda r: abs(a[r][col]))
            if a[piv][col] == 0:
                return mp.mpf(0)
            if piv != col:
                a[piv], a[col] = a[col], a[piv]
                sign = -sign
            pivot = a[col][col]
            det *= pivot
            arow = a[col]
            for r in range(col + 1, n):
                f = a[r][col] / pivot
                if f == 0:
                    continue
                brow = a[r]
                for c in range(col + 1, n):
                    brow[c] -= f * arow[c]
        return sign * det


_STENCIL_1 = (1, -8, 0, 8, -1)  # / 12h, error O(h^4)
_STENCIL_2 = (-1, 16, -30, 16, -1)  # / 12h^2, error O(h^4)


def fd_derivative(samples, order, step, prec: Precision = DEFAULT_PREC):
    """Central finite difference from an odd, uniformly spaced sample list.

    `samples` holds (x, f(x)) pairs; the derivative is taken at the middle
    abscissa with a five-point fourth-order stencil. `order` is 1 or 2.
    """
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order!r}")
    pts = sorted(samples, key=lambda s: s[0])
    k = len(pts)
    if k < 5 or k % 2 == 0:
        raise ValueError("need an odd number of samples, at least 5")
    with mp.workprec(prec.bits):
        h = mp.mpf(step)
        if not h > 0:
            raise ValueError("step must be positive")
        xs = [mp.mpf(x) for x, _ in pts]
        for i in range(k - 1):
            if abs((xs[i + 1] - xs[i]) - h) > h * mp.mpf(2) ** -40:
                raise ValueError("samples are not uniformly spaced at the given step")
        mid = k // 2
        window = [pts[mid - 2 + j][1] for j in range(5)]
        coeffs = _STENCIL_1 if order == 1 else _STENCIL_2
        acc = mp.fsum(c * f for c, f in zip(coeffs, window))
        return acc / (12 * h) if order == 1 else acc / (12 * h * h)
