"""Gap probabilities for a symmetric excluded interval.

Three independent routes to the same number.  The production route
multiplies squared-norm ratios between the punctured and unpunctured
weights.  A moment-determinant ratio rechecks it at small matrix order,
and a counting Monte Carlo over the joint eigenvalue density rechecks it
in double precision.

The module also evaluates H = a(a^2-1) d/da ln P, the scaled log-slope of
the gap probability, and verifies the closed chain that characterizes it:
the quantity obeys a first-derivative balance against r_n, the pair (H, r_n)
closes under one more derivative, r_n is recoverable from the two-jet of H
as a ratio N/D of explicit polynomials, and H itself satisfies a
second-order ODE once r_n is eliminated.  Those polynomials are the
largest expressions in the package, so a transcription self-test rebuilds
the linear-in-r_n equation they solve from scratch at random arguments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from mpmath import mp

from .errors import ZeroDenominatorError
from .ladder import ladder_state
from .numerics import DEFAULT_PREC, Precision, fd_derivative, small_det
from .orthopoly import build_table
from .weight import WeightParams, moment

__all__ = [
    "GapResult",
    "HnOdeReport",
    "gap_probability",
    "hankel_gap_probability",
    "hn_ode_report",
    "nd_transcription_residual",
    "mc_gap_probability",
]

_HANKEL_MAX_N = 12
_MC_MAX_N = 4
_MC_MIN_SAMPLES = 10_000
_MC_CHUNK = 1 << 17


@dataclass(frozen=True)
class GapResult:
    """Gap probability at one (n, a) point.

    prob is the probability that no eigenvalue lies in (-a, a); logdP is
    d/da ln prob, and H = a(a^2-1) logdP = a(1-a^2) sum_{j<n} R_j.
    """

    n: int
    a: object
    prob: object
    H: object
    logdP: object


@dataclass(frozen=True)
class HnOdeReport:
    """Residuals of the H-based characterization at one (n, a) point.

    res_equ4 checks the first-derivative balance, res_rna the recovery
    |r_n - N/D| relative to r_n, res_hna the second-order ODE for H, and
    res_equ1 / res_rnp5 the two intermediate consistency relations.
    D_value is the recovery denominator actually used.
    """

    res_equ4: object
    res_rna: object
    res_hna: object
    D_value: object
    res_equ1: object
    res_rnp5: object


def gap_probability(wp: WeightParams, n: int, prec: Precision = DEFAULT_PREC) -> GapResult:
    """Probability that all n eigenvalues avoid (-a, a).

    ln P accumulates as sum of ln h_j(a) - ln h_j(0); the probability
    decays superexponentially in n at fixed a, so the product form would
    underflow long before the log does.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    with mp.workprec(prec.bits):
        table_a = build_table(wp, n, prec)
        table_0 = build_table(WeightParams(wp.alpha, 0), n, prec)
        log_p = mp.fsum(mp.log(table_a.h[j]) - mp.log(table_0.h[j]) for j in range(n))
        logd = -mp.fsum(ladder_state(table_a, j).R for j in range(n))
        a = wp.a
        return GapResult(n, a, mp.e**log_p, a * (a * a - 1) * logd, logd)


def hankel_gap_probability(wp: WeightParams, n: int, prec: Precision = DEFAULT_PREC):
    """The same probability as a ratio of moment determinants.

    The moment matrices are Hilbert-like and shed digits fast, so the
    determinants are taken at doubled working precision.  Only useful as
    a cross-check at small n; refuses n beyond 12.
    """
    if not 1 <= n <= _HANKEL_MAX_N:
        raise ValueError(f"moment-determinant route needs 1 <= n <= {_HANKEL_MAX_N}")
    inner = Precision(2 * prec.bits)
    wp0 = WeightParams(wp.alpha, 0)
    with mp.workprec(inner.bits):
        gapped = [[moment(i + j, wp, inner) for j in range(n)] for i in range(n)]
        full = [[moment(i + j, wp0, inner) for j in range(n)] for i in range(n)]
        ratio = small_det(gapped, inner) / small_det(full, inner)
    with mp.workprec(prec.bits):
        return +ratio


def _log_slope(table):
    a = table.wp.a
    total = mp.fsum(ladder_state(table, j).R for j in range(table.n_max))
    return a * (1 - a * a) * total


def _residual(terms):
    scale = max(abs(t) for t in terms)
    if scale == 0:
        return mp.mpf(0)
    return abs(mp.fsum(terms)) / scale


def _brace_terms(H, Hp, Hpp, a, n, alpha):
    """The five summands of the recovery denominator before the 8(alpha+n)
    prefactor; also the squared brace on the right of the H ODE."""
    g = alpha + n
    e = a * a - 1
    M = a * a * n * n + 2 * alpha * a * a * n + 1
    return [
        a * a * e * e * Hpp,
        -2 * a * e * (a * a * (2 * n * n + 4 * alpha * n + 1) - 2 * H) * Hp,
        -4 * e * H * H,
        -2 * a * a * ((2 * alpha**2 - 1) * a * a + 2 * n * n + 4 * alpha * n + 1) * H,
        4 * a**4 * g * g * M,
    ]


def _recovery_parts(H, Hp, Hpp, a, n, alpha):
    """Numerator N and denominator D recovering r_n from the two-jet of H,
    plus the brace summands for a scale-aware zero test on D."""
    g = alpha + n
    e = a * a - 1
    M = a * a * n * n + 2 * alpha * a * a * n + 1
    N = mp.fsum([
        a * a * e**3 * Hpp**2,
        4 * a * a * e * e * (H - a * Hp) * Hpp,
        4 * a * e * e * Hp**3,
        -4 * e * ((5 * a * a - 1) * H + (g - 1) * (g + 1) * a**4
                  - 4 * n * (n + 2 * alpha) * a * a) * Hp**2,
        (32 * a * e * H * H
         + (8 * a**5 * (2 * alpha**2 + 2 * n * n + 4 * alpha * n - 1)
            - 8 * a**3 * (4 * n * n + 8 * alpha * n - 1)
            + 32 * a * n * (2 * alpha + n)) * H
         - 16 * a**3 * g * g * M) * Hp,
        -16 * e * H**3,
        -(4 * a**4 * (4 * alpha**2 + 4 * n * n + 8 * alpha * n - 1)
          - 4 * a * a * (4 * n * n + 8 * alpha * n - 1)
          + 16 * n * (2 * alpha + n)) * H * H,
        16 * a * a * g * g * M * H,
    ])
    braces = _brace_terms(H, Hp, Hpp, a, n, alpha)
    D = 8 * g * mp.fsum(braces)
    return N, D, braces


def _hna_residual(H, Hp, Hpp, a, n, alpha):
    g = alpha + n
    e = a * a - 1
    M = a * a * n * n + 2 * alpha * a * a * n + 1
    bracket = mp.fsum([
        a * a * e**4 * Hpp**2,
        -4 * a * a * e * e * (a * e * Hp - e * H - 2 * a * a * g * g) * Hpp,
        4 * a * e**3 * Hp**3,
        -4 * e * e * (a**4 * (g - 1) * (g + 1) - 4 * a * a * n * (2 * alpha + n)
                      + (5 * a * a - 1) * H) * Hp**2,
        8 * a * e * (4 * e * H * H
                     + (a**4 * (2 * alpha**2 + 2 * n * n + 4 * alpha * n - 1)
                        + a * a * (4 * alpha**2 + 1)
                        + 4 * n * (2 * alpha + n)) * H
                     - 2 * a * a * g * g * (3 * a * a * n * n + 6 * alpha * a * a * n
                                            + a * a + 1)) * Hp,
        -16 * e * e * H**3,
        -4 * e * (a**4 * (4 * alpha**2 + 4 * n * n + 8 * alpha * n - 1)
                  + a * a * (8 * alpha**2 + 4 * n * n + 8 * alpha * n + 1)
                  + 4 * n * (2 * alpha + n)) * H * H,
        -16 * a * a * g * g * (a**4 * (2 * alpha**2 - n * n - 2 * alpha * n - 1)
                               + 3 * a * a * n * (2 * alpha + n) + 1) * H,
        32 * a**6 * g**4 * M,
    ])
    brace = mp.fsum(_brace_terms(H, Hp, Hpp, a, n, alpha))
    rhs = 64 * g * g * (a**4 * g * g + e * (H - a * Hp)) * brace**2
    return _residual([bracket * bracket, -rhs])


def hn_ode_report(family, n: int, a=None) -> HnOdeReport:
    """Residuals of the full H-based chain at the family's probe point.

    H, H', H'' come from finite differences of the log-slope across the
    family grid; r_n and beta_n come from the center table, so every
    relation is checked against data it did not produce.  The optional a
    is a guard: when given it must match the probe point.
    """
    if not 1 <= n <= family.n_max:
        raise ValueError(f"need 1 <= n <= {family.n_max}, got {n}")
    bits = family.prec.bits
    with mp.workprec(bits):
        if a is not None and mp.mpf(a) != family.a:
            raise ValueError("a disagrees with the family probe point")
        samples = family.samples(
            lambda t: t.wp.a * (1 - t.wp.a**2)
            * mp.fsum(ladder_state(t, j).R for j in range(n)))
        H = samples[family.half_width][1]
        Hp = fd_derivative(samples, 1, family.step, family.prec)
        Hpp = fd_derivative(samples, 2, family.step, family.prec)
        r_samples = family.samples(lambda t: ladder_state(t, n).r)
        r = r_samples[family.half_width][1]
        rp = fd_derivative(r_samples, 1, family.step, family.prec)
        table = family.table(0)
        beta = table.beta[n]

        av = family.a
        alpha = family.alpha
        g = alpha + n
        e = av * av - 1
        K = 2 * n + 2 * alpha + 1

        res_equ1 = _residual([
            K * (K - 2) * beta,
            H,
            2 * g * e * r,
            -n * (n + 2 * alpha),
        ])
        res_equ4 = _residual([av * Hp, -H, e * r * r, 2 * g * av * av * r])
        res_rnp5 = _residual([
            e * e * rp * rp,
            -8 * e * g * r**3,
            -4 * ((4 * av * av - 1) * g * g + alpha**2 + H) * r * r,
            -8 * av * g * Hp * r,
            -Hp * Hp,
        ])

        N, D, braces = _recovery_parts(H, Hp, Hpp, av, n, alpha)
        scale = max(abs(t) for t in braces)
        if abs(D) <= mp.mpf(2) ** (32 - bits) * 8 * g * scale:
            raise ZeroDenominatorError(
                f"recovery denominator at n={n}, a={mp.nstr(av, 8)}", D)
        recovered = N / D
        res_rna = abs(r - recovered) / abs(r) if r != 0 else abs(recovered)
        res_hna = _hna_residual(H, Hp, Hpp, av, n, alpha)
        return HnOdeReport(res_equ4, res_rna, res_hna, D, res_equ1, res_rnp5)


def _reduce_by_quadratic(coeffs, E, F):
    """Remainder of a polynomial in r modulo r^2 - F r - E."""
    cs = list(coeffs)
    for d in range(len(cs) - 1, 1, -1):
        c = cs[d]
        cs[d] = mp.mpf(0)
        cs[d - 1] += c * F
        cs[d - 2] += c * E
    return cs[0], cs[1]


def nd_transcription_residual(H, Hp, Hpp, a, n, alpha,
                              prec: Precision = DEFAULT_PREC):
    """Transcription self-test for the recovery polynomials N and D.

    Rebuilds from scratch the linear-in-r_n equation c0 + c1 r = 0 that
    the recovery solves: cross-multiply the two expressions for (r_n')^2,
    then reduce powers of r_n modulo the quadratic relation the
    first-derivative balance imposes.  At arbitrary arguments, on-shell or
    not, N c1 + c0 D must vanish identically; anything else is a copy
    error in N or D.
    """
    with mp.workprec(prec.bits):
        H, Hp, Hpp, a, alpha = (mp.mpf(v) for v in (H, Hp, Hpp, a, alpha))
        g = alpha + n
        e = a * a - 1
        q_coeffs = [a * Hpp, 4 * a * g, 2 * a]
        q_sq = [mp.mpf(0)] * 5
        for i, ci in enumerate(q_coeffs):
            for j, cj in enumerate(q_coeffs):
                q_sq[i + j] += ci * cj
        S = -e * (a * Hp - H) + g * g * a**4
        t_coeffs = [Hp * Hp, 8 * a * g * Hp,
                    4 * ((4 * a * a - 1) * g * g + alpha**2 + H), 8 * e * g, mp.mpf(0)]
        big = [e * e * q_sq[k] - 4 * S * t_coeffs[k] for k in range(5)]
        E = (a * Hp - H) / (1 - a * a)
        F = 2 * g * a * a / (1 - a * a)
        c0, c1 = _reduce_by_quadratic(big, E, F)
        N, D, _ = _recovery_parts(H, Hp, Hpp, a, n, alpha)
        return _residual([N * c1, c0 * D])


def mc_gap_probability(wp: WeightParams, n: int, samples: int, seed: int):
    """Counting Monte Carlo estimate of the gap probability.

    Draws uniform points on [-1,1]^n, weighs them by the squared
    Vandermonde times the base weight, and takes the ratio of the
    gap-respecting average to the unrestricted one; the normalizing
    constant cancels.  Standard error comes from the delta method for the
    ratio of correlated means.  Chunks are independent with seeds derived
    from (seed, chunk index), merged in fixed order, so the result is
    bit-identical for a given seed.  Double precision throughout: this is
    a stochastic oracle, not a production route.
    """
    if not 1 <= n <= _MC_MAX_N:
        raise ValueError(f"Monte Carlo route needs 1 <= n <= {_MC_MAX_N}")
    if samples < _MC_MIN_SAMPLES:
        raise ValueError(f"need at least {_MC_MIN_SAMPLES} samples, got {samples}")
    if seed < 0:
        raise ValueError("seed must be a nonnegative integer")
    alpha = float(wp.alpha)
    a = float(wp.a)
    sx = sy = sxx = syy = sxy = 0.0
    done = 0
    chunk_index = 0
    while done < samples:
        m = min(_MC_CHUNK, samples - done)
        rng = np.random.Generator(np.random.Philox(key=(int(seed) << 64) + chunk_index))
        x = rng.uniform(-1.0, 1.0, size=(m, n))
        f = np.prod(1.0 - x * x, axis=1) ** alpha
        for i in range(n):
            for j in range(i + 1, n):
                d = x[:, i] - x[:, j]
                f *= d * d
        y = f * np.all(np.abs(x) >= a, axis=1)
        sx += float(f.sum())
        sy += float(y.sum())
        sxx += float((f * f).sum())
        syy += float((y * y).sum())
        sxy += float((f * y).sum())
        done += m
        chunk_index += 1
    m_tot = float(samples)
    xbar = sx / m_tot
    ybar = sy / m_tot
    est = ybar / xbar
    var_x = sxx / m_tot - xbar * xbar
    var_y = syy / m_tot - ybar * ybar
    cov = sxy / m_tot - xbar * ybar
    var_ratio = (var_y - 2.0 * est * cov + est * est * var_x) / (m_tot * xbar * xbar)
    return est, float(np.sqrt(max(var_ratio, 0.0)))
