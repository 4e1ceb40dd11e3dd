"""Sine-kernel Fredholm determinant oracle and the double-scaling study.

Everything here is independent of the orthogonal-polynomial pipeline: the
determinant comes from a symmetrized Nystrom discretization on Gauss-
Legendre nodes, sigma(t) = t d/dt ln det and its derivatives from finite
differences in t, and the closure test is the Jimbo-Miwa-Okamoto form of
Painleve V with all four parameters zero.  The scaling study then maps
finite-n data onto this oracle through the bulk density at the origin.

Kernel normalization is sin(x-y)/(pi (x-y)) on (-t,t): with the bare
kernel the operator norm would exceed 1 and the determinant could not be
a probability.  The choice is validated downstream by the small-t trace
law and by the Painleve residual itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from mpmath import mp

from .errors import NonconvergenceError
from .gap import gap_probability
from .numerics import DEFAULT_PREC, Precision, as_mpf, gauss_jacobi_rule, small_det
from .weight import WeightParams

__all__ = [
    "SigmaOracle",
    "DensityProfile",
    "sine_kernel_det",
    "sigma_oracle",
    "sigma_pv_residual",
    "sine_sigma_residual",
    "equilibrium_density",
    "scaling_convergence",
]

_MAX_NODES = 8192
_DET_CACHE = {}


@dataclass(frozen=True)
class SigmaOracle:
    """Determinant and sigma-jet of the sine kernel on (-t,t).

    sigma = t d/dt ln det; sigma_p and sigma_pp are its first two
    t-derivatives, from sixth- and fourth-order stencils on ln det.
    """

    t: object
    det_value: object
    sigma: object
    nodes_used: int
    sigma_p: object
    sigma_pp: object


@dataclass(frozen=True)
class DensityProfile:
    """Equilibrium eigenvalue density near the origin.

    Supported on (-b, b) with b = sqrt(n(n+2 alpha))/(n+alpha); the value
    at the origin, rho0, sets the natural microscopic length 1/(pi rho0).
    """

    n: int
    alpha: object
    b: object
    rho0: object
    bits: int

    def rho_at(self, x):
        with mp.workprec(self.bits):
            xv = as_mpf(x, Precision(self.bits))
            if abs(xv) > self.b:
                raise ValueError(f"x={mp.nstr(xv, 8)} outside the support |x| <= b")
            n, alpha = self.n, self.alpha
            inner = n * (n + 2 * alpha) - (n + alpha) ** 2 * xv * xv
            if inner < 0:
                inner = mp.mpf(0)
            return mp.sqrt(inner) / (mp.pi * (1 - xv * xv))


def _det_at(tv, m: int, prec: Precision):
    key = (tv._mpf_, m, prec.bits)
    cached = _DET_CACHE.get(key)
    if cached is not None:
        return cached
    with mp.workprec(prec.bits):
        rule = gauss_jacobi_rule(m, 0, 0, prec)
        xs = [tv * u for u in rule.nodes]
        sw = [mp.sqrt(tv * w) for w in rule.weights]
        inv_pi = 1 / mp.pi
        rows = [[mp.mpf(0)] * m for _ in range(m)]
        for i in range(m):
            rows[i][i] = 1 - sw[i] * sw[i] * inv_pi
            for j in range(i + 1, m):
                d = xs[i] - xs[j]
                k = sw[i] * (mp.sin(d) / (mp.pi * d)) * sw[j]
                rows[i][j] = -k
                rows[j][i] = -k
        value = small_det(rows, prec)
    _DET_CACHE[key] = value
    return value


def _det_converged(tv, m_nodes: int, prec: Precision):
    with mp.workprec(prec.bits):
        tol = mp.mpf(2) ** -(prec.bits // 2)
        m = m_nodes
        coarse = _det_at(tv, m, prec)
        while 2 * m <= _MAX_NODES:
            fine = _det_at(tv, 2 * m, prec)
            if abs(fine - coarse) <= tol * abs(fine):
                return fine, 2 * m
            coarse = fine
            m *= 2
        raise NonconvergenceError("sine-kernel determinant", _MAX_NODES,
                                  abs(fine - coarse))


def sine_kernel_det(t, m_nodes: int = 48, prec: Precision = DEFAULT_PREC):
    """det(I - K) for the sine kernel on (-t, t), node-doubled to stability."""
    if m_nodes < 8:
        raise ValueError(f"need m_nodes >= 8, got {m_nodes}")
    with mp.workprec(prec.bits):
        tv = as_mpf(t, prec)
        if tv < 0:
            raise ValueError("t must be nonnegative")
        if tv == 0:
            return mp.mpf(1)
        value, _ = _det_converged(tv, m_nodes, prec)
        return value


# seven-point central stencils on ln det, as (numerator, denominator)
# pairs: first derivative to sixth order, second to sixth, third to fourth.
_C1 = ((-1, 60), (3, 20), (-3, 4), (0, 1), (3, 4), (-3, 20), (1, 60))
_C2 = ((1, 90), (-3, 20), (3, 2), (-49, 18), (3, 2), (-3, 20), (1, 90))
_C3 = ((1, 8), (-1, 1), (13, 8), (0, 1), (-13, 8), (1, 1), (-1, 8))


def _stencil(coeffs, values, h, order):
    acc = mp.fsum(mp.mpf(p) / q * v for (p, q), v in zip(coeffs, values))
    return acc / h**order


def sigma_oracle(t, prec: Precision = DEFAULT_PREC, m_nodes: int = 48) -> SigmaOracle:
    """sigma(t) = t d/dt ln det and its first two derivatives.

    The node count is settled once at the center point and reused across
    the seven-point t-grid, so the sampled function is smooth in t rather
    than switching discretizations mid-stencil.
    """
    with mp.workprec(prec.bits):
        tv = as_mpf(t, prec)
        if not tv > 0:
            raise ValueError("sigma extraction needs t > 0")
        det_center, m_used = _det_converged(tv, m_nodes, prec)
        h = mp.mpf(2) ** -(prec.bits // 8) * max(mp.mpf(1), tv)
        if tv - 3 * h <= 0:
            h = tv / 8
        logs = []
        for k in range(-3, 4):
            val = det_center if k == 0 else _det_at(tv + k * h, m_used, prec)
            logs.append(mp.log(val))
        lp = _stencil(_C1, logs, h, 1)
        lpp = _stencil(_C2, logs, h, 2)
        lppp = _stencil(_C3, logs, h, 3)
        return SigmaOracle(
            t=tv,
            det_value=det_center,
            sigma=tv * lp,
            nodes_used=m_used,
            sigma_p=lp + tv * lpp,
            sigma_pp=2 * lpp + tv * lppp,
        )


def sigma_pv_residual(sigma, sigma_p, sigma_pp, t, nu=(0, 0, 0, 0)):
    """LHS minus RHS of the Jimbo-Miwa-Okamoto Painleve V form at a jet.

    When all four parameters vanish the equivalent expanded quartic form
    is evaluated too and must agree to rounding; disagreement means the
    two transcriptions have drifted apart and is raised, not returned.
    """
    s, sp, spp, tv = (mp.mpmathify(v) for v in (sigma, sigma_p, sigma_pp, t))
    nus = [mp.mpmathify(v) for v in nu]
    if len(nus) != 4:
        raise ValueError("nu must have exactly four entries")
    lhs = (tv * spp) ** 2
    bracket = s - tv * sp + 2 * sp * sp + mp.fsum(nus) * sp
    prod = (nus[0] + sp) * (nus[1] + sp) * (nus[2] + sp) * (nus[3] + sp)
    residual = lhs - (bracket * bracket - 4 * prod)
    if all(v == 0 for v in nus):
        expanded = lhs - (-4 * tv * sp**3 + (4 * s + tv * tv) * sp * sp
                          - 2 * tv * s * sp + s * s)
        scale = max(abs(lhs), abs(bracket * bracket), abs(4 * prod), mp.mpf(1))
        if abs(residual - expanded) > mp.mpf(2) ** (20 - mp.prec) * scale:
            raise ArithmeticError(
                "factored and expanded Painleve forms disagree at nu = 0")
    return residual


def sine_sigma_residual(sigma, sigma_p, sigma_pp, t):
    """LHS minus RHS of the quartic the real-variable oracle satisfies.

    With u = sigma - t sigma', this is (t sigma'')^2 + 16 u^2 - 4 u
    (sigma')^2 = 0, the half-width transcription of the classical
    sine-kernel sigma equation.  It maps onto the nu = 0 factored form
    only under an imaginary rescaling of t (the u^2 coefficient is -16
    here against +1 there, and no real rescaling moves one onto the
    other), so over the reals the two are distinct tests and this is the
    one the oracle can pass.
    """
    s, sp, spp, tv = (mp.mpmathify(v) for v in (sigma, sigma_p, sigma_pp, t))
    u = s - tv * sp
    return (tv * spp) ** 2 + 16 * u * u - 4 * u * sp * sp


def equilibrium_density(n: int, alpha, prec: Precision = DEFAULT_PREC) -> DensityProfile:
    """Closed-form bulk density profile for n eigenvalues."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    with mp.workprec(prec.bits):
        al = WeightParams(alpha).alpha
        b = mp.sqrt(n * (n + 2 * al)) / (n + al)
        rho0 = mp.sqrt(n * (n + 2 * al)) / mp.pi
        return DensityProfile(n, al, b, rho0, prec.bits)


def scaling_convergence(alpha, n_list, t_list, prec: Precision = DEFAULT_PREC,
                        m_nodes: int = 48):
    """Finite-n sigma against the sine-kernel oracle across a (n, t) grid.

    For each cell the half-gap is a = t / sqrt(n(n+2 alpha)), the
    microscopic variable that puts t eigenvalue spacings inside the gap;
    sigma_n(t) = -H_n(a) is compared to the oracle at the same t.  Rows
    come back in the given (n, t) order with keys n, t, a, sigma_n,
    sigma_oracle, error.
    """
    with mp.workprec(prec.bits):
        al = WeightParams(alpha).alpha
        t_values = [as_mpf(t, prec) for t in t_list]
        for t in t_values:
            if not t > 0:
                raise ValueError("t values must be positive")
        oracle = {}
        for t in t_values:
            key = t._mpf_
            if key not in oracle:
                oracle[key] = sigma_oracle(t, prec, m_nodes)
        rows = []
        for n in n_list:
            if n < 1:
                raise ValueError(f"need n >= 1, got {n}")
            scale = mp.sqrt(n * (n + 2 * al))
            for t in t_values:
                a = t / scale
                if not a < mp.mpf("0.5"):
                    raise ValueError(
                        f"a = {mp.nstr(a, 8)} at (n={n}, t={mp.nstr(t, 8)}) "
                        "leaves the bulk; need a < 0.5")
                res = gap_probability(WeightParams(al, a), n, prec)
                sig_n = -res.H
                sig = oracle[t._mpf_].sigma
                rows.append({
                    "n": n,
                    "t": t,
                    "a": a,
                    "sigma_n": sig_n,
                    "sigma_oracle": sig,
                    "error": abs(sig_n - sig),
                })
        return rows
