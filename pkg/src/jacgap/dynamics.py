"""Evolution of the recurrence data in the half-gap a.

A `TableFamily` lazily builds recurrence tables on a uniform five-point
a-grid around a probe point, so first and second derivatives of beta_n,
h_n, r_n and R_n come from fourth-order central stencils.  Analytic
derivatives use the closed forms (norm decay for h_n, the log-derivative
difference for beta_n, the coupled Riccati system for r_n and R_n); the
residual reports always differentiate by finite differences so that no
equation is compared against itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from mpmath import mp

from .errors import DegeneratePointError
from .ladder import ladder_state
from .numerics import DEFAULT_PREC, Precision, fd_derivative, fd_step
from .orthopoly import build_table
from .weight import WeightParams

__all__ = [
    "DerivBundle",
    "TableFamily",
    "derivative_bundle",
    "riccati_residuals",
    "second_order_residuals",
    "logdp_residual",
]


@dataclass(frozen=True)
class DerivBundle:
    """First derivatives in a at one (n, a) point.

    R_p is None when the probe sits at a = 0, where the Riccati form for
    R_n' divides by a(a^2 - 1).
    """

    n: int
    a: object
    mode: str
    beta_p: object
    h_p: object
    r_p: object
    R_p: object


class TableFamily:
    """Recurrence tables on a lazy uniform a-grid around one probe point."""

    def __init__(self, alpha, a, n_max, prec: Precision = DEFAULT_PREC,
                 step=None, half_width: int = 2):
        if half_width not in (0, 2, 3):
            raise ValueError("half_width must be 0 (analytic only), 2 or 3")
        self.prec = prec
        self.n_max = n_max
        self.half_width = half_width
        with mp.workprec(prec.bits):
            center = WeightParams(alpha, a)
            self.alpha = center.alpha
            self.a = center.a
            self.step = fd_step(prec) if step is None else mp.mpf(step)
            if not self.step > 0:
                raise ValueError("step must be positive")
        self._tables = {}

    def grid_a(self, k: int):
        with mp.workprec(self.prec.bits):
            return self.a + k * self.step

    def table(self, k: int = 0):
        if abs(k) > self.half_width:
            raise ValueError(f"offset {k} outside half-width {self.half_width}")
        tab = self._tables.get(k)
        if tab is None:
            ak = self.grid_a(k)
            if k != 0 and not 0 <= ak < 1:
                raise DegeneratePointError("a-grid leaves [0, 1)", a=ak)
            tab = build_table(WeightParams(self.alpha, ak), self.n_max, self.prec)
            self._tables[k] = tab
        return tab

    def offsets(self):
        return range(-self.half_width, self.half_width + 1)

    def samples(self, fn):
        """(a_k, fn(table_k)) pairs across the grid, for FD stencils."""
        if self.half_width < 2:
            raise ValueError("finite differences need half_width >= 2")
        return [(self.grid_a(k), fn(self.table(k))) for k in self.offsets()]


def _fd(family: TableFamily, fn, order: int):
    return fd_derivative(family.samples(fn), order, family.step, family.prec)


def derivative_bundle(family: TableFamily, n: int, mode: str = "fd") -> DerivBundle:
    """First derivatives of beta_n, h_n, r_n, R_n at the probe point."""
    if mode not in ("fd", "analytic"):
        raise ValueError(f"unknown mode {mode!r}")
    if not 1 <= n <= family.n_max:
        raise ValueError(f"need 1 <= n <= {family.n_max}, got {n}")
    bits = family.prec.bits
    with mp.workprec(bits):
        if mode == "fd":
            beta_p = _fd(family, lambda t: t.beta[n], 1)
            h_p = _fd(family, lambda t: t.h[n], 1)
            r_p = _fd(family, lambda t: ladder_state(t, n).r, 1)
            R_p = _fd(family, lambda t: ladder_state(t, n).R, 1)
            return DerivBundle(n, family.a, mode, beta_p, h_p, r_p, R_p)

        table = family.table(0)
        st = ladder_state(table, n)
        stm = ladder_state(table, n - 1)
        a = family.a
        alpha = family.alpha
        K = 2 * n + 2 * alpha + 1
        beta_p = table.beta[n] * (stm.R - st.R)
        h_p = -st.R * table.h[n]
        r_p = (2 * table.beta[n] * st.R + K * beta_p) / (1 - a * a)
        if a == 0:
            R_p = None
        else:
            e = a * a - 1
            R_p = (
                st.R**2
                + (2 * a * a * (n + alpha) - 2 * e * st.r) / (a * e) * st.R
                - 2 * K * st.r / e
            )
        return DerivBundle(n, a, mode, beta_p, h_p, r_p, R_p)


def _residual(terms):
    scale = max(abs(t) for t in terms)
    if scale == 0:
        return mp.mpf(0)
    return abs(mp.fsum(terms)) / scale


def _guard(family: TableFamily, n: int, R):
    if family.a == 0:
        raise DegeneratePointError("a(a^2-1)", n=n, a=family.a)
    thresh = mp.mpf(2) ** (32 - family.prec.bits) * (2 * n + 2 * family.alpha + 1)
    if abs(R) < thresh:
        raise DegeneratePointError("R_n", n=n, a=family.a)


def riccati_residuals(family: TableFamily, n: int) -> dict:
    """Normalized residuals of the first-order (Riccati) relations.

    Derivatives on the left-hand sides are finite differences, so each
    equation is checked against data it did not produce.
    """
    with mp.workprec(family.prec.bits):
        table = family.table(0)
        st = ladder_state(table, n)
        _guard(family, n, st.R)
        fd = derivative_bundle(family, n, mode="fd")
        a = family.a
        alpha = family.alpha
        K = 2 * n + 2 * alpha + 1
        e = a * a - 1
        R, r, beta = st.R, st.r, table.beta[n]
        aRK = a * R + K

        res_ri = _residual([
            fd.R_p,
            -R * R,
            -(2 * a * a * (n + alpha) - 2 * e * r) / (a * e) * R,
            2 * K * r / e,
        ])
        t_big = (e * R * R + 2 * a * K * R + K * K) * r * r / (-e * R * aRK)
        t_lin = (2 * (n + alpha) * R * r + n * (n + 2 * alpha) * R) / (-e * aRK)
        res_rnp2 = _residual([fd.r_p, -t_big, t_lin])
        res_bep = _residual([fd.beta_p, -r * r / R, beta * R])
        beta_rec = ((-e * r * r + 2 * (n + alpha) * r + n * (n + 2 * alpha)) * R
                    - K * a * r * r) / ((K - 2) * R * aRK)
        res_beta1 = abs(beta - beta_rec) / abs(beta)
        return {
            "res_ri": res_ri,
            "res_rnp2": res_rnp2,
            "res_bep": res_bep,
            "res_beta1": res_beta1,
        }


def second_order_residuals(family: TableFamily, n: int) -> dict:
    """Normalized residuals of the second-order equations in a.

    Covers the degree-six equation for R_n, the quadratic-in-second-
    derivative equation for r_n, and the two first-derivative consequences
    that seed them.  All derivatives are finite differences.
    """
    with mp.workprec(family.prec.bits):
        table = family.table(0)
        st = ladder_state(table, n)
        _guard(family, n, st.R)
        a = family.a
        alpha = family.alpha
        K = 2 * n + 2 * alpha + 1
        e = a * a - 1
        R, r, beta = st.R, st.r, table.beta[n]

        beta_p = _fd(family, lambda t: t.beta[n], 1)
        r_samples = family.samples(lambda t: ladder_state(t, n).r)
        R_samples = family.samples(lambda t: ladder_state(t, n).R)
        rp = fd_derivative(r_samples, 1, family.step, family.prec)
        rpp = fd_derivative(r_samples, 2, family.step, family.prec)
        Rp = fd_derivative(R_samples, 1, family.step, family.prec)
        Rpp = fd_derivative(R_samples, 2, family.step, family.prec)

        res_R_ode = _residual([
            2 * a * e**2 * R * (a * R + K) * (e * R + K * a) * Rpp,
            -a * e**2 * (3 * a * e * R**2 + 2 * (2 * a * a - 1) * K * R + K * K * a) * Rp**2,
            2 * e * K * R * ((2 * a**4 - a * a + 1) * R + 2 * a**3 * K) * Rp,
            -(a * a) * e**3 * R**6,
            -2 * a * e**2 * (2 * a * a - 1) * K * R**5,
            -e * (
                a**4 * (7 + 24 * alpha + 24 * n + 24 * n * n + 48 * n * alpha + 24 * alpha**2)
                - a * a * (5 + 24 * n + 24 * n * n + 24 * alpha + 48 * n * alpha + 20 * alpha**2)
                + 2 + 4 * alpha + 4 * n + 4 * n * n + 8 * n * alpha
            ) * R**4,
            -4 * a * e * K * (a * a * K * K - 2 * n - 2 * n * n - 2 * alpha - 4 * n * alpha) * R**3,
            -4 * a * a * K * K * (
                (n * (n + 1) + (2 * n + 1) * alpha + alpha**2) * a * a
                - n * (n + 1) - (2 * n + 1) * alpha
            ) * R**2,
        ])

        g = n + alpha
        res_cha = _residual([
            a * a * e**4 * rpp**2,
            4 * a * a * e**2 * (a * e * rp + 4 * r**3 + 6 * g * r**2 + 2 * n * (2 * alpha + n) * r) * rpp,
            -4 * e**2 * ((a * a + 1) ** 2 * r**2 + 2 * (a * a + 1) * a * a * g * r
                         + a**4 * (g - 1) * (g + 1)) * rp**2,
            16 * a**3 * e * (2 * r**3 + 3 * g * r**2 + n * (2 * alpha + n) * r) * rp,
            -16 * e**2 * r**6,
            -32 * (2 * a**4 - 3 * a * a + 1) * g * r**5,
            -16 * e * (5 * a * a * alpha**2 + (6 * a * a - 1) * (n * n + 2 * alpha * n)) * r**4,
            -32 * a * a * g * (a * a * alpha**2 + e * (2 * n * n + 4 * alpha * n)) * r**3,
            -16 * a * a * n * (2 * alpha + n) * (a * a * alpha**2 + e * (n * n + 2 * alpha * n)) * r**2,
        ])

        res_rnbn = _residual([
            K * (K - 2) * beta_p**2,
            4 * g * e * beta_p * rp,
            e**2 * rp**2,
            -4 * beta * r**2,
        ])
        res_equ3 = _residual([
            K * (K - 2) * (beta - a * beta_p),
            e * r**2,
            -2 * g * r,
            -2 * g * a * e * rp,
            -n * (n + 2 * alpha),
        ])
        return {
            "res_R_ode": res_R_ode,
            "res_cha": res_cha,
            "res_rnbn": res_rnbn,
            "res_equ3": res_equ3,
        }


def logdp_residual(family: TableFamily, n: int):
    """Mismatch between the FD derivative of the log gap probability and
    minus the sum of R_j over j < n; the a = 0 reference drops out of the
    derivative, so no second parameter point is involved."""
    if not 1 <= n <= family.n_max:
        raise ValueError(f"need 1 <= n <= {family.n_max}, got {n}")
    with mp.workprec(family.prec.bits):
        samples = family.samples(lambda t: mp.fsum(mp.log(t.h[j]) for j in range(n)))
        lead = fd_derivative(samples, 1, family.step, family.prec)
        table = family.table(0)
        total = mp.fsum(ladder_state(table, j).R for j in range(n))
        return _residual([lead, total])
