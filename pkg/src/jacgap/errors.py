"""Exception types shared across the package."""


class JacgapError(Exception):
    """Base class for all package-specific failures."""


class NonconvergenceError(JacgapError):
    """An iterative scheme exhausted its budget before reaching tolerance."""

    def __init__(self, what, budget, last_delta=None):
        self.what = what
        self.budget = budget
        self.last_delta = last_delta
        msg = f"{what}: no convergence within budget {budget}"
        if last_delta is not None:
            msg += f" (last delta {last_delta})"
        super().__init__(msg)


class PrecisionLossError(JacgapError):
    """A computed quantity lost so many bits that the result is unusable.

    `suggested_bits` is a rough estimate of the working precision that
    would make the computation go through.
    """

    def __init__(self, what, suggested_bits=None):
        self.what = what
        self.suggested_bits = suggested_bits
        msg = what
        if suggested_bits is not None:
            msg += f"; retry with at least {suggested_bits} bits"
        super().__init__(msg)


class DegeneratePointError(JacgapError):
    """A formula's denominator vanishes at the requested parameter point."""

    def __init__(self, factor, n=None, a=None):
        self.factor = factor
        self.n = n
        self.a = a
        where = []
        if n is not None:
            where.append(f"n={n}")
        if a is not None:
            where.append(f"a={a}")
        loc = (" at " + ", ".join(where)) if where else ""
        super().__init__(f"degenerate point{loc}: factor {factor} vanishes")


class ZeroDenominatorError(JacgapError):
    """A rational reconstruction hit a (near-)zero denominator."""

    def __init__(self, what, value):
        self.what = what
        self.value = value
        super().__init__(f"{what}: denominator {value} too close to zero")
