"""Exception types shared across the toolkit.

Validation errors (bad arguments, malformed files) derive from ValueError;
numerical-tolerance failures derive from ToleranceError so callers can map
them to a distinct exit code.
"""


class ToleranceError(ArithmeticError):
    """A certified numerical tolerance could not be met."""


class TailTooLarge(ToleranceError):
    """Truncation tail outside the quadrature domain exceeds the tolerance."""


class BasisTooSmall(ToleranceError):
    """Requested basis size leaves too much mass in the dropped tail."""


class OrderTooLow(ToleranceError):
    """Quadrature self-check on the constant integrand failed."""


class GridTooNarrow(ValueError):
    """Sample grid does not cover the effective support of the signal."""


class ZeroFunction(ValueError):
    """Operation requires a nonzero function."""


class BadExponent(ValueError):
    """Exponent outside the admissible range for this functional."""


class NonFiniteMeasure(ValueError):
    """Region tree does not define a finite measure."""
