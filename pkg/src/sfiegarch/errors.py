"""Exception types shared across the package."""


class SfiegarchError(Exception):
    """Base class for all package-specific errors."""


class InvalidParameterError(SfiegarchError, ValueError):
    """A parameter is non-finite or outside its admissible domain."""


class UnitRootError(SfiegarchError, ValueError):
    """A lag polynomial has a root inside or on the unit circle."""


class CommonRootError(SfiegarchError, ValueError):
    """Numerator and denominator lag polynomials share a root."""


class NotInvertibleError(SfiegarchError, ValueError):
    """Inverse filter requested outside the invertibility region d in (-1, 0.5)."""


class MomentDivergenceError(SfiegarchError, ArithmeticError):
    """An infinite-product moment failed the convergence criterion."""
