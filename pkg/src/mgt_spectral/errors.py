"""Exception types raised across the package."""


class ShapeError(ValueError):
    """Coefficient vectors whose length does not match the eigenvalue sequence."""


class UnsupportedBasisError(ValueError):
    """Grid operations requested on an eigenbasis without a known sine grid."""


class RegimeError(ValueError):
    """Operation is only meaningful for a different range of the damping parameter."""


class NonRealFieldError(ValueError):
    """Synthesized physical field has a non-negligible imaginary part."""


class NumericalFailure(FloatingPointError):
    """A computation produced NaN or inf where a finite value was required."""


class NearSingularError(ArithmeticError):
    """A resolvent was requested too close to a spectral point.

    Parameters
    ----------
    message : str
    spectral_value : complex
        The spectral point that was hit.
    """

    def __init__(self, message, spectral_value):
        super().__init__(message)
        self.spectral_value = complex(spectral_value)
