"""Exception and warning types shared across the package."""


class SingularMatrix(ArithmeticError):
    """Raised when an LU pivot falls below the relative singularity threshold."""


class NonConvergenceWarning(RuntimeWarning):
    """An iterative routine hit its iteration cap before meeting its tolerance."""


class DegenerateGeometry(ValueError):
    """Wire geometry for which the induced-EMF integral is undefined."""


class SeriesResonance(ZeroDivisionError):
    """An element's total series impedance is exactly zero."""


class InvalidResistance(ValueError):
    """R0 + Re(Z_SS(i,i)) is not positive, so the closed-form load design does not apply."""


class ResonantPhase(ValueError):
    """A phase too close to +-pi, which would require an open-circuit load."""


class ProblemTooLarge(ValueError):
    """Exhaustive search requested on too many elements."""


class LoadClampWarning(RuntimeWarning):
    """A load reactance or perturbation magnitude was clamped."""


class FarFieldWarning(UserWarning):
    """Transmitter or receiver is inside the Fraunhofer distance of the RIS."""
