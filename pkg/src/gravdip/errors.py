"""Exception hierarchy. Every error names the guard it tripped."""


class GravdipError(Exception):
    guard = "unspecified"

    def __init__(self, message: str, guard: str | None = None):
        super().__init__(message)
        if guard is not None:
            self.guard = guard


class ValidityError(GravdipError, ValueError):
    """Input outside the model's domain (non-positive scale, Taylor guard, ...)."""

    guard = "domain"


class RegimeError(GravdipError, ValueError):
    """Perturbative approximation used outside its regime."""

    guard = "perturbative_regime"


class TruncationError(GravdipError, ValueError):
    """Fock truncation too small for the requested state or operator."""

    guard = "fock_truncation"


class ContractError(GravdipError, ValueError):
    guard = "contract"


class SpecError(GravdipError, ValueError):
    """Malformed sweep specification."""

    guard = "sweep_spec"
