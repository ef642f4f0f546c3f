"""Exception hierarchy shared by the numerical and discrete modules.

The CLI maps each family onto a stable exit code, so new exceptions should
subclass one of the three families below rather than ``CausalPathsError``
directly.
"""


class CausalPathsError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1
    kind = "error"


class InputError(CausalPathsError, ValueError):
    """Malformed or inconsistent input (bad config, bad spacetime, ...)."""

    exit_code = 2
    kind = "input"


class ConstraintViolation(InputError):
    """A point does not lie on its surface within tolerance."""

    kind = "constraint-violation"


class CompositionError(InputError):
    """Two path classes cannot be composed."""

    kind = "composition"


class DegenerateInputError(CausalPathsError, ValueError):
    """Input is well formed but lies in a configuration we do not resolve."""

    exit_code = 3
    kind = "degenerate"


class DegenerateEndpointsError(DegenerateInputError):
    kind = "degenerate-endpoints"


class DegenerateFamilyError(DegenerateInputError):
    kind = "degenerate-family"


class NonConvergenceError(CausalPathsError, RuntimeError):
    """An iterative numerical method did not converge."""

    exit_code = 4
    kind = "non-convergence"

    def __init__(self, message, geodesic=None):
        super().__init__(message)
        self.geodesic = geodesic


class DegeneracyWarning(UserWarning):
    """A computed quantity sits on a degenerate configuration (e.g. a conjugate endpoint)."""
