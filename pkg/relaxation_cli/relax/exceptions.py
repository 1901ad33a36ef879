#
# Model and numerics errors
#
import click.exceptions


class RelaxError(Exception):
    """Base class for relaxation toolkit exceptions"""

    def __init__(self, message, detail=None):
        super().__init__(message)
        self.message = message
        self.detail = detail


class StateSpaceViolation(RelaxError):
    """Raised when a state is evaluated outside the model's state space G"""

    pass


class NonFiniteResult(RelaxError):
    """Raised when a model evaluation returns NaN or Inf"""

    pass


class DimensionMismatch(RelaxError):
    """Raised when a state vector does not have the model's length"""

    pass


class SingularTransform(RelaxError):
    """Raised when a transform matrix is numerically singular"""

    pass


#
# Model construction
#


class ConstructionError(RelaxError):
    """Exception raised when a model cannot be built from its parameters"""

    pass


class RankDeclarationError(ConstructionError):
    """Declared partition rank disagrees with the numerical rank of the dissipation matrix"""

    pass


class InvalidPressureLaw(ConstructionError):
    pass


class SubcharacteristicViolation(ConstructionError):
    pass


class SymmetryViolation(ConstructionError):
    pass


class NonNegativityViolation(ConstructionError):
    pass


class ModelNotRegistered(RelaxError):
    def __init__(self, family: str):
        super(ModelNotRegistered, self).__init__(f'Model family "{family}" not registered')


#
# Verification
#


class SamplingExhausted(RelaxError):
    """Raised when the sampling box rejects too many draws"""

    pass


class RankMismatch(RelaxError):
    """Raised when the kernel dimension of the dissipation matrix differs from n - r"""

    pass


class NoEquilibriumFound(RelaxError):
    pass


class NotEquilibrium(RelaxError):
    pass


#
# Maxwellian
#


class MaxwellianError(RelaxError):
    """Base class for failures of the equilibrium solve"""

    pass


class NoConvergence(MaxwellianError):
    pass


class StateSpaceExit(MaxwellianError):
    """Raised when every backtracked Newton step leaves the state space"""

    pass


class MaxwellianUnavailable(MaxwellianError):
    pass


#
# Solver
#


class SolverError(RelaxError):
    pass


class NewtonFailure(SolverError):
    """Exception raised when the implicit source solve of a cell does not converge"""

    pass


class GridMismatch(SolverError):
    pass


#
# Config
#


class ParseError(RelaxError):
    """Exception raised for syntax errors in run config text"""

    def __init__(self, message, line=None, column=None):
        super().__init__(message, detail={"line": line, "column": column})
        self.line = line
        self.column = column


#
# CLI
#


class ChecksFailed(click.exceptions.ClickException):
    """Raised when a verification or sweep completes with failing checks"""

    exit_code = 1


class RuntimeFailure(click.exceptions.ClickException):
    """Raised for runtime failures of a command (I/O, solver aborts, unexpected errors)"""

    exit_code = 3
