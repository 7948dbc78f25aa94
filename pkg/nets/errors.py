"""Exceptions raised by the geometry kernel.

Every error carries an optional ``node`` (grid index tuple) so that commands
can report where on a grid a check broke down.
"""


class NetsError(Exception):
    """Base class for all kernel errors."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node

    def __str__(self):
        message = super().__str__()
        if self.node is not None:
            return f"{message} (node {tuple(int(i) for i in self.node)})"
        return message


class ConfigError(NetsError):
    """Unreadable or invalid input file."""


class UsageError(NetsError):
    """Arguments violate an operation's preconditions."""


class DegenerateInputError(NetsError):
    pass


class InfinityBoundaryError(NetsError):
    """A point or parallel surface sits on the infinity boundary of Q_k."""


class SingularParametrizationError(NetsError):
    pass


class DomainError(NetsError):
    pass


class DegenerateConfigurationError(NetsError):
    pass


class ComplexConfigurationError(NetsError):
    pass


class ImmersionFailureError(NetsError):
    pass


class NotTriplyOrthogonalError(NetsError):
    pass


class DivergenceError(NetsError):
    pass


class ExcludedCaseError(NetsError):
    """The totally umbilic family a2 = 0."""


class BranchAmbiguityError(NetsError):
    pass


class DegenerateQuarticError(NetsError):
    pass


class InconsistentAnsatzError(NetsError):
    """Frame transport around a grid cell is path dependent."""


class SingularNetError(NetsError):
    pass


class InconsistentGaugeError(NetsError):
    pass
