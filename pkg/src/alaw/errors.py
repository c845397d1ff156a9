"""Exception hierarchy shared by all alaw modules."""


class AlawError(Exception):
    """Base class for every error raised by alaw."""


class DomainError(AlawError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class PreconditionError(AlawError, ValueError):
    """A mathematical precondition of a lemma or inequality is not met."""


class NumericError(AlawError, ArithmeticError):
    """A numerical routine failed to converge or produced an invalid object."""


class InternalConsistencyError(AlawError, RuntimeError):
    """The bound engine produced a value contradicting one of its own caps."""
