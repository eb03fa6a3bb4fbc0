"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class PreconditionError(ValueError):
    """A documented precondition does not hold.

    The message names the violated condition; the CLI maps this to exit status 2.
    """
