"""Exception types shared across the library.

Contract violations (bad arguments, unusable inputs) raise ContractError so
that callers -- in particular the CLI -- can map them to a dedicated exit
code.  DomainError marks arguments outside a function's mathematical domain.
"""


class ContractError(ValueError):
    """An input violates a documented precondition."""


class DomainError(ContractError):
    """An argument lies outside the mathematical domain of the operation."""
