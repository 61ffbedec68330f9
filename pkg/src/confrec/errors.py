"""Exception hierarchy shared across the package.

The CLI maps these onto stable exit codes (validation 2, budget 3,
bracket failure 4), so library code should raise the most specific one.
"""


class ConfrecError(Exception):
    """Base class for all package errors."""


class ValidationError(ConfrecError):
    """Malformed input: bad spec file, out-of-range symbol, bad parameter."""


class BudgetError(ConfrecError):
    """An enumeration would exceed the configured word/pair budget."""


class BracketError(ConfrecError):
    """A root bracket could not be established (depth insufficient)."""
