"""Exception taxonomy shared by the whole package.

Exit-code mapping used by the CLI: axiom/property failures are reported as
data (never raised), FormatError/UsageError map to exit 2, BudgetError to
exit 3.
"""


class ParcausesError(Exception):
    """Base class for all package errors."""


class FormatError(ParcausesError):
    """Malformed input: unresolved ids, bad JSON schema, duplicate names."""


class UsageError(ParcausesError):
    """Operation applied outside its contract (wrong kind, mismatched endpoints)."""


class BudgetError(ParcausesError):
    """An enumeration exceeded its configured budget; failing loudly beats truncating."""


class InternalError(ParcausesError):
    """A theorem-guaranteed object could not be constructed; indicates a bug."""


class UndefinedConditionalError(ParcausesError):
    """Conditional probability requested with a zero-probability condition."""
