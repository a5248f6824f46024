"""Exception types shared across the package."""


class VertseqError(Exception):
    """Base class for all package errors."""


class ParseError(VertseqError):
    """A document could not be parsed; the message names the offending field."""


class SchemaError(ParseError):
    """A parsed document has the wrong shape (e.g. a score vector of bad length)."""


class ValidationError(VertseqError):
    """A value is structurally fine but violates a domain constraint."""


class ContractError(VertseqError):
    """A function was called outside its documented preconditions."""


class UsageError(VertseqError):
    """Invalid command-line usage."""
