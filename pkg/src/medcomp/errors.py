"""Exception hierarchy shared by every stage of the compiler."""

from __future__ import annotations


class MediationError(Exception):
    """Base class; the CLI maps any subclass to exit code 1."""


class ParseError(MediationError):
    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class ConfigError(MediationError):
    pass


# ontology
class CycleError(MediationError):
    pass


class UnknownConceptError(MediationError):
    pass


# process model / registry
class StructureError(MediationError):
    pass


class DuplicateIdError(MediationError):
    pass


# pattern database
class PersistenceError(MediationError):
    pass


# data reconciliation
class ExpressionSyntaxError(MediationError):
    pass


class DivisionByZeroError(MediationError):
    pass


class UnknownFormatError(MediationError):
    pass


class NoConversionError(MediationError):
    pass


class MissingTagError(MediationError):
    pass


class ValueParseError(ParseError):
    """A runtime value did not match the capture pattern of its format."""


class LookupMissError(MediationError):
    pass


class UnknownTableError(MediationError):
    pass


class UnboundTagError(MediationError):
    pass


class UnsupportedPatternError(MediationError):
    pass


# workflow
class MissingSpecError(MediationError):
    pass


class PlanMismatchError(MediationError):
    pass


class SerializationError(MediationError):
    pass


class ValidationError(MediationError):
    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


# simulator
class MessageConflictError(MediationError):
    pass


class MissingMockError(MediationError):
    pass


class HumanTaskPending(MediationError):
    """No prompt value was supplied for a human task (CLI exit code 2)."""


class NoMatchingCaseError(MediationError):
    """No case of a switch matched the message and no default case exists."""
