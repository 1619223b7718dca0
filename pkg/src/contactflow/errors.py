"""Exception hierarchy shared by every contactflow module."""


class ContactFlowError(Exception):
    """Base class for all package errors."""


class ParameterError(ContactFlowError, ValueError):
    """A numeric parameter is outside its admissible range."""


class DomainError(ContactFlowError, ValueError):
    """A point lies outside the closure of the domain."""


class CollarError(ContactFlowError, ValueError):
    """A point lies outside the tubular collar where projection is unique."""


class ModelInvalidError(ContactFlowError, ValueError):
    """The potential pair violates a structural assumption."""


class StepError(ContactFlowError, RuntimeError):
    """A time step could not be completed."""


class ResolutionError(ContactFlowError, ValueError):
    """Sampling is too coarse for the requested diagnostic."""


class InsufficientResolutionError(ResolutionError):
    """Too few level-set points to fit a contact angle."""


class HypothesisError(ContactFlowError, ValueError):
    """A hypothesis of a checked inequality does not hold."""


class ConfigError(ContactFlowError, ValueError):
    """A configuration file failed validation."""
