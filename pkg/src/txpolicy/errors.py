"""Exception hierarchy shared by all txpolicy modules."""


class TxPolicyError(Exception):
    """Base class for every error raised by txpolicy."""


class NonConvergence(TxPolicyError):
    """Numerical integration could not reach the requested tolerance."""


class OutOfRange(TxPolicyError, IndexError):
    """A table lookup fell outside the computed (N, n) range."""


class InvalidState(TxPolicyError):
    """A simulation step was requested on a sensor that cannot act."""


class TooLarge(TxPolicyError):
    """An oracle instance exceeds the enumeration bounds."""


class ConfigError(TxPolicyError):
    pass


class ParseError(ConfigError):
    """The configuration file is not valid JSON."""


class ValidationError(ConfigError):
    """A configuration value violates the schema.

    ``path`` holds the dotted location of the offending field.
    """

    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}" if path else message)
