"""Exception hierarchy.

The CLI maps these onto exit codes, so every class belongs to exactly one
family: configuration/domain problems (exit 2) or model-validity problems
(exit 3).
"""


class OptoampError(Exception):
    """Base class for all package errors."""


class ParameterDomainError(OptoampError, ValueError):
    """A physical parameter lies outside its allowed domain."""


class ZeroPowerError(ParameterDomainError):
    """A quantity is undefined because the readout gain vanishes (P_in = 0)."""


class GridError(OptoampError, ValueError):
    """A frequency grid does not satisfy an operation's requirements."""


class OffGridError(GridError):
    """A requested frequency is not a node of the grid."""


class EmptyInputError(OptoampError, ValueError):
    pass


class ModelValidityError(OptoampError):
    """The linearized optomechanical model does not apply."""


class SingularResponseError(ModelValidityError):
    """The inverse effective susceptibility vanished."""


class InstabilityError(ModelValidityError):
    """The effective mechanical damping is not positive."""


class NegativeNoiseError(ModelValidityError):
    """A noise spectral density came out non-positive."""


class ConfigError(OptoampError):
    """Base class for configuration problems."""


class ConfigParseError(ConfigError):
    def __init__(self, lineno, message):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


class MissingKeyError(ConfigError):
    def __init__(self, missing):
        self.missing = tuple(missing)
        super().__init__("missing required keys: " + ", ".join(self.missing))


class ConfigRangeError(ConfigError):
    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")
