"""Exception hierarchy for the simulator."""


class STSFusionError(Exception):
    """Base class for all simulator errors."""


class ZeroMatrix(STSFusionError, ValueError):
    pass


class DimensionMismatch(STSFusionError, ValueError):
    pass


class InvalidGeometry(STSFusionError, ValueError):
    pass


class ExhaustiveLimitExceeded(STSFusionError):
    pass


class SingularChannel(STSFusionError, ArithmeticError):
    pass


class SingularCovariance(STSFusionError, ArithmeticError):
    pass


class DegenerateProfile(STSFusionError, ValueError):
    pass


class InsufficientTrials(STSFusionError, ValueError):
    pass


class UnknownPreset(STSFusionError, KeyError):
    pass


class ConfigError(STSFusionError):
    """Raised while loading a configuration file."""


class ParseError(ConfigError):
    pass


class ValidationError(ConfigError):
    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")
