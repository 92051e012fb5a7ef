"""Exception hierarchy shared by every pspinlab module."""


class PSpinLabError(Exception):
    """Base class for all pspinlab errors."""


class NotNormalized(PSpinLabError, ValueError):
    pass


class BadDegree(PSpinLabError, ValueError):
    pass


class DuplicateDegree(PSpinLabError, ValueError):
    pass


class NonPositiveCoefficient(PSpinLabError, ValueError):
    pass


class DomainError(PSpinLabError, ValueError):
    pass


class CapExceeded(PSpinLabError):
    """A size limit (tensor entries or exact-search dimension) would be exceeded."""


class ShapeMismatch(PSpinLabError, ValueError):
    pass


class IndexOutOfRange(PSpinLabError, IndexError):
    pass


class EmptyBand(PSpinLabError):
    """No magnetization level falls inside the requested band."""


class DegenerateCurve(PSpinLabError):
    pass


class KernelError(PSpinLabError):
    """A Monte Carlo kernel raised; ``index`` is the failing sample."""

    def __init__(self, index, cause):
        super().__init__(f"kernel failed at sample {index}: {cause!r}")
        self.index = index
        self.cause = cause


class StackFormatError(PSpinLabError):
    pass


class BadMagic(StackFormatError):
    pass


class VersionMismatch(StackFormatError):
    pass


class ChecksumMismatch(StackFormatError):
    pass


class ConfigError(PSpinLabError):
    pass


class UnknownExperiment(ConfigError):
    pass


class UnknownKey(ConfigError):
    pass


class ValidationError(ConfigError):
    """Invalid config value; ``path`` names the offending field."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
