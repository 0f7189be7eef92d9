"""Exception and warning types raised across the package.

Input problems derive from :class:`InputError` (CLI exit status 1); numerical
failures derive from :class:`NumericError` (exit status 2).
"""


class TenetError(Exception):
    """Base class for all package errors."""


class InputError(TenetError, ValueError):
    pass


class NumericError(TenetError, ArithmeticError):
    pass


# ingest
class MissingData(InputError):
    pass


class NonPositivePrice(InputError):
    pass


class DuplicateTicker(InputError):
    pass


class NonMonotoneTimestamps(InputError):
    pass


class UnknownTickerInSectorMap(InputError):
    pass


class SeriesTooShort(InputError):
    pass


class DegenerateSeries(InputError):
    pass


class LagTooLarge(InputError):
    pass


# infocore
class LengthMismatch(InputError):
    pass


class EmptyInput(InputError):
    pass


class EmptySample(InputError):
    pass


# significance
class InvalidAlphabet(InputError):
    pass


class InvalidP(InputError):
    pass


class ModelMismatch(InputError):
    pass


class ConvergenceFailure(NumericError):
    pass


# netstats
class ShapeMismatch(InputError):
    pass


class DegenerateRange(NumericError):
    pass


class ZeroVariance(NumericError):
    pass


class InsufficientData(NumericError):
    pass


class MissingSectorLabel(InputError):
    pass


class UnsupportedFormat(InputError):
    pass


# synth / cli
class InvalidSpec(InputError):
    pass


class ConfigError(InputError):
    pass


class SampleSizeWarning(UserWarning):
    """Sample too small for the joint alphabet to be populated."""


class CostWarning(UserWarning):
    """Requested computation is very expensive or cannot resolve alpha."""
