"""Exception hierarchy shared by every module."""


class RegPropError(Exception):
    """Base class for all errors raised by regprop."""


class ConfigurationError(RegPropError, ValueError):
    """Unknown loss/regularizer id or an invalid parameter value."""


class InvalidDistributionError(RegPropError, ValueError):
    pass


class UnsupportedGroupStructureError(RegPropError, ValueError):
    """The regularizer is defined only for a different number of groups."""


class DegeneratePopulationError(RegPropError, ValueError):
    """A regularizer denominator vanishes for the given population."""


class EnumerationLimitError(RegPropError):
    """|T|^m exceeds the enumeration cap."""


class TrainingDivergedError(RegPropError, FloatingPointError):
    pass


class DatasetError(RegPropError, ValueError):
    pass
