from __future__ import annotations


class WpirError(ValueError):
    """Base class for every rejected input or failed run in this package."""


class ParameterError(WpirError):
    pass


class DistributionError(WpirError):
    pass


class LemmaHypothesisError(WpirError):
    pass


class UnsupportedSettingError(WpirError):
    pass


class QueryBoundsError(WpirError):
    pass


class DecodingError(WpirError):
    pass


class EnumerationLimitError(WpirError):
    pass


class ConfigError(WpirError):
    pass
