"""Error taxonomy shared across the package.

Every error raised by flowseries derives from FlowseriesError so CLI
dispatch can report module failures uniformly and exit nonzero.
"""


class FlowseriesError(Exception):
    """Base class for all flowseries errors."""


class NoFramesError(FlowseriesError):
    """A frame source matched fewer than two frames."""


class DimensionMismatchError(FlowseriesError):
    """Rasters that must share dimensions do not."""


class FrameLoadError(FlowseriesError):
    """A frame file could not be read or parsed."""


class ParameterError(FlowseriesError):
    """A tunable parameter is outside its valid range."""


class BoundsError(FlowseriesError):
    """A coordinate lies outside the raster."""


class SequenceTooShortError(FlowseriesError):
    """Frame sequence shorter than the pipeline needs."""


class SceneSpecError(FlowseriesError):
    """A synthetic scene description is invalid."""


class DatasetError(FlowseriesError):
    """A series dataset is empty, malformed, or unusable."""


class BenchmarkError(FlowseriesError):
    """The evaluation harness cannot produce a report."""


class ForecastContractError(FlowseriesError):
    """A forecast violated the shape or quantile-monotonicity contract."""


class BridgeError(FlowseriesError):
    """An external forecaster subprocess failed."""


class ProtocolError(BridgeError):
    """A wire-protocol message violated the contract."""
