"""flowseries: univariate time series from videos, plus a forecast bench.

The extraction side turns a frame sequence into per-keypoint coordinate
series: background suppression, corner seeding, pyramidal point tracking
with a forward-backward consistency check, and track post-processing.
The evaluation side scores forecasters on fixed context/horizon windows
against a linear-regression baseline, with external forecasters attached
over a JSON-lines subprocess protocol.
"""

__version__ = "0.1.0"

from .background import MixtureBackground, apply_mask
from .bench import EvalWindow, MetricReport, make_windows, run_benchmark
from .bridge import BridgeForecaster, ForecastRequest, ForecastResponse, bridge_forecast
from .corners import Keypoint, detect_corners, min_eigenvalue_map
from .errors import FlowseriesError
from .flow import (
    FbCheckResult,
    FlowResult,
    fb_filter,
    forward_backward_error,
    track_point_lk,
)
from .forecasters import (
    ForecastResult,
    linear_regression_forecast,
    naive_forecast,
)
from .frames import Frame, FrameSequence, load_frame_sequence, to_grayscale
from .metrics import aggregate_relative, mape, mase, smape, wql
from .pipeline import (
    PipelineConfig,
    SeriesRecord,
    Track,
    emit_series,
    extract_series,
    interpolate_to_longest,
    run_extraction,
    select_least_correlated,
)
from .raster import ImagePyramid, build_pyramid, sample_bilinear, spatial_gradients
from .stats import adf_test, pca_compare, shannon_entropy_bits, summarize_dataset
from .synth import SceneSpec, render_scene

__all__ = [
    "__version__",
    "MixtureBackground",
    "apply_mask",
    "EvalWindow",
    "MetricReport",
    "make_windows",
    "run_benchmark",
    "BridgeForecaster",
    "ForecastRequest",
    "ForecastResponse",
    "bridge_forecast",
    "Keypoint",
    "detect_corners",
    "min_eigenvalue_map",
    "FlowseriesError",
    "FbCheckResult",
    "FlowResult",
    "fb_filter",
    "forward_backward_error",
    "track_point_lk",
    "ForecastResult",
    "linear_regression_forecast",
    "naive_forecast",
    "Frame",
    "FrameSequence",
    "load_frame_sequence",
    "to_grayscale",
    "aggregate_relative",
    "mape",
    "mase",
    "smape",
    "wql",
    "PipelineConfig",
    "SeriesRecord",
    "Track",
    "emit_series",
    "extract_series",
    "interpolate_to_longest",
    "run_extraction",
    "select_least_correlated",
    "ImagePyramid",
    "build_pyramid",
    "sample_bilinear",
    "spatial_gradients",
    "adf_test",
    "pca_compare",
    "shannon_entropy_bits",
    "summarize_dataset",
    "SceneSpec",
    "render_scene",
]
