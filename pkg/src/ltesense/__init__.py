"""Passive sensing from downlink channel estimates.

A simulation twin of an instrument that taps the channel-equalization
block of an ordinary cellular receiver and turns its impulse-response
estimates into a reflector detector: subframe synthesis with known
pilots, a bistatic two-reflector scene, least-squares estimation, a
two-stage linear classifier, detection metrics, and two resolution
definitions that work without a shared clock.
"""

from .baseline import (
    BistaticConfig,
    CellSpec,
    bistatic_range_resolution,
    range_resolution_sweep,
    timing_precision_table,
    wavelength,
)
from .campaign import (
    Dataset,
    DatasetRecord,
    LABEL_NONE,
    LABEL_ONE,
    LABEL_TWO,
    ScenarioSpec,
    load_dataset,
    run_campaign,
    save_dataset,
    split_train_test,
)
from .config import RunConfig, load_config
from .detector import (
    CascadeModel,
    LinearModel,
    Prediction,
    TrainingConfig,
    load_model,
    predict,
    save_model,
    train_cascade,
    train_linear,
)
from .metrics import (
    ConfusionCounts,
    GaussianFit,
    MetricCurve,
    ResolutionCurve,
    ScoreReport,
    accuracy,
    crlb_resolution,
    far,
    fisher_information,
    frr,
    gaussian_fit,
    np_resolution,
    np_resolution_curve,
    score_predictions,
)
from .receiver import CirFeature, cir_from_estimates, estimate_channel_ls, extract_feature
from .reference import reference_far_curves, reference_score_cells
from .scene import (
    PathSet,
    SceneGeometry,
    apply_channel,
    frequency_response,
    intra_reflector_distance,
    reflector_paths,
    timing_precision,
)
from .waveform import GridConfig, ResourceGrid, build_subframe_grid, generate_crs, ofdm_demodulate, ofdm_modulate

__version__ = "0.1.0"

__all__ = [
    "BistaticConfig",
    "CascadeModel",
    "CellSpec",
    "CirFeature",
    "ConfusionCounts",
    "Dataset",
    "DatasetRecord",
    "GaussianFit",
    "GridConfig",
    "LABEL_NONE",
    "LABEL_ONE",
    "LABEL_TWO",
    "LinearModel",
    "MetricCurve",
    "PathSet",
    "Prediction",
    "ResolutionCurve",
    "ResourceGrid",
    "RunConfig",
    "ScenarioSpec",
    "SceneGeometry",
    "ScoreReport",
    "TrainingConfig",
    "accuracy",
    "apply_channel",
    "bistatic_range_resolution",
    "build_subframe_grid",
    "cir_from_estimates",
    "crlb_resolution",
    "estimate_channel_ls",
    "extract_feature",
    "far",
    "fisher_information",
    "frequency_response",
    "frr",
    "gaussian_fit",
    "generate_crs",
    "intra_reflector_distance",
    "load_config",
    "load_dataset",
    "load_model",
    "np_resolution",
    "np_resolution_curve",
    "ofdm_demodulate",
    "ofdm_modulate",
    "predict",
    "range_resolution_sweep",
    "reference_far_curves",
    "reference_score_cells",
    "reflector_paths",
    "run_campaign",
    "save_dataset",
    "save_model",
    "score_predictions",
    "split_train_test",
    "timing_precision",
    "timing_precision_table",
    "train_cascade",
    "train_linear",
    "wavelength",
]
