"""Desk-scale haze benchmark: restoration methods, synthetic data, and
transmission-accuracy scoring against distance-derived ground truth."""

from .clahe import ClaheConfig, clahe_dehaze
from .dcp import DcpConfig, dark_channel, dcp_dehaze, dcp_transmission, estimate_airlight
from .errors import (
    DomainError,
    HazebenchError,
    ManifestError,
    ParameterError,
    ShapeError,
    TrainingError,
)
from .guided import GuidedFilterConfig, guided_filter
from .imaging import (
    apply_haze,
    depth_from_transmission,
    invert_haze,
    luminance,
    transmission_from_depth,
)
from .manifest import RunConfig, SceneManifest, load_run_config, load_scene_manifest
from .metrics import (
    Chromaticity,
    EdgeMetricConfig,
    RegionMask,
    e_index,
    mean_chromaticity_distance,
    r_index,
    rg_chromaticity,
    trimmed_mean,
    trimmed_mean_region,
)
from .mininet import NetParams, TrainConfig, forward, init_params, load_params, predict_map, save_params, train
from .synth import PatchSample, SynthConfig, build_demo_scene, synthesize_patch_dataset, synthesize_scene
from .veil import VeilConfig, veil_dehaze, veil_to_transmission

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "HazebenchError",
    "ShapeError",
    "ParameterError",
    "DomainError",
    "ManifestError",
    "TrainingError",
    "apply_haze",
    "invert_haze",
    "transmission_from_depth",
    "depth_from_transmission",
    "luminance",
    "GuidedFilterConfig",
    "guided_filter",
    "DcpConfig",
    "dark_channel",
    "dcp_transmission",
    "dcp_dehaze",
    "estimate_airlight",
    "VeilConfig",
    "veil_dehaze",
    "veil_to_transmission",
    "ClaheConfig",
    "clahe_dehaze",
    "NetParams",
    "TrainConfig",
    "init_params",
    "forward",
    "train",
    "predict_map",
    "save_params",
    "load_params",
    "RegionMask",
    "Chromaticity",
    "EdgeMetricConfig",
    "trimmed_mean",
    "trimmed_mean_region",
    "rg_chromaticity",
    "mean_chromaticity_distance",
    "e_index",
    "r_index",
    "SynthConfig",
    "PatchSample",
    "synthesize_patch_dataset",
    "synthesize_scene",
    "build_demo_scene",
    "SceneManifest",
    "RunConfig",
    "load_scene_manifest",
    "load_run_config",
]
