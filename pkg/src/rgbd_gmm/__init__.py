"""Per-pixel Gaussian-mixture background subtraction for RGBD streams.

Color and depth are modelled by separate mixtures whose foreground masks
are merged by a per-pixel counter rule; a 4-channel augmented model is kept
for comparison. Kernels run on structure-of-arrays planes, split into row
bands over worker threads, behind a three-stage ingest/process/emit pipeline.
"""

__version__ = "0.1.0"

from .config import (
    AugmentedConfig,
    ConfigError,
    EngineConfig,
    EvalConfig,
    FusionConfig,
    MixtureConfig,
    RegistrationConfig,
    RunConfig,
)
from .mixture import PixelLabel, PixelMixture, classify, init_mixture, step_pixel, update_mixture
from .segmenter import Mode, ModelBank, segment_augmented, segment_frame
from .fusion import FusionState, fuse_step, reset_state
from .registration import CameraRig, Intrinsics, register_mask
from .workflow import METHODS, RGBDSegmenter

__all__ = [
    "AugmentedConfig", "ConfigError", "EngineConfig", "EvalConfig", "FusionConfig",
    "MixtureConfig", "RegistrationConfig", "RunConfig",
    "PixelLabel", "PixelMixture", "classify", "init_mixture", "step_pixel", "update_mixture",
    "Mode", "ModelBank", "segment_augmented", "segment_frame",
    "FusionState", "fuse_step", "reset_state",
    "CameraRig", "Intrinsics", "register_mask",
    "METHODS", "RGBDSegmenter",
]
