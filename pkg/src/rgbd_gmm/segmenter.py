"""Whole-frame background subtraction over SoA mixture banks.

Masks throughout the package are ``uint8[H, W]`` arrays holding 0
(background) or 1 (foreground).
"""

from __future__ import annotations

import enum
from typing import Optional

import numpy as np

from . import kernels
from .config import AugmentedConfig, MixtureConfig
from .engine import PlaneSet, WorkerPool
from .mixture import PixelMixture


class Mode(enum.Enum):
    COLOR3 = 3
    DEPTH1 = 1
    AUGMENTED4 = 4

    @property
    def dim(self) -> int:
        return self.value


_KERNEL_MODE = {
    Mode.COLOR3: kernels.MODE_COLOR,
    Mode.DEPTH1: kernels.MODE_DEPTH,
    Mode.AUGMENTED4: kernels.MODE_AUGMENTED,
}

_DUMMY_COLOR = np.zeros((3, 1, 1), dtype=np.uint8)
_DUMMY_DEPTH = np.zeros((1, 1), dtype=np.uint16)


class ModelBank:
    """Per-pixel mixtures for a whole frame, one contiguous plane per
    (parameter, component[, channel]).

    ``means[i * D + c]`` is the channel-``c`` mean plane of component ``i``;
    ``variances[i]`` and ``weights[i]`` are per-component planes.
    """

    def __init__(
        self,
        width: int,
        height: int,
        mode: Mode,
        config: MixtureConfig,
        depth_range: tuple[float, float] = (0.0, 4000.0),
    ):
        if width <= 0 or height <= 0:
            raise ValueError("bank dimensions must be positive")
        self.width = width
        self.height = height
        self.mode = mode
        self.config = config
        self.depth_range = depth_range
        m, d = config.components, mode.dim
        self.means = np.zeros((m * d, height, width))
        self.variances = np.zeros((m, height, width))
        self.weights = np.zeros((m, height, width))
        self.initialized = np.zeros((height, width), dtype=np.uint8)
        self._params = kernels.pack_params(config)

    @classmethod
    def for_augmented(cls, width: int, height: int, config: AugmentedConfig) -> "ModelBank":
        return cls(
            width,
            height,
            Mode.AUGMENTED4,
            config.mixture,
            (config.depth_min_mm, config.depth_max_mm),
        )

    @property
    def shape(self) -> tuple[int, int]:
        return self.height, self.width

    def pixel_mixture(self, y: int, x: int) -> Optional[PixelMixture]:
        """Reassemble one pixel's mixture from the planes (None before its first valid frame)."""
        if not self.initialized[y, x]:
            return None
        m, d = self.config.components, self.mode.dim
        return PixelMixture(
            means=tuple(
                tuple(float(self.means[i * d + c, y, x]) for c in range(d)) for i in range(m)
            ),
            variances=tuple(float(v) for v in self.variances[:, y, x]),
            weights=tuple(float(w) for w in self.weights[:, y, x]),
        )

    def plane_set(self) -> PlaneSet:
        """Expose the banks as named planes (views, not copies)."""
        m, d = self.config.components, self.mode.dim
        planes = {}
        for i in range(m):
            for c in range(d):
                planes[f"mean[{i}][{c}]"] = self.means[i * d + c]
            planes[f"variance[{i}]"] = self.variances[i]
            planes[f"weight[{i}]"] = self.weights[i]
        planes["initialized"] = self.initialized
        return PlaneSet(self.width, self.height, planes)

    def state_equal(self, other: "ModelBank") -> bool:
        return (
            self.mode == other.mode
            and np.array_equal(self.means, other.means)
            and np.array_equal(self.variances, other.variances)
            and np.array_equal(self.weights, other.weights)
            and np.array_equal(self.initialized, other.initialized)
        )

    def _run(self, planes, raw, scale, pool: Optional[WorkerPool]) -> np.ndarray:
        out = np.empty(self.shape, dtype=np.uint8)
        dmin, dmax = self.depth_range
        mode = _KERNEL_MODE[self.mode]

        def band(r0, r1):
            kernels.mixture_band(
                mode, planes, raw, float(scale), float(dmin), float(dmax),
                self.means, self.variances, self.weights, self.initialized,
                out, self._params, r0, r1,
            )

        if pool is None:
            band(0, self.height)
        else:
            pool.run(band, self.height)
        return out


def _check_color(bank: ModelBank, planes: np.ndarray) -> np.ndarray:
    if planes.ndim != 3 or planes.shape[0] != 3:
        raise ValueError(f"color input must be 3 planes [3, H, W], got shape {planes.shape}")
    if planes.shape[1:] != bank.shape:
        raise ValueError(f"frame is {planes.shape[1:]}, bank is {bank.shape}")
    return np.ascontiguousarray(planes, dtype=np.uint8)


def _check_depth(bank: ModelBank, raw: np.ndarray) -> np.ndarray:
    if raw.ndim != 2:
        raise ValueError(f"depth input must be one plane [H, W], got shape {raw.shape}")
    if raw.shape != bank.shape:
        raise ValueError(f"frame is {raw.shape}, bank is {bank.shape}")
    return np.ascontiguousarray(raw, dtype=np.uint16)


def segment_frame(
    bank: ModelBank,
    planes: np.ndarray,
    depth_scale: float = 1.0,
    pool: Optional[WorkerPool] = None,
) -> np.ndarray:
    """Label every pixel of one frame and update its mixture in place.

    ``planes`` is ``uint8[3, H, W]`` for a color bank or raw ``uint16[H, W]``
    depth for a depth bank (millimetres = raw * ``depth_scale``). Pixels seen
    for the first time (first valid reading, for depth) seed their mixture
    and are labelled background.
    """
    planes = np.asarray(planes)
    if bank.mode is Mode.COLOR3:
        return bank._run(_check_color(bank, planes), _DUMMY_DEPTH, 1.0, pool)
    if bank.mode is Mode.DEPTH1:
        return bank._run(_DUMMY_COLOR, _check_depth(bank, planes), depth_scale, pool)
    raise ValueError("augmented banks take color and depth together: use segment_augmented")


def segment_augmented(
    bank: ModelBank,
    color: np.ndarray,
    depth_raw: np.ndarray,
    depth_scale: float = 1.0,
    pool: Optional[WorkerPool] = None,
) -> np.ndarray:
    """Four-channel variant: (R, G, B, depth rescaled to 0..255) per pixel."""
    if bank.mode is not Mode.AUGMENTED4:
        raise ValueError(f"segment_augmented needs an AUGMENTED4 bank, got {bank.mode.name}")
    color = _check_color(bank, np.asarray(color))
    raw = _check_depth(bank, np.asarray(depth_raw))
    return bank._run(color, raw, depth_scale, pool)


def augmented_observation(rgb, depth_mm: float, depth_range=(0.0, 4000.0)) -> tuple:
    """The 4-vector an augmented bank sees for one pixel (reference path helper)."""
    d = kernels.rescale_depth(float(depth_mm), float(depth_range[0]), float(depth_range[1]))
    return (float(rgb[0]), float(rgb[1]), float(rgb[2]), d)
