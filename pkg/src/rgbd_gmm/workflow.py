"""Per-frame RGBD processing: color/depth GMMs, registration, fusion."""

from __future__ import annotations

from typing import Iterable, Optional

from .config import RunConfig
from .dataset import FrameSet
from .engine import WorkerPool
from .fusion import fuse_step, reset_state
from .registration import CameraRig, register_mask
from .segmenter import Mode, ModelBank, segment_augmented, segment_frame

METHODS = ("rgb", "depth", "fused", "augmented")


def normalize_methods(methods: Iterable[str]) -> tuple[str, ...]:
    requested = {m.strip().lower() for m in methods if m.strip()}
    unknown = requested - set(METHODS)
    if unknown:
        raise ValueError(f"unknown methods {sorted(unknown)}; choose from {', '.join(METHODS)}")
    if not requested:
        raise ValueError("no methods requested")
    return tuple(m for m in METHODS if m in requested)


class RGBDSegmenter:
    """Stateful frame processor; frames must arrive in temporal order.

    Only the models the requested methods need are allocated: ``fused``
    runs both the color and depth models, ``rgb`` alone never touches depth.
    When the sequence is not pre-registered, the depth mask is moved onto
    the color grid before fusion (and before it is reported as ``depth``).
    """

    def __init__(
        self,
        width: int,
        height: int,
        config: Optional[RunConfig] = None,
        methods: Iterable[str] = ("fused",),
        rig: Optional[CameraRig] = None,
        registered: bool = True,
        pool: Optional[WorkerPool] = None,
    ):
        self.config = config or RunConfig()
        self.methods = normalize_methods(methods)
        self.width, self.height = width, height
        self.pool = pool
        if not registered and rig is None:
            raise ValueError("an unregistered stream needs a camera rig")
        self.rig = None if registered else rig

        wants = set(self.methods)
        self.color_bank = (
            ModelBank(width, height, Mode.COLOR3, self.config.color)
            if wants & {"rgb", "fused"}
            else None
        )
        self.depth_bank = (
            ModelBank(width, height, Mode.DEPTH1, self.config.depth)
            if wants & {"depth", "fused"}
            else None
        )
        self.augmented_bank = (
            ModelBank.for_augmented(width, height, self.config.augmented)
            if "augmented" in wants
            else None
        )
        self.fusion = (
            reset_state(
                width, height, self.config.fusion.initial_label, self.config.fusion.counter_limit
            )
            if "fused" in wants
            else None
        )

    def process(self, frame: FrameSet) -> dict:
        if frame.shape != (self.height, self.width):
            raise ValueError(
                f"frame {frame.index} is {frame.shape[1]}x{frame.shape[0]}, "
                f"expected {self.width}x{self.height}"
            )
        masks = {}
        if self.color_bank is not None:
            masks["rgb"] = segment_frame(self.color_bank, frame.color, pool=self.pool)
        if self.depth_bank is not None:
            depth = segment_frame(self.depth_bank, frame.depth_raw, frame.depth_scale, self.pool)
            if self.rig is not None:
                depth = register_mask(
                    depth,
                    frame.depth_raw,
                    self.rig,
                    self.config.registration.dilation_radius,
                    color_shape=(self.height, self.width),
                )
            masks["depth"] = depth
        if self.fusion is not None:
            masks["fused"] = fuse_step(self.fusion, masks["rgb"], masks["depth"], self.pool)
        if self.augmented_bank is not None:
            masks["augmented"] = segment_augmented(
                self.augmented_bank, frame.color, frame.depth_raw, frame.depth_scale, self.pool
            )
        return {m: masks[m] for m in self.methods}

    def banks(self) -> dict:
        out = {}
        for name in ("color_bank", "depth_bank", "augmented_bank"):
            bank = getattr(self, name)
            if bank is not None:
                out[name] = bank
        return out
