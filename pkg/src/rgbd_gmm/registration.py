"""Depth-to-color mask registration with pinhole cameras and a rigid transform."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import cv2
import numpy as np

from . import kernels


@dataclass(frozen=True)
class Intrinsics:
    fx: float
    fy: float
    cx: float
    cy: float

    def as_array(self) -> np.ndarray:
        return np.array([self.fx, self.fy, self.cx, self.cy], dtype=np.float64)


def _identity():
    return np.eye(3)


@dataclass(frozen=True)
class CameraRig:
    depth: Intrinsics
    color: Intrinsics
    rotation: np.ndarray = field(default_factory=_identity)  # 3x3, depth -> color
    translation_mm: np.ndarray = field(default_factory=lambda: np.zeros(3))
    depth_scale: float = 1.0  # mm per raw unit

    def __post_init__(self):
        object.__setattr__(self, "rotation", np.asarray(self.rotation, dtype=np.float64).reshape(3, 3))
        object.__setattr__(
            self, "translation_mm", np.asarray(self.translation_mm, dtype=np.float64).reshape(3)
        )
        self.validate()

    def validate(self) -> None:
        for name, k in (("depth", self.depth), ("color", self.color)):
            if k.fx <= 0 or k.fy <= 0:
                raise ValueError(f"degenerate rig: {name} focal lengths must be positive")
        r = self.rotation
        if not np.allclose(r.T @ r, np.eye(3), rtol=0.0, atol=1e-9):
            raise ValueError("degenerate rig: rotation is not orthonormal")
        if self.depth_scale <= 0:
            raise ValueError("depth_scale must be positive")

    @classmethod
    def identity(cls, width: int = 640, height: int = 480, focal: float = 525.0) -> "CameraRig":
        k = Intrinsics(focal, focal, width / 2.0, height / 2.0)
        return cls(depth=k, color=k)

    @classmethod
    def from_dict(cls, data: dict, depth_scale: float = 1.0) -> "CameraRig":
        return cls(
            depth=Intrinsics(**{k: float(data["depth"][k]) for k in ("fx", "fy", "cx", "cy")}),
            color=Intrinsics(**{k: float(data["color"][k]) for k in ("fx", "fy", "cx", "cy")}),
            rotation=np.array(data.get("rotation", np.eye(3).ravel()), dtype=np.float64),
            translation_mm=np.array(data.get("translation_mm", [0.0, 0.0, 0.0]), dtype=np.float64),
            depth_scale=depth_scale,
        )

    def to_dict(self) -> dict:
        return {
            "depth": {"fx": self.depth.fx, "fy": self.depth.fy, "cx": self.depth.cx, "cy": self.depth.cy},
            "color": {"fx": self.color.fx, "fy": self.color.fy, "cx": self.color.cx, "cy": self.color.cy},
            "rotation": [float(v) for v in self.rotation.ravel()],
            "translation_mm": [float(v) for v in self.translation_mm],
        }


def dilate(mask: np.ndarray, radius: int) -> np.ndarray:
    if radius <= 0:
        return mask
    kernel = np.ones((2 * radius + 1, 2 * radius + 1), dtype=np.uint8)
    return cv2.dilate(mask, kernel)


def register_mask(
    depth_mask: np.ndarray,
    depth_raw: np.ndarray,
    rig: CameraRig,
    dilation_radius: int = 1,
    color_shape: Optional[tuple[int, int]] = None,
) -> np.ndarray:
    """Move a depth-grid foreground mask onto the color grid.

    Each foreground pixel with a valid reading is back-projected with the
    depth intrinsics, moved by (R, t), projected with the color intrinsics
    and rounded to the nearest pixel. Pixels without depth or landing
    outside the color frame are dropped; the result is dilated by a square
    of the given radius to close resampling holes.
    """
    if depth_mask.shape != depth_raw.shape:
        raise ValueError(f"mask {depth_mask.shape} and depth {depth_raw.shape} differ in shape")
    rig.validate()
    out = np.zeros(color_shape or depth_mask.shape, dtype=np.uint8)
    kernels.splat_registered(
        np.ascontiguousarray(depth_mask, dtype=np.uint8),
        np.ascontiguousarray(depth_raw, dtype=np.uint16),
        float(rig.depth_scale),
        rig.depth.as_array(),
        rig.color.as_array(),
        np.ascontiguousarray(rig.rotation),
        np.ascontiguousarray(rig.translation_mm),
        out,
    )
    return dilate(out, dilation_radius)
