"""RGBD sequence I/O: frame sets, JSON manifests, PNG frames and masks.

On disk a sequence is a directory with ``manifest.json`` plus, per frame,
an 8-bit RGB color PNG, a 16-bit single-channel depth PNG in raw sensor
units and, optionally, an 8-bit ground-truth mask PNG (0 / 255).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional

import cv2
import numpy as np

from .registration import CameraRig

MANIFEST_NAME = "manifest.json"


class SequenceError(Exception):
    """Malformed manifest, missing file or bad frame; carries the frame index when known."""

    def __init__(self, message: str, frame_index: Optional[int] = None, path=None):
        self.frame_index = frame_index
        self.path = str(path) if path is not None else None
        parts = []
        if frame_index is not None:
            parts.append(f"frame {frame_index}")
        if path is not None:
            parts.append(str(path))
        prefix = ": ".join(parts)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class MaskError(ValueError):
    pass


@dataclass
class FrameSet:
    index: int
    color: np.ndarray  # uint8[3, H, W], planar R, G, B
    depth_raw: np.ndarray  # uint16[H, W]
    depth_scale: float = 1.0
    gt: Optional[np.ndarray] = None  # uint8[H, W] in {0, 1}

    @property
    def shape(self) -> tuple[int, int]:
        return self.depth_raw.shape

    @property
    def depth_mm(self) -> np.ndarray:
        return self.depth_raw.astype(np.float64) * self.depth_scale

    @property
    def color_interleaved(self) -> np.ndarray:
        return np.ascontiguousarray(np.moveaxis(self.color, 0, -1))


@dataclass
class FrameEntry:
    index: int
    color: str
    depth: str
    gt: Optional[str] = None


@dataclass
class SequenceManifest:
    name: str
    frame_count: int
    frames: list[FrameEntry]
    depth_scale: float = 1.0
    registered: bool = True
    calibration: Optional[CameraRig] = None
    width: Optional[int] = None
    height: Optional[int] = None
    root: Path = field(default_factory=Path)

    @property
    def has_ground_truth(self) -> bool:
        return bool(self.frames) and all(f.gt for f in self.frames)

    def resolve(self, rel: str) -> Path:
        return self.root / rel

    def to_dict(self) -> dict:
        data = {
            "name": self.name,
            "frame_count": self.frame_count,
            "depth_scale": self.depth_scale,
            "registered": self.registered,
            "frames": [
                {"index": f.index, "color": f.color, "depth": f.depth, "gt": f.gt}
                for f in self.frames
            ],
        }
        if self.width is not None:
            data["width"] = self.width
            data["height"] = self.height
        if self.calibration is not None:
            data["calibration"] = self.calibration.to_dict()
        return data

    def save(self, directory: str | Path) -> Path:
        path = Path(directory) / MANIFEST_NAME
        path.write_text(json.dumps(self.to_dict(), indent=2) + "\n")
        return path

    @classmethod
    def load(cls, path: str | Path) -> "SequenceManifest":
        path = Path(path)
        if path.is_dir():
            path = path / MANIFEST_NAME
        try:
            data = json.loads(path.read_text())
        except OSError as exc:
            raise SequenceError(f"cannot read manifest: {exc}", path=path) from exc
        except json.JSONDecodeError as exc:
            raise SequenceError(f"malformed manifest: {exc}", path=path) from exc
        try:
            frames = [
                FrameEntry(int(f["index"]), f["color"], f["depth"], f.get("gt"))
                for f in data["frames"]
            ]
            depth_scale = float(data.get("depth_scale", 1.0))
            calib = data.get("calibration")
            manifest = cls(
                name=str(data["name"]),
                frame_count=int(data["frame_count"]),
                frames=frames,
                depth_scale=depth_scale,
                registered=bool(data.get("registered", True)),
                calibration=CameraRig.from_dict(calib, depth_scale) if calib else None,
                width=data.get("width"),
                height=data.get("height"),
                root=path.parent,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SequenceError(f"malformed manifest: {exc!r}", path=path) from exc
        manifest.validate()
        return manifest

    def validate(self) -> None:
        if len(self.frames) != self.frame_count:
            raise SequenceError(
                f"frame_count is {self.frame_count} but {len(self.frames)} frames are listed"
            )
        for expected, entry in enumerate(self.frames):
            if entry.index != expected:
                raise SequenceError(
                    f"frame indices must be contiguous from 0, found {entry.index}",
                    frame_index=expected,
                )
        if self.depth_scale <= 0:
            raise SequenceError("depth_scale must be positive")
        if not self.registered and self.calibration is None:
            raise SequenceError("unregistered sequence needs a calibration block")


def read_color(path: Path) -> np.ndarray:
    """Decode an 8-bit RGB PNG into planar ``uint8[3, H, W]``."""
    img = cv2.imread(str(path), cv2.IMREAD_COLOR)
    if img is None:
        raise OSError(f"cannot decode color image {path}")
    planar = np.empty((3,) + img.shape[:2], dtype=np.uint8)
    # BGR on disk-decode -> R, G, B planes
    planar[0] = img[:, :, 2]
    planar[1] = img[:, :, 1]
    planar[2] = img[:, :, 0]
    return planar


def write_color(path: Path, planar: np.ndarray) -> None:
    bgr = np.ascontiguousarray(np.moveaxis(planar[::-1], 0, -1))
    if not cv2.imwrite(str(path), bgr):
        raise OSError(f"cannot write {path}")


def read_depth(path: Path) -> np.ndarray:
    img = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if img is None:
        raise OSError(f"cannot decode depth image {path}")
    if img.dtype != np.uint16 or img.ndim != 2:
        raise OSError(f"depth image {path} must be 16-bit single channel")
    return img


def write_depth(path: Path, raw: np.ndarray) -> None:
    if not cv2.imwrite(str(path), np.ascontiguousarray(raw, dtype=np.uint16)):
        raise OSError(f"cannot write {path}")


def encode_mask(mask: np.ndarray) -> bytes:
    ok, buf = cv2.imencode(".png", (np.asarray(mask, dtype=np.uint8) * 255))
    if not ok:
        raise MaskError("PNG encoding failed")
    return buf.tobytes()


def save_mask(mask: np.ndarray, path: str | Path) -> None:
    """Write a 0/1 mask as an 8-bit PNG holding 0 and 255."""
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise MaskError(f"mask must be 2-D, got shape {mask.shape}")
    if mask.size and mask.max() > 1:
        raise MaskError("mask values must be 0 or 1")
    Path(path).write_bytes(encode_mask(mask))


def decode_mask(img: Optional[np.ndarray], path) -> np.ndarray:
    if img is None:
        raise MaskError(f"cannot decode mask {path}")
    if img.ndim != 2 or img.dtype != np.uint8:
        raise MaskError(f"mask {path} must be 8-bit single channel")
    if not np.all((img == 0) | (img == 255)):
        raise MaskError(f"non-binary mask {path}: values other than 0/255")
    return (img == 255).astype(np.uint8)


def load_mask(path: str | Path) -> np.ndarray:
    if not Path(path).is_file():
        raise MaskError(f"mask file not found: {path}")
    return decode_mask(cv2.imread(str(path), cv2.IMREAD_UNCHANGED), path)


class SequenceReader:
    """Ordered, single-consumer provider of :class:`FrameSet` for a manifest."""

    def __init__(self, manifest: SequenceManifest, with_gt: bool = True, check_files: bool = True):
        self.manifest = manifest
        self.with_gt = with_gt
        if check_files:
            for entry in manifest.frames:
                for rel in (entry.color, entry.depth) + ((entry.gt,) if with_gt and entry.gt else ()):
                    path = manifest.resolve(rel)
                    if not path.is_file():
                        raise SequenceError("missing file", frame_index=entry.index, path=path)

    def __len__(self) -> int:
        return self.manifest.frame_count

    def read(self, index: int) -> FrameSet:
        m = self.manifest
        entry = m.frames[index]
        paths = [m.resolve(entry.color), m.resolve(entry.depth)]
        if self.with_gt and entry.gt:
            paths.append(m.resolve(entry.gt))
        for p in paths:
            if not p.is_file():
                raise SequenceError("missing file", frame_index=index, path=p)
        try:
            color = read_color(paths[0])
            depth = read_depth(paths[1])
            gt = load_mask(paths[2]) if len(paths) > 2 else None
        except (OSError, MaskError) as exc:
            raise SequenceError(str(exc), frame_index=index) from exc

        expected = (m.height, m.width) if m.width is not None else depth.shape
        for what, shape in (("color", color.shape[1:]), ("depth", depth.shape)) + (
            (("gt", gt.shape),) if gt is not None else ()
        ):
            if tuple(shape) != tuple(expected):
                raise SequenceError(
                    f"{what} is {shape[1]}x{shape[0]}, expected {expected[1]}x{expected[0]}",
                    frame_index=index,
                )
        return FrameSet(index, color, depth, m.depth_scale, gt)

    def __iter__(self) -> Iterator[FrameSet]:
        for index in range(self.manifest.frame_count):
            yield self.read(index)


def load_sequence(manifest_path: str | Path, with_gt: bool = True) -> SequenceReader:
    return SequenceReader(SequenceManifest.load(manifest_path), with_gt=with_gt)
