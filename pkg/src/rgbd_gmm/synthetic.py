"""Deterministic synthetic RGBD desk scenes with exact ground truth.

A scene is a static textured background (wall + desk, a few props) with
textured rectangles moving along closed polylines in front of it. Events
perturb it over frame ranges:

* ``illumination``: multiplicative gain on color only, optionally ramped in;
* ``shadow``: color-only darkening of a fixed region or of a region that
  follows an object at an offset (a cast shadow);
* ``flicker``: per-frame additive noise in a region on both color and
  depth, bimodal (two alternating states, like leaves) or Gaussian.

Depth can also lose readings (raw 0) along object silhouettes, as
structured-light sensors do on mixed foreground/background pixels.

Noise comes from a counter-based generator (Philox) keyed by
``(seed, frame, stream)``, so every frame can be rendered independently
and output files are bitwise reproducible.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

import cv2
import numpy as np

from .dataset import FrameEntry, SequenceManifest, save_mask, write_color, write_depth

_STREAM_TEXTURE, _STREAM_COLOR, _STREAM_DEPTH, _STREAM_DROPOUT, _STREAM_FLICKER = range(5)
_STATIC_FRAME = (1 << 40) - 1


class ScenarioError(ValueError):
    pass


@dataclass
class BackgroundSpec:
    wall_color: tuple[int, int, int] = (120, 115, 105)
    desk_color: tuple[int, int, int] = (95, 75, 55)
    horizon: float = 0.55  # fraction of the height where the desk starts
    wall_depth_mm: float = 2600.0
    desk_far_mm: float = 2200.0
    desk_near_mm: float = 1100.0
    props: int = 6
    texture_amplitude: float = 18.0


@dataclass
class ObjectSpec:
    size: tuple[int, int]  # width, height
    waypoints: list[tuple[float, float]]  # top-left corner, closed loop
    speed: float  # px per frame along the path
    depth_offset_mm: float = 400.0
    colors: tuple[tuple[int, int, int], tuple[int, int, int]] = ((210, 50, 40), (240, 170, 40))
    checker: int = 8
    phase: float = 0.0  # starting arc length along the path


@dataclass
class EventSpec:
    kind: str  # illumination | shadow | flicker
    start: int
    end: int  # exclusive
    gain: float = 1.0
    ramp: int = 0
    region: Optional[tuple[int, int, int, int]] = None  # x, y, w, h
    follow: Optional[int] = None  # object index for shadows
    offset: tuple[int, int] = (0, 0)
    darkening: float = 0.55
    color_amplitude: float = 0.0
    depth_amplitude_mm: float = 0.0
    bimodal: bool = True


@dataclass
class ScenarioSpec:
    name: str = "custom"
    width: int = 640
    height: int = 480
    frame_count: int = 100
    seed: int = 0
    background: BackgroundSpec = field(default_factory=BackgroundSpec)
    objects: list[ObjectSpec] = field(default_factory=list)
    events: list[EventSpec] = field(default_factory=list)
    color_noise: float = 1.0
    depth_noise_mm: float = 1.0
    # probability that a pixel within `depth_edge_band` px inside an object's
    # outline has no depth reading in a given frame
    depth_edge_dropout: float = 0.0
    depth_edge_band: int = 3

    def validate(self) -> None:
        if self.width <= 0 or self.height <= 0 or self.frame_count < 0:
            raise ScenarioError("width/height must be positive and frame_count non-negative")
        if not 0.0 <= self.depth_edge_dropout <= 1.0 or self.depth_edge_band < 0:
            raise ScenarioError("depth_edge_dropout must be in [0, 1] and the band non-negative")
        if not 0 <= self.seed < 2**64:
            raise ScenarioError("seed must be an unsigned 64-bit integer")
        for k, obj in enumerate(self.objects):
            w, h = obj.size
            if w <= 0 or h <= 0 or obj.speed < 0 or not obj.waypoints:
                raise ScenarioError(f"object {k}: bad size, speed or waypoints")
            for x, y in obj.waypoints:
                if not (0 <= x and x + w <= self.width and 0 <= y and y + h <= self.height):
                    raise ScenarioError(f"object {k}: waypoint ({x}, {y}) leaves the frame")
        for k, ev in enumerate(self.events):
            if ev.kind not in ("illumination", "shadow", "flicker"):
                raise ScenarioError(f"event {k}: unknown kind {ev.kind!r}")
            if not (0 <= ev.start < ev.end <= max(self.frame_count, 1)):
                raise ScenarioError(f"event {k}: frames [{ev.start}, {ev.end}) out of range")
            if ev.kind == "illumination" and ev.gain <= 0:
                raise ScenarioError(f"event {k}: illumination gain must be positive")
            if ev.kind == "shadow" and ev.region is None and ev.follow is None:
                raise ScenarioError(f"event {k}: shadow needs a region or an object to follow")
            if ev.follow is not None and not 0 <= ev.follow < len(self.objects):
                raise ScenarioError(f"event {k}: follows unknown object {ev.follow}")
            if ev.kind == "flicker" and ev.region is None:
                raise ScenarioError(f"event {k}: flicker needs a region")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioSpec":
        try:
            data = dict(data)
            bg = BackgroundSpec(**data.pop("background", {}))
            objects = [ObjectSpec(**o) for o in data.pop("objects", [])]
            events = [EventSpec(**e) for e in data.pop("events", [])]
            known = {f.name for f in fields(cls)}
            unknown = set(data) - known
            if unknown:
                raise ScenarioError(f"unknown scenario keys {sorted(unknown)}")
            spec = cls(background=bg, objects=objects, events=events, **data)
        except TypeError as exc:
            raise ScenarioError(str(exc)) from exc
        spec.validate()
        return spec

    @classmethod
    def load(cls, path: str | Path) -> "ScenarioSpec":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc


def _rng(seed: int, frame: int, stream: int) -> np.random.Generator:
    key = np.array([seed, (frame << 8) | stream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def object_position(obj: ObjectSpec, frame: int) -> tuple[int, int]:
    """Integer top-left corner of an object at a frame (constant speed, closed path)."""
    pts = np.asarray(obj.waypoints, dtype=np.float64)
    if len(pts) == 1:
        return int(pts[0, 0]), int(pts[0, 1])
    loop = np.vstack([pts, pts[:1]])
    seg = np.hypot(*np.diff(loop, axis=0).T)
    total = seg.sum()
    s = (obj.phase + obj.speed * frame) % total
    for k, length in enumerate(seg):
        if s <= length or k == len(seg) - 1:
            t = s / length if length > 0 else 0.0
            p = loop[k] + t * (loop[k + 1] - loop[k])
            return int(np.floor(p[0] + 0.5)), int(np.floor(p[1] + 0.5))
        s -= length
    raise AssertionError("unreachable")


class SceneRenderer:
    def __init__(self, spec: ScenarioSpec):
        spec.validate()
        self.spec = spec
        self.color_bg, self.depth_bg = self._background()

    def _background(self):
        spec, bg = self.spec, self.spec.background
        h, w = spec.height, spec.width
        rng = _rng(spec.seed, _STATIC_FRAME, _STREAM_TEXTURE)
        horizon = int(round(bg.horizon * h))

        color = np.empty((h, w, 3))
        color[:horizon] = bg.wall_color
        color[horizon:] = bg.desk_color
        depth = np.empty((h, w))
        depth[:horizon] = bg.wall_depth_mm
        rows = np.arange(h - horizon, dtype=np.float64)
        span = max(h - horizon - 1, 1)
        depth[horizon:] = (bg.desk_far_mm + (bg.desk_near_mm - bg.desk_far_mm) * rows / span)[:, None]

        for _ in range(bg.props):
            # sizes are drawn first, then clamped to fit small frames
            pw = max(1, min(int(rng.integers(30, 110)), w // 2))
            ph = max(1, min(int(rng.integers(30, 90)), h // 2))
            px, py = int(rng.integers(0, max(1, w - pw))), int(rng.integers(0, max(1, h - ph)))
            color[py : py + ph, px : px + pw] = rng.integers(30, 170, size=3)
            depth[py : py + ph, px : px + pw] -= rng.uniform(60.0, 250.0)

        # smooth, static texture: coarse noise upsampled
        coarse = rng.normal(0.0, 1.0, size=(h // 16 + 1, w // 16 + 1, 3)).astype(np.float32)
        smooth = cv2.resize(coarse, (w, h), interpolation=cv2.INTER_CUBIC).astype(np.float64)
        color += bg.texture_amplitude * smooth
        return np.clip(color, 0.0, 255.0), depth

    def _active(self, frame, kind):
        return [e for e in self.spec.events if e.kind == kind and e.start <= frame < e.end]

    def _region_mask(self, ev: EventSpec, frame: int) -> np.ndarray:
        spec = self.spec
        mask = np.zeros((spec.height, spec.width), dtype=bool)
        if ev.follow is not None:
            obj = spec.objects[ev.follow]
            ox, oy = object_position(obj, frame)
            x, y, w, h = ox + ev.offset[0], oy + ev.offset[1], obj.size[0], obj.size[1]
        else:
            x, y, w, h = ev.region
        x0, y0 = max(x, 0), max(y, 0)
        x1, y1 = min(x + w, spec.width), min(y + h, spec.height)
        if x1 > x0 and y1 > y0:
            mask[y0:y1, x0:x1] = True
        return mask

    def ground_truth(self, frame: int) -> np.ndarray:
        spec = self.spec
        gt = np.zeros((spec.height, spec.width), dtype=np.uint8)
        for obj in spec.objects:
            x, y = object_position(obj, frame)
            gt[y : y + obj.size[1], x : x + obj.size[0]] = 1
        return gt

    def render(self, frame: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Planar uint8 color, uint16 raw depth (1 mm units) and 0/1 ground truth."""
        spec = self.spec
        color = self.color_bg.copy()
        depth = self.depth_bg.copy()

        for k, ev in enumerate(self._active(frame, "flicker")):
            region = self._region_mask(ev, frame)
            n = int(region.sum())
            rng = _rng(spec.seed, frame, _STREAM_FLICKER + k)
            if ev.bimodal:
                state = rng.integers(0, 2, size=n) * 2.0 - 1.0
                dc = state[:, None] * ev.color_amplitude
                dd = state * ev.depth_amplitude_mm
            else:
                dc = rng.normal(0.0, ev.color_amplitude, size=(n, 3))
                dd = rng.normal(0.0, ev.depth_amplitude_mm, size=n)
            color[region] += dc
            depth[region] += dd

        covered = np.zeros((spec.height, spec.width), dtype=bool)
        rim = np.zeros((spec.height, spec.width), dtype=bool)
        for obj in spec.objects:
            x, y = object_position(obj, frame)
            w, h = obj.size
            yy, xx = np.mgrid[0:h, 0:w]
            cells = ((xx // obj.checker) + (yy // obj.checker)) % 2
            patch = np.where(cells[..., None] == 0, obj.colors[0], obj.colors[1])
            color[y : y + h, x : x + w] = patch
            depth[y : y + h, x : x + w] = self.depth_bg[y : y + h, x : x + w] - obj.depth_offset_mm
            covered[y : y + h, x : x + w] = True
            b = spec.depth_edge_band
            rim[y : y + h, x : x + w] = True
            rim[y + b : y + h - b, x + b : x + w - b] = False

        for ev in self._active(frame, "shadow"):
            region = self._region_mask(ev, frame) & ~covered
            color[region] *= ev.darkening

        gain = 1.0
        for ev in self._active(frame, "illumination"):
            if ev.ramp > 0 and frame - ev.start < ev.ramp:
                frac = (frame - ev.start + 1) / (ev.ramp + 1)
                gain *= 1.0 + (ev.gain - 1.0) * frac
            else:
                gain *= ev.gain
        color *= gain

        if spec.color_noise > 0:
            color += _rng(spec.seed, frame, _STREAM_COLOR).normal(0.0, spec.color_noise, color.shape)
        if spec.depth_noise_mm > 0:
            depth += _rng(spec.seed, frame, _STREAM_DEPTH).normal(0.0, spec.depth_noise_mm, depth.shape)

        color8 = np.clip(np.floor(color + 0.5), 0, 255).astype(np.uint8)
        raw = np.clip(np.floor(depth + 0.5), 1, 65535).astype(np.uint16)
        if spec.depth_edge_dropout > 0:
            rim &= covered
            drop = _rng(spec.seed, frame, _STREAM_DROPOUT).random(int(rim.sum()))
            vals = raw[rim]
            vals[drop < spec.depth_edge_dropout] = 0
            raw[rim] = vals
        return np.ascontiguousarray(np.moveaxis(color8, -1, 0)), raw, self.ground_truth(frame)


def generate_synthetic(spec: ScenarioSpec, output_dir: str | Path) -> SequenceManifest:
    """Render every frame to PNGs under ``output_dir`` and write the manifest."""
    spec.validate()
    out = Path(output_dir)
    try:
        for sub in ("color", "depth", "gt"):
            (out / sub).mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ScenarioError(f"cannot create output directory {out}: {exc}") from exc

    renderer = SceneRenderer(spec)
    entries = []
    for f in range(spec.frame_count):
        color, raw, gt = renderer.render(f)
        entry = FrameEntry(f, f"color/{f:06d}.png", f"depth/{f:06d}.png", f"gt/{f:06d}.png")
        write_color(out / entry.color, color)
        write_depth(out / entry.depth, raw)
        save_mask(gt, out / entry.gt)
        entries.append(entry)

    manifest = SequenceManifest(
        name=spec.name,
        frame_count=spec.frame_count,
        frames=entries,
        depth_scale=1.0,
        registered=True,
        width=spec.width,
        height=spec.height,
        root=out,
    )
    manifest.save(out)
    (out / "scenario.json").write_text(json.dumps(spec.to_dict(), indent=2) + "\n")
    return manifest
