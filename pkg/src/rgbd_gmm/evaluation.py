"""Segmentation metrics (precision / recall / F1) and throughput measurement."""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .config import RunConfig
from .dataset import SequenceManifest, SequenceReader, encode_mask
from .engine import PipelineStats, WorkerPool, run_pipeline

CSV_HEADER = ("frame", "method", "tp", "fp", "tn", "fn", "precision", "recall", "f1")


class EvalError(ValueError):
    pass


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn
        )

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def confusion_counts(pred: np.ndarray, gt: np.ndarray) -> ConfusionCounts:
    """Pixel counts of a predicted mask against ground truth (nonzero = foreground)."""
    pred = np.asarray(pred)
    gt = np.asarray(gt)
    if pred.shape != gt.shape:
        raise EvalError(f"mask shapes differ: {pred.shape} vs {gt.shape}")
    p = pred != 0
    g = gt != 0
    tp = int(np.count_nonzero(p & g))
    fp = int(np.count_nonzero(p & ~g))
    fn = int(np.count_nonzero(~p & g))
    return ConfusionCounts(tp, fp, p.size - tp - fp - fn, fn)


def _ratio(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


def precision(c: ConfusionCounts) -> float:
    return _ratio(c.tp, c.tp + c.fp)


def recall(c: ConfusionCounts) -> float:
    return _ratio(c.tp, c.tp + c.fn)


def f1(c: ConfusionCounts) -> float:
    p, r = precision(c), recall(c)
    return _ratio(2.0 * p * r, p + r)


@dataclass(frozen=True)
class FrameMetrics:
    frame: int
    counts: ConfusionCounts
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, frame: int, counts: ConfusionCounts) -> "FrameMetrics":
        return cls(frame, counts, precision(counts), recall(counts), f1(counts))


@dataclass
class EvalReport:
    """Per-frame metric series per method plus pooled aggregates.

    Aggregates pool the confusion counts of every frame at or after
    ``warmup_frames`` and compute P/R/F1 once from the sums; this is not the
    mean of per-frame F1 (see :meth:`mean_f1` for that).
    """

    series: dict = field(default_factory=dict)  # method -> list[FrameMetrics]
    warmup_frames: int = 30
    throughput: dict = field(default_factory=dict)  # configuration -> PipelineStats

    @property
    def methods(self) -> list[str]:
        return list(self.series)

    def scored(self, method: str) -> list[FrameMetrics]:
        return [m for m in self.series[method] if m.frame >= self.warmup_frames]

    def pooled_counts(self, method: str) -> ConfusionCounts:
        total = ConfusionCounts()
        for m in self.scored(method):
            total = total + m.counts
        return total

    def aggregate(self, method: str) -> dict:
        c = self.pooled_counts(method)
        return {"precision": precision(c), "recall": recall(c), "f1": f1(c)}

    def mean_f1(self, method: str) -> float:
        values = [m.f1 for m in self.scored(method)]
        return float(np.mean(values)) if values else 0.0

    def f1_series(self, method: str) -> np.ndarray:
        return np.array([m.f1 for m in self.series[method]])

    def rows(self):
        frames = sorted({m.frame for s in self.series.values() for m in s})
        by_method = {k: {m.frame: m for m in s} for k, s in self.series.items()}
        for frame in frames:
            for method in self.series:
                m = by_method[method].get(frame)
                if m is None:
                    continue
                c = m.counts
                yield (frame, method, c.tp, c.fp, c.tn, c.fn, m.precision, m.recall, m.f1)

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_HEADER)
            for row in self.rows():
                writer.writerow(row[:6] + tuple(f"{v:.6f}" for v in row[6:]))

    def summary(self) -> dict:
        methods = {}
        for method in self.series:
            entry = self.aggregate(method)
            entry["mean_f1"] = self.mean_f1(method)
            entry["frames"] = len(self.series[method])
            entry["scored_frames"] = len(self.scored(method))
            methods[method] = entry
        return {
            "warmup_frames": self.warmup_frames,
            "methods": methods,
            "throughput": {k: v.to_dict() for k, v in self.throughput.items()},
        }

    def write_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.summary(), indent=2) + "\n")


def evaluate_sequence(
    predictions: Mapping[str, Sequence[np.ndarray]],
    ground_truth: Sequence[np.ndarray],
    warmup_frames: int = 30,
    frames: Optional[Sequence[int]] = None,
) -> EvalReport:
    """Score each method's mask stream against the ground-truth stream.

    Streams are aligned by position; ``frames`` gives the frame index of
    each position (default ``0..n-1``). Every supplied stream must have the
    same length as the ground truth.
    """
    gt = list(ground_truth)
    indices = list(range(len(gt))) if frames is None else [int(f) for f in frames]
    if len(indices) != len(gt):
        raise EvalError(f"{len(indices)} frame indices for {len(gt)} ground-truth masks")
    report = EvalReport(warmup_frames=warmup_frames)
    for method, stream in predictions.items():
        masks = list(stream)
        if len(masks) != len(gt):
            raise EvalError(
                f"method {method!r} has {len(masks)} masks but ground truth has {len(gt)}"
            )
        series = []
        for frame, pred, truth in zip(indices, masks, gt):
            try:
                counts = confusion_counts(pred, truth)
            except EvalError as exc:
                raise EvalError(f"frame {frame}, method {method!r}: {exc}") from None
            series.append(FrameMetrics.from_counts(frame, counts))
        report.series[method] = series
    return report


# ---------------------------------------------------------------- throughput

CONFIGURATIONS = ("baseline", "opt1", "opt2")
CONFIGURATION_LABELS = {
    "baseline": "sequential AoS",
    "opt1": "parallel SoA",
    "opt2": "parallel SoA + pipeline",
}


@dataclass
class BenchResult:
    configuration: str
    stats: PipelineStats
    digest: str  # sha256 over every emitted mask, in frame order

    def to_dict(self) -> dict:
        out = {"configuration": self.configuration, "label": CONFIGURATION_LABELS[self.configuration]}
        out.update(self.stats.to_dict())
        out["mask_digest"] = self.digest
        return out


def measure_throughput(
    manifest: SequenceManifest,
    configuration: str,
    config: Optional[RunConfig] = None,
    methods: Iterable[str] = ("fused",),
    workers: Optional[int] = None,
    frame_limit: Optional[int] = None,
) -> BenchResult:
    """Run decode -> segment/register/fuse -> mask encode end to end.

    ``baseline`` is the single-threaded AoS implementation, ``opt1`` the
    row-parallel SoA kernels, ``opt2`` the same plus the three-stage
    pipeline. Emission PNG-encodes every mask in memory and hashes it, so
    the digest doubles as a determinism check across configurations.
    """
    from .baseline import AoSSegmenter
    from .workflow import RGBDSegmenter

    if configuration not in CONFIGURATIONS:
        raise ValueError(
            f"unknown configuration {configuration!r}; choose from {', '.join(CONFIGURATIONS)}"
        )
    config = config or RunConfig()
    reader = SequenceReader(manifest, with_gt=False)
    count = len(reader) if frame_limit is None else min(frame_limit, len(reader))
    width = manifest.width
    height = manifest.height
    if width is None and count:
        height, width = reader.read(0).shape
    digest = hashlib.sha256()

    def source():
        for i in range(count):
            yield reader.read(i)

    def sink(frame, masks):
        for name in sorted(masks):
            digest.update(name.encode())
            digest.update(encode_mask(masks[name]))

    if count == 0:
        return BenchResult(configuration, PipelineStats(pipelined=configuration == "opt2"),
                           digest.hexdigest())

    if configuration == "baseline":
        seg = AoSSegmenter(width, height, config, methods, manifest.calibration, manifest.registered)
        stats = run_pipeline(source(), seg.process, sink, pipelined=False)
    else:
        n = config.engine.workers if workers is None else workers
        with WorkerPool(n) as pool:
            seg = RGBDSegmenter(
                width, height, config, methods, manifest.calibration, manifest.registered, pool
            )
            stats = run_pipeline(source(), seg.process, sink, pipelined=configuration == "opt2")
    return BenchResult(configuration, stats, digest.hexdigest())
