"""Layout transforms, row-band data parallelism and the three-stage frame pipeline."""

from __future__ import annotations

import os
import queue
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Optional

import numpy as np

PIPELINE_DEPTH = 3


@dataclass
class PlaneSet:
    """Named, contiguous, row-major scalar planes sharing one ``height x width`` grid."""

    width: int
    height: int
    planes: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        for role, plane in self.planes.items():
            self._check(role, plane)

    def _check(self, role, plane):
        if plane.shape != (self.height, self.width):
            raise ValueError(
                f"plane {role!r} has shape {plane.shape}, expected {(self.height, self.width)}"
            )
        if not plane.flags.c_contiguous:
            raise ValueError(f"plane {role!r} is not contiguous row-major")

    def __getitem__(self, role: str) -> np.ndarray:
        return self.planes[role]

    def __setitem__(self, role: str, plane: np.ndarray) -> None:
        self._check(role, plane)
        self.planes[role] = plane

    def roles(self) -> list[str]:
        return list(self.planes)

    def copy(self) -> "PlaneSet":
        return PlaneSet(self.width, self.height, {k: v.copy() for k, v in self.planes.items()})

    def equals(self, other: "PlaneSet") -> bool:
        if (self.width, self.height, self.roles()) != (other.width, other.height, other.roles()):
            return False
        return all(np.array_equal(self[k], other[k]) for k in self.planes)


RGB_ROLES = ("R", "G", "B")


def aos_to_soa(frame: np.ndarray) -> PlaneSet:
    """Split an interleaved ``H x W x 3`` RGB frame into three contiguous planes."""
    frame = np.asarray(frame)
    if frame.ndim != 3 or frame.shape[2] != 3:
        raise ValueError(f"expected an H x W x 3 interleaved frame, got shape {frame.shape}")
    h, w, _ = frame.shape
    return PlaneSet(
        w, h, {role: np.ascontiguousarray(frame[:, :, c]) for c, role in enumerate(RGB_ROLES)}
    )


def soa_to_aos(planes: PlaneSet) -> np.ndarray:
    if planes.roles() != list(RGB_ROLES):
        raise ValueError(f"expected planes {RGB_ROLES}, got {planes.roles()}")
    return np.stack([planes[r] for r in RGB_ROLES], axis=-1)


def resolve_workers(workers: int) -> int:
    if workers < 0:
        raise ValueError("workers must be >= 0")
    return workers or (os.cpu_count() or 1)


def row_bands(height: int, workers: int) -> list[tuple[int, int]]:
    """Split ``[0, height)`` into at most ``workers`` contiguous, near-equal row ranges."""
    n = max(1, min(workers, height))
    edges = [height * k // n for k in range(n + 1)]
    return [(edges[k], edges[k + 1]) for k in range(n) if edges[k] < edges[k + 1]]


class WorkerPool:
    """Fans a row-band function out over disjoint row ranges and joins.

    With one worker the bands run inline on the calling thread. Row-band
    functions are expected to release the GIL (the compiled kernels do).
    """

    def __init__(self, workers: int = 0):
        self.workers = resolve_workers(workers)
        self._executor = (
            ThreadPoolExecutor(self.workers, thread_name_prefix="rows")
            if self.workers > 1
            else None
        )

    def run(self, band_fn: Callable[[int, int], Any], height: int) -> None:
        bands = row_bands(height, self.workers)
        if self._executor is None or len(bands) == 1:
            for r0, r1 in bands:
                band_fn(r0, r1)
            return
        futures = [self._executor.submit(band_fn, r0, r1) for r0, r1 in bands]
        for f in futures:
            f.result()

    def close(self) -> None:
        if self._executor is not None:
            self._executor.shutdown()
            self._executor = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def pixelwise(fn: Callable[..., Any], roles: Iterable[str], out_role: str):
    """Lift a scalar per-pixel function into a row-band kernel.

    ``fn`` receives the values of ``roles`` at one pixel and returns the new
    value for ``out_role`` at that pixel. Meant for small experiments and
    tests; production kernels are compiled.
    """
    roles = tuple(roles)

    def kernel(planes: PlaneSet, r0: int, r1: int) -> None:
        srcs = [planes[r] for r in roles]
        dst = planes[out_role]
        for y in range(r0, r1):
            for x in range(planes.width):
                dst[y, x] = fn(*(s[y, x] for s in srcs))

    return kernel


def par_for_pixels(kernel, planes: PlaneSet, workers: int = 0) -> PlaneSet:
    """Apply ``kernel(planes, r0, r1)`` over disjoint row bands of a copy of ``planes``.

    Contract: the kernel reads and writes only the slots of pixels inside its
    band. Under that contract the result is bitwise identical to one
    sequential row-major pass, whatever the worker count.
    """
    result = planes.copy()
    with WorkerPool(workers) as pool:
        pool.run(lambda r0, r1: kernel(result, r0, r1), planes.height)
    return result


@dataclass
class PipelineStats:
    frames_processed: int = 0
    wall_time: float = 0.0
    ingest_busy: float = 0.0
    process_busy: float = 0.0
    emit_busy: float = 0.0
    max_in_flight: int = 0
    pipelined: bool = False

    @property
    def fps(self) -> float:
        return self.frames_processed / self.wall_time if self.wall_time > 0 else 0.0

    def to_dict(self) -> dict:
        return {
            "frames_processed": self.frames_processed,
            "wall_time": self.wall_time,
            "fps": self.fps,
            "ingest_busy": self.ingest_busy,
            "process_busy": self.process_busy,
            "emit_busy": self.emit_busy,
            "max_in_flight": self.max_in_flight,
            "pipelined": self.pipelined,
        }


class PipelineError(RuntimeError):
    def __init__(self, frame_index: Optional[int], cause: BaseException):
        self.frame_index = frame_index
        self.cause = cause
        where = f"frame {frame_index}" if frame_index is not None else "pipeline"
        super().__init__(f"{where}: {cause}")


_END = object()


def _index_of(item: Any, fallback: int) -> int:
    return getattr(item, "index", fallback)


def run_pipeline(
    source: Iterable,
    process: Callable[[Any], Any],
    sink: Callable[[Any, Any], None],
    pipelined: bool = True,
) -> PipelineStats:
    """Drive ``source -> process -> sink`` one frame at a time.

    Pipelined mode runs ingest (pulling the next item, which is where frame
    decoding happens), processing, and emission on three threads with
    capacity-1 handoffs, and admits at most three frames at once: while
    frame i is processed, frame i+1 is being decoded and frame i-1 emitted.
    ``process`` sees frames strictly in source order, one at a time, so
    stateful processors give the same results as in sequential mode.

    ``sink(item, result)`` is called in source order. If the source fails,
    frames already admitted are drained through process and sink before a
    :class:`PipelineError` naming the failing frame index is raised.
    """
    stats = PipelineStats(pipelined=pipelined)
    t0 = time.perf_counter()
    if pipelined:
        _run_threaded(source, process, sink, stats)
    else:
        _run_sequential(source, process, sink, stats)
    stats.wall_time = time.perf_counter() - t0
    return stats


def _run_sequential(source, process, sink, stats):
    it = iter(source)
    position = 0
    while True:
        t = time.perf_counter()
        try:
            item = next(it)
        except StopIteration:
            break
        except Exception as exc:
            raise PipelineError(getattr(exc, "frame_index", position), exc) from exc
        stats.ingest_busy += time.perf_counter() - t
        stats.max_in_flight = 1

        t = time.perf_counter()
        try:
            result = process(item)
        except Exception as exc:
            raise PipelineError(_index_of(item, position), exc) from exc
        stats.process_busy += time.perf_counter() - t

        t = time.perf_counter()
        sink(item, result)
        stats.emit_busy += time.perf_counter() - t
        stats.frames_processed += 1
        position += 1


def _run_threaded(source, process, sink, stats):
    slots = threading.Semaphore(PIPELINE_DEPTH)
    to_process: queue.Queue = queue.Queue(maxsize=1)
    to_emit: queue.Queue = queue.Queue(maxsize=1)
    stop = threading.Event()
    errors: list[PipelineError] = []
    lock = threading.Lock()
    in_flight = 0

    def admit(delta):
        nonlocal in_flight
        with lock:
            in_flight += delta
            stats.max_in_flight = max(stats.max_in_flight, in_flight)

    def put(q, obj):
        # abandon the handoff if a downstream stage died
        while not stop.is_set():
            try:
                q.put(obj, timeout=0.05)
                return True
            except queue.Full:
                continue
        return False

    def get(q):
        while True:
            try:
                return q.get(timeout=0.05)
            except queue.Empty:
                if stop.is_set():
                    return _END

    def ingest():
        it = iter(source)
        position = 0
        try:
            while not stop.is_set():
                while not slots.acquire(timeout=0.05):
                    if stop.is_set():
                        return
                t = time.perf_counter()
                try:
                    item = next(it)
                except StopIteration:
                    slots.release()
                    break
                except Exception as exc:
                    slots.release()
                    errors.append(PipelineError(getattr(exc, "frame_index", position), exc))
                    break
                stats.ingest_busy += time.perf_counter() - t
                admit(+1)
                if not put(to_process, item):
                    return
                position += 1
        finally:
            put(to_process, _END)

    def work():
        position = 0
        try:
            while True:
                item = get(to_process)
                if item is _END:
                    break
                t = time.perf_counter()
                try:
                    result = process(item)
                except Exception as exc:
                    errors.append(PipelineError(_index_of(item, position), exc))
                    stop.set()
                    return
                stats.process_busy += time.perf_counter() - t
                if not put(to_emit, (item, result)):
                    return
                position += 1
        finally:
            put(to_emit, _END)

    def emit():
        while True:
            entry = get(to_emit)
            if entry is _END:
                break
            item, result = entry
            t = time.perf_counter()
            try:
                sink(item, result)
            except Exception as exc:
                errors.append(PipelineError(_index_of(item, stats.frames_processed), exc))
                stop.set()
                return
            stats.emit_busy += time.perf_counter() - t
            stats.frames_processed += 1
            admit(-1)
            slots.release()

    threads = [
        threading.Thread(target=fn, name=f"pipeline-{name}", daemon=True)
        for name, fn in (("ingest", ingest), ("process", work), ("emit", emit))
    ]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    if errors:
        err = errors[0]
        raise err from err.cause
