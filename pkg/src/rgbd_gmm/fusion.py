"""Counter-based fusion of the color and (registered) depth foreground masks.

Per pixel, with ``r``/``d`` the color/depth bits, ``out`` the previous fused
label and ``cpt`` a signed counter::

    if r == d:              out = d; cpt = 0
    elif cpt == +limit:     out = r; cpt = 0
    elif cpt == -limit:     out = d; cpt = 0
    elif out == r:          cpt += 1
    else:                   cpt -= 1

The saturation test comes before the increment, so a switch fires on the
frame after the counter reaches the limit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .engine import WorkerPool


@dataclass
class FusionState:
    out: np.ndarray  # uint8[H, W]
    cpt: np.ndarray  # int8[H, W]
    counter_limit: int = 3

    @property
    def shape(self) -> tuple[int, int]:
        return self.out.shape

    def copy(self) -> "FusionState":
        return FusionState(self.out.copy(), self.cpt.copy(), self.counter_limit)


def reset_state(width: int, height: int, initial_label: int = 0, counter_limit: int = 3) -> FusionState:
    if width <= 0 or height <= 0:
        raise ValueError("fusion state dimensions must be positive")
    if initial_label not in (0, 1):
        raise ValueError("initial_label must be 0 or 1")
    if not 1 <= counter_limit <= 127:
        raise ValueError("counter_limit must be in [1, 127]")
    return FusionState(
        out=np.full((height, width), initial_label, dtype=np.uint8),
        cpt=np.zeros((height, width), dtype=np.int8),
        counter_limit=counter_limit,
    )


def fuse_step(
    state: FusionState,
    rgb_mask: np.ndarray,
    depth_mask: np.ndarray,
    pool: Optional[WorkerPool] = None,
) -> np.ndarray:
    """Advance the fusion state by one frame; returns a copy of the fused mask."""
    if rgb_mask.shape != state.shape or depth_mask.shape != state.shape:
        raise ValueError(
            f"mask shapes {rgb_mask.shape} / {depth_mask.shape} do not match state {state.shape}"
        )
    rgb = np.ascontiguousarray(rgb_mask, dtype=np.uint8)
    depth = np.ascontiguousarray(depth_mask, dtype=np.uint8)

    def band(r0, r1):
        kernels.fuse_band(rgb, depth, state.out, state.cpt, state.counter_limit, r0, r1)

    if pool is None:
        band(0, state.shape[0])
    else:
        pool.run(band, state.shape[0])
    return state.out.copy()
