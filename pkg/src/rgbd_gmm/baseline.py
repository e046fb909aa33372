"""Sequential array-of-structures baseline.

The conventional CPU formulation: each pixel's mixture is one interleaved
record ``[mu_0 .. mu_{D-1}, var, w]`` per component, stored as
``state[H, W, M, D + 2]``, and frames arrive interleaved (``H x W x C``).
Frames are processed with whole-frame NumPy operations on a single thread.

It performs the same float64 operations in the same order as the SoA
kernels, so its masks and final parameters are bitwise identical; only the
layout and execution strategy differ.
"""

from __future__ import annotations

import numpy as np

from .config import AugmentedConfig, MixtureConfig, RunConfig
from .dataset import FrameSet
from .registration import CameraRig, register_mask
from .segmenter import Mode


class AoSMixtureModel:
    def __init__(self, width, height, mode: Mode, config: MixtureConfig, depth_range=(0.0, 4000.0)):
        self.mode = mode
        self.config = config
        self.depth_range = depth_range
        m, d = config.components, mode.dim
        self.state = np.zeros((height, width, m, d + 2))
        self.initialized = np.zeros((height, width), dtype=bool)

    # field views into the interleaved records
    @property
    def means(self):
        return self.state[..., : self.mode.dim]

    @property
    def variances(self):
        return self.state[..., self.mode.dim]

    @property
    def weights(self):
        return self.state[..., self.mode.dim + 1]

    def observe(self, frame: FrameSet) -> tuple[np.ndarray, np.ndarray]:
        """Interleaved observation vectors ``[H, W, D]`` and the valid-pixel map."""
        rgb = frame.color_interleaved.astype(np.float64)
        if self.mode is Mode.COLOR3:
            return rgb, np.ones(frame.shape, dtype=bool)
        depth_mm = frame.depth_raw.astype(np.float64) * float(frame.depth_scale)
        if self.mode is Mode.DEPTH1:
            return depth_mm[..., None], frame.depth_raw != 0
        dmin, dmax = (float(v) for v in self.depth_range)
        scaled = np.clip((depth_mm - dmin) / (dmax - dmin) * 255.0, 0.0, 255.0)
        return np.concatenate([rgb, scaled[..., None]], axis=-1), np.ones(frame.shape, dtype=bool)

    def step(self, obs: np.ndarray, valid: np.ndarray) -> np.ndarray:
        cfg = self.config
        m, d = cfg.components, self.mode.dim
        alpha = cfg.learning_rate
        var_init = cfg.initial_sigma * cfg.initial_sigma
        labels = np.zeros(valid.shape, dtype=np.uint8)

        fresh = valid & ~self.initialized
        if fresh.any():
            rec = np.zeros((m, d + 2))
            rec[:, d] = var_init
            rec[0, d + 1] = 1.0
            block = np.broadcast_to(rec, (int(fresh.sum()), m, d + 2)).copy()
            block[:, 0, :d] = obs[fresh]
            self.state[fresh] = block
            self.initialized |= fresh

        live = valid & ~fresh
        if not live.any():
            return labels
        rec = self.state[live]  # [N, M, D+2] copy
        x = obs[live]  # [N, D]
        mu, var, w = rec[:, :, :d], rec[:, :, d], rec[:, :, d + 1]
        n = len(x)
        rows = np.arange(n)

        sig = np.sqrt(var)
        keys = w / sig
        order = np.argsort(-keys, axis=1, kind="stable")

        matched = np.full(n, -1)
        for k in range(m):
            comp = order[:, k]
            dist = np.abs(x - mu[rows, comp]).max(axis=1)
            hit = (matched < 0) & (dist < cfg.match_lambda * sig[rows, comp])
            matched[hit] = comp[hit]

        has = matched >= 0
        bg = np.zeros(n, dtype=bool)
        done = ~has
        cum = np.zeros(n)
        for k in range(m):
            comp = order[:, k]
            cum = cum + w[rows, comp]
            at = ~done & (comp == matched)
            bg |= at
            done |= at | (cum > cfg.background_threshold)
        labels_live = np.where(bg, 0, 1).astype(np.uint8)

        miss = ~has
        weakest = order[miss, m - 1]
        mi = rows[miss]
        mu[mi, weakest] = x[miss]
        var[mi, weakest] = var_init
        w[mi, weakest] = cfg.initial_weight

        hi = rows[has]
        mc = matched[has]
        w[hi] = (1.0 - alpha) * w[hi]
        w[hi, mc] += alpha

        total = np.zeros(n)
        for i in range(m):
            total = total + w[:, i]
        w /= total[:, None]

        rho = alpha / np.maximum(w[hi, mc], alpha)
        mu_new = (1.0 - rho)[:, None] * mu[hi, mc] + rho[:, None] * x[has]
        mu[hi, mc] = mu_new
        d2 = np.zeros(len(hi))
        for c in range(d):
            diff = x[has, c] - mu_new[:, c]
            d2 = d2 + diff * diff
        v = (1.0 - rho) * var[hi, mc] + rho * d2 / d
        var[hi, mc] = np.maximum(v, cfg.variance_floor)

        self.state[live] = rec
        labels[live] = labels_live
        return labels


def fuse_numpy(out: np.ndarray, cpt: np.ndarray, rgb: np.ndarray, depth: np.ndarray, limit: int):
    """Whole-frame counter fusion; updates ``out``/``cpt`` in place."""
    agree = rgb == depth
    hi = ~agree & (cpt == limit)
    lo = ~agree & (cpt == -limit)
    rest = ~agree & ~hi & ~lo
    up = rest & (out == rgb)
    down = rest & (out != rgb)
    out[agree] = depth[agree]
    out[hi] = rgb[hi]
    out[lo] = depth[lo]
    cpt[agree | hi | lo] = 0
    cpt[up] += 1
    cpt[down] -= 1
    return out


class AoSSegmenter:
    """Baseline counterpart of :class:`rgbd_gmm.workflow.RGBDSegmenter`."""

    def __init__(self, width, height, config: RunConfig | None = None, methods=("fused",),
                 rig: CameraRig | None = None, registered: bool = True):
        from .workflow import normalize_methods

        self.config = config or RunConfig()
        self.methods = normalize_methods(methods)
        self.rig = None if registered else rig
        wants = set(self.methods)
        self.color = (
            AoSMixtureModel(width, height, Mode.COLOR3, self.config.color)
            if wants & {"rgb", "fused"} else None
        )
        self.depth = (
            AoSMixtureModel(width, height, Mode.DEPTH1, self.config.depth)
            if wants & {"depth", "fused"} else None
        )
        aug: AugmentedConfig = self.config.augmented
        self.augmented = (
            AoSMixtureModel(width, height, Mode.AUGMENTED4, aug.mixture,
                            (aug.depth_min_mm, aug.depth_max_mm))
            if "augmented" in wants else None
        )
        self.fused_out = np.full((height, width), self.config.fusion.initial_label, dtype=np.uint8)
        self.cpt = np.zeros((height, width), dtype=np.int8)

    def process(self, frame: FrameSet) -> dict:
        masks = {}
        if self.color is not None:
            masks["rgb"] = self.color.step(*self.color.observe(frame))
        if self.depth is not None:
            depth = self.depth.step(*self.depth.observe(frame))
            if self.rig is not None:
                depth = register_mask(depth, frame.depth_raw, self.rig,
                                      self.config.registration.dilation_radius,
                                      color_shape=depth.shape)
            masks["depth"] = depth
        if "fused" in self.methods:
            fuse_numpy(self.fused_out, self.cpt, masks["rgb"], masks["depth"],
                       self.config.fusion.counter_limit)
            masks["fused"] = self.fused_out.copy()
        if self.augmented is not None:
            masks["augmented"] = self.augmented.step(*self.augmented.observe(frame))
        return {m: masks[m] for m in self.methods}
