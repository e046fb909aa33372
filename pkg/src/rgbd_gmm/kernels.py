"""Compiled row-band kernels over SoA planes.

Each kernel processes rows ``[r0, r1)`` and touches only the slots of the
pixels in that band, so bands can be handed to independent workers. All
kernels release the GIL. Arithmetic mirrors :mod:`rgbd_gmm.mixture`
operation for operation (no fastmath), which is what makes the SoA path
bitwise comparable with the scalar reference.

Mixture banks are laid out as ``means[M * D, H, W]``, ``variances[M, H, W]``,
``weights[M, H, W]`` and ``initialized[H, W]``.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .config import MixtureConfig

# indices into the packed parameter vector
P_ALPHA, P_LAMBDA, P_THRESH, P_VAR_INIT, P_W_NEW, P_FLOOR = range(6)


def pack_params(config: MixtureConfig) -> np.ndarray:
    return np.array(
        [
            config.learning_rate,
            config.match_lambda,
            config.background_threshold,
            config.initial_sigma * config.initial_sigma,
            config.initial_weight,
            config.variance_floor,
        ],
        dtype=np.float64,
    )


MODE_COLOR, MODE_DEPTH, MODE_AUGMENTED = 0, 1, 2


@njit(nogil=True, cache=True)
def rescale_depth(depth_mm, dmin, dmax):
    s = (depth_mm - dmin) / (dmax - dmin) * 255.0
    if s < 0.0:
        return 0.0
    if s > 255.0:
        return 255.0
    return s


@njit(nogil=True, cache=True)
def mixture_band(
    mode, planes, raw, scale, dmin, dmax,
    means, variances, weights, initialized, out, params, r0, r1,
):
    """Run one match -> classify -> update step on every pixel of rows [r0, r1).

    ``planes`` is uint8[3, H, W] (R, G, B) and ``raw`` uint16[H, W] depth in
    sensor units; a mode that does not need one of them may pass a dummy.
    ``means`` is float64[M * D, H, W], component-major. In depth mode a raw 0
    is the no-return sentinel: labelled background, model untouched.

    The per-pixel body is written out flat on purpose: calling a helper with
    array arguments per pixel costs more than the arithmetic itself.
    """
    m = weights.shape[0]
    dim = means.shape[0] // m
    width = out.shape[1]
    alpha = params[P_ALPHA]
    keep = 1.0 - alpha
    lam = params[P_LAMBDA]
    thresh = params[P_THRESH]
    var_init = params[P_VAR_INIT]
    w_new = params[P_W_NEW]
    floor = params[P_FLOOR]

    obs = np.empty((dim, width))
    valid = np.ones(width, dtype=np.bool_)
    keys = np.empty(m)
    sig = np.empty(m)
    order = np.empty(m, dtype=np.int64)

    for y in range(r0, r1):
        if mode == MODE_DEPTH:
            for x in range(width):
                r = raw[y, x]
                valid[x] = r != 0
                obs[0, x] = float(r) * scale
        else:
            for c in range(3):
                for x in range(width):
                    obs[c, x] = float(planes[c, y, x])
            if mode == MODE_AUGMENTED:
                for x in range(width):
                    obs[3, x] = rescale_depth(float(raw[y, x]) * scale, dmin, dmax)

        for x in range(width):
            if not valid[x]:
                out[y, x] = 0
                continue

            if initialized[y, x] == 0:
                for i in range(m):
                    for c in range(dim):
                        means[i * dim + c, y, x] = obs[c, x] if i == 0 else 0.0
                    variances[i, y, x] = var_init
                    weights[i, y, x] = 1.0 if i == 0 else 0.0
                initialized[y, x] = 1
                out[y, x] = 0
                continue

            # rank by w / sigma, stable insertion sort
            for i in range(m):
                sig[i] = math.sqrt(variances[i, y, x])
                keys[i] = weights[i, y, x] / sig[i]
            for i in range(m):
                j = i
                while j > 0 and keys[i] > keys[order[j - 1]]:
                    order[j] = order[j - 1]
                    j -= 1
                order[j] = i

            matched = -1
            for k in range(m):
                i = order[k]
                dist = 0.0
                for c in range(dim):
                    d = abs(obs[c, x] - means[i * dim + c, y, x])
                    if d > dist:
                        dist = d
                if dist < lam * sig[i]:
                    matched = i
                    break

            label = 1
            if matched >= 0:
                cum = 0.0
                for k in range(m):
                    i = order[k]
                    cum += weights[i, y, x]
                    if i == matched:
                        label = 0
                        break
                    if cum > thresh:
                        break
            out[y, x] = label

            if matched < 0:
                weakest = order[m - 1]
                for c in range(dim):
                    means[weakest * dim + c, y, x] = obs[c, x]
                variances[weakest, y, x] = var_init
                weights[weakest, y, x] = w_new
            else:
                for i in range(m):
                    weights[i, y, x] = keep * weights[i, y, x]
                weights[matched, y, x] += alpha
            total = 0.0
            for i in range(m):
                total += weights[i, y, x]
            if total != 1.0:  # w / 1.0 == w exactly
                for i in range(m):
                    weights[i, y, x] = weights[i, y, x] / total

            if matched >= 0:
                rho = alpha / max(weights[matched, y, x], alpha)
                base = matched * dim
                d2 = 0.0
                for c in range(dim):
                    mu = (1.0 - rho) * means[base + c, y, x] + rho * obs[c, x]
                    means[base + c, y, x] = mu
                    diff = obs[c, x] - mu
                    d2 += diff * diff
                var = (1.0 - rho) * variances[matched, y, x] + rho * d2 / dim
                variances[matched, y, x] = max(var, floor)


@njit(nogil=True, cache=True)
def fuse_band(rgb, depth, out, cpt, limit, r0, r1):
    """Counter-based fusion of two binary masks, branch order kept literal."""
    width = rgb.shape[1]
    for y in range(r0, r1):
        for x in range(width):
            r = rgb[y, x]
            d = depth[y, x]
            if r == d:
                out[y, x] = d
                cpt[y, x] = 0
            elif cpt[y, x] == limit:
                out[y, x] = r
                cpt[y, x] = 0
            elif cpt[y, x] == -limit:
                out[y, x] = d
                cpt[y, x] = 0
            elif out[y, x] == r:
                cpt[y, x] += 1
            else:
                cpt[y, x] -= 1


@njit(nogil=True, cache=True)
def splat_registered(mask, raw, scale, kd, kc, rot, trans, out):
    """Forward-project foreground depth pixels into the color grid (nearest pixel)."""
    h, w = mask.shape
    oh, ow = out.shape
    fx, fy, cx, cy = kd[0], kd[1], kd[2], kd[3]
    gx, gy, gcx, gcy = kc[0], kc[1], kc[2], kc[3]
    for v in range(h):
        for u in range(w):
            if mask[v, u] == 0 or raw[v, u] == 0:
                continue
            z = float(raw[v, u]) * scale
            px = (u - cx) * z / fx
            py = (v - cy) * z / fy
            qx = rot[0, 0] * px + rot[0, 1] * py + rot[0, 2] * z + trans[0]
            qy = rot[1, 0] * px + rot[1, 1] * py + rot[1, 2] * z + trans[1]
            qz = rot[2, 0] * px + rot[2, 1] * py + rot[2, 2] * z + trans[2]
            if qz <= 0.0:
                continue
            uc = int(math.floor(gx * qx / qz + gcx + 0.5))
            vc = int(math.floor(gy * qy / qz + gcy + 0.5))
            if 0 <= uc < ow and 0 <= vc < oh:
                out[vc, uc] = 1
