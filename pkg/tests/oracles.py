"""Independent reference implementations used as test oracles.

Written straight from the rule text, without importing the package's
kernels or scalar path, so agreement is evidence rather than tautology.
"""

from __future__ import annotations

import math


def fusion_stream(rs, ds, init_out, limit=3):
    """Re-execute the counter fusion rule literally for one pixel; returns the outputs."""
    out, cpt = init_out, 0
    outs = []
    for r, d in zip(rs, ds):
        if r == d:
            out = d
            cpt = 0
        else:
            if cpt == limit:
                out = r
                cpt = 0
            elif cpt == -limit:
                out = d
                cpt = 0
            else:
                if out == r:
                    cpt = cpt + 1
                else:
                    cpt = cpt - 1
        outs.append(out)
    return outs


def textbook_step(means, variances, weights, x, *, alpha, lam, thresh, var_init, w_new, floor):
    """One Stauffer-Grimson style step on plain lists; returns (label, means, variances, weights).

    label 0 = background, 1 = foreground.
    """
    m = len(weights)
    dim = len(x)
    sig = [math.sqrt(v) for v in variances]
    ranked = sorted(range(m), key=lambda i: -(weights[i] / sig[i]))

    match = None
    for i in ranked:
        if max(abs(x[c] - means[i][c]) for c in range(dim)) < lam * sig[i]:
            match = i
            break

    label = 1
    if match is not None:
        acc = 0.0
        prefix = []
        for i in ranked:
            prefix.append(i)
            acc += weights[i]
            if acc > thresh:
                break
        label = 0 if match in prefix else 1

    means = [list(mu) for mu in means]
    variances = list(variances)
    weights = list(weights)
    if match is None:
        k = ranked[-1]
        means[k] = list(x)
        variances[k] = var_init
        weights[k] = w_new
    else:
        weights = [(1.0 - alpha) * w for w in weights]
        weights[match] += alpha
    s = 0.0
    for w in weights:
        s += w
    weights = [w / s for w in weights]
    if match is not None:
        rho = alpha / max(weights[match], alpha)
        means[match] = [(1.0 - rho) * mu + rho * v for mu, v in zip(means[match], x)]
        d2 = 0.0
        for v, mu in zip(x, means[match]):
            d2 += (v - mu) ** 2
        variances[match] = max((1.0 - rho) * variances[match] + rho * d2 / dim, floor)
    return label, means, variances, weights


def project_pixel(u, v, z_mm, kd, kc, rot, t):
    """Pinhole back-projection, rigid move, projection; returns rounded (u', v')."""
    fx, fy, cx, cy = kd
    X = (u - cx) * z_mm / fx
    Y = (v - cy) * z_mm / fy
    P = [rot[r][0] * X + rot[r][1] * Y + rot[r][2] * z_mm + t[r] for r in range(3)]
    gx, gy, gcx, gcy = kc
    return math.floor(gx * P[0] / P[2] + gcx + 0.5), math.floor(gy * P[1] / P[2] + gcy + 0.5)
