"""Per-pixel adaptive Gaussian mixture (scalar reference path).

Everything here works on one pixel at a time with plain Python floats. The
frame-level kernels in :mod:`rgbd_gmm.kernels` perform the same float64
operations in the same order, so a pixel's mixture reconstructed from the
SoA banks is bitwise equal to the one produced here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Optional, Sequence

from .config import MixtureConfig


class PixelLabel(IntEnum):
    BACKGROUND = 0
    FOREGROUND = 1


@dataclass(frozen=True)
class PixelMixture:
    means: tuple[tuple[float, ...], ...]  # M x D
    variances: tuple[float, ...]  # M, shared across channels
    weights: tuple[float, ...]  # M

    @property
    def components(self) -> int:
        return len(self.weights)

    @property
    def dim(self) -> int:
        return len(self.means[0])


def _as_vector(value) -> tuple[float, ...]:
    if isinstance(value, (int, float)):
        return (float(value),)
    return tuple(float(v) for v in value)


def init_mixture(first_value, config: MixtureConfig) -> PixelMixture:
    """Seed component 0 on the first observation; the others start empty."""
    v = _as_vector(first_value)
    if not v:
        raise ValueError("observation must have at least one channel")
    zero = tuple(0.0 for _ in v)
    var0 = config.initial_sigma * config.initial_sigma
    m = config.components
    return PixelMixture(
        means=(v,) + (zero,) * (m - 1),
        variances=(var0,) * m,
        weights=(1.0,) + (0.0,) * (m - 1),
    )


def rank_components(mixture: PixelMixture) -> list[int]:
    """Component indices by decreasing w/sigma; ties keep index order."""
    keys = [w / math.sqrt(var) for w, var in zip(mixture.weights, mixture.variances)]
    order: list[int] = []
    # insertion sort, strict comparison keeps it stable (mirrors the kernel)
    for i in range(len(keys)):
        j = len(order)
        order.append(i)
        while j > 0 and keys[i] > keys[order[j - 1]]:
            order[j] = order[j - 1]
            j -= 1
        order[j] = i
    return order


def match_component(mixture: PixelMixture, value, config: MixtureConfig) -> Optional[int]:
    v = _as_vector(value)
    if len(v) != mixture.dim:
        raise ValueError(f"observation has {len(v)} channels, mixture expects {mixture.dim}")
    for i in rank_components(mixture):
        mu = mixture.means[i]
        dist = 0.0
        for c in range(len(v)):
            d = abs(v[c] - mu[c])
            if d > dist:
                dist = d
        if dist < config.match_lambda * math.sqrt(mixture.variances[i]):
            return i
    return None


def _normalized(weights: Sequence[float]) -> list[float]:
    total = 0.0
    for w in weights:
        total += w
    return [w / total for w in weights]


def update_mixture(
    mixture: PixelMixture, value, matched: Optional[int], config: MixtureConfig
) -> PixelMixture:
    v = _as_vector(value)
    means = [list(mu) for mu in mixture.means]
    variances = list(mixture.variances)

    if matched is None:
        weakest = rank_components(mixture)[-1]
        means[weakest] = list(v)
        variances[weakest] = config.initial_sigma * config.initial_sigma
        weights = list(mixture.weights)
        weights[weakest] = config.initial_weight
        weights = _normalized(weights)
    else:
        alpha = config.learning_rate
        keep = 1.0 - alpha
        weights = [keep * w for w in mixture.weights]
        weights[matched] += alpha
        weights = _normalized(weights)

        rho = alpha / max(weights[matched], alpha)
        mu = means[matched]
        for c in range(len(v)):
            mu[c] = (1.0 - rho) * mu[c] + rho * v[c]
        d2 = 0.0
        for c in range(len(v)):
            diff = v[c] - mu[c]
            d2 += diff * diff
        var = (1.0 - rho) * variances[matched] + rho * d2 / len(v)
        variances[matched] = max(var, config.variance_floor)

    return PixelMixture(
        means=tuple(tuple(mu) for mu in means),
        variances=tuple(variances),
        weights=tuple(weights),
    )


def classify(
    mixture: PixelMixture, matched: Optional[int], config: MixtureConfig
) -> PixelLabel:
    """Background iff the match lies in the shortest w/sigma-ranked prefix
    whose cumulative weight exceeds the background threshold."""
    if matched is None:
        return PixelLabel.FOREGROUND
    order = rank_components(mixture)
    cum = 0.0
    for i in order:
        cum += mixture.weights[i]
        if i == matched:
            return PixelLabel.BACKGROUND
        if cum > config.background_threshold:
            break
    return PixelLabel.FOREGROUND


def step_pixel(
    mixture: PixelMixture, value, config: MixtureConfig
) -> tuple[PixelLabel, PixelMixture]:
    matched = match_component(mixture, value, config)
    label = classify(mixture, matched, config)
    return label, update_mixture(mixture, value, matched, config)
