"""Built-in scenarios (versioned constants).

``A``: an ordinary desk scene with two sudden color-only illumination
changes, two passing cast shadows and a gently waving background patch.

``B``: the same scene under lighting that keeps changing for the whole
capture, plus strong, unstructured background flicker on both streams.
"""

from __future__ import annotations

from dataclasses import replace

from .synthetic import EventSpec, ObjectSpec, ScenarioSpec

SCENARIO_VERSION = 1

_W, _H = 640, 480


def _objects() -> list[ObjectSpec]:
    return [
        ObjectSpec(
            size=(40, 48),
            waypoints=[(40, 30), (560, 30), (560, 190), (40, 190)],
            speed=14.0,
            depth_offset_mm=450.0,
            colors=((200, 45, 40), (235, 165, 45)),
        ),
        ObjectSpec(
            size=(44, 40),
            waypoints=[(560, 410), (60, 410), (60, 280), (560, 280)],
            speed=13.0,
            depth_offset_mm=380.0,
            colors=((40, 70, 200), (60, 190, 210)),
            phase=300.0,
        ),
    ]


def _fit(events: list[EventSpec], frame_count: int) -> list[EventSpec]:
    """Clip events to a shortened capture; events that start after it are dropped."""
    kept = []
    for ev in events:
        if ev.start >= frame_count:
            continue
        kept.append(replace(ev, end=min(ev.end, frame_count)))
    return kept


def scenario_a(seed: int = 7, frame_count: int = 300) -> ScenarioSpec:
    events = [
        EventSpec("illumination", 90, 140, gain=1.5),
        EventSpec("illumination", 200, 250, gain=0.65),
        EventSpec("shadow", 45, 70, region=(120, 60, 220, 150), darkening=0.6),
        EventSpec("shadow", 160, 185, region=(250, 250, 180, 120), darkening=0.6),
        EventSpec(
            "flicker", 0, frame_count, region=(575, 250, 55, 110),
            color_amplitude=10.0, depth_amplitude_mm=12.0, bimodal=True,
        ),
    ]
    spec = ScenarioSpec(
        name="A", width=_W, height=_H, frame_count=frame_count, seed=seed,
        objects=_objects(), events=_fit(events, frame_count), color_noise=1.0, depth_noise_mm=1.0,
        depth_edge_dropout=0.25, depth_edge_band=3,
    )
    spec.validate()
    return spec


def scenario_b(seed: int = 7, frame_count: int = 300) -> ScenarioSpec:
    gains = (1.3, 0.8, 1.15, 0.7, 1.4, 0.85, 1.2, 0.75, 1.35, 0.9, 1.25, 0.8)
    period = 25
    events = [
        EventSpec("illumination", 10 + k * period, 10 + (k + 1) * period, gain=g, ramp=4)
        for k, g in enumerate(gains)
    ]
    events += [
        EventSpec(
            "flicker", 0, frame_count, region=(0, 230, 90, 140),
            color_amplitude=14.0, depth_amplitude_mm=25.0, bimodal=False,
        ),
        EventSpec(
            "flicker", 0, frame_count, region=(300, 0, 120, 40),
            color_amplitude=14.0, depth_amplitude_mm=25.0, bimodal=False,
        ),
    ]
    spec = ScenarioSpec(
        name="B", width=_W, height=_H, frame_count=frame_count, seed=seed,
        objects=_objects(), events=_fit(events, frame_count), color_noise=1.5, depth_noise_mm=1.5,
        depth_edge_dropout=0.25, depth_edge_band=3,
    )
    spec.validate()
    return spec


BUILTIN = {"A": scenario_a, "B": scenario_b}


def builtin_scenario(name: str, seed: int = 7, frame_count: int = 300) -> ScenarioSpec:
    try:
        factory = BUILTIN[name]
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; known: {', '.join(sorted(BUILTIN))}") from None
    return factory(seed=seed, frame_count=frame_count)
