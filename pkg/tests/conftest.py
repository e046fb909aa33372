import os
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], max_examples=100
)
settings.register_profile("ci", parent=settings.get_profile("default"), max_examples=300)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# acceptance lines collected by tests/test_acceptance.py, echoed at the end of the run
ACCEPTANCE_LINES: dict[str, str] = {}


def pytest_terminal_summary(terminalreporter):
    keys = [k for k in ACCEPTANCE_LINES if not k.startswith("_")]
    if not keys:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(keys, key=lambda k: int(k[1:])):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture(scope="session")
def scenario_dirs(tmp_path_factory):
    """Built-in scenarios A and B rendered to disk once per session (lazily)."""
    from rgbd_gmm.scenarios import builtin_scenario
    from rgbd_gmm.synthetic import generate_synthetic

    root = tmp_path_factory.mktemp("scenarios")
    made = {}

    def get(name):
        if name not in made:
            generate_synthetic(builtin_scenario(name), root / name)
            made[name] = root / name
        return made[name]

    return get


@pytest.fixture
def tiny_spec():
    """A small, fast scene: one object crossing a 64x48 frame over 12 frames."""
    from rgbd_gmm.synthetic import BackgroundSpec, EventSpec, ObjectSpec, ScenarioSpec

    return ScenarioSpec(
        name="tiny",
        width=64,
        height=48,
        frame_count=12,
        seed=3,
        background=BackgroundSpec(props=2),
        objects=[ObjectSpec(size=(10, 8), waypoints=[(2, 10), (50, 30)], speed=4.0,
                            depth_offset_mm=300.0, colors=((220, 40, 40), (40, 220, 40)))],
        events=[EventSpec("illumination", 6, 9, gain=1.4)],
        color_noise=1.0,
        depth_noise_mm=1.0,
    )
