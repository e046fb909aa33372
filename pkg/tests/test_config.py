import json

import pytest

from rgbd_gmm.config import ConfigError, MixtureConfig, RunConfig


def test_defaults():
    cfg = RunConfig()
    assert cfg.color == MixtureConfig()
    assert cfg.depth.initial_sigma == 100.0
    assert (cfg.color.components, cfg.color.learning_rate, cfg.color.match_lambda) == (3, 0.05, 2.5)
    assert (cfg.color.background_threshold, cfg.color.initial_weight, cfg.color.variance_floor) == (0.8, 0.05, 4.0)
    assert cfg.fusion.counter_limit == 3 and cfg.fusion.initial_label == 0
    assert cfg.engine.workers == 0 and cfg.engine.pipeline and cfg.engine.pipeline_depth == 3
    assert cfg.registration.dilation_radius == 1
    assert cfg.evaluation.warmup_frames == 30


def test_json_round_trip():
    cfg = RunConfig()
    assert RunConfig.from_dict(json.loads(cfg.to_json())) == cfg


def test_partial_file_keeps_defaults(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"color": {"learning_rate": 0.01}, "engine": {"workers": 2}}))
    cfg = RunConfig.load(path)
    assert cfg.color.learning_rate == 0.01 and cfg.color.components == 3
    assert cfg.engine.workers == 2 and cfg.depth == RunConfig().depth


@pytest.mark.parametrize(
    "data",
    [
        {"colour": {}},
        {"color": {"lr": 0.1}},
        {"color": {"components": 9}},
        {"engine": {"pipeline_depth": 4}},
        {"fusion": {"initial_label": 3}},
        {"augmented": {"depth_min_mm": 10, "depth_max_mm": 5}},
    ],
)
def test_bad_config_rejected(data):
    with pytest.raises(ConfigError):
        RunConfig.from_dict(data)
