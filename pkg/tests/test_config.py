from pathlib import Path

import pytest

from agroweather.config import RunConfig, load_config, parse_config
from agroweather.errors import ConfigError


def test_defaults():
    cfg = RunConfig()
    assert cfg.window_spec().total_width == 366
    assert cfg.train_config().patience == 10
    assert cfg.model_config(4, 4).td_units == (16,)


def test_parse_values_and_paths(tmp_path):
    cfg = parse_config(
        "# run\nstations = Dhaka, Mymensingh\ntd_units =\nshuffle = yes\n"
        "learning_rate = 0.01  # faster\nwork_dir = out\n", tmp_path)
    assert cfg.stations == ("Dhaka", "Mymensingh")
    assert cfg.td_units == () and cfg.shuffle is True and cfg.learning_rate == 0.01
    assert cfg.work_dir == tmp_path / "out" and cfg.model_dir == tmp_path / "models"
    assert parse_config("stations = all").stations == ()


@pytest.mark.parametrize("text", [
    "colour = red",
    "epochs = 5\nepochs = 6",
    "epochs = many",
    "just a line",
    "mode = both",
    "impute = cubic",
    "patience = 20\nepochs = 10",
    "label_width = 400",
    "shuffle = maybe",
    "features =",
])
def test_rejected(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.cfg")
    (tmp_path / "a.cfg").write_text("seed = 3\n")
    assert load_config(tmp_path / "a.cfg").seed == 3
    assert ConfigError.exit_code == 80
