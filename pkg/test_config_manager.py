"""Tests for run configuration."""
import math

import pytest

from config_manager import ConfigManager
from errors import ConfigError


def write_config(tmp_path, text):
    path = tmp_path / "run.toml"
    path.write_text(text)
    return str(path)


def test_defaults():
    cm = ConfigManager()
    assert cm.get("family") == "green"
    assert cm.get("p") == 2.0
    assert cm.get("degrees") == [8, 16, 32, 64]
    assert cm.get("sequence_degrees") == [8, 16, 32, 64, 128, 256]
    assert cm.get("exactness") == "relaxed"
    with pytest.raises(ConfigError):
        cm.get("nope")


def test_missing_file():
    with pytest.raises(ConfigError) as info:
        ConfigManager("does/not/exist.toml")
    assert info.value.message == "config not found"
    assert info.value.exit_code == 2


def test_load_toml_with_kernel_table(tmp_path):
    path = write_config(tmp_path, 'dim_n = 1\np = "inf"\ntau = "inf"\n'
                                  '[kernel]\nfamily = "gaussian"\nsigma = 2.0\n')
    cm = ConfigManager(path)
    assert cm.get("dim_n") == 1
    assert math.isinf(cm.get("p"))
    assert math.isinf(cm.get("tau"))
    assert cm.get("family") == "gaussian"
    assert cm.kernel_params() == {"sigma": 2.0}


def test_invalid_toml(tmp_path):
    with pytest.raises(ConfigError):
        ConfigManager(write_config(tmp_path, "dim_n = = 1\n"))


@pytest.mark.parametrize("key,value", [
    ("dim_n", 0),
    ("count", True),
    ("p", 0.5),
    ("gamma", -1.0),
    ("mask_k", 2),
    ("synthetic", [1.0]),
    ("degrees", []),
    ("sequence_degrees", [0, 8]),
    ("exactness", "loose"),
    ("subcommand", "nope"),
    ("unknown_key", 1),
])
def test_rejects_bad_values(key, value):
    with pytest.raises(ConfigError):
        ConfigManager().set(key, value)


def test_update_skips_none_and_normalizes_names():
    cm = ConfigManager()
    cm.update({"seed": 7, "beta": None, "grid-factor": 8})
    assert cm.get("seed") == 7
    assert cm.get("beta") is None
    assert cm.get("grid_factor") == 8.0


def test_green_order_defaults_to_beta():
    cm = ConfigManager()
    cm.update({"beta": 2.5, "l_max": 40})
    assert cm.kernel_params() == {"beta": 2.5, "l_max": 40}
    cm.set_kernel_param("beta", 3.0)
    assert cm.kernel_params()["beta"] == 3.0
    with pytest.raises(ConfigError):
        cm.set_kernel_param("continuation", "sideways")


def test_resolved_round_trips():
    cm = ConfigManager()
    cm.update({"family": "tps", "kernel_params": {"s": 0.5}, "seed": 3})
    again = ConfigManager()
    again.update(cm.resolved())
    assert again.resolved() == cm.resolved()
    assert "seed: 3" in cm.format_config()
