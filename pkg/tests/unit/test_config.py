import pytest

# Import Config
from app.config import FedCDHConfig, load_config_file, resolve_config

# Import Exceptions
from app import exceptions


def test_defaults():
    config = FedCDHConfig()
    assert config.H == 5
    assert config.ALPHA == 0.05
    assert config.GAMMA == 1e-3
    assert config.MAX_COND == 3


def test_flags_override_file(tmp_path):
    path = tmp_path / "fedcdh.env"
    path.write_text("FEDCDH_ALPHA=0.01\nH=7\nROSTER=b, a\n")
    config = resolve_config(str(path), alpha=0.2)
    assert config.ALPHA == 0.2
    assert config.H == 7
    assert config.ROSTER == ["b", "a"]


def test_none_flags_are_ignored():
    assert resolve_config(None, h=None).H == FedCDHConfig().H


@pytest.mark.parametrize("flags", [{"alpha": 1.5}, {"alpha": 0.0}, {"h": 0}, {"gamma": -1.0}, {"max_cond": -1}])
def test_invalid_values(flags):
    with pytest.raises(exceptions.InvalidConfiguration):
        resolve_config(None, **flags)


def test_missing_config_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_config_file(str(tmp_path / "nope.env"))
