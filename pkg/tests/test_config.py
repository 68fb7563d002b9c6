import pytest

from py_module.config import DEFAULT_CLOSURE_CAP, DEFAULT_MPMATH_DPS, Configuration
from py_module.exceptions import MalformedInput

_VARS = ("SATURATE_CAP", "SATURATE_ENUM_BUDGET", "SATURATE_SEED", "SATURATE_PURITY_TOL", "SATURATE_MPMATH_DPS", "SATURATE_LOG_LEVEL")


@pytest.fixture
def clean_env(monkeypatch):
    for name in _VARS:
        monkeypatch.delenv(name, raising=False)
    return monkeypatch


def test_defaults(clean_env):
    config = Configuration()
    assert config.CLOSURE_CAP == DEFAULT_CLOSURE_CAP
    assert config.MPMATH_DPS == DEFAULT_MPMATH_DPS
    assert config.LOG_LEVEL == "INFO"
    assert config.as_dict()["closure_cap"] == DEFAULT_CLOSURE_CAP


def test_environment_overrides(clean_env):
    clean_env.setenv("SATURATE_CAP", "1e5")
    clean_env.setenv("SATURATE_SEED", "42")
    clean_env.setenv("SATURATE_PURITY_TOL", "1e-6")
    clean_env.setenv("SATURATE_LOG_LEVEL", "debug")
    config = Configuration()
    assert config.CLOSURE_CAP == 100000
    assert config.RANDOM_SEED == 42
    assert config.PURITY_TOL == 1e-6
    assert config.LOG_LEVEL == "DEBUG"


@pytest.mark.parametrize("name, value", [("SATURATE_CAP", "0"), ("SATURATE_CAP", "many"), ("SATURATE_PURITY_TOL", "2"), ("SATURATE_MPMATH_DPS", "x")])
def test_invalid_values(clean_env, name, value):
    clean_env.setenv(name, value)
    with pytest.raises(MalformedInput) as exc:
        Configuration()
    assert exc.value.witness["variable"] == name
