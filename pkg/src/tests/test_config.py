import pytest
from pydantic import ValidationError

from precedence_scheduler.config import Settings, get_settings


def test_defaults(monkeypatch):
    for name in Settings.model_fields:
        monkeypatch.delenv(f"PRECSCHED_{name.upper()}", raising=False)
    settings = Settings.from_env()
    assert settings.workers == 1
    assert settings.brute_force_limit == 12
    assert settings.parallel_brute_force_limit == 8
    assert settings.noise_resolution == 10**6
    assert settings.log_level == "WARNING"
    assert settings.api_url == "http://localhost:8000"


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("PRECSCHED_WORKERS", "3")
    monkeypatch.setenv("PRECSCHED_LOG_LEVEL", "DEBUG")
    settings = Settings.from_env()
    assert settings.workers == 3
    assert settings.log_level == "DEBUG"


def test_invalid_environment_value(monkeypatch):
    monkeypatch.setenv("PRECSCHED_WORKERS", "0")
    with pytest.raises(ValidationError):
        Settings.from_env()


def test_get_settings_is_cached():
    get_settings.cache_clear()
    assert get_settings() is get_settings()
