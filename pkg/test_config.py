import pytest

from cursekit import config


@pytest.mark.parametrize("raw, expected", [("4", 4), (" 2 ", 2), ("", 1), ("zero", 1), ("0", 1), ("-3", 1), ("2.5", 1)])
def test_thread_count_from_environment(monkeypatch, raw, expected):
    monkeypatch.setenv("CURSEKIT_THREADS", raw)
    assert config.env_positive_int("CURSEKIT_THREADS", 1) == expected


def test_unset_thread_count_uses_default(monkeypatch):
    monkeypatch.delenv("CURSEKIT_THREADS", raising=False)
    assert config.env_positive_int("CURSEKIT_THREADS", 3) == 3


@pytest.mark.parametrize("raw, expected", [("debug", "DEBUG"), ("INFO", "INFO"), ("LOUD", "WARNING")])
def test_log_level_from_environment(monkeypatch, raw, expected):
    monkeypatch.setenv("CURSEKIT_LOG_LEVEL", raw)
    assert config.env_log_level("CURSEKIT_LOG_LEVEL", "WARNING") == expected
