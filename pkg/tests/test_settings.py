"""Tests for settings resolution and logging setup."""

from __future__ import annotations

import logging
import typing as t

import pytest
import simplejson

from qcpattern.exceptions import InputError
from qcpattern.settings import Settings, config_jsonschema, configure_logging

if t.TYPE_CHECKING:
    from pathlib import Path


class TestSettings:
    """Test config, environment and override precedence."""

    def test_defaults(self) -> None:
        """Test the built-in values."""
        settings = Settings.from_sources(environ={})
        assert settings == Settings()
        assert settings.log_level == "warn"
        assert settings.threads == 1
        assert settings.svg.scale == 40.0

    def test_schema_properties(self) -> None:
        """Test that every setting is described in the config schema."""
        assert set(config_jsonschema["properties"]) == {
            "log_level",
            "threads",
            "seed",
            "tol",
            "max_iter",
            "svg",
        }

    def test_environment(self) -> None:
        """Test the QCP_ variables."""
        settings = Settings.from_sources(
            environ={"QCP_LOG": "DEBUG", "QCP_THREADS": "3", "QCP_SEED": "11"}
        )
        assert (settings.log_level, settings.threads, settings.seed) == ("debug", 3, 11)

    def test_overrides_win(self) -> None:
        """Test that explicit values beat the environment and None is ignored."""
        settings = Settings.from_sources(environ={"QCP_THREADS": "3"}, threads=5, seed=None)
        assert settings.threads == 5
        assert settings.seed == 0

    def test_config_file(self, tmp_path: Path) -> None:
        """Test reading a JSON config file."""
        path = tmp_path / "qcpattern.json"
        path.write_text(simplejson.dumps({"seed": 7, "svg": {"scale": 10.0}}), encoding="utf-8")
        settings = Settings.from_sources(path, environ={"QCP_SEED": "8"})
        assert settings.seed == 8
        assert settings.svg.scale == 10.0
        assert settings.svg.show_circles

    def test_missing_config_file(self, tmp_path: Path) -> None:
        """Test that an unreadable file is an input error."""
        with pytest.raises(InputError):
            Settings.from_sources(tmp_path / "absent.json", environ={})

    @pytest.mark.parametrize(
        "config",
        [{"threads": 0}, {"log_level": "loud"}, {"tol": -1.0}],
    )
    def test_invalid_config(self, config: dict[str, t.Any]) -> None:
        """Test schema validation of config values."""
        with pytest.raises(InputError):
            Settings.from_mapping(config)

    def test_non_integer_environment(self) -> None:
        """Test that integer variables must parse."""
        with pytest.raises(InputError, match="QCP_SEED"):
            Settings.from_sources(environ={"QCP_SEED": "abc"})


class TestConfigureLogging:
    """Test the package logger setup."""

    def test_level(self) -> None:
        """Test that the package logger takes the configured level."""
        logger = configure_logging("debug")
        try:
            assert logger.name == "qcpattern"
            assert logger.level == logging.DEBUG
            assert logger.handlers
        finally:
            configure_logging("warn")
        assert logger.level == logging.WARNING
