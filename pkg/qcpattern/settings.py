"""Runtime settings: config schema, environment overrides and logging setup."""

from __future__ import annotations

import logging
import os
import typing as t
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import simplejson
from singer_sdk import typing as th  # JSON schema typing helpers

from qcpattern.exceptions import InputError

if t.TYPE_CHECKING:
    from collections.abc import Mapping

ENV_PREFIX = "QCP_"

LOG_LEVELS: dict[str, int] = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}

config_jsonschema = th.PropertiesList(
    th.Property(
        "log_level",
        th.StringType(nullable=False),
        default="warn",
        allowed_values=list(LOG_LEVELS),
        title="Log level",
        description="Verbosity of the qcpattern loggers (also QCP_LOG)",
    ),
    th.Property(
        "threads",
        th.IntegerType(minimum=1),
        default=1,
        title="Threads",
        description="Upper bound on worker threads for parallel checks (also QCP_THREADS)",
    ),
    th.Property(
        "seed",
        th.IntegerType(minimum=0),
        default=0,
        title="Seed",
        description="Seed of every randomised procedure (also QCP_SEED)",
    ),
    th.Property(
        "tol",
        th.NumberType(exclusive_minimum=0),
        default=1e-10,
        title="Tolerance",
        description="Residual tolerance of the radius solver",
    ),
    th.Property(
        "max_iter",
        th.IntegerType(minimum=1),
        default=50,
        title="Max iterations",
        description="Newton iteration cap of the radius solver",
    ),
    th.Property(
        "svg",
        th.ObjectType(
            th.Property("show_circles", th.BooleanType, default=True),
            th.Property("show_kites", th.BooleanType, default=True),
            th.Property("stroke_width", th.NumberType, default=0.02),
            th.Property("scale", th.NumberType, default=40.0),
        ),
        title="SVG options",
        description="Default rendering options of the svg command",
    ),
).to_dict()


@dataclass(frozen=True)
class SvgOptions:
    """Rendering options of `qcpattern.svg.export_svg`."""

    show_circles: bool = True
    show_kites: bool = True
    stroke_width: float = 0.02
    scale: float = 40.0


@dataclass(frozen=True)
class Settings:
    """Resolved runtime settings."""

    log_level: str = "warn"
    threads: int = 1
    seed: int = 0
    tol: float = 1e-10
    max_iter: int = 50
    svg: SvgOptions = field(default_factory=SvgOptions)

    @classmethod
    def from_mapping(cls, config: Mapping[str, t.Any]) -> Settings:
        """Validate a config mapping and build settings from it.

        Args:
            config: Raw configuration values.

        Returns:
            The validated settings.

        Raises:
            InputError: If the mapping does not match the config schema.
        """
        validator = jsonschema.Draft7Validator(config_jsonschema)
        errors = sorted(validator.iter_errors(dict(config)), key=lambda e: list(e.path))
        if errors:
            first = errors[0]
            location = "/".join(str(p) for p in first.path) or "<root>"
            msg = f"Invalid configuration at {location}: {first.message}"
            raise InputError(msg)

        svg = SvgOptions(**(config.get("svg") or {}))
        known = ("log_level", "threads", "seed", "tol", "max_iter")
        scalars = {k: config[k] for k in known if config.get(k) is not None}
        return cls(svg=svg, **scalars)

    @classmethod
    def from_sources(
        cls,
        config_path: str | Path | None = None,
        environ: Mapping[str, str] | None = None,
        **overrides: t.Any,
    ) -> Settings:
        """Merge a JSON config file, environment variables and explicit overrides.

        Later sources win: file, then environment (QCP_LOG, QCP_THREADS, QCP_SEED),
        then keyword overrides whose value is not None.

        Args:
            config_path: Optional path of a JSON config file.
            environ: Environment mapping, defaults to `os.environ`.
            overrides: Explicit values, typically CLI flags.

        Returns:
            The validated settings.

        Raises:
            InputError: If the config file cannot be read or an override is invalid.
        """
        config: dict[str, t.Any] = {}
        if config_path is not None:
            try:
                config.update(simplejson.loads(Path(config_path).read_text(encoding="utf-8")))
            except (OSError, simplejson.JSONDecodeError) as exc:
                msg = f"Cannot read config file {config_path}: {exc}"
                raise InputError(msg) from exc

        env = os.environ if environ is None else environ
        if f"{ENV_PREFIX}LOG" in env:
            config["log_level"] = env[f"{ENV_PREFIX}LOG"].lower()
        for key in ("threads", "seed"):
            raw = env.get(f"{ENV_PREFIX}{key.upper()}")
            if raw is None:
                continue
            try:
                config[key] = int(raw)
            except ValueError as exc:
                msg = f"{ENV_PREFIX}{key.upper()} must be an integer, got {raw!r}"
                raise InputError(msg) from exc

        config.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_mapping(config)


def configure_logging(level: str = "warn") -> logging.Logger:
    """Attach a stderr handler to the package logger.

    Args:
        level: One of error, warn, info, debug.

    Returns:
        The configured package logger.
    """
    logger = logging.getLogger("qcpattern")
    logger.setLevel(LOG_LEVELS.get(level.lower(), logging.WARNING))
    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
        logger.addHandler(handler)
    return logger
