"""qcpattern entry point."""

from __future__ import annotations

from qcpattern.cli import cli

cli()
