"""Bundled fixture programs P1-P6."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

NAMES = ("P1", "P2", "P3", "P4", "P5", "P6")


def path(name: str) -> Path:
    return Path(str(resources.files(__name__).joinpath(f"{name}.mc")))


def text(name: str) -> str:
    return path(name).read_text(encoding="utf-8")


def all_paths() -> list[Path]:
    return [path(n) for n in NAMES]
