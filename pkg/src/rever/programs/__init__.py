"""Example programs shipped with the package."""

from __future__ import annotations

from importlib import resources

NAMES = ("jump", "cjump", "loop", "procedure")


def source(name: str) -> str:
    return resources.files(__name__).joinpath(f"{name}.rasm").read_text(encoding="utf-8")
