"""Built-in acceptance models shipped with the package."""
from __future__ import annotations

from importlib import resources

from .model import GameModel, load_model

_NAMES = ("t1", "t2", "t3", "t4", "t4_decoupled")


def names() -> tuple[str, ...]:
    return _NAMES


def text(name: str) -> str:
    if name not in _NAMES:
        raise KeyError(f"unknown built-in model {name!r}; choose from {', '.join(_NAMES)}")
    return resources.files("rsgame").joinpath("data", f"{name}.json").read_text()


def load(name: str) -> GameModel:
    return load_model(text(name))
