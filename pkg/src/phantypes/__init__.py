"""Phantom-type encodings of subtyping hierarchies, a bounded source
calculus, a phantom-typed target calculus and the translation between them."""
from __future__ import annotations

from importlib import resources
from pathlib import Path

__version__ = "0.1.0"

FIXTURES = ("atom", "atom_tree", "sockets", "tree31", "powerset32", "embedding33",
            "crown34", "extension35", "rand_atom")


def fixture_path(name: str) -> Path:
    return Path(str(resources.files(__package__) / "fixtures" / f"{name}.phm"))


def load_fixture(name: str):
    from .dsl import load_project
    return load_project(fixture_path(name))


def schema(name: str) -> dict:
    import json
    return json.loads((resources.files(__package__) / "schemas" / f"{name}.schema.json").read_text())
