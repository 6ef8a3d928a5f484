"""Helpers for building terms from concrete syntax inside a fixture's scope."""
from __future__ import annotations

import phantypes
from phantypes.dsl import parse_project


def with_program(fixture: str, text: str, target: bool = False):
    """The fixture project with one extra program called ``probe``."""
    keyword = "target_program" if target else "program"
    source = phantypes.fixture_path(fixture).read_text() + f"\n{keyword} probe {{ {text} }}\n"
    return parse_project(source)


def source_term(fixture: str, text: str):
    return with_program(fixture, text).programs["probe"]


def target_term(fixture: str, text: str):
    return with_program(fixture, text, target=True).target_programs["probe"]
