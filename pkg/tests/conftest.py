from pathlib import Path as FsPath

import pytest

from pathbisim.fps import parse_fps
from pathbisim.lts import parse_aut

FIXTURES = FsPath(__file__).resolve().parent.parent / "fixtures"


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text()


@pytest.fixture(scope="session")
def abcde():
    return parse_aut(fixture_text("abcde.aut"))


@pytest.fixture(scope="session")
def choice_timing():
    return parse_aut(fixture_text("choice-timing.aut"))


@pytest.fixture(scope="session")
def silent_prefix():
    return parse_aut(fixture_text("silent-prefix.aut"))


@pytest.fixture(scope="session")
def branching_pair():
    return parse_aut(fixture_text("branching-pair.aut"))


@pytest.fixture(scope="session")
def three_copies():
    return parse_fps(fixture_text("three-copies.fps"))


@pytest.fixture(scope="session")
def silent_tree():
    return parse_fps(fixture_text("silent-tree.fps"))
