from __future__ import annotations

from pathlib import Path

import pytest

from nashtree.gametree import parse_game_tree

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def demo_tree():
    """Five-node tree with multiple equilibria (player 1 indifferent below)."""
    return parse_game_tree((DATA / "multi_eq.gtree").read_text())


@pytest.fixture(scope="session")
def mixing_tree():
    """Frozen search result: social optimum attainable only with mixing."""
    return parse_game_tree((DATA / "mixing_required.gtree").read_text())
