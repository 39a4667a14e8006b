import sys
from pathlib import Path

import pytest

from samrec.graph import ContextGraph

sys.path.insert(0, str(Path(__file__).parent))

DATA = Path(__file__).parent / "data" / "ml-100k"

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def ml_data():
    return DATA


@pytest.fixture
def tv_graph():
    """Small social-TV graph: two movies with widgets, shared keywords, three viewers."""
    g = ContextGraph()
    for p in ("alice", "bob", "carol"):
        g.add_person(p, name=p.title())
    g.add_asset("movie1", "root", "Space Saga")
    g.add_asset("movie2", "root", "Galactic Wars")
    for w, root in (("w1", "movie1"), ("w2", "movie1"), ("w3", "movie2")):
        g.add_asset(w, "sub", f"widget {w}")
        g.link_widget(root, w)
    g.tag("movie1", "sci-fi")
    g.tag("movie1", "space")
    g.tag("movie2", "sci-fi")
    g.interact("alice", "movie1", "consume", timestamp=1)
    g.interact("alice", "movie1", "comment", polarity=1.0, intensity=0.8, text="great!", timestamp=2)
    g.interact("alice", "w1", "like", timestamp=3)
    g.interact("alice", "w2", "dismiss", timestamp=4)
    g.interact("bob", "movie2", "dislike", timestamp=5)
    g.interact("bob", "w3", "scroll", timestamp=6)
    g.interact("carol", "movie2", "fullscreen", timestamp=7)
    return g
