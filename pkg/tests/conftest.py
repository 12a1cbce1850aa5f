import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ohmpath.generators import complete_graph, default_corpus, path_graph  # noqa: E402
from ohmpath.graph import augment  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def corpus():
    return default_corpus()


@pytest.fixture(scope="session")
def augmented_corpus(corpus):
    return {name: augment(g, g.h_start, g.h_end) for name, g in corpus.items()}


@pytest.fixture
def p3():
    return path_graph(3)


@pytest.fixture
def k3_aug():
    return augment(complete_graph(3), 0, 1)


@pytest.fixture
def k4_aug():
    return augment(complete_graph(4))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
