import pytest

from deformed_aklt.lattice import build_lattice, injective_covering, three_colouring

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def ring6():
    g = build_lattice("ring", (6, 1))
    return g, three_colouring(g), injective_covering(g)


@pytest.fixture(scope="session")
def star11():
    g = build_lattice("star", (1, 1))
    return g, three_colouring(g), injective_covering(g)


@pytest.fixture(scope="session")
def honeycomb33():
    g = build_lattice("honeycomb", (3, 3))
    return g, three_colouring(g), injective_covering(g)
