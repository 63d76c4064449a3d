import pytest

from energyfwd.topology import Arc, Topology, load_adjacency_matrix

A, B, C, D, E = range(5)


def symmetric(n, weights):
    arcs = []
    for (u, v), w in weights.items():
        arcs += [Arc(u, v, w), Arc(v, u, w)]
    return Topology(n, arcs)


@pytest.fixture
def fig1():
    """Five-bridge graph built around the worked example's two candidates.

    A's four links weigh 0.3/0.4/0.3/0.4 and B's 0.3/0.3/0.4/0.5; C, D and E
    are tied together with heavy 0.9 links so that they rank after A and B.
    """
    return symmetric(
        5,
        {
            (A, B): 0.3,
            (A, C): 0.4,
            (A, D): 0.3,
            (A, E): 0.4,
            (B, C): 0.3,
            (B, D): 0.4,
            (B, E): 0.5,
            (C, D): 0.9,
            (D, E): 0.9,
            (C, E): 0.9,
        },
    )


@pytest.fixture
def pair():
    return load_adjacency_matrix("0 0.3\n0.3 0\n")


@pytest.fixture
def triangle():
    return symmetric(3, {(0, 1): 1.0, (1, 2): 1.0, (0, 2): 3.0})


@pytest.fixture
def star():
    return symmetric(5, {(0, k): 0.2 for k in range(1, 5)})


@pytest.fixture
def path3():
    """Path 0-1-2 with bridge weights 0.1 < 0.2 < 0.5.

    Symmetric weights would always make the middle bridge heaviest, so the
    two directions of 1-2 differ.
    """
    return Topology(3, [Arc(0, 1, 0.1), Arc(1, 0, 0.1), Arc(1, 2, 0.1), Arc(2, 1, 0.5)])


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
