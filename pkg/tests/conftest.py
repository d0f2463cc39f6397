"""Shared fixtures: gridworld files and seeded random system generation."""

import random
from pathlib import Path

import pytest

from opacue.system import MetricSystem, parse_system

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def load_fixture(name: str) -> MetricSystem:
    return parse_system((FIXTURES / name).read_text())


@pytest.fixture(scope="session")
def gridworld():
    return load_fixture("gridworld.json")


@pytest.fixture(scope="session")
def gridworld_c1():
    return load_fixture("gridworld_c1.json")


@pytest.fixture(scope="session")
def gridworld_c2():
    return load_fixture("gridworld_c2.json")


def random_system(
    rng: random.Random,
    max_states: int = 5,
    max_inputs: int = 3,
    output_values: int = 20,
) -> MetricSystem:
    """A small random metric system with decimal-rounded scalar outputs."""
    n = rng.randint(1, max_states)
    m = rng.randint(1, max_inputs)
    outputs = tuple((rng.randrange(output_values + 1) / output_values,) for _ in range(n))
    initial = tuple(sorted(rng.sample(range(n), rng.randint(0, n))))
    secret = tuple(sorted(rng.sample(range(n), rng.randint(0, n))))
    edges = set()
    for _ in range(rng.randint(0, 2 * n * m)):
        edges.add((rng.randrange(n), rng.randrange(m), rng.randrange(n)))
    return MetricSystem(
        names=tuple(f"s{i}" for i in range(n)),
        inputs=tuple(f"u{j}" for j in range(m)),
        outputs=outputs,
        initial=initial,
        secret=secret,
        transitions=tuple(sorted(edges)),
    )
