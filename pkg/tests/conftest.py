import random

import pytest

from triflip.geometry import PointSet
from triflip.instance import generate_random_instance
from triflip.triangulation import Triangulation, edge


def fan(points: PointSet, apex: int, order) -> Triangulation:
    """Fan from ``apex`` over a convex chain given in hull order."""
    es = [edge(apex, v) for v in order]
    es += [edge(a, b) for a, b in zip(order, order[1:])]
    return Triangulation(points, es)


@pytest.fixture
def parabola9():
    # points on a convex curve: every 4-subset is convex
    return PointSet(tuple((i, i * i) for i in range(9)))


@pytest.fixture
def fan_pair(parabola9):
    """Fan from p8 and fan from p0; p0-p7 crosses six edges of the first."""
    return fan(parabola9, 8, list(range(8))), fan(parabola9, 0, list(range(1, 9)))


@pytest.fixture
def square4():
    S = PointSet(((0, 0), (10, 0), (10, 10), (0, 10)))
    hull = [edge(0, 1), edge(1, 2), edge(2, 3), edge(0, 3)]
    return S, Triangulation(S, hull + [edge(0, 2)]), Triangulation(S, hull + [edge(1, 3)])


def random_pair(seed: int, n_range=(5, 8), k_range=(1, 6)):
    rng = random.Random(seed)
    inst = generate_random_instance(rng.randint(*n_range), 2, rng.randint(*k_range), seed)
    return inst.inputs[0], inst.inputs[1]


def random_small_instance(seed: int):
    rng = random.Random(seed)
    return generate_random_instance(rng.randint(5, 8), rng.randint(2, 4), rng.randint(1, 3), seed)
