import numpy as np
import pytest
from math import comb


def adjusted_rand_index(a, b) -> float:
    """Pair-counting ARI between two flat label vectors."""
    a = np.asarray(a)
    b = np.asarray(b)
    cont = np.array(
        [[int(np.sum((a == x) & (b == y))) for y in np.unique(b)] for x in np.unique(a)]
    )
    sum_ij = sum(comb(v, 2) for v in cont.ravel())
    sum_a = sum(comb(v, 2) for v in cont.sum(axis=1))
    sum_b = sum(comb(v, 2) for v in cont.sum(axis=0))
    expected = sum_a * sum_b / comb(a.size, 2)
    return (sum_ij - expected) / (0.5 * (sum_a + sum_b) - expected)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
