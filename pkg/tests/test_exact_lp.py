import itertools

from hypothesis import given
from hypothesis import strategies as st

from linematch._exact_lp import strictly_feasible


def test_hand_cases():
    assert strictly_feasible([], 2)
    assert strictly_feasible([(1, -2)], 2)  # d = (3, 1)
    assert not strictly_feasible([(1, -1), (-1, 1)], 2)
    assert not strictly_feasible([(-1, -1)], 2)
    assert not strictly_feasible([(0, 0)], 2)
    assert strictly_feasible([(2, -1, -1), (-1, 3, -1)], 3)
    assert not strictly_feasible([(1,)], 0)
    assert strictly_feasible([], 0)


@given(st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3)), max_size=6))
def test_two_dimensional_against_angles(rows):
    """In two dimensions a direction d = (cos, sin) suffices; scan a fine rational grid."""
    grid = [(a, b) for a, b in itertools.product(range(1, 40), repeat=2)]
    witness = any(all(r[0] * a + r[1] * b > 0 for r in rows) for a, b in grid)
    if witness:
        assert strictly_feasible(rows, 2)
    # entries are in [-3, 3]: any strict solution cone contains a grid direction
    assert strictly_feasible(rows, 2) == witness
