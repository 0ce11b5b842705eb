import math
from math import gcd

import pytest

from flatkvol.surface import equilateral_l_surface, square_torus
from flatkvol.trajectory import (HypothesisError, check_length_bounds, decompose, enumerate_saddle_connections,
                                 is_odd_sequence, max_adjacent_pairs, saddle_connections_in_direction)

from conftest import TEST_PAIRS, bm


def lattice_oracle(L):
    out = set()
    R = int(L) + 1
    for p in range(-R, R + 1):
        for q in range(-R, R + 1):
            if (p, q) != (0, 0) and gcd(abs(p), abs(q)) == 1 and p * p + q * q <= L * L:
                out.add((p, q))
    return out


@pytest.mark.parametrize("L", [1.1, 2.3, 4.0, 10.0])
def test_torus_matches_lattice_oracle(L):
    got = {(round(sc.holonomy.x), round(sc.holonomy.y)) for sc in enumerate_saddle_connections(square_torus(), L)}
    assert got == lattice_oracle(L)


def test_torus_small_cases():
    hol = {(round(sc.holonomy.x), round(sc.holonomy.y)) for sc in enumerate_saddle_connections(square_torus(), 1.1)}
    assert hol == {(1, 0), (-1, 0), (0, 1), (0, -1)}


def test_sorted_and_monotone(s34):
    a = enumerate_saddle_connections(s34, 2.0)
    b = enumerate_saddle_connections(s34, 3.0)
    lengths = [sc.length for sc in b]
    assert all(x <= y + 1e-9 for x, y in zip(lengths, lengths[1:]))
    assert {sc.key for sc in a} <= {sc.key for sc in b}


def test_retrace_and_lengths(s34):
    for sc in enumerate_saddle_connections(s34, 3.0):
        assert sc.retrace() == pytest.approx(tuple(sc.holonomy), abs=1e-9)
        assert sum(g.length for g in sc.segments) == pytest.approx(sc.length, abs=1e-9)


def test_reversal_and_slope(s34):
    for sc in enumerate_saddle_connections(s34, 2.0):
        r = sc.reversed()
        assert r.reversed().key == sc.key
        h = sc.holonomy
        expected = math.inf if abs(h.y) < 1e-12 else -h.x / h.y
        if math.isinf(expected):
            assert math.isinf(sc.consistent_slope)
        else:
            assert sc.consistent_slope == pytest.approx(expected)


def test_shortest_on_s34_are_systoles(s34):
    l0 = math.sin(math.pi / 3)
    scs = enumerate_saddle_connections(s34, l0 * (1 + 1e-6))
    assert scs and all(sc.length == pytest.approx(l0) for sc in scs)


def test_invalid_length(s34):
    with pytest.raises(ValueError):
        enumerate_saddle_connections(s34, 0)


def test_side_decomposition(s34):
    side = enumerate_saddle_connections(s34, 1.0)[0]
    d = decompose(side)
    assert (d.k, d.p, d.q, d.is_side, d.is_diagonal) == (1, 1, 0, True, False)


def test_odd_sequences():
    assert is_odd_sequence((1,))
    assert is_odd_sequence((1, 2, 1))
    assert is_odd_sequence((1, 2, 2, 2, 1))
    assert not is_odd_sequence((1, 2, 2, 1))
    assert not is_odd_sequence((1, 1))
    assert not is_odd_sequence((2, 1))


def test_max_adjacent_pairs():
    assert max_adjacent_pairs([False, True, True, True, False]) == 1
    assert max_adjacent_pairs([True, True, False, True, True, True, True]) == 3


@pytest.mark.parametrize("m,n", TEST_PAIRS)
def test_decomposition_invariants(m, n):
    for sc in enumerate_saddle_connections(bm(m, n), 3.0):
        d = decompose(sc)
        assert not d.adjacent[0] and not d.adjacent[-1]
        half = math.ceil(d.k / 2)
        assert half <= d.p + d.q
        assert (half == d.p + d.q) == d.is_odd


def test_length_bounds_on_s54():
    for sc in enumerate_saddle_connections(bm(5, 4), 3.0):
        assert all(check_length_bounds(sc).values())


def test_length_bounds_refuse_l_surface():
    sc = enumerate_saddle_connections(equilateral_l_surface(), 1.5)[0]
    with pytest.raises(HypothesisError):
        check_length_bounds(sc)


def test_direction_search(s34):
    hz = saddle_connections_in_direction(s34, (1.0, 0.0), 10.0)
    assert hz and all(abs(sc.holonomy.y) < 1e-9 for sc in hz)
