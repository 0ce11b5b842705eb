import json
import math

import pytest

from flatkvol.geom import Mat2
from flatkvol.surface import (BouwMollerParams, SurfaceError, TranslationSurface, build_bouw_moller,
                              equilateral_l_surface, square_tiled, square_torus, systoles, validate_hypotheses)

from conftest import TEST_PAIRS, bm


@pytest.mark.parametrize("m,n", TEST_PAIRS + [(2, 6), (4, 4)])
def test_bouw_moller_cone_data(m, n):
    s = bm(m, n) if (m, n) in TEST_PAIRS else build_bouw_moller((m, n))
    g = math.gcd(m, n)
    assert s.num_singularities == g
    for a in s.cone_angles:
        assert round(a / math.pi, 6) == pytest.approx(2 * (m * n - m - n) / g)
    assert s.genus == (m * n - m - n - g) // 2 + 1
    assert len(s.polygons) == m


def test_params_validation():
    with pytest.raises(SurfaceError):
        BouwMollerParams(2, 2)
    p = BouwMollerParams(3, 4)
    assert p.l0 == pytest.approx(math.sin(math.pi / 3))
    assert p.coprime
    assert p.modulus == pytest.approx(2 + math.sqrt(2))


def test_torus_and_l_surface():
    t = square_torus()
    assert t.genus == 1 and t.stratum() == [0]
    L = equilateral_l_surface()
    assert L.genus == 2
    assert L.cone_angles[0] == pytest.approx(6 * math.pi)
    assert L.area == pytest.approx(6 * math.sqrt(3) / 4)


def test_square_tiled_stratum():
    s = square_tiled([1, 2, 0], [0, 1, 2])
    assert s.genus == 1
    s = square_tiled([0, 2, 3, 4, 1], [1, 0, 2, 4, 3])
    assert s.stratum() == [4]


def test_gluing_errors():
    sq = [[(0, 0), (1, 0), (1, 1), (0, 1)]]
    with pytest.raises(SurfaceError):
        TranslationSurface(sq, [((0, 0), (0, 2))])
    with pytest.raises(SurfaceError):
        TranslationSurface(sq, [((0, 0), (0, 1)), ((0, 2), (0, 3))])


def test_json_roundtrip(s34):
    data = json.loads(s34.to_json())
    assert set(data) >= {"polygons", "gluings"}
    s2 = TranslationSurface.from_json(s34.to_json())
    assert s2.genus == s34.genus and s2.area == pytest.approx(s34.area)


def test_transformed_preserves_area(s34):
    M = Mat2(2.0, 1.0, 1.0, 1.0)
    assert s34.transformed(M).area == pytest.approx(s34.area)
    assert s34.scaled(2.0).area == pytest.approx(4 * s34.area)


@pytest.mark.parametrize("m,n,p1,p1p", [(3, 4, True, True), (4, 3, False, True), (5, 4, True, True)])
def test_hypotheses(m, n, p1, p1p):
    rep = validate_hypotheses(bm(m, n))
    assert (rep.satisfies_P1, rep.satisfies_P1prime, rep.satisfies_P2) == (p1, p1p, True)


def test_l_surface_fails_p1():
    rep = validate_hypotheses(equilateral_l_surface())
    assert not rep.satisfies_P1 and rep.satisfies_P2


@pytest.mark.parametrize("m,n", [(3, 4), (5, 4)])
def test_systoles_are_shortest_sides(m, n):
    s = bm(m, n)
    sys_ = systoles(s)
    assert sys_
    assert all(sc.length == pytest.approx(math.sin(math.pi / m)) for sc in sys_)
    assert all(len(sc.segments) == 1 for sc in sys_)
