import math

import numpy as np
import pytest

from flatkvol.geom import Mat2
from flatkvol.kvol import (KvolError, PairData, allowed_equality_classes, certify_bouw_moller, homological_systole,
                           is_null_homologous, kvol_bruteforce, kvol_on_orbit, sysvol)
from flatkvol.surface import BouwMollerParams, equilateral_l_surface, square_torus
from flatkvol.teich import kvol_disk, psi

from conftest import bm


def test_torus():
    res = kvol_bruteforce(square_torus(), 3.0)
    assert res.kvol_lower == pytest.approx(1.0)
    assert res.sysvol == pytest.approx(1.0)


def test_truncation_too_short():
    with pytest.raises(KvolError):
        kvol_bruteforce(bm(3, 4), 1.0)


def test_s34_matches_formula():
    res = kvol_bruteforce(bm(3, 4), 3.0)
    expected = bm(3, 4).area / math.sin(math.pi / 3) ** 2
    assert res.kvol_lower == pytest.approx(expected, rel=1e-9)
    assert res.kvol_formula == pytest.approx(expected, rel=1e-9)
    assert res.sysvol == pytest.approx(expected, rel=1e-9)
    assert res.as_dict()["kvol"] == res.kvol_lower


@pytest.mark.parametrize("lam", [0.5, 3.0])
def test_scale_invariance(lam):
    s = bm(3, 4)
    a = kvol_bruteforce(s, 3.0)
    b = kvol_bruteforce(s.scaled(lam), 3.0 * lam)
    assert b.kvol_lower == pytest.approx(a.kvol_lower, rel=1e-9)
    assert b.sysvol == pytest.approx(a.sysvol, rel=1e-9)


def test_l_surface_exceeds_convex_bound():
    s = equilateral_l_surface()
    res = kvol_bruteforce(s)
    assert res.max_ratio == pytest.approx(2 / math.sqrt(3), rel=1e-9)
    assert res.kvol_lower / res.sysvol == pytest.approx(2 / math.sqrt(3), rel=1e-9)


def test_null_homologous_boundary(s34):
    sides = [sc for sc in PairData.build(s34, 1.0).curves]
    assert not is_null_homologous(sides[0], s34)
    assert is_null_homologous([sides[0], sides[0].reversed()], s34)


def test_homological_systole(s34):
    length, curve = homological_systole(s34)
    assert length == pytest.approx(math.sin(math.pi / 3))
    assert sysvol(s34) == pytest.approx(s34.area / length ** 2)


def test_orbit_matches_disk_at_identity_and_twists():
    p = BouwMollerParams(3, 4)
    data = PairData.build(bm(3, 4), 4.0)
    for M in (Mat2.identity(), Mat2(1, p.modulus, 0, 1), Mat2(1, -p.modulus, 0, 1)):
        assert kvol_on_orbit(data, M) == pytest.approx(kvol_disk(psi(M), p, data.surface.area), rel=1e-9)


def test_orbit_requires_unimodular():
    data = PairData.build(bm(3, 4), 2.0)
    with pytest.raises(KvolError):
        kvol_on_orbit(data, Mat2.diag(2, 2))


@pytest.mark.parametrize("m,n,classes", [(3, 4, {"systoles", "diagonals"}), (4, 3, {"systoles"}),
                                         (5, 4, {"systoles"})])
def test_certificate(m, n, classes):
    cert = certify_bouw_moller((m, n), 3.0)
    assert cert.passed and cert.attains_bound
    assert set(cert.classes) <= classes
    assert cert.max_ratio == pytest.approx(1 / math.sin(math.pi / m) ** 2, rel=1e-9)


def test_certificate_s74_has_diagonals():
    cert = certify_bouw_moller((7, 4), 3.0)
    assert cert.passed and "diagonals" in cert.classes


def test_non_coprime_strict():
    cert = certify_bouw_moller((2, 6), 3.0)
    assert cert.passed and not cert.attains_bound


def test_allowed_classes():
    assert allowed_equality_classes(BouwMollerParams(7, 4)) == {"systoles", "diagonals"}
    assert allowed_equality_classes(BouwMollerParams(2, 6)) == set()
