"""Algebraic intersection numbers of closed curves made of saddle connections.

Two independent routes are provided. The direct route counts transverse crossings
inside the polygons and adds the contributions at cone points, read off from the
cyclic order of germs on the link circle. The homological route pairs a crossing
cochain of the first curve with a cellular chain homotopic to the second one, which
turns a whole family of intersection numbers into one matrix product.

Sign convention: Int(a, b) = +1 when b crosses a from its right to its left, which
is the sign of cross(a', b') at a transverse crossing.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geom import cross
from .surface import SideRef, TranslationSurface, validate_hypotheses
from .trajectory import SaddleConnection, decompose, enumerate_saddle_connections

LINK_TOL = 1e-9
PARAM_TOL = 1e-9


class IntersectionError(ValueError):
    pass


@dataclass(frozen=True)
class IntersectionReport:
    nonsingular_count: int
    signed_nonsingular: int
    singular_signed: int
    algebraic: int
    ratio: float
    length_a: float
    length_b: float

    def as_dict(self) -> dict:
        return {"nonsingular_count": self.nonsingular_count, "signed_nonsingular": self.signed_nonsingular,
                "singular_signed": self.singular_signed, "algebraic": self.algebraic, "ratio": self.ratio,
                "length_a": self.length_a, "length_b": self.length_b}


def _as_curve(c) -> list[SaddleConnection]:
    return [c] if isinstance(c, SaddleConnection) else list(c)


def passages(curve: Sequence[SaddleConnection]) -> list[tuple[int, float, float]]:
    """(cone point, incoming germ, outgoing germ) at each junction of a closed curve."""
    curve = _as_curve(curve)
    out = []
    for i, sc in enumerate(curve):
        nxt = curve[(i + 1) % len(curve)]
        if sc.end_class != nxt.start_class:
            raise IntersectionError("curve is not closed: consecutive saddle connections do not share a cone point")
        out.append((sc.end_class, sc.end_link, nxt.start_link))
    return out


def _ccw(x: float, base: float, cone: float) -> float:
    d = (x - base) % cone
    if d > cone - LINK_TOL:
        d = 0.0
    return d


def _in_left_arc(x: float, out_pos: float, in_pos: float, cone: float) -> bool:
    # open counterclockwise arc from the outgoing germ to the incoming one, shrunk at both ends
    span = _ccw(in_pos, out_pos, cone)
    d = _ccw(x, out_pos, cone)
    return LINK_TOL < d < span - LINK_TOL


def singular_intersection(a, b, s: TranslationSurface | None = None) -> int:
    """Signed intersections at cone points, with b pushed off to its left."""
    a, b = _as_curve(a), _as_curve(b)
    s = s or a[0].surface
    total = 0
    for ca, in_a, out_a in passages(a):
        for cb, in_b, out_b in passages(b):
            if ca != cb:
                continue
            cone = s.cone_angles[ca]
            total += int(_in_left_arc(in_a, out_b, in_b, cone)) - int(_in_left_arc(out_a, out_b, in_b, cone))
    return total


def chords_link(a_in: float, a_out: float, b_in: float, b_out: float, cone: float) -> bool:
    """Whether two chords of the link circle interleave."""
    return _in_left_arc(a_in, b_out, b_in, cone) != _in_left_arc(a_out, b_out, b_in, cone)


# -- nonsingular crossings ------------------------------------------------------------------

def _side_index(sc: SaddleConnection):
    seg = sc.segments[0]
    n = len(sc.surface.polygons[seg.polygon])
    v, w = sc.start_corner[1], sc.end_corner[1]
    if (w - v) % n == 1:
        return v, False
    if (v - w) % n == 1:
        return w, True
    return None, False


def _local_segments(sc: SaddleConnection):
    """(polygon, P, Q, start at vertex, end at vertex, along a side) for each piece, with ghosts."""
    s = sc.surface
    out = []
    segs = sc.segments
    for i, g in enumerate(segs):
        on_side = False
        if len(segs) == 1:
            k, rev = _side_index(sc)
            if k is not None:
                on_side = True
                dst = s.gluing[SideRef(g.polygon, k)]
                poly2 = s.polygons[dst.polygon]
                A2 = poly2.vertices[dst.side]
                B2 = poly2.vertices[(dst.side + 1) % len(poly2)]
                # the glued side runs backwards
                P, Q = (B2, A2) if not rev else (A2, B2)
                out.append((dst.polygon, P, Q, True, True, True))
        out.append((g.polygon, g.start, g.end, g.entry_side is None, g.exit_side is None, on_side))
    return out


def _same_curve(a: SaddleConnection, b: SaddleConnection) -> bool:
    if a is b or a.key == b.key:
        return True
    r = b.reversed()
    return a.key == r.key


def nonsingular_intersections(a: SaddleConnection, b: SaddleConnection) -> tuple[int, int]:
    """(number of transverse crossings away from cone points, signed count)."""
    if a.surface is not b.surface:
        raise IntersectionError("saddle connections live on different surfaces")
    if _same_curve(a, b):
        return 0, 0
    count = 0.0
    signed = 0.0
    la, lb = _local_segments(a), _local_segments(b)
    for qa, P1, P2, va0, va1, sa in la:
        da = (P2[0] - P1[0], P2[1] - P1[1])
        for qb, Q1, Q2, vb0, vb1, sb in lb:
            if qa != qb:
                continue
            db = (Q2[0] - Q1[0], Q2[1] - Q1[1])
            den = cross(da, db)
            na = math.hypot(*da)
            nb = math.hypot(*db)
            if abs(den) <= 1e-12 * na * nb:
                if abs(cross(da, (Q1[0] - P1[0], Q1[1] - P1[1]))) <= 1e-9 * na * max(na, nb):
                    _check_overlap(P1, P2, Q1, Q2, da)
                continue
            w = (Q1[0] - P1[0], Q1[1] - P1[1])
            s_ = cross(w, db) / den
            t_ = cross(w, da) / den
            if not (-PARAM_TOL <= s_ <= 1 + PARAM_TOL and -PARAM_TOL <= t_ <= 1 + PARAM_TOL):
                continue
            at_a0, at_a1 = s_ <= PARAM_TOL, s_ >= 1 - PARAM_TOL
            at_b0, at_b1 = t_ <= PARAM_TOL, t_ >= 1 - PARAM_TOL
            if (at_a0 and va0) or (at_a1 and va1) or (at_b0 and vb0) or (at_b1 and vb1):
                continue
            weight = 0.5 if (at_a0 or at_a1 or at_b0 or at_b1 or sa or sb) else 1.0
            count += weight
            signed += weight * (1 if den > 0 else -1)
    return int(round(count)), int(round(signed))


def _check_overlap(P1, P2, Q1, Q2, d):
    # collinear pieces of distinct saddle connections may only touch at endpoints
    nd = d[0] * d[0] + d[1] * d[1]
    t = sorted(((Q1[0] - P1[0]) * d[0] + (Q1[1] - P1[1]) * d[1],
                (Q2[0] - P1[0]) * d[0] + (Q2[1] - P1[1]) * d[1]))
    lo, hi = max(0.0, t[0]), min(nd, t[1])
    if hi - lo > 1e-9 * nd:
        raise IntersectionError("tangential overlap between distinct saddle connections")


def algebraic_intersection(curve_a, curve_b) -> IntersectionReport:
    a, b = _as_curve(curve_a), _as_curve(curve_b)
    passages(a)
    passages(b)
    count = signed = 0
    for x in a:
        for y in b:
            c, sg = nonsingular_intersections(x, y)
            count += c
            signed += sg
    sing = singular_intersection(a, b)
    alg = signed + sing
    la = sum(x.length for x in a)
    lb = sum(y.length for y in b)
    return IntersectionReport(count, signed, sing, alg, abs(alg) / (la * lb), la, lb)


# -- homological route --------------------------------------------------------------------------

def _junction_cochain(s: TranslationSurface, cls: int, in_pos: float, out_pos: float, acc: Counter):
    cone = s.cone_angles[cls]
    for g in s.germs[cls]:
        if _in_left_arc(g.position, out_pos, in_pos, cone):
            acc[g.edge] += g.sign


def curve_cochain(curve) -> Counter:
    """Signed edge crossings of the curve pushed off its cone points to the left."""
    curve = _as_curve(curve)
    s = curve[0].surface
    acc: Counter = Counter()
    for sc in curve:
        acc.update(sc.side_crossings())
    for cls, in_pos, out_pos in passages(curve):
        _junction_cochain(s, cls, in_pos, out_pos, acc)
    return acc


def curve_chain(curve) -> Counter:
    acc: Counter = Counter()
    for sc in _as_curve(curve):
        acc.update(sc.edge_chain())
    return acc


def homological_intersection(curve_a, curve_b) -> int:
    ca = curve_cochain(curve_a)
    nb = curve_chain(curve_b)
    return int(sum(v * nb.get(e, 0) for e, v in ca.items()))


def homology_arrays(curves, s: TranslationSurface | None = None) -> tuple[np.ndarray, np.ndarray]:
    curves = [_as_curve(c) for c in curves]
    s = s or curves[0][0].surface
    E = len(s.edges)
    C = np.zeros((len(curves), E), dtype=np.int64)
    N = np.zeros((len(curves), E), dtype=np.int64)
    for i, c in enumerate(curves):
        for e, v in curve_cochain(c).items():
            C[i, e] = v
        for e, v in curve_chain(c).items():
            N[i, e] = v
    return C, N


def intersection_matrix(curves, s: TranslationSurface | None = None) -> np.ndarray:
    """Int(curves[i], curves[j]) for all i, j."""
    if not curves:
        return np.zeros((0, 0), dtype=np.int64)
    C, N = homology_arrays(curves, s)
    return C @ N.T


# -- bulk crossing counts ---------------------------------------------------------------------

def crossing_count_matrix(scs: Sequence[SaddleConnection]) -> tuple[np.ndarray, np.ndarray]:
    """Nonsingular crossing counts and signed counts between all pairs, vectorized per polygon."""
    n = len(scs)
    counts = np.zeros((n, n))
    signed = np.zeros((n, n))
    if n == 0:
        return counts.astype(int), signed.astype(int)
    s = scs[0].surface
    by_poly: dict[int, list] = {}
    for i, sc in enumerate(scs):
        for q, P, Q, v0, v1, side in _local_segments(sc):
            by_poly.setdefault(q, []).append((i, P[0], P[1], Q[0], Q[1], v0, v1, side))
    same = np.zeros((n, n), dtype=bool)
    keys = {}
    for i, sc in enumerate(scs):
        keys.setdefault(sc.key, []).append(i)
    for i, sc in enumerate(scs):
        r = sc.reversed().key
        for j in keys.get(r, []) + keys.get(sc.key, []):
            same[i, j] = True
    for q, rows in by_poly.items():
        arr = np.array([r[:5] for r in rows], dtype=float)
        flags = np.array([r[5:] for r in rows], dtype=bool)
        idx = arr[:, 0].astype(int)
        P = arr[:, 1:3]
        D = arr[:, 3:5] - P
        m = len(rows)
        step = max(1, 4_000_000 // max(m, 1))
        for lo in range(0, m, step):
            hi = min(m, lo + step)
            Da = D[lo:hi, None, :]
            Pa = P[lo:hi, None, :]
            den = Da[..., 0] * D[None, :, 1] - Da[..., 1] * D[None, :, 0]
            W = P[None, :, :] - Pa
            with np.errstate(divide="ignore", invalid="ignore"):
                s_ = (W[..., 0] * D[None, :, 1] - W[..., 1] * D[None, :, 0]) / den
                t_ = (W[..., 0] * Da[..., 1] - W[..., 1] * Da[..., 0]) / den
            na = np.hypot(Da[..., 0], Da[..., 1])
            nb = np.hypot(D[None, :, 0], D[None, :, 1])
            ok = np.abs(den) > 1e-12 * na * nb
            ok &= (s_ >= -PARAM_TOL) & (s_ <= 1 + PARAM_TOL) & (t_ >= -PARAM_TOL) & (t_ <= 1 + PARAM_TOL)
            a0, a1 = s_ <= PARAM_TOL, s_ >= 1 - PARAM_TOL
            b0, b1 = t_ <= PARAM_TOL, t_ >= 1 - PARAM_TOL
            fa = flags[lo:hi, None, :]
            fb = flags[None, :, :]
            sing = (a0 & fa[..., 0]) | (a1 & fa[..., 1]) | (b0 & fb[..., 0]) | (b1 & fb[..., 1])
            ok &= ~sing
            ii = idx[lo:hi, None] * np.ones((1, m), dtype=int)
            jj = np.ones((hi - lo, 1), dtype=int) * idx[None, :]
            ok &= ~same[ii, jj]
            weight = np.where(a0 | a1 | b0 | b1 | fa[..., 2] | fb[..., 2], 0.5, 1.0)
            sel = np.nonzero(ok)
            w = weight[sel]
            sg = np.sign(den[sel])
            np.add.at(counts, (ii[sel], jj[sel]), w)
            np.add.at(signed, (ii[sel], jj[sel]), w * sg)
    return np.rint(counts).astype(int), np.rint(signed).astype(int)


# -- the main inequality -----------------------------------------------------------------------

@dataclass
class InequalityReport:
    bound: float
    max_ratio: float
    holds: bool
    maximizers: list
    classifications: list
    truncation_length: float
    n_curves: int

    def as_dict(self) -> dict:
        return {"bound": self.bound, "max_ratio": self.max_ratio, "holds": self.holds,
                "maximizers": self.maximizers, "classifications": self.classifications,
                "truncation_length": self.truncation_length, "n_curves": self.n_curves}


def closed_saddle_connections(s: TranslationSurface, L: float) -> list[SaddleConnection]:
    return [sc for sc in enumerate_saddle_connections(s, L) if sc.is_closed and sc.is_canonical_orientation]


def classify_pair(a: SaddleConnection, b: SaddleConnection, inter: int, l0: float, tol: float = 1e-9) -> str:
    da, db = decompose(a), decompose(b)
    near = lambda x, y: abs(x - y) <= tol * max(1.0, y)
    if near(a.length, l0) and near(b.length, l0) and abs(inter) == 1:
        return "systoles"
    if (da.is_diagonal and db.is_diagonal and near(a.length, math.sqrt(2) * l0)
            and near(b.length, math.sqrt(2) * l0) and abs(inter) == 2):
        return "diagonals"
    for x, y, dx in ((a, b, da), (b, a, db)):
        if (dx.is_side or dx.is_diagonal) and near(x.length, l0) and near(y.length, 2 * l0) and abs(inter) == 2:
            return "short-long"
    return "unclassified"


def ratio_table(scs: Sequence[SaddleConnection]):
    M = intersection_matrix(scs)
    lengths = np.array([sc.length for sc in scs])
    R = np.abs(M) / np.outer(lengths, lengths)
    return M, R


def verify_main_inequality(s: TranslationSurface, L: float, tol: float = 1e-9) -> InequalityReport:
    rep = validate_hypotheses(s)
    bm = s.bouw_moller
    if not ((rep.satisfies_P1 and rep.satisfies_P2) or bm is not None):
        raise IntersectionError("the inequality is only claimed under (P1)+(P2) or for Bouw-Moller surfaces")
    l0 = bm.l0 if bm is not None else s.min_side_length()
    scs = closed_saddle_connections(s, L)
    bound = 1 / l0 ** 2
    if not scs:
        return InequalityReport(bound, 0.0, True, [], [], L, 0)
    M, R = ratio_table(scs)
    rmax = float(R.max())
    ii, jj = np.nonzero(R >= rmax * (1 - tol))
    pairs = [(int(i), int(j)) for i, j in zip(ii, jj) if i < j]
    cls = [classify_pair(scs[i], scs[j], int(M[i, j]), l0) for i, j in pairs]
    return InequalityReport(bound, rmax, rmax <= bound * (1 + tol), pairs, cls, L, len(scs))
