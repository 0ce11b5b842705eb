"""Straight-line flow, saddle connection enumeration and polygonal decompositions."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from .geom import Vec2, cross, dot, norm, point_segment_distance
from .surface import SideRef, TranslationSurface, validate_hypotheses

ANG_TOL = 1e-11
DEFAULT_NODE_CAP = 10**6


class BudgetExceeded(RuntimeError):
    pass


class TracingError(RuntimeError):
    pass


@dataclass(frozen=True)
class Segment:
    polygon: int
    start: Vec2
    end: Vec2
    entry_side: Optional[int]  # None when the segment starts at a vertex
    exit_side: Optional[int]  # None when it ends at a vertex

    @property
    def length(self) -> float:
        return norm(self.end - self.start)


@dataclass(eq=False)
class SaddleConnection:
    surface: TranslationSurface = field(repr=False)
    start_corner: tuple[int, int]
    end_corner: tuple[int, int]
    holonomy: Vec2
    segments: list[Segment] = field(repr=False)
    start_link: float = 0.0
    end_link: float = 0.0

    def __post_init__(self):
        s = self.surface
        self.start_class = s.corner_class[self.start_corner]
        self.end_class = s.corner_class[self.end_corner]
        self.length = norm(self.holonomy)
        self.start_link %= s.cone_angles[self.start_class]
        self.end_link %= s.cone_angles[self.end_class]

    @property
    def is_closed(self) -> bool:
        return self.start_class == self.end_class

    @property
    def consistent_slope(self) -> float:
        x, y = self.holonomy
        if abs(y) <= 1e-12 * self.length:
            return math.inf
        return -x / y

    @property
    def direction_angle(self) -> float:
        return math.atan2(self.holonomy.y, self.holonomy.x) % (2 * math.pi)

    @property
    def is_canonical_orientation(self) -> bool:
        x, y = self.holonomy
        tol = 1e-12 * self.length
        return y > tol or (abs(y) <= tol and x > 0)

    @property
    def key(self) -> tuple:
        return (self.start_class, round(self.holonomy.x, 9), round(self.holonomy.y, 9), round(self.start_link, 9))

    def reversed(self) -> "SaddleConnection":
        segs = [Segment(g.polygon, g.end, g.start, g.exit_side, g.entry_side) for g in reversed(self.segments)]
        return SaddleConnection(self.surface, self.end_corner, self.start_corner, -self.holonomy, segs,
                                self.end_link, self.start_link)

    def side_crossings(self) -> Counter:
        """Signed crossings of the glued edges, each exit counted with the edge orientation."""
        out: Counter = Counter()
        for g in self.segments[:-1]:
            e, sgn = self.surface.edge_of[SideRef(g.polygon, g.exit_side)]
            out[e] += sgn
        return out

    def edge_chain(self) -> Counter:
        """Cellular 1-chain homotopic to this saddle connection, rel endpoints."""
        s = self.surface
        out: Counter = Counter()
        for i, g in enumerate(self.segments):
            nv = len(s.polygons[g.polygon])
            if g.entry_side is None:
                a = self.start_corner[1]
            else:
                a = _ref_vertex(s, g.polygon, g.entry_side)
            if g.exit_side is None:
                b = self.end_corner[1]
            else:
                b = _ref_vertex(s, g.polygon, g.exit_side)
            j = a
            while j != b:
                e, sgn = s.edge_of[SideRef(g.polygon, j)]
                out[e] += sgn
                j = (j + 1) % nv
        return out

    def retrace(self) -> Vec2:
        """Sum of segment vectors; reproduces the holonomy."""
        x = y = 0.0
        for g in self.segments:
            x += g.end.x - g.start.x
            y += g.end.y - g.start.y
        return Vec2(x, y)


def _ref_vertex(s: TranslationSurface, p: int, k: int) -> int:
    # base point of a glued edge: start vertex of its canonical side
    _, sgn = s.edge_of[SideRef(p, k)]
    return k if sgn > 0 else (k + 1) % len(s.polygons[p])


def _angle_from(ref, w) -> float:
    return math.atan2(cross(ref, w), dot(ref, w))


def _end_link(s: TranslationSurface, corner, d) -> float:
    q, w = corner
    e = s.polygons[q].edges[w]
    back = (-d[0], -d[1])
    off = _angle_from(e, back)
    if off < 0:
        off = 0.0 if off > -1e-9 else off + 2 * math.pi
    return s.corner_link[corner] + off


# -- enumeration by unfolding -------------------------------------------------------

def _enumerate_from_corner(s: TranslationSurface, p: int, v: int, L: float, node_cap: int) -> list[SaddleConnection]:
    poly = s.polygons[p]
    nv = len(poly)
    apex = poly.vertices[v]
    ref = poly.edges[v]
    theta_c = s.angles[p][v]
    L2 = L * L * (1 + 1e-12)

    # node arrays: polygon, translation, entry side, parent, exit side in parent
    node_q = [p]
    node_t = [(-apex.x, -apex.y)]
    node_entry = [None]
    node_parent = [-1]
    node_exit = [None]
    hits = []  # (node, vertex index, point)

    verts = poly.vertices
    for w in range(nv):
        if w == v or w == (v - 1) % nv:
            continue
        P = (verts[w].x - apex.x, verts[w].y - apex.y)
        if P[0] * P[0] + P[1] * P[1] <= L2:
            hits.append((0, w, P))
    stack = []
    for k in range(nv):
        if k == v or k == (v - 1) % nv:
            continue
        A = (verts[k].x - apex.x, verts[k].y - apex.y)
        B = (verts[(k + 1) % nv].x - apex.x, verts[(k + 1) % nv].y - apex.y)
        lo = max(0.0, _angle_from(ref, A))
        hi = min(theta_c, _angle_from(ref, B))
        if hi - lo > ANG_TOL and point_segment_distance((0.0, 0.0), A, B) <= L:
            stack.append((0, k, A, B, lo, hi))

    gluing = s.gluing
    polys = s.polygons
    while stack:
        parent, k, A, B, lo, hi = stack.pop()
        q0 = node_q[parent]
        dst = gluing[SideRef(q0, k)]
        q, kk = dst.polygon, dst.side
        qpoly = polys[q]
        qv = qpoly.vertices
        n = len(qv)
        # side kk of q starts where side k of q0 ends
        t = (B[0] - qv[kk].x, B[1] - qv[kk].y)
        idx = len(node_q)
        if idx > node_cap:
            raise BudgetExceeded(f"unfolding from corner {(p, v)} exceeded {node_cap} nodes")
        node_q.append(q)
        node_t.append(t)
        node_entry.append(kk)
        node_parent.append(parent)
        node_exit.append(k)
        pts = [(qv[i].x + t[0], qv[i].y + t[1]) for i in range(n)]
        angs = [_angle_from(ref, P) for P in pts]
        e0, e1 = kk, (kk + 1) % n
        for w in range(n):
            if w == e0 or w == e1:
                continue
            a = angs[w]
            if lo + ANG_TOL < a < hi - ANG_TOL:
                P = pts[w]
                if P[0] * P[0] + P[1] * P[1] <= L2:
                    hits.append((idx, w, P))
        for j in range(n):
            if j == kk:
                continue
            A2 = pts[j]
            B2 = pts[(j + 1) % n]
            if cross(A2, B2) <= 0:
                continue
            lo2 = max(lo, angs[j])
            hi2 = min(hi, angs[(j + 1) % n])
            if hi2 - lo2 > ANG_TOL and point_segment_distance((0.0, 0.0), A2, B2) <= L:
                stack.append((idx, j, A2, B2, lo2, hi2))

    out = []
    start_link0 = s.corner_link[(p, v)]
    for idx, w, P in hits:
        chain = []
        i = idx
        while i != -1:
            chain.append(i)
            i = node_parent[i]
        chain.reverse()
        segs = []
        prev = (0.0, 0.0)
        prev_side = None
        for ci, nid in enumerate(chain):
            q = node_q[nid]
            tx, ty = node_t[nid]
            if ci + 1 < len(chain):
                nxt = chain[ci + 1]
                k = node_exit[nxt]
                qv = polys[q].vertices
                A = (qv[k].x + tx, qv[k].y + ty)
                B = (qv[(k + 1) % len(qv)].x + tx, qv[(k + 1) % len(qv)].y + ty)
                X = _ray_segment_point(P, A, B)
                exit_side = k
            else:
                X = P
                exit_side = None
            segs.append(Segment(q, Vec2(prev[0] - tx, prev[1] - ty), Vec2(X[0] - tx, X[1] - ty),
                                prev_side, exit_side))
            prev = X
            if ci + 1 < len(chain):
                prev_side = node_entry[chain[ci + 1]]
        end_corner = (node_q[idx], w)
        sc = SaddleConnection(s, (p, v), end_corner, Vec2(P[0], P[1]), segs,
                              start_link0 + max(0.0, _angle_from(ref, P)), _end_link(s, end_corner, P))
        out.append(sc)
    return out


def _ray_segment_point(d, A, B):
    # intersection of the ray t*d with segment AB
    e = (B[0] - A[0], B[1] - A[1])
    den = cross(d, e)
    # A + u e lies on the ray: cross(A + u e, d) = 0
    u = cross(A, d) / den if den else 0.0
    u = min(1.0, max(0.0, u))
    return (A[0] + u * e[0], A[1] + u * e[1])


def sort_key(sc: SaddleConnection):
    slope = sc.consistent_slope
    return (round(sc.length, 9), slope if math.isfinite(slope) else math.inf, round(sc.direction_angle, 9),
            sc.start_class, round(sc.start_link, 9))


def enumerate_saddle_connections(s: TranslationSurface, L: float, node_cap: int = DEFAULT_NODE_CAP,
                                 corners=None) -> list[SaddleConnection]:
    """All oriented saddle connections of length at most L, one per outgoing germ."""
    if L <= 0:
        raise ValueError("L must be positive")
    corners = corners if corners is not None else [c for cls in s.vertex_classes for c in cls]
    found: dict = {}
    for p, v in corners:
        for sc in _enumerate_from_corner(s, p, v, L, node_cap):
            found.setdefault(sc.key, sc)
    return sorted(found.values(), key=sort_key)


# -- straight-line tracing ------------------------------------------------------------

def trace_from_vertex(s: TranslationSurface, corner, direction, max_length: float,
                      rel_tol: float = 1e-9) -> Optional[SaddleConnection]:
    """Follow the ray leaving corner in the given direction until it meets a vertex.

    Returns None when max_length is exhausted first.
    """
    p, v = corner
    d = _unit(direction)
    poly = s.polygons[p]
    ref = poly.edges[v]
    off = _angle_from(ref, d)
    if off < -ANG_TOL or off >= s.angles[p][v] - ANG_TOL:
        raise TracingError(f"direction does not leave corner {corner} through its interior")
    X = poly.vertices[v]
    q = p
    skip = {v, (v - 1) % len(poly)}
    entry_side = None
    segs = []
    travelled = 0.0
    while True:
        qpoly = s.polygons[q]
        n = len(qpoly)
        best = None
        for k in range(n):
            if k in skip:
                continue
            A, B = qpoly.vertices[k], qpoly.vertices[(k + 1) % n]
            e = B - A
            den = cross(d, e)
            if abs(den) <= 1e-15 * norm(e):
                continue
            w = A - X
            t = cross(w, e) / den
            u = cross(w, d) / den
            if t <= 1e-12 or u < -rel_tol or u > 1 + rel_tol:
                continue
            if best is None or t < best[0]:
                best = (t, k, u)
        if best is None:
            raise TracingError("ray left the polygon without crossing a side")
        t, k, u = best
        Y = X + d * t
        travelled += t
        if u <= rel_tol or u >= 1 - rel_tol:
            w = k if u <= rel_tol else (k + 1) % n
            Y = qpoly.vertices[w]
            segs.append(Segment(q, X, Y, entry_side, None))
            hol = Vec2(sum(g.end.x - g.start.x for g in segs), sum(g.end.y - g.start.y for g in segs))
            return SaddleConnection(s, corner, (q, w), hol, segs, s.corner_link[corner] + max(off, 0.0),
                                    _end_link(s, (q, w), d))
        segs.append(Segment(q, X, Y, entry_side, k))
        if travelled > max_length:
            return None
        dst = s.gluing[SideRef(q, k)]
        q2poly = s.polygons[dst.polygon]
        A2 = q2poly.vertices[dst.side]
        B2 = q2poly.vertices[(dst.side + 1) % len(q2poly)]
        # A on side k matches B2 on the glued side
        X = B2 + (A2 - B2) * u
        q = dst.polygon
        entry_side = dst.side
        skip = {entry_side}


def _unit(d):
    r = norm(d)
    return Vec2(d[0] / r, d[1] / r)


def germs_in_direction(s: TranslationSurface, direction):
    """Corners whose half-open wedge contains the given direction."""
    d = _unit(direction)
    out = []
    for cls in s.vertex_classes:
        for c in cls:
            ref = s.polygons[c[0]].edges[c[1]]
            off = _angle_from(ref, d)
            if abs(off) <= ANG_TOL:
                off = 0.0
            if 0.0 <= off < s.angles[c[0]][c[1]] - ANG_TOL:
                out.append(c)
    return out


def saddle_connections_in_direction(s: TranslationSurface, direction, max_length: float) -> list[SaddleConnection]:
    """Every saddle connection with the given direction, or raise if one is longer than max_length."""
    out = []
    for c in germs_in_direction(s, direction):
        sc = trace_from_vertex(s, c, direction, max_length)
        if sc is None:
            raise BudgetExceeded(f"separatrix from {c} did not close up within length {max_length}")
        out.append(sc)
    return out


# -- polygonal decomposition ----------------------------------------------------------

@dataclass(frozen=True)
class PolygonalDecomposition:
    k: int
    adjacent: tuple[bool, ...]
    signs: tuple[int, ...]
    p: int
    q: int
    is_odd: bool
    is_side: bool
    is_diagonal: bool

    @property
    def types(self) -> tuple[int, ...]:
        return tuple(2 if a else 1 for a in self.adjacent)

    def adjacent_runs(self) -> list[tuple[int, int]]:
        """Maximal runs of adjacent segments as (start index, length)."""
        runs = []
        i = 0
        while i < self.k:
            if self.adjacent[i]:
                j = i
                while j < self.k and self.adjacent[j]:
                    j += 1
                runs.append((i, j - i))
                i = j
            else:
                i += 1
        return runs


def is_odd_sequence(types) -> bool:
    """Starts and ends with 1, isolated 1s, odd blocks of 2s."""
    if not types or types[0] != 1 or types[-1] != 1:
        return False
    i = 0
    while i < len(types):
        if types[i] == 1:
            if i + 1 < len(types) and types[i + 1] == 1:
                return False
            i += 1
        else:
            j = i
            while j < len(types) and types[j] == 2:
                j += 1
            if (j - i) % 2 == 0:
                return False
            i = j
    return True


def max_adjacent_pairs(adjacent) -> int:
    # q: sum over maximal runs of floor(run / 2), the greedy pairing is optimal
    q, run = 0, 0
    for a in list(adjacent) + [False]:
        if a:
            run += 1
        else:
            q += run // 2
            run = 0
    return q


def decompose(sc: SaddleConnection) -> PolygonalDecomposition:
    s = sc.surface
    adjacent, signs = [], []
    for g in sc.segments:
        n = len(s.polygons[g.polygon])
        if g.entry_side is None or g.exit_side is None:
            adjacent.append(False)
            signs.append(0)
            continue
        diff = (g.exit_side - g.entry_side) % n
        if diff == 1:
            adjacent.append(True)
            signs.append(1)
        elif diff == n - 1:
            adjacent.append(True)
            signs.append(-1)
        else:
            adjacent.append(False)
            signs.append(0)
    k = len(adjacent)
    p = sum(1 for a in adjacent if not a)
    q = max_adjacent_pairs(adjacent)
    types = tuple(2 if a else 1 for a in adjacent)
    is_side = is_diag = False
    if k == 1:
        n = len(s.polygons[sc.segments[0].polygon])
        dv = (sc.end_corner[1] - sc.start_corner[1]) % n
        is_side = dv in (1, n - 1)
        is_diag = not is_side
    return PolygonalDecomposition(k, tuple(adjacent), tuple(signs), p, q, is_odd_sequence(types), is_side, is_diag)


# -- length bounds ----------------------------------------------------------------------

class HypothesisError(ValueError):
    pass


def surface_l0(s: TranslationSurface) -> float:
    return s.min_side_length()


def _length_regime(s: TranslationSurface) -> str:
    bm = getattr(s, "bouw_moller", None)
    if bm is not None and bm.n == 3 and bm.m >= 3:
        return "bm3"
    rep = validate_hypotheses(s)
    if rep.satisfies_P1 and rep.satisfies_P2:
        return "convex"
    raise HypothesisError("length bounds need (P1)+(P2) or a Bouw-Moller surface S_{m,3}")


def check_length_bounds(sc: SaddleConnection, dec: Optional[PolygonalDecomposition] = None,
                        l0: Optional[float] = None, tol: float = 1e-9) -> dict:
    """Evaluate the length lower bounds that apply to sc; every value should be True."""
    s = sc.surface
    regime = _length_regime(s)
    dec = dec or decompose(sc)
    l0 = l0 if l0 is not None else surface_l0(s)
    eps = tol * max(1.0, sc.length)
    L = sc.length
    out = {"pq_bound": L >= (dec.p + dec.q) * l0 - eps,
           "integer_part": math.ceil(dec.k / 2) <= dec.p + dec.q and
           ((math.ceil(dec.k / 2) == dec.p + dec.q) == dec.is_odd)}
    if dec.is_odd and not (dec.is_side or dec.is_diagonal):
        out["odd_bound"] = L >= (dec.p + dec.q + math.sqrt(2) - 1) * l0 - eps
    segs = [g.length for g in sc.segments]
    if regime == "convex":
        out["non_adjacent_segments"] = all(x >= l0 - eps for x, a in zip(segs, dec.adjacent) if not a)
        out["adjacent_pairs"] = all(segs[i] + segs[i + 1] >= l0 - eps
                                    for i in range(dec.k - 1) if dec.adjacent[i] and dec.adjacent[i + 1])
    out["adjacent_triples"] = all(sum(segs[i:i + 3]) >= math.sqrt(2) * l0 - eps
                                  for i in range(dec.k - 2) if all(dec.adjacent[i:i + 3]))
    out["na_a_na_triples"] = all(sum(segs[i:i + 3]) >= (1 + math.sqrt(2)) * l0 - eps
                                 for i in range(dec.k - 2)
                                 if not dec.adjacent[i] and dec.adjacent[i + 1] and not dec.adjacent[i + 2])
    out["alternating_signs"] = all(dec.signs[i] == -dec.signs[i + 1]
                                   for i in range(dec.k - 1) if dec.adjacent[i] and dec.adjacent[i + 1])
    return out
