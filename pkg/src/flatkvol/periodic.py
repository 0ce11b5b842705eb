"""Cylinder decompositions, ribbon graphs, separatrix diagrams and planarity."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .geom import Mat2, Vec2, cross, norm
from .surface import BouwMollerParams, SideRef, TranslationSurface, square_tiled
from .trajectory import BudgetExceeded, SaddleConnection, saddle_connections_in_direction
from .intersection import _local_segments, intersection_matrix

LINK_MATCH = 1e-7


class NonPeriodicError(RuntimeError):
    pass


def slope_vector(d: float) -> Vec2:
    """Direction vector of consistent slope d: (-d, 1), or (1, 0) for d = inf."""
    if math.isinf(d):
        return Vec2(1.0, 0.0)
    return Vec2(-d, 1.0)


def rotation_to_horizontal(d: float) -> Mat2:
    v = slope_vector(d)
    return Mat2.rotation(-math.atan2(v[1], v[0]))


# -- cylinders ------------------------------------------------------------------------

@dataclass
class Cylinder:
    width: float
    height: float
    top: list[int]  # saddle connection indices, left to right
    bottom: list[int]  # right to left

    @property
    def modulus(self) -> float:
        return self.width / self.height

    @property
    def area(self) -> float:
        return self.width * self.height


@dataclass
class CylinderDecomposition:
    direction: float
    is_periodic: bool
    cylinders: list[Cylinder] = field(default_factory=list)
    saddle_connections: list[SaddleConnection] = field(default_factory=list)
    rotated: Optional[TranslationSurface] = field(default=None, repr=False)
    top_of: list[int] = field(default_factory=list)  # cylinder below each saddle connection
    bottom_of: list[int] = field(default_factory=list)  # cylinder above it

    def require_periodic(self):
        if not self.is_periodic:
            raise NonPeriodicError(f"direction {self.direction} is not periodic within the trace budget")

    def total_area(self) -> float:
        return sum(c.area for c in self.cylinders)


def _germ_index(scs: Sequence[SaddleConnection], s: TranslationSurface):
    table: dict[int, list[tuple[float, int]]] = {}
    for i, sc in enumerate(scs):
        table.setdefault(sc.start_class, []).append((sc.start_link, i))

    def lookup(cls: int, pos: float) -> int:
        cone = s.cone_angles[cls]
        pos %= cone
        for p, i in table.get(cls, []):
            dd = abs(p - pos) % cone
            if min(dd, cone - dd) < LINK_MATCH:
                return i
        raise NonPeriodicError(f"no horizontal separatrix at link position {pos} of cone point {cls}")

    return lookup


def _cycles(perm: list[int]) -> list[list[int]]:
    seen = [False] * len(perm)
    out = []
    for i in range(len(perm)):
        if seen[i]:
            continue
        cyc = []
        j = i
        while not seen[j]:
            seen[j] = True
            cyc.append(j)
            j = perm[j]
        out.append(cyc)
    return out


def _inside(poly, pt, eps) -> bool:
    vs = poly.vertices
    n = len(vs)
    for k in range(n):
        a, b = vs[k], vs[(k + 1) % n]
        if cross(b - a, pt - a) < -eps * norm(b - a):
            return False
    return True


def _barriers(scs: Sequence[SaddleConnection], npoly: int):
    """Horizontal pieces (y, xmin, xmax, sc index) per polygon, ghosts included."""
    out: list[list[tuple[float, float, float, int]]] = [[] for _ in range(npoly)]
    for i, sc in enumerate(scs):
        for q, P, Q, *_ in _local_segments(sc):
            out[q].append((0.5 * (P.y + Q.y), min(P.x, Q.x), max(P.x, Q.x), i))
    return out


def _vertical_hit(s: TranslationSurface, q: int, X: Vec2, barriers, budget: float, eps: float):
    """Rise from X in polygon q until a horizontal saddle connection; return (index, height)."""
    up = Vec2(0.0, 1.0)
    risen = 0.0
    entry = None
    while risen <= budget:
        poly = s.polygons[q]
        n = len(poly)
        best = None
        for k in range(n):
            if k == entry:
                continue
            A, B = poly.vertices[k], poly.vertices[(k + 1) % n]
            e = B - A
            den = cross(up, e)
            if abs(den) <= 1e-15 * norm(e):
                continue
            w = A - X
            t = cross(w, e) / den
            u = cross(w, up) / den
            if t <= eps or u < -1e-12 or u > 1 + 1e-12:
                continue
            if best is None or t < best[0]:
                best = (t, k, u)
        hit = None
        for y, x0, x1, i in barriers[q]:
            t = y - X.y
            if t > eps and x0 - eps <= X.x <= x1 + eps:
                if min(X.x - x0, x1 - X.x) <= eps:
                    raise BudgetExceeded("vertical probe passes through a cone point")
                if hit is None or t < hit[0]:
                    hit = (t, i)
        if hit is not None and (best is None or hit[0] <= best[0] + eps):
            return hit[1], risen + hit[0]
        if best is None:
            raise BudgetExceeded("vertical probe left a polygon without crossing a side")
        t, k, u = best
        if u <= 1e-9 or u >= 1 - 1e-9:
            raise BudgetExceeded("vertical probe passes through a cone point")
        risen += t
        dst = s.gluing[SideRef(q, k)]
        p2 = s.polygons[dst.polygon]
        A2 = p2.vertices[dst.side]
        B2 = p2.vertices[(dst.side + 1) % len(p2)]
        X = B2 + (A2 - B2) * u
        q, entry = dst.polygon, dst.side
    raise BudgetExceeded("vertical probe exceeded its budget")


def _height_probe(rs: TranslationSurface, sc: SaddleConnection, barriers, budget: float):
    eps = 1e-10 * max(1.0, rs.diameter())
    pieces = _local_segments(sc)
    last_err = None
    for frac in (0.4142135623730951, 0.3090169943749474, 0.6180339887498949, 0.2360679774997897):
        for q, P, Q, *_ in pieces:
            X = P + (Q - P) * frac
            if not _inside(rs.polygons[q], X + Vec2(0.0, 1e-7 * max(1.0, rs.diameter())), 0.0):
                continue
            try:
                return _vertical_hit(rs, q, X, barriers, budget, eps)
            except BudgetExceeded as exc:
                last_err = exc
    raise NonPeriodicError(f"height probe failed: {last_err}")


def cylinder_decomposition(s: TranslationSurface, d: float = math.inf,
                           budget: Optional[float] = None) -> CylinderDecomposition:
    """Cylinders in the direction of consistent slope d (inf is horizontal).

    The surface is rotated so that d points along +x. A direction whose separatrices do
    not all reach a cone point within the length budget is reported as non-periodic.
    """
    budget = budget if budget is not None else 1e3 * s.diameter()
    rs = s.transformed(rotation_to_horizontal(d))
    try:
        scs = saddle_connections_in_direction(rs, (1.0, 0.0), budget)
    except BudgetExceeded:
        return CylinderDecomposition(d, False, rotated=rs)
    lookup = _germ_index(scs, rs)
    bottom_next = [lookup(sc.end_class, sc.end_link - math.pi) for sc in scs]
    top_next = [lookup(sc.end_class, sc.end_link + math.pi) for sc in scs]
    bottoms = _cycles(bottom_next)
    tops = _cycles(top_next)
    top_cycle = {i: k for k, cyc in enumerate(tops) for i in cyc}
    barriers = _barriers(scs, len(rs.polygons))

    cyls = []
    used = set()
    for cyc in bottoms:
        width = sum(scs[i].length for i in cyc)
        j, h = _height_probe(rs, scs[cyc[0]], barriers, budget)
        k = top_cycle[j]
        if k in used:
            raise NonPeriodicError("two cylinders share a top boundary")
        used.add(k)
        top = tops[k]
        twidth = sum(scs[i].length for i in top)
        if abs(twidth - width) > 1e-8 * max(1.0, width):
            raise NonPeriodicError("cylinder top and bottom have different lengths")
        # rotate the cyclic orders to a deterministic start
        top = top[top.index(min(top)):] + top[:top.index(min(top))]
        bot = cyc[cyc.index(min(cyc)):] + cyc[:cyc.index(min(cyc))]
        cyls.append(Cylinder(width, h, top, [bot[0]] + bot[:0:-1]))
    top_of = [0] * len(scs)
    bottom_of = [0] * len(scs)
    for ci, c in enumerate(cyls):
        for i in c.top:
            top_of[i] = ci
        for i in c.bottom:
            bottom_of[i] = ci
    return CylinderDecomposition(d, True, cyls, scs, rs, top_of, bottom_of)


# -- horizontal geometry of Bouw-Moller surfaces ---------------------------------------

@dataclass(frozen=True)
class HorizontalGeometry:
    l0: float
    l1: float
    l2: float
    h0: float
    h1: float
    h2: float
    s: float
    cylinder_count: int

    @classmethod
    def closed_form(cls, m: int, n: int) -> "HorizontalGeometry":
        cm, cn = math.cos(math.pi / m), math.cos(math.pi / n)
        l0 = math.sin(math.pi / m)
        h0 = math.sin(math.pi / n) * l0
        return cls(l0, 2 * cn * l0, 2 * cm * l0, h0, 2 * cn * h0, 2 * cm * h0,
                   BouwMollerParams(m, n).modulus, (m - 1) * (n - 1) // 2)


def _distinct(values, tol=1e-9):
    out: list[list] = []
    for v in sorted(values):
        if out and abs(v - out[-1][0]) <= tol * max(1.0, v):
            out[-1][1] += 1
        else:
            out.append([v, 1])
    return [(v, c) for v, c in out]


@dataclass
class MeasuredHorizontal:
    lengths: list[tuple[float, int]]  # distinct values with multiplicities
    heights: list[tuple[float, int]]
    moduli: list[float]
    cylinder_count: int


def measure_horizontal(s: TranslationSurface, d: float = math.inf) -> MeasuredHorizontal:
    dec = cylinder_decomposition(s, d)
    dec.require_periodic()
    return MeasuredHorizontal(
        _distinct(sc.length for sc in dec.saddle_connections),
        _distinct(c.height for c in dec.cylinders),
        [c.modulus for c in dec.cylinders],
        len(dec.cylinders),
    )


def compare_horizontal_geometry(s: TranslationSurface) -> dict:
    """Deviations between the measured decomposition of S_{m,n} and the closed forms.

    The three smallest distinct measured lengths (heights) are compared with the
    distinct positive closed-form values l0, l1, l2 (h0, h1, h2).
    """
    bm = s.bouw_moller
    if bm is None:
        raise ValueError("surface was not built by build_bouw_moller")
    cf = HorizontalGeometry.closed_form(bm.m, bm.n)
    meas = measure_horizontal(s)

    def dev(expected, observed):
        exp = [v for v, _ in _distinct([x for x in expected if x > 1e-12])]
        obs = [v for v, _ in observed[:len(exp)]]
        if len(obs) < len(exp):
            return math.inf
        return max(abs(a - b) for a, b in zip(exp, obs))

    return {
        "expected": cf,
        "measured": meas,
        "length_deviation": dev([cf.l0, cf.l1, cf.l2], meas.lengths),
        "height_deviation": dev([cf.h0, cf.h1, cf.h2], meas.heights),
        "modulus_deviation": max(abs(x - cf.s) for x in meas.moduli),
        "count_ok": meas.cylinder_count == cf.cylinder_count,
        "l0_deviation": abs(meas.lengths[0][0] - cf.l0),
    }


# -- ribbon graphs ------------------------------------------------------------------------

class RibbonGraph:
    """Darts 2e and 2e+1 form edge e; `rotation` is the ccw successor of each dart at its vertex."""

    def __init__(self, num_vertices: int, dart_vertex: Sequence[int], rotation: Sequence[int],
                 labels: Optional[Sequence] = None):
        self.num_vertices = num_vertices
        self.dart_vertex = list(dart_vertex)
        self.rotation = list(rotation)
        nd = len(self.rotation)
        if nd % 2 or len(self.dart_vertex) != nd:
            raise ValueError("need an even number of darts with a vertex each")
        if sorted(self.rotation) != list(range(nd)):
            raise ValueError("rotation is not a permutation")
        for d in range(nd):
            if self.dart_vertex[self.rotation[d]] != self.dart_vertex[d]:
                raise ValueError("rotation moves a dart to another vertex")
        self.labels = list(labels) if labels is not None else list(range(nd // 2))

    @classmethod
    def from_cyclic_orders(cls, orders: Sequence[Sequence[int]], labels=None) -> "RibbonGraph":
        """orders[v] lists the darts at vertex v counterclockwise."""
        nd = sum(len(o) for o in orders)
        vert = [0] * nd
        rot = [0] * nd
        for v, o in enumerate(orders):
            for i, dart in enumerate(o):
                vert[dart] = v
                rot[dart] = o[(i + 1) % len(o)]
        return cls(len(orders), vert, rot, labels)

    @property
    def num_edges(self) -> int:
        return len(self.rotation) // 2

    @staticmethod
    def involution(d: int) -> int:
        return d ^ 1

    def faces(self) -> list[list[int]]:
        nd = len(self.rotation)
        phi = [self.rotation[d ^ 1] for d in range(nd)]
        return _cycles(phi)

    def components(self) -> list[tuple[set, set]]:
        """(vertices, darts) of each connected component."""
        parent = list(range(self.num_vertices))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in range(self.num_edges):
            a, b = find(self.dart_vertex[2 * e]), find(self.dart_vertex[2 * e + 1])
            parent[a] = b
        groups: dict[int, tuple[set, set]] = {}
        for v in range(self.num_vertices):
            groups.setdefault(find(v), (set(), set()))[0].add(v)
        for d, v in enumerate(self.dart_vertex):
            groups[find(v)][1].add(d)
        return list(groups.values())

    def genera(self) -> list[int]:
        faces = self.faces()
        out = []
        for verts, darts in self.components():
            if not darts:
                out.append(0)
                continue
            F = sum(1 for f in faces if f[0] in darts)
            chi = len(verts) - len(darts) // 2 + F
            if chi % 2 or chi > 2:
                raise ValueError("inconsistent ribbon graph")
            out.append((2 - chi) // 2)
        return out

    @property
    def genus(self) -> int:
        return sum(self.genera())

    def euler_characteristic(self) -> int:
        return self.num_vertices - self.num_edges + len(self.faces())


def is_planar(g: RibbonGraph) -> bool:
    return all(x == 0 for x in g.genera())


def interleaved_bouquet() -> RibbonGraph:
    """One vertex with two loops a, b in rotation a b a' b'."""
    return RibbonGraph.from_cyclic_orders([[0, 2, 1, 3]], labels=["a", "b"])


def two_cylinder_nonplanar_example() -> TranslationSurface:
    # five squares, one cone point of angle 10 pi, horizontal cylinders of widths 1 and 4
    return square_tiled([0, 2, 3, 4, 1], [1, 0, 2, 4, 3])


def separatrix_diagram(s: TranslationSurface, d: float = math.inf,
                       dec: Optional[CylinderDecomposition] = None) -> RibbonGraph:
    """Vertices are cone points, edges the saddle connections in direction d.

    Dart 2e is the outgoing end of saddle connection e, dart 2e+1 its incoming end;
    darts at a cone point are ordered by their link position.
    """
    dec = dec or cylinder_decomposition(s, d)
    dec.require_periodic()
    rs = dec.rotated
    at: dict[int, list[tuple[float, int]]] = {c: [] for c in range(rs.num_singularities)}
    for e, sc in enumerate(dec.saddle_connections):
        at[sc.start_class].append((sc.start_link, 2 * e))
        at[sc.end_class].append((sc.end_link, 2 * e + 1))
    orders = [[dart for _, dart in sorted(at[c])] for c in range(rs.num_singularities)]
    return RibbonGraph.from_cyclic_orders(orders)


def dual_separatrix_diagram(s: TranslationSurface, d: float = math.inf,
                            dec: Optional[CylinderDecomposition] = None) -> RibbonGraph:
    """Vertices C_i+ (2i, top of cylinder i) and C_i- (2i+1, bottom), one edge per saddle connection.

    Dart 2e sits at the top of the cylinder below saddle connection e, dart 2e+1 at the
    bottom of the cylinder above it. Tops are ordered left to right, bottoms right to left.
    """
    dec = dec or cylinder_decomposition(s, d)
    dec.require_periodic()
    orders = []
    for c in dec.cylinders:
        orders.append([2 * e for e in c.top])
        orders.append([2 * e + 1 for e in c.bottom])
    return RibbonGraph.from_cyclic_orders(orders)


def kvol_bounded_on_orbit(s: TranslationSurface, directions: Sequence[float]):
    """(True, None) if every listed direction has a planar separatrix diagram, else (False, witness)."""
    for d in directions:
        dec = cylinder_decomposition(s, d)
        dec.require_periodic()
        if not is_planar(separatrix_diagram(s, d, dec)):
            return False, d
    return True, None


def closed_curve_basis(dec: CylinderDecomposition) -> list[list[SaddleConnection]]:
    """A basis of the cycle space of the graph formed by the saddle connections of dec."""
    dec.require_periodic()
    scs = dec.saddle_connections
    nv = dec.rotated.num_singularities
    adj: dict[int, list[tuple[int, int, bool]]] = {v: [] for v in range(nv)}
    for i, sc in enumerate(scs):
        adj[sc.start_class].append((i, sc.end_class, False))
        adj[sc.end_class].append((i, sc.start_class, True))
    # spanning forest by BFS, recording the tree path back to the root
    path: dict[int, list[SaddleConnection]] = {}
    tree = set()
    for root in range(nv):
        if root in path:
            continue
        path[root] = []
        queue = [root]
        while queue:
            v = queue.pop(0)
            for i, w, rev in adj[v]:
                if w not in path:
                    sc = scs[i].reversed() if rev else scs[i]
                    path[w] = path[v] + [sc]
                    tree.add(i)
                    queue.append(w)
    basis = []
    for i, sc in enumerate(scs):
        if i in tree:
            continue
        a, b = sc.start_class, sc.end_class
        # root -> a, then sc, then b -> root
        loop = path[a] + [sc] + [x.reversed() for x in reversed(path[b])]
        basis.append(_reduce(loop))
    return basis


def _reduce(loop: list[SaddleConnection]) -> list[SaddleConnection]:
    # drop immediate backtracks so the curve is a reduced cycle
    out: list[SaddleConnection] = []
    for sc in loop:
        if out and out[-1].key == sc.reversed().key:
            out.pop()
        else:
            out.append(sc)
    while len(out) > 1 and out[0].key == out[-1].reversed().key:
        out = out[1:-1]
    return out


def pairwise_intersections_vanish(dec: CylinderDecomposition) -> bool:
    basis = closed_curve_basis(dec)
    if not basis:
        return True
    return not intersection_matrix(basis, dec.rotated).any()
