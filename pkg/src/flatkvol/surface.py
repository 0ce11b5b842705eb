"""Translation surfaces glued from convex polygons, and the Bouw-Moller family."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

from .geom import (DEFAULT_TOL, GeometryError, Mat2, Polygon, Tolerance, cross, dot,
                   interior_angles, norm, semi_regular_polygon, vec)

TWO_PI = 2 * math.pi
ANGLE_SNAP = 1e-6


class SurfaceError(ValueError):
    pass


class SideRef(NamedTuple):
    polygon: int
    side: int


@dataclass(frozen=True)
class Germ:
    """A polygon side leaving a cone point, seen on its link circle."""

    position: float
    edge: int
    sign: int
    corner: tuple[int, int]


class TranslationSurface:
    """Polygons plus a side-pairing involution, with derived cone-point data.

    Side k of a polygon runs from vertex k to vertex k+1. A corner (p, v) is the
    wedge of polygon p at vertex v; corners are grouped into cone points and
    placed on the link circle in counterclockwise order.
    """

    def __init__(self, polygons, gluing, tol: Tolerance = DEFAULT_TOL):
        self.polygons: list[Polygon] = [p if isinstance(p, Polygon) else Polygon(tuple(p)) for p in polygons]
        self.tol = tol
        self.bouw_moller: BouwMollerParams | None = None
        self.gluing: dict[SideRef, SideRef] = {}
        for a, b in _gluing_pairs(gluing):
            a, b = SideRef(*a), SideRef(*b)
            for s in (a, b):
                if not (0 <= s.polygon < len(self.polygons) and 0 <= s.side < len(self.polygons[s.polygon])):
                    raise SurfaceError(f"side {tuple(s)} out of range")
                if s in self.gluing:
                    raise SurfaceError(f"side {tuple(s)} glued twice")
            if a == b:
                raise SurfaceError(f"side {tuple(a)} glued to itself")
            self.gluing[a] = b
            self.gluing[b] = a
        all_sides = [SideRef(p, k) for p, poly in enumerate(self.polygons) for k in range(len(poly))]
        missing = [tuple(s) for s in all_sides if s not in self.gluing]
        if missing:
            raise SurfaceError(f"incomplete gluing, unpaired sides: {missing}")
        self._check_sides()
        self._build_edges()
        self._build_vertices()

    # -- construction helpers -------------------------------------------------

    def _check_sides(self):
        for a, b in self.gluing.items():
            ea = self.edge_vector(a)
            eb = self.edge_vector(b)
            scale = max(norm(ea), norm(eb))
            if norm((ea[0] + eb[0], ea[1] + eb[1])) <= self.tol.eps_rel * scale * 10:
                continue
            if norm((ea[0] - eb[0], ea[1] - eb[1])) <= self.tol.eps_rel * scale * 10:
                raise SurfaceError(f"orientation error: sides {tuple(a)} and {tuple(b)} have both normals outward")
            raise SurfaceError(f"mismatched sides {tuple(a)} and {tuple(b)}: not parallel or unequal length")

    def _build_edges(self):
        self.edges: list[tuple[SideRef, SideRef]] = []
        self.edge_of: dict[SideRef, tuple[int, int]] = {}
        for a in sorted(self.gluing):
            b = self.gluing[a]
            if a < b:
                idx = len(self.edges)
                self.edges.append((a, b))
                self.edge_of[a] = (idx, 1)
                self.edge_of[b] = (idx, -1)

    def _build_vertices(self):
        self.angles = [interior_angles(p) for p in self.polygons]
        corners = [(p, v) for p, poly in enumerate(self.polygons) for v in range(len(poly))]
        seen: set = set()
        self.vertex_classes: list[list[tuple[int, int]]] = []
        self.corner_class: dict[tuple[int, int], int] = {}
        self.corner_link: dict[tuple[int, int], float] = {}
        self.cone_angles: list[float] = []
        self.germs: list[list[Germ]] = []
        for c0 in corners:
            if c0 in seen:
                continue
            cls = []
            c = c0
            pos = 0.0
            while c not in seen:
                seen.add(c)
                cls.append(c)
                self.corner_class[c] = len(self.vertex_classes)
                self.corner_link[c] = pos
                pos += self.angles[c[0]][c[1]]
                c = self.next_corner(c)
            if c != c0:
                raise SurfaceError("corner cycle does not close; gluing is inconsistent")
            k = round(pos / TWO_PI)
            if k < 1 or abs(pos - k * TWO_PI) > ANGLE_SNAP * TWO_PI:
                raise SurfaceError(f"cone angle {pos} is not a positive multiple of 2pi")
            self.vertex_classes.append(cls)
            self.cone_angles.append(pos)
            germs = []
            for cc in cls:
                e, sgn = self.edge_of[SideRef(*cc)]
                germs.append(Germ(self.corner_link[cc], e, sgn, cc))
            self.germs.append(germs)
        self.cone_multiples = [round(a / TWO_PI) for a in self.cone_angles]
        chi2 = sum(k - 1 for k in self.cone_multiples) + 2
        if chi2 % 2:
            raise SurfaceError("Gauss-Bonnet parity failure")
        self.genus = chi2 // 2

    # -- basic queries ----------------------------------------------------------

    def next_corner(self, c):
        """Counterclockwise successor of corner c around its cone point."""
        p, v = c
        n = len(self.polygons[p])
        q = self.gluing[SideRef(p, (v - 1) % n)]
        return (q.polygon, q.side)

    def edge_vector(self, s):
        return self.polygons[s[0]].edges[s[1]]

    def vertex(self, p: int, v: int):
        return self.polygons[p].vertices[v % len(self.polygons[p])]

    @property
    def num_singularities(self) -> int:
        return len(self.vertex_classes)

    @property
    def area(self) -> float:
        return sum(p.area for p in self.polygons)

    def min_side_length(self) -> float:
        return min(norm(e) for p in self.polygons for e in p.edges)

    def diameter(self) -> float:
        return max(p.diameter() for p in self.polygons)

    def stratum(self) -> list[int]:
        return sorted((k - 1 for k in self.cone_multiples), reverse=True)

    def corner_angle(self, c) -> float:
        return self.angles[c[0]][c[1]]

    def gluing_pairs(self):
        return [(tuple(a), tuple(b)) for a, b in self.edges]

    def transformed(self, m: Mat2) -> "TranslationSurface":
        if m.det <= 0:
            raise SurfaceError("only orientation preserving maps act on translation surfaces")
        return TranslationSurface([p.transformed(m) for p in self.polygons], self.gluing_pairs(), self.tol)

    def scaled(self, lam: float) -> "TranslationSurface":
        return self.transformed(Mat2.diag(lam, lam))

    def to_dict(self) -> dict:
        return {
            "polygons": [[[v.x, v.y] for v in p.vertices] for p in self.polygons],
            "gluings": [[list(a), list(b)] for a, b in self.gluing_pairs()],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "TranslationSurface":
        try:
            polys = [Polygon(tuple(vec(*v) for v in p)) for p in data["polygons"]]
            pairs = [(tuple(a), tuple(b)) for a, b in data["gluings"]]
        except (KeyError, TypeError) as exc:
            raise SurfaceError(f"malformed surface description: {exc}") from exc
        return cls(polys, pairs)

    @classmethod
    def from_json(cls, text: str) -> "TranslationSurface":
        return cls.from_dict(json.loads(text))

    def __repr__(self):
        return (f"TranslationSurface({len(self.polygons)} polygons, genus {self.genus}, "
                f"cone angles {[round(a / math.pi, 6) for a in self.cone_angles]}pi)")


def _gluing_pairs(gluing):
    if isinstance(gluing, dict):
        seen = set()
        for a, b in gluing.items():
            a, b = tuple(a), tuple(b)
            if tuple(gluing.get(b, ())) != a and tuple(gluing.get(tuple(b), ())) != a:
                raise SurfaceError(f"gluing is not an involution at {a}")
            key = tuple(sorted((a, b)))
            if key not in seen:
                seen.add(key)
                yield a, b
    else:
        for pair in gluing:
            a, b = pair
            yield tuple(a), tuple(b)


def build_surface(polygons, gluing, tol: Tolerance = DEFAULT_TOL) -> TranslationSurface:
    return TranslationSurface(polygons, gluing, tol)


# -- Bouw-Moller family -----------------------------------------------------------

@dataclass(frozen=True)
class BouwMollerParams:
    m: int
    n: int
    gamma: int = field(init=False)
    l0: float = field(init=False)

    def __post_init__(self):
        if self.m < 2 or self.n < 2 or self.m * self.n < 6:
            raise SurfaceError(f"Bouw-Moller parameters need m, n >= 2 and mn >= 6, got ({self.m}, {self.n})")
        object.__setattr__(self, "gamma", math.gcd(self.m, self.n))
        object.__setattr__(self, "l0", math.sin(math.pi / self.m))

    @property
    def coprime(self) -> bool:
        return self.gamma == 1

    @property
    def expected_cone_angle(self) -> float:
        m, n = self.m, self.n
        return TWO_PI * (m * n - m - n) / self.gamma

    @property
    def expected_genus(self) -> int:
        m, n = self.m, self.n
        return (m * n - m - n - self.gamma) // 2 + 1

    @property
    def modulus(self) -> float:
        m, n = self.m, self.n
        return 2 * (math.cos(math.pi / n) + math.cos(math.pi / m)) / math.sin(math.pi / n)


def _sin_pi_frac(k: int, m: int) -> float:
    return 0.0 if k % m == 0 else math.sin(k * math.pi / m)


def bouw_moller_polygon(m: int, n: int, i: int) -> tuple[Polygon, list[int]]:
    """P(i) together with the direction index j of each kept side."""
    ka, kb = i + 1, i
    if n % 2 == 0 and i % 2 == 1:
        ka, kb = kb, ka
    a, b = _sin_pi_frac(ka, m), _sin_pi_frac(kb, m)
    poly = semi_regular_polygon(n, a, b)
    dirs = [j for j in range(2 * n) if (a if j % 2 == 0 else b) > 0]
    return poly, dirs


def build_bouw_moller(params: BouwMollerParams | tuple, gap: float = 0.5) -> TranslationSurface:
    """S_{m,n} from m semi-regular polygons, sides paired with the neighbouring polygons."""
    if not isinstance(params, BouwMollerParams):
        params = BouwMollerParams(*params)
    m, n = params.m, params.n
    polys, dirs = [], []
    x = 0.0
    for i in range(m):
        poly, d = bouw_moller_polygon(m, n, i)
        xmin = min(v.x for v in poly.vertices)
        xmax = max(v.x for v in poly.vertices)
        if i > 0:
            poly = poly.translated((x - xmin, 0.0))
            x += xmax - xmin
        else:
            x = xmax
        x += gap
        polys.append(poly)
        dirs.append(d)
    index = [{j: k for k, j in enumerate(d)} for d in dirs]
    pairs = []
    for i in range(m):
        for k, j in enumerate(dirs[i]):
            if n % 2:
                other = i + 1 if j % 2 == 0 else i - 1
            else:
                other = i + 1 if (i + j) % 2 == 0 else i - 1
            jj = (j + n) % (2 * n)
            if not (0 <= other < m) or jj not in index[other]:
                raise SurfaceError(f"no partner for side {j} of P({i})")
            if i < other:
                pairs.append(((i, k), (other, index[other][jj])))
    surf = TranslationSurface(polys, pairs)
    surf.bouw_moller = params
    return surf


# -- other constructors -----------------------------------------------------------

def square_tiled(right: list[int], top: list[int], size: float = 1.0) -> TranslationSurface:
    """Square-tiled surface: square i has square right[i] on its right and top[i] above it."""
    k = len(right)
    if sorted(right) != list(range(k)) or sorted(top) != list(range(k)):
        raise SurfaceError("right and top must be permutations")
    polys = []
    for i in range(k):
        x0 = 1.5 * size * i
        polys.append(Polygon(((x0, 0.0), (x0 + size, 0.0), (x0 + size, size), (x0, size))))
    pairs = []
    for i in range(k):
        pairs.append(((i, 1), (right[i], 3)))
        pairs.append(((i, 2), (top[i], 0)))
    return TranslationSurface(polys, pairs)


def square_torus(size: float = 1.0) -> TranslationSurface:
    return square_tiled([0], [0], size)


def equilateral_l_surface(side: float = 1.0) -> TranslationSurface:
    """L-shaped surface of three unit rhombi, each cut into two equilateral triangles."""
    e1 = (side, 0.0)
    e2 = (side / 2, side * math.sqrt(3) / 2)
    origins = [(0.0, 0.0), (3 * side, 0.0), (0.0, 2 * side)]
    tris = []
    for ox, oy in origins:
        p0 = (ox, oy)
        p1 = (ox + e1[0], oy + e1[1])
        p2 = (ox + e1[0] + e2[0], oy + e1[1] + e2[1])
        p3 = (ox + e2[0], oy + e2[1])
        tris.append(Polygon((p0, p1, p3)))  # sides: bottom, diagonal, left(reversed)
        tris.append(Polygon((p1, p2, p3)))  # sides: right, top(reversed), diagonal
    # rhombus r has lower triangle 2r and upper triangle 2r+1
    bottom = lambda r: (2 * r, 0)
    left = lambda r: (2 * r, 2)
    right = lambda r: (2 * r + 1, 0)
    top = lambda r: (2 * r + 1, 1)
    pairs = [((2 * r, 1), (2 * r + 1, 2)) for r in range(3)]
    # rhombus 0 at the corner, 1 to its right, 2 above it
    right_of = [1, 0, 2]
    above = [2, 1, 0]
    for r in range(3):
        pairs.append((right(r), left(right_of[r])))
        pairs.append((top(r), bottom(above[r])))
    return TranslationSurface(tris, pairs)


# -- hypotheses (P1), (P1'), (P2) ---------------------------------------------------

@dataclass(frozen=True)
class ValidationReport:
    satisfies_P1: bool
    satisfies_P1prime: bool
    satisfies_P2: bool
    theta0: float
    convex: bool

    def as_dict(self) -> dict:
        return {"P1": self.satisfies_P1, "P1prime": self.satisfies_P1prime,
                "P2": self.satisfies_P2, "theta0": self.theta0, "convex": self.convex}


def validate_hypotheses(s: TranslationSurface, eps: float = 1e-9) -> ValidationReport:
    convex = all(p.is_convex() for p in s.polygons)
    all_angles = [a for angs in s.angles for a in angs]
    theta0 = min(all_angles)
    p1 = convex and theta0 >= math.pi / 2 - eps
    consecutive_ok = all(s.corner_angle(c) + s.corner_angle(s.next_corner(c)) >= math.pi - eps
                         for cls in s.vertex_classes for c in cls)
    p1p = convex and consecutive_ok
    p2 = all(a.polygon != b.polygon for a, b in s.gluing.items())
    return ValidationReport(p1, p1p, p2, theta0, convex)


def systoles(s: TranslationSurface, tol: float = 1e-9):
    """Shortest closed saddle connections, one per unoriented curve."""
    from .trajectory import enumerate_saddle_connections

    L = s.min_side_length() * (1 + 1e-6)
    for _ in range(12):
        closed = [sc for sc in enumerate_saddle_connections(s, L) if sc.is_closed]
        if closed:
            lmin = min(sc.length for sc in closed)
            return [sc for sc in closed if sc.length <= lmin * (1 + tol) and sc.is_canonical_orientation]
        L *= 1.5
    return []
