"""Planar vectors, 2x2 matrices, convex polygons and tolerance helpers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class Tolerance:
    eps_rel: float = 1e-9
    eps_len: float = 1e-9

    def __post_init__(self):
        if not (self.eps_rel > 0 and self.eps_len > 0):
            raise GeometryError("tolerances must be strictly positive")

    def scaled(self, length: float) -> "Tolerance":
        return Tolerance(self.eps_rel, self.eps_rel * max(length, 1e-300))


DEFAULT_TOL = Tolerance()


class Vec2(NamedTuple):
    x: float
    y: float

    def __add__(self, o):
        return Vec2(self.x + o[0], self.y + o[1])

    def __sub__(self, o):
        return Vec2(self.x - o[0], self.y - o[1])

    def __neg__(self):
        return Vec2(-self.x, -self.y)

    def __mul__(self, k):
        return Vec2(self.x * k, self.y * k)

    __rmul__ = __mul__

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def angle(self) -> float:
        return math.atan2(self.y, self.x)


def vec(x, y) -> Vec2:
    v = Vec2(float(x), float(y))
    if not (math.isfinite(v.x) and math.isfinite(v.y)):
        raise GeometryError(f"non-finite vector {v}")
    return v


def cross(u, v) -> float:
    return u[0] * v[1] - u[1] * v[0]


def dot(u, v) -> float:
    return u[0] * v[0] + u[1] * v[1]


def norm(u) -> float:
    return math.hypot(u[0], u[1])


@dataclass(frozen=True)
class Mat2:
    """Matrix [[a, b], [c, d]] acting on column vectors."""

    a: float
    b: float
    c: float
    d: float

    @classmethod
    def identity(cls) -> "Mat2":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def rotation(cls, t: float) -> "Mat2":
        c, s = math.cos(t), math.sin(t)
        return cls(c, -s, s, c)

    @classmethod
    def diag(cls, p: float, q: float) -> "Mat2":
        return cls(p, 0.0, 0.0, q)

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def is_unimodular(self, eps: float = 1e-9) -> bool:
        return abs(self.det - 1.0) < eps

    def __matmul__(self, o):
        if isinstance(o, Mat2):
            return Mat2(self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
                        self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d)
        return Vec2(self.a * o[0] + self.b * o[1], self.c * o[0] + self.d * o[1])

    def apply(self, v) -> Vec2:
        return self @ v

    def inverse(self) -> "Mat2":
        det = self.det
        if det == 0:
            raise GeometryError("singular matrix")
        return Mat2(self.d / det, -self.b / det, -self.c / det, self.a / det)

    def singular_values(self) -> tuple[float, float]:
        # closed form for 2x2: s1*s2 = |det|, s1^2 + s2^2 = frobenius^2
        f2 = self.a ** 2 + self.b ** 2 + self.c ** 2 + self.d ** 2
        det = abs(self.det)
        disc = math.sqrt(max(f2 * f2 - 4 * det * det, 0.0))
        smax = math.sqrt((f2 + disc) / 2)
        smin = det / smax if smax > 0 else 0.0
        return smax, smin

    def as_tuple(self):
        return (self.a, self.b, self.c, self.d)


@dataclass(frozen=True)
class Polygon:
    vertices: tuple[Vec2, ...]
    edges: tuple[Vec2, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        vs = tuple(vec(*v) for v in self.vertices)
        if len(vs) < 3:
            raise GeometryError("a polygon needs at least three vertices")
        object.__setattr__(self, "vertices", vs)
        n = len(vs)
        object.__setattr__(self, "edges", tuple(vs[(i + 1) % n] - vs[i] for i in range(n)))
        if self.signed_area() <= 0:
            raise GeometryError("polygon vertices must be counterclockwise")

    def __len__(self) -> int:
        return len(self.vertices)

    def signed_area(self) -> float:
        vs = self.vertices
        n = len(vs)
        return 0.5 * sum(cross(vs[i], vs[(i + 1) % n]) for i in range(n))

    @property
    def area(self) -> float:
        return self.signed_area()

    def perimeter(self) -> float:
        return sum(e.norm() for e in self.edges)

    def diameter(self) -> float:
        vs = self.vertices
        return max(norm(p - q) for p in vs for q in vs)

    def is_convex(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        es = self.edges
        n = len(es)
        for i in range(n):
            u, v = es[i - 1], es[i]
            if cross(u, v) <= -tol.eps_rel * norm(u) * norm(v):
                return False
        return True

    def translated(self, t) -> "Polygon":
        return Polygon(tuple(v + t for v in self.vertices))

    def transformed(self, m: Mat2) -> "Polygon":
        return Polygon(tuple(m @ v for v in self.vertices))


def polygon_from_edges(edges: Iterable, start=(0.0, 0.0), tol: Tolerance = DEFAULT_TOL) -> Polygon:
    edges = [vec(*e) for e in edges]
    total = sum((e for e in edges), Vec2(0.0, 0.0))
    scale = max(norm(e) for e in edges)
    if norm(total) > tol.eps_rel * max(scale, 1.0) * len(edges):
        raise GeometryError("edge vectors do not close up")
    pts = [vec(*start)]
    for e in edges[:-1]:
        pts.append(pts[-1] + e)
    return Polygon(tuple(pts))


def semi_regular_polygon(n: int, a: float, b: float) -> Polygon:
    """Polygon with edges v_j = a*(cos jpi/n, sin jpi/n) for even j, b*(...) for odd j.

    Zero-length edges are dropped, so a = 0 or b = 0 gives a regular n-gon.
    The first kept edge starts at the origin.
    """
    if n < 2:
        raise GeometryError("n must be at least 2")
    if a < 0 or b < 0:
        raise GeometryError("side lengths must be non-negative")
    if a == 0 and b == 0:
        raise GeometryError("degenerate polygon: a = b = 0")
    edges = []
    for j in range(2 * n):
        length = a if j % 2 == 0 else b
        if length > 0:
            t = j * math.pi / n
            edges.append((length * math.cos(t), length * math.sin(t)))
    if len(edges) < 3:
        raise GeometryError("degenerate polygon")
    return polygon_from_edges(edges)


def interior_angles(p: Polygon) -> list[float]:
    """Interior angle at each vertex, in (0, 2pi)."""
    es = p.edges
    out = []
    for i in range(len(es)):
        u = -es[i - 1]
        v = es[i]
        # ccw sweep from the outgoing edge to the reversed incoming edge
        t = math.atan2(cross(v, u), dot(v, u))
        if t <= 0:
            t += 2 * math.pi
        out.append(t)
    return out


def angle_between(u, v, tol: Tolerance = DEFAULT_TOL) -> float:
    """Unoriented angle between the lines spanned by u and v, folded into (0, pi/2]."""
    nu, nv = norm(u), norm(v)
    if nu == 0 or nv == 0:
        raise GeometryError("zero vector")
    c = cross(u, v)
    if abs(c) < tol.eps_rel * nu * nv:
        raise GeometryError("parallel directions")
    return math.atan2(abs(c), abs(dot(u, v)))


def point_segment_distance(p, a, b) -> float:
    ab = (b[0] - a[0], b[1] - a[1])
    ap = (p[0] - a[0], p[1] - a[1])
    L2 = dot(ab, ab)
    t = 0.0 if L2 == 0 else max(0.0, min(1.0, dot(ap, ab) / L2))
    return math.hypot(ap[0] - t * ab[0], ap[1] - t * ab[1])
