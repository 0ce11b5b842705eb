"""Upper half-plane model of the Teichmuller disk of S_{m,n}.

A unimodular M is sent to Psi(M) = (d i + b) / (c i + a). Slopes are consistent slopes:
the direction vector of slope d is (-d, 1), and (1, 0) for d = inf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .geom import Mat2, cross, norm
from .surface import BouwMollerParams, TranslationSurface, build_bouw_moller
from .trajectory import enumerate_saddle_connections
from .intersection import intersection_matrix

INF = math.inf
SLOPE_TOL = 1e-7


class TeichError(ValueError):
    pass


class FormulaUnavailable(TeichError):
    pass


class DiskPoint(NamedTuple):
    x: float
    y: float

    @classmethod
    def make(cls, x: float, y: float) -> "DiskPoint":
        if not y > 0:
            raise TeichError("disk points need y > 0")
        return cls(float(x), float(y))

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)


class Geodesic(NamedTuple):
    p: float
    q: float

    @classmethod
    def make(cls, p: float, q: float) -> "Geodesic":
        if p == q:
            raise TeichError("geodesic endpoints must be distinct")
        # unordered: keep inf second, else increasing
        if math.isinf(p) or (not math.isinf(q) and p > q):
            p, q = q, p
        return cls(p, q)

    @property
    def is_vertical(self) -> bool:
        return math.isinf(self.q)


def _as_point(X) -> DiskPoint:
    if isinstance(X, DiskPoint):
        return X
    if isinstance(X, Mat2):
        return psi(X)
    if isinstance(X, complex):
        return DiskPoint.make(X.real, X.imag)
    return DiskPoint.make(*X)


def psi(M: Mat2, eps: float = 1e-9) -> DiskPoint:
    if not M.is_unimodular(eps):
        raise TeichError(f"matrix is not unimodular (det = {M.det})")
    w = complex(M.b, M.d) / complex(M.a, M.c)
    return DiskPoint.make(w.real, w.imag)


def matrix_for(X) -> Mat2:
    """An upper-triangular M with psi(M) = X."""
    X = _as_point(X)
    r = math.sqrt(X.y)
    return Mat2(1 / r, X.x / r, 0.0, r)


def mobius(A: Mat2, z: complex) -> complex:
    if math.isinf(abs(z)):
        return complex(A.a / A.c) if A.c != 0 else z
    den = A.c * z + A.d
    if den == 0:
        return complex(INF, 0)
    return (A.a * z + A.b) / den


def disk_action(A: Mat2) -> Mat2:
    """Moebius map with psi(M A) = disk_action(A)(psi(M))."""
    Ai = A.inverse()
    return Mat2(Ai.a, -Ai.b, -Ai.c, Ai.d)


def slope_action(A: Mat2, d: float) -> float:
    """Consistent slope of A v_d."""
    v = A @ slope_vector(d)
    if abs(v[1]) <= 1e-14 * norm(v):
        return INF
    return -v[0] / v[1]


def slope_vector(d: float):
    return (1.0, 0.0) if math.isinf(d) else (-d, 1.0)


def slope_of(v) -> float:
    x, y = v
    if abs(y) <= 1e-12 * math.hypot(x, y):
        return INF
    return -x / y


def same_slope(d: float, e: float, tol: float = SLOPE_TOL) -> bool:
    if math.isinf(d) or math.isinf(e):
        return math.isinf(d) and math.isinf(e)
    return abs(d - e) <= tol * max(1.0, abs(d))


# -- hyperbolic geometry --------------------------------------------------------------

def cosh_dist_to_geodesic(X, g: Geodesic) -> float:
    X = _as_point(X)
    if g.is_vertical:
        return math.hypot(X.x - g.p, X.y) / X.y
    # send p -> 0, q -> inf, preserving the upper half-plane
    z = X.z
    w = (z - g.p) / (g.q - z)
    return abs(w) / w.imag


def dist_to_geodesic(X, g: Geodesic) -> float:
    return math.acosh(max(1.0, cosh_dist_to_geodesic(X, g)))


def sin_theta(X, d: float, e: float) -> float:
    """sin of the unoriented angle between slopes d and e on the surface X."""
    if same_slope(d, e, 0.0):
        raise TeichError("equal slopes")
    M = X if isinstance(X, Mat2) else matrix_for(X)
    u = M @ slope_vector(d)
    w = M @ slope_vector(e)
    return abs(cross(u, w)) / (norm(u) * norm(w))


def theta(X, d: float, e: float) -> float:
    return math.asin(min(1.0, sin_theta(X, d, e)))


def sin_theta_grid(x: np.ndarray, y: np.ndarray, d: float, e: float) -> np.ndarray:
    """Vectorised sin theta over points x + i y."""
    if math.isinf(e):
        d, e = e, d
    if math.isinf(d):
        return y / np.hypot(x - e, y)
    return abs(d - e) * y / (np.hypot(x - d, y) * np.hypot(x - e, y))


# -- fundamental domain ------------------------------------------------------------------

@dataclass(frozen=True)
class FundamentalDomainData:
    m: int
    n: int
    x_c: float
    r: float
    s: float
    corner: DiskPoint

    @classmethod
    def of(cls, m: int, n: int) -> "FundamentalDomainData":
        bm = BouwMollerParams(m, n)
        sn = math.sin(math.pi / n)
        s = bm.modulus
        return cls(m, n, math.cos(math.pi / n) / sn, 1 / sn, s,
                   DiskPoint(s / 2, math.sin(math.pi / m) / sn))

    def rotation(self) -> Mat2:
        """Veech element: rotation by pi/n, fixing i."""
        return Mat2.rotation(math.pi / self.n)

    def twist(self) -> Mat2:
        return Mat2(1.0, self.s, 0.0, 1.0)

    def contains(self, X, tol: float = 1e-12) -> bool:
        X = _as_point(X)
        return (abs(X.x) <= self.s / 2 + tol
                and math.hypot(X.x + self.x_c, X.y) >= self.r - tol
                and math.hypot(X.x - self.x_c, X.y) >= self.r - tol)


def reduce_point(X, fd: FundamentalDomainData, max_steps: int = 10000) -> tuple[DiskPoint, Mat2]:
    """Move X into the fundamental domain; returns (point, A) with X = disk_action(A)(point)."""
    X = _as_point(X)
    z = X.z
    A = Mat2.identity()
    R = fd.rotation()
    T = fd.twist()
    for _ in range(max_steps):
        k = math.floor((z.real + fd.s / 2) / fd.s)
        if k:
            z -= k * fd.s
            A = _power(T, k) @ A
        if abs(z + fd.x_c) < fd.r - 1e-13:
            g = R
        elif abs(z - fd.x_c) < fd.r - 1e-13:
            g = R.inverse()
        else:
            return DiskPoint.make(z.real, z.imag), A
        # X = phi_A(z) and disk_action reverses products, so A picks up g^-1 on the left
        z = mobius(disk_action(g), z)
        A = g.inverse() @ A
    raise TeichError("reduction did not terminate")


def _power(T: Mat2, k: int) -> Mat2:
    return Mat2(1.0, T.b * k, 0.0, 1.0)


# -- K(d, d') ------------------------------------------------------------------------------

@dataclass
class SlopeTable:
    """Saddle connections of S grouped by consistent slope, with K(d, d') for pairs of slopes."""

    surface: TranslationSurface
    L: float
    slopes: list[float]
    members: list[list[int]]
    holonomies: np.ndarray
    lengths: np.ndarray
    intersections: np.ndarray
    _K: Optional[np.ndarray] = field(default=None, repr=False)

    def index(self, d: float) -> int:
        for i, e in enumerate(self.slopes):
            if same_slope(d, e):
                return i
        raise KeyError(f"slope {d} not among enumerated slopes")

    @property
    def K_matrix(self) -> np.ndarray:
        if self._K is None:
            H = self.holonomies
            wedge = np.abs(H[:, 0][:, None] * H[:, 1][None, :] - H[:, 1][:, None] * H[:, 0][None, :])
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(wedge > 1e-12, np.abs(self.intersections) / wedge, 0.0)
            S = len(self.slopes)
            K = np.zeros((S, S))
            for i in range(S):
                for j in range(i + 1, S):
                    sub = ratio[np.ix_(self.members[i], self.members[j])]
                    K[i, j] = K[j, i] = sub.max() if sub.size else 0.0
            self._K = K
        return self._K

    def K(self, d: float, e: float) -> float:
        i, j = self.index(d), self.index(e)
        if i == j:
            raise TeichError("K is defined for distinct slopes")
        return float(self.K_matrix[i, j])

    def pairs(self):
        S = len(self.slopes)
        K = self.K_matrix
        for i in range(S):
            for j in range(i + 1, S):
                yield self.slopes[i], self.slopes[j], float(K[i, j])


def slope_table(s: TranslationSurface, L: float) -> SlopeTable:
    scs = [sc for sc in enumerate_saddle_connections(s, L) if sc.is_canonical_orientation and sc.is_closed]
    slopes: list[float] = []
    members: list[list[int]] = []
    for k, sc in enumerate(scs):
        d = sc.consistent_slope
        for i, e in enumerate(slopes):
            if same_slope(d, e):
                members[i].append(k)
                break
        else:
            slopes.append(d)
            members.append([k])
    H = np.array([sc.holonomy for sc in scs], dtype=float).reshape(-1, 2)
    I = intersection_matrix(scs, s) if scs else np.zeros((0, 0))
    return SlopeTable(s, L, slopes, members, H, np.hypot(H[:, 0], H[:, 1]), I)


@dataclass(frozen=True)
class DirectionPairBound:
    d: float
    d2: float
    K: float
    method: str  # "exact-by-enumeration" or "enumerated" or "closed-form-bound"
    closed_form: Optional[float] = None


def closed_form_K(params: BouwMollerParams, d: float, e: float) -> tuple[Optional[float], str]:
    """Closed-form value (or upper bound) of K(d, e) when d = inf and e is a special slope."""
    m, n = params.m, params.n
    if not math.isinf(d):
        d, e = e, d
    if not math.isinf(d):
        return None, ""
    l0 = math.sin(math.pi / m)
    sn, cn, cm = math.sin(math.pi / n), math.cos(math.pi / n), math.cos(math.pi / m)
    cot1 = cn / sn
    if same_slope(abs(e), cot1):
        return 1 / (sn * l0 ** 2), "exact"
    if n > 2 and same_slope(abs(e), abs(math.cos(2 * math.pi / n) / math.sin(2 * math.pi / n))):
        return 1 / (2 * cn * sn * l0 ** 2), "bound"
    return 1 / (2 * cm * sn * l0 ** 2), "bound"


def k_dd(s: TranslationSurface, d: float, e: float, L: float,
         table: Optional[SlopeTable] = None) -> DirectionPairBound:
    table = table or slope_table(s, L)
    K = table.K(d, e)
    method = "enumerated"
    cf = None
    if s.bouw_moller is not None:
        cf, kind = closed_form_K(s.bouw_moller, d, e)
        if kind == "exact" and cf is not None and abs(K - cf) <= 1e-9 * cf:
            method = "exact-by-enumeration"
        elif kind == "bound":
            method = "closed-form-bound"
    return DirectionPairBound(d, e, K, method, cf)


# -- KVol on the disk ----------------------------------------------------------------------

def kvol_constant(params: BouwMollerParams, area: Optional[float] = None) -> float:
    """Vol(S_{m,n}) * K(inf, +-cot(pi/n))."""
    if area is None:
        area = build_bouw_moller(params).area
    l0 = math.sin(math.pi / params.m)
    return area / (math.sin(math.pi / params.n) * l0 ** 2)


def kvol_disk_terms(X, params: BouwMollerParams, area: Optional[float] = None):
    """(sin theta_plus, sin theta_minus, kvol) at the reduced representative of X."""
    if not params.coprime or params.m * params.n <= 6:
        raise FormulaUnavailable(
            f"closed form needs coprime m, n with mn > 6; got ({params.m}, {params.n})")
    fd = FundamentalDomainData.of(params.m, params.n)
    Y, _ = reduce_point(X, fd)
    sp = sin_theta(Y, INF, fd.x_c)
    sm = sin_theta(Y, INF, -fd.x_c)
    return sp, sm, kvol_constant(params, area) * max(sp, sm)


def kvol_disk(X, params: BouwMollerParams, area: Optional[float] = None) -> float:
    return kvol_disk_terms(X, params, area)[2]


# -- comparison domains and hypotheses -------------------------------------------------------

@dataclass(frozen=True)
class ComparisonDomain:
    """Region between the vertical lines at a and a+b, outside the circle |z - a| = c."""

    a: float
    b: float
    c: float
    name: str = ""

    def __post_init__(self):
        if not (0 < abs(self.b) <= abs(self.c)):
            raise TeichError("need 0 < |b| <= |c|")

    @property
    def lo(self) -> float:
        return min(self.a, self.a + self.b)

    @property
    def hi(self) -> float:
        return max(self.a, self.a + self.b)

    @property
    def X0(self) -> DiskPoint:
        return DiskPoint.make(self.a + self.b, math.sqrt(self.c ** 2 - self.b ** 2))

    def floor(self, x):
        return np.sqrt(np.maximum(self.c ** 2 - (x - self.a) ** 2, 0.0))

    def contains(self, X, tol: float = 1e-12) -> bool:
        X = _as_point(X)
        return self.lo - tol <= X.x <= self.hi + tol and math.hypot(X.x - self.a, X.y) >= abs(self.c) - tol

    def meets(self, g: Geodesic, tol: float = 1e-9) -> bool:
        """Whether the geodesic meets the closed domain."""
        if g.is_vertical:
            return self.lo - tol <= g.p <= self.hi + tol
        c0 = 0.5 * (g.p + g.q)
        rho = 0.5 * (g.q - g.p)
        x0, x1 = max(self.lo, c0 - rho), min(self.hi, c0 + rho)
        if x0 > x1 + tol:
            return False
        # on the geodesic, outside the circle <=> (c0 - a)(2x - a - c0) >= c^2 - rho^2 (linear in x)
        rhs = self.c ** 2 - rho ** 2
        for x in (x0, x1, 0.5 * (x0 + x1)):
            y2 = rho ** 2 - (x - c0) ** 2
            if y2 > tol * rho ** 2 and (c0 - self.a) * (2 * x - self.a - c0) >= rhs - tol * max(1.0, abs(rhs)):
                return True
        return False


def comparison_domains(m: int, n: int) -> dict[str, ComparisonDomain]:
    sn = math.sin(math.pi / n)
    cot = math.cos(math.pi / n) / sn
    q = math.cos(math.pi / m) / sn
    r = 1 / sn
    return {
        "D1": ComparisonDomain(-cot, -q, r, "D1"),
        "D2": ComparisonDomain(-cot, cot, r, "D2"),
        "D3": ComparisonDomain(cot, -cot, r, "D3"),
        "D4": ComparisonDomain(cot, q, r, "D4"),
    }


@dataclass
class HypothesisReport:
    domain: str
    H1: bool
    H2: bool
    H3: bool
    H4: bool
    Hstar: bool
    K_inf_a: float
    h4_ratio: float
    theta_X0: float
    pairs_checked: int
    pairs_meeting_domain: int
    violations: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "domain": self.domain, "H1": self.H1, "H2": self.H2, "H3": self.H3, "H4": self.H4,
            "Hstar": self.Hstar, "K_inf_a": self.K_inf_a, "h4_ratio": self.h4_ratio,
            "theta_X0": self.theta_X0, "pairs_checked": self.pairs_checked,
            "pairs_meeting_domain": self.pairs_meeting_domain,
            "violations": {k: [list(map(_fmt, v)) for v in vs[:10]] for k, vs in self.violations.items()},
        }


def _fmt(v):
    return "inf" if isinstance(v, float) and math.isinf(v) else v


def check_domain_hypotheses(dom: ComparisonDomain, table: SlopeTable,
                                   tol: float = 1e-9) -> HypothesisReport:
    a = dom.a
    X0 = dom.X0
    Ka = table.K(INF, a)
    s_a = sin_theta(X0, INF, a)
    ratio = s_a / sin_theta(X0, a, a + 2 * dom.b)
    target = Ka * s_a
    bad: dict[str, list] = {"H1": [], "H2": [], "H3": [], "H4": []}
    checked = meeting = 0
    for d, e, K in table.pairs():
        checked += 1
        slack = tol * max(1.0, Ka)
        if K * sin_theta(X0, d, e) > target + slack:
            bad["H1"].append((d, e, K))
        if K > Ka + slack:
            bad["H2"].append((d, e, K))
        if _is_pair(d, e, INF, a) or not dom.meets(Geodesic.make(d, e)):
            continue
        meeting += 1
        if K > math.sin(math.pi / 4) * Ka + slack:
            bad["H3"].append((d, e, K))
        if K > ratio * Ka + slack:
            bad["H4"].append((d, e, K))
    th = theta(X0, INF, a)
    return HypothesisReport(dom.name, not bad["H1"], not bad["H2"], not bad["H3"], not bad["H4"],
                            th >= math.pi / 4 - 1e-12, Ka, ratio, th, checked, meeting,
                            {k: v for k, v in bad.items() if v})


def _is_pair(d, e, p, q) -> bool:
    return (same_slope(d, p) and same_slope(e, q)) or (same_slope(d, q) and same_slope(e, p))


def domain_grid(dom: ComparisonDomain, samples: int = 200, ymax: float = 10.0):
    """Grid points of the domain, clipped at height ymax."""
    xs = np.linspace(dom.lo, dom.hi, samples)
    t = np.linspace(0.0, 1.0, samples)
    floor = dom.floor(xs)
    floor = np.maximum(floor, 1e-9)
    Y = floor[:, None] + (ymax - floor[:, None]) * t[None, :]
    X = np.broadcast_to(xs[:, None], Y.shape)
    ok = Y > 0
    return X[ok], Y[ok]


@dataclass
class SinusComparison:
    minimum: float
    argmin: DiskPoint
    value_at_X0: float
    margin: float
    holds: bool


def sinus_comparison_minimum(dom: ComparisonDomain, d: float, e: float, samples: int = 200,
                             tol: float = 1e-9) -> SinusComparison:
    """Minimise sin theta(X, inf, a) / sin theta(X, d, e) over a grid of the domain."""
    a, b = dom.a, dom.b
    sg = 1.0 if b > 0 else -1.0
    if same_slope(d, e, 0.0):
        raise TeichError("need distinct slopes")
    if math.isinf(d) or math.isinf(e) or not (sg * (d - a) >= -tol and sg * (a + b - d) >= -tol
                                            and sg * (e - a - b) >= -tol):
        raise TeichError("precondition a <= d <= a+b <= d' (mirrored when b < 0) fails")
    if not dom.meets(Geodesic.make(d, e)):
        raise TeichError("geodesic does not meet the domain")
    X, Y = domain_grid(dom, samples)
    F = sin_theta_grid(X, Y, INF, a) / sin_theta_grid(X, Y, d, e)
    k = int(np.argmin(F))
    X0 = dom.X0
    f0 = sin_theta(X0, INF, a) / sin_theta(X0, d, e)
    mn = float(F[k])
    return SinusComparison(mn, DiskPoint(float(X[k]), float(Y[k])), f0, mn - f0, mn >= f0 - 1e-6 * max(1.0, f0))


def domain_comparison_conclusion(dom: ComparisonDomain, table: SlopeTable, samples: int = 60,
                             tol: float = 1e-9) -> tuple[bool, float]:
    """Check K(d,d') sin theta(X,d,d') <= K(inf,a) sin theta(X,inf,a) on a grid; returns (ok, worst excess)."""
    X, Y = domain_grid(dom, samples)
    rhs = table.K(INF, dom.a) * sin_theta_grid(X, Y, INF, dom.a)
    worst = -math.inf
    for d, e, K in table.pairs():
        if K == 0.0:
            continue
        lhs = K * sin_theta_grid(X, Y, d, e)
        worst = max(worst, float(np.max(lhs - rhs)))
    return worst <= tol * max(1.0, float(rhs.max())), worst
