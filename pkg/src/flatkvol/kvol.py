"""Brute-force KVol and SysVol over truncated saddle-connection sets."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .geom import Mat2
from .surface import BouwMollerParams, SideRef, TranslationSurface, build_bouw_moller
from .trajectory import SaddleConnection, enumerate_saddle_connections
from .intersection import classify_pair, curve_chain, intersection_matrix
from .teich import FormulaUnavailable, kvol_constant

REL_TOL = 1e-9
MAX_REPORTED = 50


class KvolError(ValueError):
    pass


def default_length(s: TranslationSurface) -> float:
    return 3.0 * s.diameter()


# -- homology and systoles -----------------------------------------------------------------

def boundary_matrix(s: TranslationSurface) -> np.ndarray:
    """Rows are the cellular boundaries of the polygons, in edge coordinates."""
    B = np.zeros((len(s.polygons), len(s.edges)))
    for p, poly in enumerate(s.polygons):
        for k in range(len(poly)):
            e, sgn = s.edge_of[SideRef(p, k)]
            B[p, e] += sgn
    return B


def is_null_homologous(curve, s: Optional[TranslationSurface] = None) -> bool:
    curve = curve if isinstance(curve, list) else [curve]
    s = s or curve[0].surface
    v = np.zeros(len(s.edges))
    for e, c in curve_chain(curve).items():
        v[e] = c
    if not v.any():
        return True
    B = boundary_matrix(s)
    coef, *_ = np.linalg.lstsq(B.T, v, rcond=None)
    return bool(np.allclose(B.T @ coef, v, atol=1e-9))


def _shortest_cycles(s: TranslationSurface, scs: list[SaddleConnection]):
    """For each saddle connection, the shortest closed chain through it (Dijkstra on the rest)."""
    nv = s.num_singularities
    adj: dict[int, list[tuple[float, int, int, bool]]] = {v: [] for v in range(nv)}
    for i, sc in enumerate(scs):
        adj[sc.start_class].append((sc.length, i, sc.end_class, False))
        adj[sc.end_class].append((sc.length, i, sc.start_class, True))
    for i, sc in enumerate(scs):
        if sc.is_closed:
            yield sc.length, [sc]
            continue
        # path from end back to start avoiding edge i
        src, dst = sc.end_class, sc.start_class
        dist = {src: 0.0}
        prev: dict[int, tuple[int, int, bool]] = {}
        heap = [(0.0, src)]
        while heap:
            dd, v = heapq.heappop(heap)
            if v == dst:
                break
            if dd > dist.get(v, math.inf):
                continue
            for w_len, j, w, rev in adj[v]:
                if j == i:
                    continue
                nd = dd + w_len
                if nd < dist.get(w, math.inf):
                    dist[w] = nd
                    prev[w] = (v, j, rev)
                    heapq.heappush(heap, (nd, w))
        if dst not in dist:
            continue
        path = []
        v = dst
        while v != src:
            u, j, rev = prev[v]
            path.append(scs[j].reversed() if rev else scs[j])
            v = u
        yield sc.length + dist[dst], [sc] + path[::-1]


def homological_systole(s: TranslationSurface, L: Optional[float] = None) -> tuple[float, list]:
    """Length of the shortest homologically non-trivial closed chain of saddle connections."""
    L = L or 2.0 * s.diameter()
    while True:
        scs = [sc for sc in enumerate_saddle_connections(s, L) if sc.is_canonical_orientation]
        best = (math.inf, [])
        for length, curve in sorted(_shortest_cycles(s, scs), key=lambda t: t[0]):
            if length >= best[0]:
                break
            if not is_null_homologous(curve, s):
                best = (length, curve)
        if best[0] <= L:
            return best
        L *= 2


def sysvol(s: TranslationSurface) -> float:
    return s.area / homological_systole(s)[0] ** 2


# -- brute force -------------------------------------------------------------------------------

@dataclass
class KvolResult:
    kvol_lower: float
    max_ratio: float
    area: float
    truncation_length: float
    maximizers: list = field(default_factory=list)
    n_maximizers: int = 0
    sysvol: float = math.nan
    systole: float = math.nan
    n_curves: int = 0
    kvol_formula: Optional[float] = None

    def as_dict(self) -> dict:
        return {
            "kvol": self.kvol_lower, "max_ratio": self.max_ratio, "area": self.area,
            "truncation_length": self.truncation_length, "sysvol": self.sysvol,
            "systole": self.systole, "n_curves": self.n_curves, "n_maximizers": self.n_maximizers,
            "maximizers": self.maximizers, "kvol_formula": self.kvol_formula,
        }


@dataclass
class PairData:
    """Closed saddle connections of a surface with their pairwise intersections."""

    surface: TranslationSurface
    L: float
    curves: list[SaddleConnection]
    holonomies: np.ndarray
    intersections: np.ndarray

    @classmethod
    def build(cls, s: TranslationSurface, L: float) -> "PairData":
        scs = [sc for sc in enumerate_saddle_connections(s, L) if sc.is_closed and sc.is_canonical_orientation]
        H = np.array([sc.holonomy for sc in scs], dtype=float).reshape(-1, 2)
        I = intersection_matrix(scs, s) if scs else np.zeros((0, 0), dtype=np.int64)
        return cls(s, L, scs, H, I)

    def ratios(self, M: Optional[Mat2] = None) -> np.ndarray:
        H = self.holonomies
        if M is not None:
            H = H @ np.array([[M.a, M.b], [M.c, M.d]]).T
        lengths = np.hypot(H[:, 0], H[:, 1])
        return np.abs(self.intersections) / np.outer(lengths, lengths)

    def max_ratio(self, M: Optional[Mat2] = None) -> float:
        if not self.curves:
            return 0.0
        return float(self.ratios(M).max())


def _describe(sc: SaddleConnection) -> dict:
    return {"holonomy": [sc.holonomy.x, sc.holonomy.y], "length": sc.length,
            "start": list(sc.start_corner), "end": list(sc.end_corner)}


def kvol_bruteforce(s: TranslationSurface, L: Optional[float] = None, data: Optional[PairData] = None,
                    with_sysvol: bool = True) -> KvolResult:
    """Area times the largest |Int|/(l l') over closed saddle connections of length <= L."""
    L = L if L is not None else default_length(s)
    sys_len, _ = homological_systole(s) if with_sysvol else (math.nan, None)
    if with_sysvol and L < 2 * sys_len - 1e-12:
        raise KvolError(f"truncation length {L} is below twice the systole {sys_len}")
    data = data or PairData.build(s, L)
    res = KvolResult(0.0, 0.0, s.area, L, sysvol=s.area / sys_len ** 2 if with_sysvol else math.nan,
                     systole=sys_len, n_curves=len(data.curves))
    if not data.curves:
        return res
    R = data.ratios()
    rmax = float(R.max())
    res.max_ratio = rmax
    res.kvol_lower = s.area * rmax
    if rmax > 0:
        ii, jj = np.nonzero(np.triu(R >= rmax * (1 - REL_TOL), 1))
        res.n_maximizers = len(ii)
        for i, j in list(zip(ii, jj))[:MAX_REPORTED]:
            a, b = data.curves[i], data.curves[j]
            res.maximizers.append({"a": _describe(a), "b": _describe(b),
                                   "intersection": int(data.intersections[i, j]), "ratio": float(R[i, j])})
    bm = s.bouw_moller
    if bm is not None:
        try:
            res.kvol_formula = kvol_constant(bm, s.area) * math.sin(math.pi / bm.n) if bm.coprime else None
        except FormulaUnavailable:
            res.kvol_formula = None
    return res


def kvol_on_orbit(data: PairData, M: Mat2) -> float:
    """Truncated KVol of M.S from saddle connections enumerated on S."""
    if not M.is_unimodular(1e-9):
        raise KvolError("M must be unimodular")
    return data.surface.area * data.max_ratio(M)


# -- Bouw-Moller certificate -----------------------------------------------------------------------

@dataclass
class Certificate:
    params: tuple
    L: float
    bound: float
    max_ratio: float
    passed: bool
    attains_bound: bool
    classes: dict
    detail: str = ""

    def as_dict(self) -> dict:
        return {"m": self.params[0], "n": self.params[1], "L": self.L, "bound": self.bound,
                "max_ratio": self.max_ratio, "passed": self.passed, "attains_bound": self.attains_bound,
                "maximizer_classes": self.classes, "detail": self.detail}


def allowed_equality_classes(params: BouwMollerParams) -> set:
    out = set()
    if params.coprime:
        out.add("systoles")
        if params.n == 4 and params.m % 4 == 3:
            out.add("diagonals")
    return out


def certify_bouw_moller(params, L: float = 3.0, tol: float = REL_TOL) -> Certificate:
    """Check Int/(l l') <= 1/l0^2 on S_{m,n} up to length L and classify the maximizers."""
    params = params if isinstance(params, BouwMollerParams) else BouwMollerParams(*params)
    if params.m * params.n <= 6:
        raise KvolError("need mn > 6")
    s = build_bouw_moller(params)
    data = PairData.build(s, L)
    l0 = params.l0
    bound = 1 / l0 ** 2
    if not data.curves:
        return Certificate((params.m, params.n), L, bound, 0.0, True, False, {}, "no closed saddle connections")
    R = data.ratios()
    rmax = float(R.max())
    attains = rmax >= bound * (1 - tol)
    classes: dict[str, int] = {}
    if attains:
        ii, jj = np.nonzero(np.triu(R >= bound * (1 - tol), 1))
        for i, j in zip(ii, jj):
            c = classify_pair(data.curves[i], data.curves[j], int(data.intersections[i, j]), l0)
            classes[c] = classes.get(c, 0) + 1
    allowed = allowed_equality_classes(params)
    detail = []
    ok = rmax <= bound * (1 + tol)
    if not ok:
        detail.append(f"ratio {rmax} exceeds 1/l0^2 = {bound}")
    stray = sorted(set(classes) - allowed)
    if stray:
        ok = False
        detail.append(f"maximizers outside the equality cases: {stray}")
    return Certificate((params.m, params.n), L, bound, rmax, ok, attains, classes, "; ".join(detail))
