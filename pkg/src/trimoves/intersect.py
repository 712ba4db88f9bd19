"""Common geometric subdivision via convex clipping in linear charts.

Top simplexes of the two complexes are intersected pairwise by successive
half-space clipping (polygon clipping in 2D, vertex-graph polyhedron
clipping in 3D).  Each clip vertex carries the set of defining hyperplanes,
which is what reconstructs the face lattice of a cell.  Cells are glued
into one polytopal complex through a quantised global vertex registry
(points closer than MERGE_TOL are identified), and the barycentric
subdivision of the result is a simplicial complex carrying every simplex
to its smallest containing simplex in both parents.

The one closed-manifold path supported end to end is the flat torus
R^d/(period Z)^d for d <= 2: per pair, the translates of one lifted
simplex are enumerated against the other, and the strong-convexity
precondition (simplex diameters below twice the convexity radius) is what
guarantees at most one translate meets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

import numpy as np

from .complexes import Complex, Simplex
from .geometry import GeomComplex, Geometry
from .subdivision import SubdividedComplex

MERGE_TOL = 1e-9
MIN_MEASURE = 1e-12
CONTAIN_TOL = 1e-9


class IntersectionError(Exception):
    pass


# -- clipping ------------------------------------------------------------


def _affine_coords(simplex_pts: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Barycentric coordinates of x with respect to simplex_pts rows."""
    k = simplex_pts.shape[0]
    a = np.vstack([simplex_pts.T, np.ones(k)])
    b = np.append(x, 1.0)
    coords, *_ = np.linalg.lstsq(a, b, rcond=None)
    return coords


def simplex_halfspaces(pts: np.ndarray) -> list[tuple[np.ndarray, float, tuple]]:
    """Facet half-spaces (normal, offset, label) of a full-dimensional
    simplex: normal . x <= offset holds inside."""
    k, d = pts.shape
    if k != d + 1:
        raise IntersectionError("half-spaces need a full-dimensional simplex")
    out = []
    for i in range(k):
        rest = np.delete(pts, i, axis=0)
        base = rest[0]
        if d == 1:
            normal = np.array([1.0])
        else:
            span = rest[1:] - base
            _, _, vh = np.linalg.svd(np.vstack([span, np.zeros((1, d))]))
            normal = vh[-1]
        offset = float(normal @ base)
        if normal @ pts[i] > offset:
            normal, offset = -normal, -offset
        out.append((normal, offset, ("cut", i)))
    return out


def _clip_segment(pts, labels, normal, offset, label, tol):
    d = [float(p @ normal - offset) for p in pts]
    keep_pts, keep_labels = [], []
    for i in range(len(pts)):
        if d[i] <= tol:
            lab = set(labels[i])
            if abs(d[i]) <= tol:
                lab.add(label)
            keep_pts.append(pts[i])
            keep_labels.append(frozenset(lab))
    if len(pts) == 2 and (d[0] > tol) != (d[1] > tol):
        t = d[0] / (d[0] - d[1])
        x = pts[0] + t * (pts[1] - pts[0])
        keep_pts.append(x)
        keep_labels.append(frozenset(labels[0] & labels[1]) | {label})
    return keep_pts, keep_labels


def _clip_polygon(pts, labels, normal, offset, label, tol):
    """Sutherland-Hodgman step preserving cycle order and vertex labels."""
    if not pts:
        return [], []
    out_pts, out_labels = [], []
    m = len(pts)
    d = [float(p @ normal - offset) for p in pts]
    for i in range(m):
        j = (i + 1) % m
        if d[i] <= tol:
            lab = set(labels[i])
            if abs(d[i]) <= tol:
                lab.add(label)
            out_pts.append(pts[i])
            out_labels.append(frozenset(lab))
        crossing = (d[i] > tol and d[j] < -tol) or (d[i] < -tol and d[j] > tol)
        if crossing:
            t = d[i] / (d[i] - d[j])
            x = pts[i] + t * (pts[j] - pts[i])
            out_pts.append(x)
            out_labels.append(frozenset(labels[i] & labels[j]) | {label})
    return _dedupe_cycle(out_pts, out_labels)


def _dedupe_cycle(pts, labels):
    if not pts:
        return [], []
    keep_pts, keep_labels = [], []
    for p, l in zip(pts, labels):
        if keep_pts and np.linalg.norm(p - keep_pts[-1]) < MERGE_TOL:
            keep_labels[-1] = keep_labels[-1] | l
            continue
        keep_pts.append(p)
        keep_labels.append(l)
    if len(keep_pts) > 1 and np.linalg.norm(keep_pts[0] - keep_pts[-1]) < MERGE_TOL:
        keep_labels[0] = keep_labels[0] | keep_labels[-1]
        keep_pts.pop()
        keep_labels.pop()
    return keep_pts, keep_labels


def _clip_polyhedron(pts, labels, normal, offset, label, tol):
    """Clip a labelled convex vertex set in 3D; edges are the vertex pairs
    whose label sets share at least two planes."""
    d = [float(p @ normal - offset) for p in pts]
    new_pts, new_labels = [], []
    for i in range(len(pts)):
        if d[i] <= tol:
            lab = set(labels[i])
            if abs(d[i]) <= tol:
                lab.add(label)
            new_pts.append(pts[i])
            new_labels.append(frozenset(lab))
    for i, j in combinations(range(len(pts)), 2):
        if len(labels[i] & labels[j]) < 2:
            continue
        if (d[i] > tol and d[j] < -tol) or (d[i] < -tol and d[j] > tol):
            t = d[i] / (d[i] - d[j])
            x = pts[i] + t * (pts[j] - pts[i])
            new_pts.append(x)
            new_labels.append(frozenset(labels[i] & labels[j]) | {label})
    return _dedupe_pointset(new_pts, new_labels)


def _dedupe_pointset(pts, labels):
    keep_pts: list[np.ndarray] = []
    keep_labels: list[frozenset] = []
    for p, l in zip(pts, labels):
        for i, q in enumerate(keep_pts):
            if np.linalg.norm(p - q) < MERGE_TOL:
                keep_labels[i] = keep_labels[i] | l
                break
        else:
            keep_pts.append(p)
            keep_labels.append(l)
    return keep_pts, keep_labels


def clip_simplex_pair(sub_pts: np.ndarray, clip_pts: np.ndarray, tol: float = MERGE_TOL):
    """Intersect two full-dimensional simplexes; returns (pts, labels) of the
    clipped cell, with labels drawn from both simplexes' facet planes."""
    d = sub_pts.shape[1]
    labels = []
    for i in range(sub_pts.shape[0]):
        lab = set()
        for f in range(sub_pts.shape[0]):
            if f != i:
                lab.add(("sub", f))
        labels.append(frozenset(lab))
    pts = [sub_pts[i] for i in range(sub_pts.shape[0])]
    for normal, offset, cut_label in simplex_halfspaces(clip_pts):
        if d == 1:
            pts, labels = _clip_segment(pts, labels, normal, offset, cut_label, tol)
        elif d == 2:
            pts, labels = _clip_polygon(pts, labels, normal, offset, cut_label, tol)
        else:
            pts, labels = _clip_polyhedron(pts, labels, normal, offset, cut_label, tol)
        if not pts:
            return [], []
    return pts, labels


def cell_measure(dim: int, pts: list[np.ndarray], faces_by_dim=None) -> float:
    if len(pts) <= dim:
        return 0.0
    if dim == 1:
        return float(abs(pts[1][0] - pts[0][0])) if len(pts) == 2 else 0.0
    if dim == 2:
        arr = np.asarray(pts)
        x, y = arr[:, 0], arr[:, 1]
        return float(abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))) / 2)
    center = np.mean(np.asarray(pts), axis=0)
    vol = 0.0
    for cyc in faces_by_dim[2]:
        poly = [pts[i] for i in cyc]
        for i in range(1, len(poly) - 1):
            mat = np.stack([poly[0] - center, poly[i] - center, poly[i + 1] - center])
            vol += abs(np.linalg.det(mat)) / 6.0
    return vol


def _order_cycle(pts, idxs, normal=None):
    """Order vertex indices of a planar convex polygon into a cycle."""
    arr = np.asarray([pts[i] for i in idxs])
    center = arr.mean(axis=0)
    rel = arr - center
    if arr.shape[1] == 2:
        ang = np.arctan2(rel[:, 1], rel[:, 0])
    else:
        _, _, vh = np.linalg.svd(rel)
        u, v = vh[0], vh[1]
        ang = np.arctan2(rel @ v, rel @ u)
    order = np.argsort(ang)
    cyc = [idxs[i] for i in order]
    # rotate so the lexicographically smallest index leads, fix orientation
    k = cyc.index(min(cyc))
    cyc = cyc[k:] + cyc[:k]
    if len(cyc) > 2 and cyc[-1] < cyc[1]:
        cyc = [cyc[0]] + cyc[1:][::-1]
    return cyc


def cell_face_lattice(dim: int, pts, labels):
    """Local faces by dimension: 0-faces as singletons, 1-faces as index
    pairs, 2-faces as ordered cycles.  Plane labels identify the facets."""
    n = len(pts)
    faces: dict[int, list[tuple]] = {0: [(i,) for i in range(n)]}
    if dim == 1:
        if n != 2:
            raise IntersectionError("degenerate 1-cell")
        faces[1] = [tuple(range(n))]
        return faces
    if dim == 2:
        cyc = _order_cycle(pts, list(range(n)))
        faces[1] = [tuple(sorted((cyc[i], cyc[(i + 1) % n]))) for i in range(n)]
        faces[2] = [tuple(cyc)]
        return faces
    # dim == 3: facets from shared plane labels
    by_plane: dict[tuple, list[int]] = {}
    for i, lab in enumerate(labels):
        for plane in lab:
            by_plane.setdefault(plane, []).append(i)
    facet_cycles = []
    seen = set()
    for plane, idxs in sorted(by_plane.items()):
        if len(idxs) < 3:
            continue
        key = frozenset(idxs)
        if key in seen or len(key) == n:
            continue
        seen.add(key)
        facet_cycles.append(tuple(_order_cycle(pts, sorted(idxs))))
    edges = set()
    for cyc in facet_cycles:
        m = len(cyc)
        for i in range(m):
            edges.add(tuple(sorted((cyc[i], cyc[(i + 1) % m]))))
    faces[1] = sorted(edges)
    faces[2] = facet_cycles
    faces[3] = [tuple(range(n))]
    return faces


# -- global assembly -------------------------------------------------------


class _VertexRegistry:
    """Quantised point-to-id map merging points closer than MERGE_TOL;
    torus coordinates are wrapped into the fundamental domain first."""

    def __init__(self, period: Optional[float]):
        self.period = period
        self.grid: dict[tuple, list[int]] = {}
        self.coords: list[np.ndarray] = []
        self.h = MERGE_TOL

    def wrap(self, x: np.ndarray) -> np.ndarray:
        if self.period is None:
            return x
        return np.mod(x, self.period)

    def _keys_near(self, x: np.ndarray):
        base = np.floor(x / self.h).astype(int)
        ncells = int(round(self.period / self.h)) if self.period else None
        ranges = [range(b - 1, b + 2) for b in base]
        out = []
        import itertools as it

        for combo in it.product(*ranges):
            if ncells:
                combo = tuple(c % ncells for c in combo)
            out.append(combo)
        return out

    def get_id(self, x: np.ndarray) -> int:
        x = self.wrap(np.asarray(x, dtype=float))
        for key in self._keys_near(x):
            for vid in self.grid.get(key, ()):
                delta = np.abs(self.coords[vid] - x)
                if self.period is not None:
                    delta = np.minimum(delta, self.period - delta)
                if np.linalg.norm(delta) < MERGE_TOL:
                    return vid
        vid = len(self.coords)
        self.coords.append(x)
        key = tuple((np.floor(x / self.h).astype(int)))
        if self.period is not None:
            ncells = int(round(self.period / self.h))
            key = tuple(c % ncells for c in key)
        self.grid.setdefault(key, []).append(vid)
        return vid


@dataclass
class ConvexCell:
    """A top-dimensional cell: global vertex ids (2-cells as an ordered
    cycle), its lift, the local face lattice, and where it came from."""

    dim: int
    vertex_ids: tuple[int, ...]
    lift: np.ndarray
    faces_by_dim: dict
    provenance: tuple[Simplex, Simplex]
    measure: float


@dataclass
class FaceRec:
    dim: int
    vids: tuple[int, ...]
    lift: np.ndarray
    carrier1: Simplex
    carrier2: Simplex
    boundary: set = field(default_factory=set)


@dataclass
class PolytopalComplex:
    """Identified face poset of all pairwise intersection cells."""

    dim: int
    vertices: dict[int, np.ndarray]
    cells: list[ConvexCell]
    faces: dict[tuple[int, ...], FaceRec]
    period: Optional[float]
    discarded: list = field(default_factory=list)

    def total_measure(self) -> float:
        return sum(c.measure for c in self.cells)

    def faces_of_dim(self, d: int) -> list[FaceRec]:
        return sorted(
            (f for f in self.faces.values() if f.dim == d), key=lambda f: f.vids
        )


def _smallest_containing_face(simplex_abs: Simplex, chart: np.ndarray, pts) -> Simplex:
    """Smallest face of the parent simplex containing all the points, from
    the union of barycentric supports."""
    support: set[int] = set()
    for p in pts:
        coords = _affine_coords(chart, np.asarray(p))
        for i, c in enumerate(coords):
            if c > CONTAIN_TOL:
                support.add(i)
        if np.any(coords < -1e-6):
            raise IntersectionError("cell vertex escapes its provenance simplex")
    return tuple(sorted(simplex_abs[i] for i in support))


def _assemble(
    raw_cells: list,
    dim: int,
    period: Optional[float],
    k1: GeomComplex,
    k2: GeomComplex,
) -> PolytopalComplex:
    registry = _VertexRegistry(period)
    cells: list[ConvexCell] = []
    faces: dict[tuple, FaceRec] = {}
    discarded: list = []
    for pts, labels, prov, measure in raw_cells:
        if measure < MIN_MEASURE:
            discarded.append((prov, measure))
            continue
        lattice = cell_face_lattice(dim, pts, labels)
        vids = [registry.get_id(p) for p in pts]
        if len(set(vids)) != len(vids):
            raise IntersectionError(f"cell of pair {prov} collapsed under merging")
        lift = np.asarray(pts)
        chart1 = k1.lift(prov[0])
        chart2 = k2.lift(prov[1])
        # per-pair lifts may sit in different translates; re-anchor the cell
        if period is not None:
            anchor = lift.mean(axis=0)
            chart1 = chart1 + period * np.round((anchor - chart1.mean(axis=0)) / period)
            chart2 = chart2 + period * np.round((anchor - chart2.mean(axis=0)) / period)
        cell_vids = tuple(vids[i] for i in lattice[dim][0])
        cells.append(
            ConvexCell(dim, cell_vids, lift, lattice, prov, measure)
        )
        for d in range(dim + 1):
            for local in lattice[d]:
                key = tuple(sorted(vids[i] for i in local))
                fpts = [pts[i] for i in local]
                if key not in faces:
                    faces[key] = FaceRec(
                        d,
                        key,
                        np.asarray(fpts),
                        _smallest_containing_face(prov[0], chart1, fpts),
                        _smallest_containing_face(prov[1], chart2, fpts),
                    )
                else:
                    rec = faces[key]
                    # the smallest containing parent face is the same from
                    # every incident cell; keep the lexicographic minimum to
                    # stay deterministic under float jitter
                    c1 = _smallest_containing_face(prov[0], chart1, fpts)
                    c2 = _smallest_containing_face(prov[1], chart2, fpts)
                    if (len(c1), c1) < (len(rec.carrier1), rec.carrier1):
                        rec.carrier1 = c1
                    if (len(c2), c2) < (len(rec.carrier2), rec.carrier2):
                        rec.carrier2 = c2
        # boundary containment: D-face contains (D-1)-faces with subset vids
        for d in range(1, dim + 1):
            for local in lattice[d]:
                key = tuple(sorted(vids[i] for i in local))
                lset = set(local)
                for lower in lattice[d - 1]:
                    if set(lower) <= lset:
                        faces[key].boundary.add(
                            tuple(sorted(vids[i] for i in lower))
                        )
    vertices = {i: registry.coords[i] for i in range(len(registry.coords))}
    return PolytopalComplex(dim, vertices, cells, faces, period, discarded)


# -- public operations -------------------------------------------------------


def _check_euclidean(gk: GeomComplex) -> None:
    if gk.tag != Geometry.EUCLIDEAN:
        raise IntersectionError(
            "intersection works in linear charts; project curved inputs first"
        )


def intersect_linear(k1: GeomComplex, k2: GeomComplex) -> PolytopalComplex:
    """All pairwise intersections of top simplexes of two triangulations of
    the same linear region, with identified faces."""
    _check_euclidean(k1)
    _check_euclidean(k2)
    dim = k1.complex.dimension
    if dim != k2.complex.dimension or not 1 <= dim <= 3:
        raise IntersectionError("matching dimensions 1..3 required")
    region1 = sum(_top_measure(k1, s) for s in k1.complex.top_simplexes())
    region2 = sum(_top_measure(k2, s) for s in k2.complex.top_simplexes())
    if abs(region1 - region2) > 1e-6 * max(region1, region2):
        raise IntersectionError("the two complexes do not cover the same region")
    raw = []
    for s1 in k1.complex.top_simplexes():
        c1 = k1.lift(s1)
        for s2 in k2.complex.top_simplexes():
            c2 = k2.lift(s2)
            pts, labels = clip_simplex_pair(c2, c1)
            if not pts:
                continue
            lattice_measure = _measure_of(dim, pts, labels)
            raw.append((pts, labels, (s1, s2), lattice_measure))
    poly = _assemble(raw, dim, None, k1, k2)
    if abs(poly.total_measure() - region1) > 1e-6 * region1:
        raise IntersectionError("intersection cells do not conserve the region measure")
    return poly


def _measure_of(dim, pts, labels):
    if len(pts) <= dim:
        return 0.0
    if dim <= 2:
        return cell_measure(dim, pts)
    return cell_measure(dim, pts, cell_face_lattice(dim, pts, labels))


def _top_measure(gk: GeomComplex, s: Simplex) -> float:
    pts = gk.lift(s)
    mat = pts[1:] - pts[0]
    return abs(float(np.linalg.det(mat))) / math.factorial(pts.shape[0] - 1)


def torus_intersect(k1: GeomComplex, k2: GeomComplex) -> PolytopalComplex:
    """Pairwise intersections on the flat torus by enumerating fundamental
    translates of one lifted simplex against the other."""
    if k1.period is None or k2.period is None or k1.period != k2.period:
        raise IntersectionError("both complexes must share one torus period")
    period = k1.period
    dim = k1.complex.dimension
    if dim not in (1, 2):
        raise IntersectionError("torus intersection supports dimensions 1 and 2")
    from .geometry import diameter as geom_diameter

    bound = period / 2  # 2 r(M) = inj(M) = period/2
    for gk in (k1, k2):
        for s in gk.complex.top_simplexes():
            d = geom_diameter(gk.geom_simplex(s))
            if d >= bound:
                raise IntersectionError(
                    f"simplex {s} has diameter {d:.4f} >= 2 r(M) = {bound}"
                )
    shifts = [np.array(c, dtype=float) * period
              for c in np.ndindex(*(3,) * dim)]
    shifts = [s - period for s in shifts]
    raw = []
    for s1 in k1.complex.top_simplexes():
        c1 = k1.lift(s1)
        a1 = c1.mean(axis=0)
        for s2 in k2.complex.top_simplexes():
            c2 = k2.lift(s2)
            c2 = c2 + period * np.round((a1 - c2.mean(axis=0)) / period)
            hits = []
            for t in shifts:
                pts, labels = clip_simplex_pair(c2 + t, c1)
                if pts:
                    measure = _measure_of(dim, pts, labels)
                    if measure >= MIN_MEASURE:
                        hits.append((pts, labels, measure))
            if len(hits) > 1:
                raise IntersectionError(
                    f"pair ({s1}, {s2}) meets in several translates; "
                    "diameter precondition violated"
                )
            if hits:
                pts, labels, measure = hits[0]
                raw.append((pts, labels, (s1, s2), measure))
    poly = _assemble(raw, dim, period, k1, k2)
    region = period**dim
    if abs(poly.total_measure() - region) > 1e-6 * region:
        raise IntersectionError("torus cells do not conserve the region measure")
    return poly


@dataclass
class CommonSubdivision:
    """β of the intersection complex: simplicial, with carriers into both
    parents and coordinates for every vertex."""

    complex: Complex
    coords: dict[int, np.ndarray]
    carrier1: dict[Simplex, Simplex]
    carrier2: dict[Simplex, Simplex]
    parent1: Complex
    parent2: Complex
    period: Optional[float]

    def as_subdivided(self, which: int) -> SubdividedComplex:
        if which == 1:
            return SubdividedComplex(self.complex, self.parent1, dict(self.carrier1))
        return SubdividedComplex(self.complex, self.parent2, dict(self.carrier2))

    def as_geom(self) -> GeomComplex:
        return GeomComplex(self.complex, Geometry.EUCLIDEAN, dict(self.coords), self.period)


def barycentric_polytopal(
    poly: PolytopalComplex, k1: GeomComplex, k2: GeomComplex
) -> CommonSubdivision:
    """Cone every cell over its subdivided boundary, by ascending dimension,
    with the barycenter at the cell's chart centroid."""
    next_label = len(poly.vertices)
    coords: dict[int, np.ndarray] = dict(poly.vertices)
    carrier1: dict[Simplex, Simplex] = {}
    carrier2: dict[Simplex, Simplex] = {}
    sub: dict[tuple, set[Simplex]] = {}
    registryless_wrap = (
        (lambda x: np.mod(x, poly.period)) if poly.period is not None else (lambda x: x)
    )
    for d in range(0, poly.dim + 1):
        for rec in poly.faces_of_dim(d):
            if d == 0:
                vid = rec.vids[0]
                sub[rec.vids] = {(vid,)}
                carrier1[(vid,)] = rec.carrier1
                carrier2[(vid,)] = rec.carrier2
                continue
            boundary: set[Simplex] = set()
            for bkey in rec.boundary:
                boundary |= sub[bkey]
            apex = next_label
            next_label += 1
            coords[apex] = registryless_wrap(np.mean(rec.lift, axis=0))
            carrier1[(apex,)] = rec.carrier1
            carrier2[(apex,)] = rec.carrier2
            coned = {(apex,)}
            for s in boundary:
                child = tuple(sorted(s + (apex,)))
                coned.add(child)
                carrier1[child] = rec.carrier1
                carrier2[child] = rec.carrier2
            sub[rec.vids] = boundary | coned
    out: set[Simplex] = set()
    for cell in poly.cells:
        out |= sub[tuple(sorted(cell.vertex_ids))]
    complex_ = Complex(out)  # validated: the cone construction must be closed
    carrier1 = {s: carrier1[s] for s in complex_.simplexes}
    carrier2 = {s: carrier2[s] for s in complex_.simplexes}
    return CommonSubdivision(
        complex_, coords, carrier1, carrier2, k1.complex, k2.complex, poly.period
    )


def commonsub_count_check(
    k1: GeomComplex, k2: GeomComplex, common: CommonSubdivision
) -> dict:
    """Skeleton counts of the common subdivision against the per-dimension
    bound (2^n - 1)(n+1)!^2 p_i q_n, plus measure conservation."""
    from .bounds import commonsub_bound

    n = k1.complex.dimension
    p = k1.complex.f_vector()
    q = k2.complex.f_vector()
    s = [0] * (n + 1)
    for simp in common.complex.simplexes:
        i = len(simp) - 1
        if len(common.carrier1[simp]) - 1 == i:
            s[i] += 1
    rows = []
    for i in range(n + 1):
        bound = commonsub_bound(n, i, p[i], q[n])
        rows.append(
            {"i": i, "s_i": s[i], "bound": bound, "ok": s[i] < bound or s[i] == 0}
        )
    gk = common.as_geom()
    total = sum(_top_measure(gk, t) for t in common.complex.top_simplexes())
    if common.period is not None:
        region = common.period**n
    else:
        region = sum(_top_measure(k1, t) for t in k1.complex.top_simplexes())
    return {
        "skeleton": rows,
        "all_ok": all(r["ok"] for r in rows),
        "measure": total,
        "region": region,
        "measure_ok": abs(total - region) <= 1e-6 * max(region, 1e-300),
    }
