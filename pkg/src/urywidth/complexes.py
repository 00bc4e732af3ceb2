"""Piecewise-Euclidean complexes carried by a weighted graph metric.

The model: a complex is a set of vertices, weighted edges, triangles given
as triples of edge ids, and (optionally, for skeleton-extension work)
3-simplices given as vertex quadruples.  All metric queries -- distance
fields, diameters, separator widths -- are computed on the 1-skeleton of a
refined complex, where `steiner_refine` has split every edge below a target
scale h by iterated exact midpoint subdivision.  Midpoint subdivision keeps
the triangulation honest (each triangle splits into four similar ones, the
new midlines are the "crossing" edges that let shortest paths cut through
triangle interiors) and its edge lengths are exact: halves of halves, and
midlines equal to half the opposite side.

Every graph path is a rectifiable path of the same length in the underlying
polyhedron, so graph distances always dominate the intrinsic metric; the
residual overshoot is the refinement slack epsilon(h) that certificates
carry around explicitly.

Periodic meshes (flat tori, the grid surface) additionally store a lattice
basis and an integer wrap vector per edge; the wrap of a closed edge loop
is its deck translation, which is what lattice covers are built from.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as _csgraph_dijkstra

from .errors import (
    BadParam,
    Disconnected1Skeleton,
    NonPositiveLength,
    TriangleInequalityViolated,
)

_EXACT = 1e-9  # tolerance for "exact" float bookkeeping


# --------------------------------------------------------------------------
# points on a complex
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PointOnComplex:
    """A symbolic point: a vertex, a point along an edge, or a barycentric
    point inside a triangle.  No ambient embedding is required."""

    kind: str  # "vertex" | "edge" | "triangle"
    cell: int
    t: float = 0.0  # edge parameter in [0, 1]
    bary: Tuple[float, float, float] = (1.0, 0.0, 0.0)

    @staticmethod
    def vertex(v: int) -> "PointOnComplex":
        return PointOnComplex("vertex", int(v))

    @staticmethod
    def on_edge(e: int, t: float) -> "PointOnComplex":
        if not 0.0 <= t <= 1.0:
            raise BadParam(f"edge parameter {t} outside [0, 1]")
        return PointOnComplex("edge", int(e), t=float(t))

    @staticmethod
    def in_triangle(tri: int, bary: Sequence[float]) -> "PointOnComplex":
        b = tuple(float(x) for x in bary)
        if len(b) != 3 or min(b) < -_EXACT or abs(sum(b) - 1.0) > 1e-6:
            raise BadParam(f"bad barycentric coordinates {b}")
        return PointOnComplex("triangle", int(tri), bary=b)


PointLike = Union[int, PointOnComplex]


# --------------------------------------------------------------------------
# the complex
# --------------------------------------------------------------------------


@dataclass
class RefinementInfo:
    base: "MetricComplex"
    h: float
    rounds: int
    # base edge id -> sorted list of (t, refined vertex id), including the
    # base endpoints at t = 0 and t = 1
    edge_points: Dict[int, List[Tuple[float, int]]] = field(default_factory=dict)


@dataclass(eq=False)
class MetricComplex:
    n_vertices: int
    edges: np.ndarray  # (E, 2) int64
    lengths: np.ndarray  # (E,) float64
    triangles: np.ndarray  # (T, 3) int64 edge ids
    tets: np.ndarray  # (K, 4) int64 vertex ids
    boundary_edges: frozenset
    coords: Optional[np.ndarray] = None  # (V, 3)
    lattice: Optional[np.ndarray] = None  # (3, k) lattice basis
    wraps: Optional[np.ndarray] = None  # (E, k) int wrap vectors
    refinement: Optional[RefinementInfo] = None
    name: str = ""

    # -------------------------------------------------- derived structure

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def dim(self) -> int:
        if len(self.tets):
            return 3
        if len(self.triangles):
            return 2
        return 1

    @cached_property
    def tri_vertices(self) -> np.ndarray:
        """(T, 3) vertex ids per triangle, ordered as a closed edge cycle:
        row (a, b, c) means edge0 joins a-b, edge1 joins b-c, edge2 joins c-a."""
        out = np.zeros((len(self.triangles), 3), dtype=np.int64)
        for i, (e0, e1, e2) in enumerate(self.triangles):
            out[i] = _triangle_cycle(self.edges, int(e0), int(e1), int(e2), i)
        return out

    @cached_property
    def edge_triangles(self) -> List[List[int]]:
        out: List[List[int]] = [[] for _ in range(self.n_edges)]
        for t, tri in enumerate(self.triangles):
            for e in tri:
                out[int(e)].append(t)
        return out

    @cached_property
    def vertex_edges(self) -> List[List[int]]:
        out: List[List[int]] = [[] for _ in range(self.n_vertices)]
        for e, (u, v) in enumerate(self.edges):
            out[int(u)].append(e)
            out[int(v)].append(e)
        return out

    @cached_property
    def adjacency(self) -> List[List[Tuple[int, float, int]]]:
        """Per-vertex list of (neighbor, weight, edge id), neighbor-sorted."""
        out: List[List[Tuple[int, float, int]]] = [[] for _ in range(self.n_vertices)]
        for e, (u, v) in enumerate(self.edges):
            w = float(self.lengths[e])
            out[int(u)].append((int(v), w, e))
            out[int(v)].append((int(u), w, e))
        for lst in out:
            lst.sort()
        return out

    @cached_property
    def csgraph(self) -> csr_matrix:
        u = self.edges[:, 0]
        v = self.edges[:, 1]
        w = self.lengths
        n = self.n_vertices
        return csr_matrix(
            (np.concatenate([w, w]), (np.concatenate([u, v]), np.concatenate([v, u]))),
            shape=(n, n),
        )

    @cached_property
    def is_surface(self) -> bool:
        return all(len(ts) <= 2 for ts in self.edge_triangles)

    @cached_property
    def boundary_vertices(self) -> frozenset:
        out = set()
        for e in self.boundary_edges:
            out.add(int(self.edges[e, 0]))
            out.add(int(self.edges[e, 1]))
        return frozenset(out)

    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + len(self.triangles) - len(self.tets)

    def edge_between(self, u: int, v: int) -> Optional[int]:
        for nbr, _, e in self.adjacency[u]:
            if nbr == v:
                return e
        return None

    def displacement(self, e: int) -> Optional[np.ndarray]:
        """Ambient displacement along edge e (tail to head as stored),
        unwrapped through the lattice if the mesh is periodic."""
        if self.coords is None:
            return None
        u, v = self.edges[e]
        d = self.coords[v] - self.coords[u]
        if self.wraps is not None and self.lattice is not None:
            d = d + self.lattice @ self.wraps[e]
        return d


def _triangle_cycle(edges: np.ndarray, e0: int, e1: int, e2: int, tri_id: int):
    """Order the three edges' endpoints into a closed cycle (a, b, c)."""
    a, b = int(edges[e0, 0]), int(edges[e0, 1])
    p1 = {int(edges[e1, 0]), int(edges[e1, 1])}
    p2 = {int(edges[e2, 0]), int(edges[e2, 1])}
    # edge1 must continue from b, edge2 must close back to a
    if b in p1 and a in p2:
        c_set = p1 - {b}
    elif a in p1 and b in p2:
        a, b = b, a
        c_set = p1 - {b}
    else:
        raise BadParam(f"triangle {tri_id}: edges ({e0},{e1},{e2}) do not chain")
    if len(c_set) != 1:
        raise BadParam(f"triangle {tri_id}: degenerate edge cycle")
    c = c_set.pop()
    if c not in p2 or {a, b, c} != {a, b} | {c} or len({a, b, c}) != 3:
        raise BadParam(f"triangle {tri_id}: edges do not close a 3-cycle")
    return a, b, c


# --------------------------------------------------------------------------
# construction
# --------------------------------------------------------------------------


def build_complex(
    n_vertices: int,
    edges: Sequence[Tuple[int, int, float]],
    triangles: Sequence[Tuple[int, int, int]] = (),
    tets: Sequence[Tuple[int, int, int, int]] = (),
    boundary: Optional[Iterable[int]] = None,
    coords: Optional[np.ndarray] = None,
    lattice: Optional[np.ndarray] = None,
    wraps: Optional[np.ndarray] = None,
    name: str = "",
) -> MetricComplex:
    """Validate and assemble a MetricComplex.

    Raises NonPositiveLength, TriangleInequalityViolated, or
    Disconnected1Skeleton on malformed input.  If `boundary` is omitted it
    is inferred for surfaces as the set of edges lying in fewer than two
    triangles.
    """
    E = np.array([(int(u), int(v)) for (u, v, _) in edges], dtype=np.int64).reshape(
        -1, 2
    )
    L = np.array([float(l) for (_, _, l) in edges], dtype=np.float64)
    for e, (u, v) in enumerate(E):
        if u == v:
            raise BadParam(f"edge {e} is a self-loop at vertex {u}")
        if not (0 <= u < n_vertices and 0 <= v < n_vertices):
            raise BadParam(f"edge {e} references a missing vertex")
    for e, l in enumerate(L):
        if not l > 0:
            raise NonPositiveLength(e, float(l))

    T = np.array([tuple(map(int, t)) for t in triangles], dtype=np.int64).reshape(-1, 3)
    for i, tri in enumerate(T):
        if max(tri) >= len(E) or min(tri) < 0:
            raise BadParam(f"triangle {i} references a missing edge")
        ls = sorted(float(L[e]) for e in tri)
        if not ls[0] + ls[1] > ls[2] + 0.0:
            raise TriangleInequalityViolated(i, ls)

    K = np.array([tuple(map(int, q)) for q in tets], dtype=np.int64).reshape(-1, 4)

    c = MetricComplex(
        n_vertices=n_vertices,
        edges=E,
        lengths=L,
        triangles=T,
        tets=K,
        boundary_edges=frozenset(),
        coords=None if coords is None else np.asarray(coords, dtype=np.float64),
        lattice=None if lattice is None else np.asarray(lattice, dtype=np.float64),
        wraps=None if wraps is None else np.asarray(wraps, dtype=np.int64),
        name=name,
    )

    _ = c.tri_vertices  # validates the edge cycles

    tri_by_verts = {}
    for i in range(len(T)):
        tri_by_verts[frozenset(map(int, c.tri_vertices[i]))] = i
    for q, quad in enumerate(K):
        if len(set(map(int, quad))) != 4:
            raise BadParam(f"3-simplex {q} has repeated vertices")
        for a in range(4):
            face = frozenset(int(quad[b]) for b in range(4) if b != a)
            if face not in tri_by_verts:
                raise BadParam(f"3-simplex {q} is missing face {sorted(face)}")
        for a in range(4):
            for b in range(a + 1, 4):
                if c.edge_between(int(quad[a]), int(quad[b])) is None:
                    raise BadParam(f"3-simplex {q} is missing an edge")

    # connectivity of the 1-skeleton
    comps = components(c)
    if len(comps) != 1:
        raise Disconnected1Skeleton(len(comps))

    if boundary is None:
        if len(T):
            b = frozenset(
                e for e in range(len(E)) if len(c.edge_triangles[e]) < 2
            ) if c.is_surface else frozenset(
                e for e in range(len(E)) if len(c.edge_triangles[e]) == 0
            )
        else:
            b = frozenset()
    else:
        b = frozenset(int(e) for e in boundary)
        if b and (min(b) < 0 or max(b) >= len(E)):
            raise BadParam("boundary references a missing edge")
    c.boundary_edges = b
    return c


# --------------------------------------------------------------------------
# refinement
# --------------------------------------------------------------------------


def steiner_refine(c: MetricComplex, h: float) -> MetricComplex:
    """Refine until every edge has length <= h, by iterated exact midpoint
    subdivision.  Idempotent: refining an already-fine complex returns it
    unchanged.  Dimension-3 complexes are only accepted when no subdivision
    is needed (skeleton-extension work runs at native resolution)."""
    if not h > 0:
        raise BadParam(f"refinement scale h={h} must be positive")
    if c.n_edges == 0 or float(c.lengths.max()) <= h + _EXACT:
        return c
    if len(c.tets):
        raise BadParam("midpoint refinement of 3-simplices is not supported")

    out = c
    base = c.refinement.base if c.refinement else c
    edge_points = (
        {e: list(pts) for e, pts in c.refinement.edge_points.items()}
        if c.refinement
        else {
            e: [(0.0, int(c.edges[e, 0])), (1.0, int(c.edges[e, 1]))]
            for e in range(c.n_edges)
        }
    )
    # carrier[e] = (base edge id, t0, t1) for sub-edges of base edges
    if c.refinement:
        carrier: Dict[int, Tuple[int, float, float]] = getattr(
            c, "_edge_carrier", {}
        )
        if not carrier:
            carrier = _rebuild_carrier(edge_points, c)
    else:
        carrier = {e: (e, 0.0, 1.0) for e in range(c.n_edges)}
    rounds = c.refinement.rounds if c.refinement else 0

    while float(out.lengths.max()) > h + _EXACT:
        out, carrier = _midpoint_subdivide(out, carrier, edge_points)
        rounds += 1

    out.refinement = RefinementInfo(
        base=base,
        h=h,
        rounds=rounds,
        edge_points={e: sorted(pts) for e, pts in edge_points.items()},
    )
    out._edge_carrier = carrier  # type: ignore[attr-defined]
    out.name = c.name
    return out


def _rebuild_carrier(edge_points, c):
    carrier = {}
    lookup = {}
    for be, pts in edge_points.items():
        pts = sorted(pts)
        for (t0, v0), (t1, v1) in zip(pts, pts[1:]):
            lookup[(min(v0, v1), max(v0, v1))] = (be, t0, t1) if v0 < v1 else (
                be,
                t1,
                t0,
            )
    for e, (u, v) in enumerate(c.edges):
        key = (min(int(u), int(v)), max(int(u), int(v)))
        if key in lookup:
            be, ta, tb = lookup[key]
            if int(u) > int(v):
                ta, tb = tb, ta
            carrier[e] = (be, ta, tb)
    return carrier


def _midpoint_subdivide(c: MetricComplex, carrier, edge_points):
    V = c.n_vertices
    E = c.n_edges
    mid = np.arange(V, V + E)  # midpoint vertex of edge e

    new_edges: List[Tuple[int, int]] = []
    new_lengths: List[float] = []
    new_wraps: List[np.ndarray] = [] if c.wraps is not None else None
    zero_wrap = None if c.wraps is None else np.zeros(c.wraps.shape[1], dtype=np.int64)

    # halves: edge e -> ids 2e (tail half) and 2e+1 (head half)
    for e in range(E):
        u, v = map(int, c.edges[e])
        m = int(mid[e])
        half = float(c.lengths[e]) / 2.0
        new_edges.append((u, m))
        new_lengths.append(half)
        new_edges.append((m, v))
        new_lengths.append(half)
        if new_wraps is not None:
            new_wraps.append(zero_wrap)
            new_wraps.append(c.wraps[e].copy())

    new_carrier = {}
    for e, (be, t0, t1) in carrier.items():
        tm = 0.5 * (t0 + t1)
        new_carrier[2 * e] = (be, t0, tm)
        new_carrier[2 * e + 1] = (be, tm, t1)
        edge_points[be].append((tm, int(mid[e])))

    new_coords = None
    if c.coords is not None:
        new_coords = np.zeros((V + E, 3))
        new_coords[:V] = c.coords
        for e in range(E):
            u, v = map(int, c.edges[e])
            head = c.coords[v].copy()
            if c.wraps is not None and c.lattice is not None:
                head = head + c.lattice @ c.wraps[e]
            new_coords[mid[e]] = 0.5 * (c.coords[u] + head)

    # midlines and the 4-way triangle split
    new_triangles: List[Tuple[int, int, int]] = []
    for t in range(len(c.triangles)):
        e0, e1, e2 = map(int, c.triangles[t])
        a, b, cc = map(int, c.tri_vertices[t])
        m01, m12, m20 = int(mid[e0]), int(mid[e1]), int(mid[e2])
        l0, l1, l2 = (float(c.lengths[e]) for e in (e0, e1, e2))

        def _half_ids(e, tail):
            # (tail half id, head half id) oriented tail -> head as stored
            u, v = map(int, c.edges[e])
            return (2 * e, 2 * e + 1) if u == tail else (2 * e + 1, 2 * e)

        a01, b01 = _half_ids(e0, a)
        b12, c12 = _half_ids(e1, b)
        c20, a20 = _half_ids(e2, cc)

        base_id = len(new_edges)
        # midline opposite each corner: lengths are half the opposite side
        for (p, q, ln) in ((m01, m12, l2), (m12, m20, l0), (m20, m01, l1)):
            new_edges.append((p, q))
            new_lengths.append(ln / 2.0)
            if new_wraps is not None:
                new_wraps.append(_solve_wrap(c, new_coords, p, q, ln / 2.0))
        ml01_12, ml12_20, ml20_01 = base_id, base_id + 1, base_id + 2

        new_triangles.append((a01, ml20_01, a20))  # corner a
        new_triangles.append((b12, ml01_12, b01))  # corner b
        new_triangles.append((c20, ml12_20, c12))  # corner c
        new_triangles.append((ml01_12, ml12_20, ml20_01))  # middle

    new_boundary = set()
    for e in c.boundary_edges:
        new_boundary.add(2 * e)
        new_boundary.add(2 * e + 1)

    out = MetricComplex(
        n_vertices=V + E,
        edges=np.array(new_edges, dtype=np.int64),
        lengths=np.array(new_lengths, dtype=np.float64),
        triangles=np.array(new_triangles, dtype=np.int64).reshape(-1, 3),
        tets=np.zeros((0, 4), dtype=np.int64),
        boundary_edges=frozenset(new_boundary),
        coords=new_coords,
        lattice=c.lattice,
        wraps=None if new_wraps is None else np.array(new_wraps, dtype=np.int64),
        name=c.name,
    )
    return out, new_carrier


def _solve_wrap(c, new_coords, p, q, length):
    """Integer wrap for a midline so that the unwrapped displacement has the
    stated exact length.  Periodic meshes have an invertible lattice basis."""
    d = new_coords[q] - new_coords[p]
    B = c.lattice
    k = B.shape[1]
    # try the wrap minimizing | d + B w |; search small integer offsets
    w0 = np.linalg.lstsq(B, -d, rcond=None)[0]
    best = None
    base = np.round(w0).astype(np.int64)
    for delta in _wrap_offsets(k):
        w = base + delta
        ln = float(np.linalg.norm(d + B @ w))
        if abs(ln - length) <= 1e-7:
            return w
        if best is None or ln < best[0]:
            best = (ln, w)
    raise BadParam(
        f"could not solve a lattice wrap for midline ({p},{q}): "
        f"closest length {best[0]:.9g} vs expected {length:.9g}"
    )


def _wrap_offsets(k):
    rng = (-1, 0, 1)
    if k == 1:
        return [np.array([a], dtype=np.int64) for a in rng]
    if k == 2:
        return [np.array([a, b], dtype=np.int64) for a in rng for b in rng]
    return [
        np.array([a, b, c], dtype=np.int64)
        for a in rng
        for b in rng
        for c in rng
    ]


# --------------------------------------------------------------------------
# seeds: symbolic points -> weighted vertex sources
# --------------------------------------------------------------------------


def as_seeds(c: MetricComplex, point: PointLike) -> Dict[int, float]:
    """Resolve a point to {vertex: starting offset} seeds on c's 1-skeleton."""
    if isinstance(point, (int, np.integer)):
        point = PointOnComplex.vertex(int(point))
    if point.kind == "vertex":
        if not 0 <= point.cell < c.n_vertices:
            raise BadParam(f"vertex {point.cell} not on complex")
        return {int(point.cell): 0.0}
    if point.kind == "edge":
        return _edge_point_seeds(c, point.cell, point.t)
    if point.kind == "triangle":
        return _triangle_point_seeds(c, point.cell, point.bary)
    raise BadParam(f"unknown point kind {point.kind!r}")


def _edge_point_seeds(c, e, t):
    if c.refinement is not None:
        pts = c.refinement.edge_points.get(int(e))
        if pts is None:
            raise BadParam(f"edge {e} is not an edge of the base complex")
        base_len = float(c.refinement.base.lengths[int(e)])
        pts = sorted(pts)
        for (t0, v0), (t1, v1) in zip(pts, pts[1:]):
            if t0 - _EXACT <= t <= t1 + _EXACT:
                seeds = {}
                o0 = (t - t0) * base_len
                o1 = (t1 - t) * base_len
                if o0 <= _EXACT:
                    return {v0: 0.0}
                if o1 <= _EXACT:
                    return {v1: 0.0}
                seeds[v0] = o0
                seeds[v1] = o1
                return seeds
        raise BadParam(f"parameter {t} not located on edge {e}")
    if not 0 <= e < c.n_edges:
        raise BadParam(f"edge {e} not on complex")
    u, v = map(int, c.edges[e])
    ln = float(c.lengths[e])
    if t <= _EXACT:
        return {u: 0.0}
    if t >= 1.0 - _EXACT:
        return {v: 0.0}
    return {u: t * ln, v: (1.0 - t) * ln}


def _triangle_point_seeds(c, tri, bary):
    base = c.refinement.base if c.refinement is not None else c
    if not 0 <= tri < len(base.triangles):
        raise BadParam(f"triangle {tri} not on complex")
    a, b, cc = map(int, base.tri_vertices[tri])
    e0, e1, e2 = map(int, base.triangles[tri])
    lab = float(base.lengths[e0])
    lbc = float(base.lengths[e1])
    lca = float(base.lengths[e2])
    # lay the triangle flat: a at origin, b on the x-axis
    A = np.array([0.0, 0.0])
    B = np.array([lab, 0.0])
    cx = (lab * lab + lca * lca - lbc * lbc) / (2.0 * lab)
    cy2 = max(lca * lca - cx * cx, 0.0)
    C = np.array([cx, np.sqrt(cy2)])
    P = bary[0] * A + bary[1] * B + bary[2] * C
    out = {}
    for v, Q in ((a, A), (b, B), (cc, C)):
        off = float(np.linalg.norm(P - Q))
        if off <= _EXACT:
            return {v: 0.0}
        out[v] = off
    return out


# --------------------------------------------------------------------------
# distance machinery
# --------------------------------------------------------------------------


@dataclass
class DistanceField:
    """Vertex distances from a source set.  1-Lipschitz along every edge,
    zero (up to the refinement scale) exactly on the sources."""

    complex: MetricComplex
    values: np.ndarray
    parents: Optional[np.ndarray]
    sources: Tuple[PointOnComplex, ...]
    h: float

    def check_lipschitz(self, tol: float = 1e-9) -> bool:
        d = self.values
        for e, (u, v) in enumerate(self.complex.edges):
            if abs(d[u] - d[v]) > self.complex.lengths[e] + tol:
                return False
        return True


def distance_field(
    c: MetricComplex,
    sources: Union[PointLike, Sequence[PointLike]],
    need_parents: bool = False,
) -> DistanceField:
    """Multi-source Dijkstra on the 1-skeleton with deterministic
    tie-breaking (the heap orders by (distance, vertex id))."""
    if isinstance(sources, (int, np.integer, PointOnComplex)):
        sources = [sources]
    seeds: Dict[int, float] = {}
    norm_sources = []
    for p in sources:
        if isinstance(p, (int, np.integer)):
            p = PointOnComplex.vertex(int(p))
        norm_sources.append(p)
        for v, off in as_seeds(c, p).items():
            if v not in seeds or off < seeds[v]:
                seeds[v] = off
    dist, parents = _dijkstra(c.adjacency, c.n_vertices, seeds, need_parents)
    h = c.refinement.h if c.refinement else float(c.lengths.max())
    return DistanceField(
        complex=c,
        values=dist,
        parents=parents,
        sources=tuple(norm_sources),
        h=h,
    )


def _dijkstra(adjacency, n, seeds, need_parents=False, vertex_ok=None):
    dist = np.full(n, np.inf)
    parents = np.full(n, -1, dtype=np.int64) if need_parents else None
    heap = []
    for v in sorted(seeds):
        off = seeds[v]
        if vertex_ok is not None and not vertex_ok[v]:
            continue
        if off < dist[v]:
            dist[v] = off
            heapq.heappush(heap, (off, v))
    done = np.zeros(n, dtype=bool)
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v, w, _ in adjacency[u]:
            if vertex_ok is not None and not vertex_ok[v]:
                continue
            nd = d + w
            if nd < dist[v] - 1e-15:
                dist[v] = nd
                if parents is not None:
                    parents[v] = u
                heapq.heappush(heap, (nd, v))
    return dist, parents


def shortest_path(c: MetricComplex, src: PointLike, dst: PointLike) -> List[int]:
    """Deterministic shortest vertex path between two (vertex) points."""
    f = distance_field(c, src, need_parents=True)
    dseeds = as_seeds(c, dst)
    end = min(dseeds, key=lambda v: (f.values[v] + dseeds[v], v))
    path = [end]
    while f.parents[path[-1]] >= 0:
        path.append(int(f.parents[path[-1]]))
    path.reverse()
    return path


def distance_rows(
    c: MetricComplex, sources: Sequence[int], limit: float = np.inf
) -> np.ndarray:
    """Bulk single-source distances (one row per source) via compiled
    Dijkstra.  With a finite `limit`, entries beyond it come back inf."""
    if len(sources) == 0:
        return np.zeros((0, c.n_vertices))
    return _csgraph_dijkstra(
        c.csgraph, directed=False, indices=list(map(int, sources)), limit=limit
    )


def local_distances(
    c: MetricComplex, sources: Union[int, Sequence[int]], cutoff: float
) -> Dict[int, float]:
    """Dijkstra ball: distances from the source set, truncated at `cutoff`.
    Returns only the vertices actually reached."""
    if isinstance(sources, (int, np.integer)):
        sources = [int(sources)]
    dist: Dict[int, float] = {}
    heap = []
    for v in sorted(set(map(int, sources))):
        dist[v] = 0.0
        heapq.heappush(heap, (0.0, v))
    adj = c.adjacency
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist.get(u, np.inf) + 1e-15:
            continue
        for v, w, _ in adj[u]:
            nd = d + w
            if nd > cutoff:
                continue
            if nd < dist.get(v, np.inf) - 1e-15:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def diameter_lower_bound(c: MetricComplex, seeds: int = 8) -> float:
    """Certified lower bound on the diameter by repeated double sweeps:
    from each seed, jump to its farthest vertex and measure again."""
    n = c.n_vertices
    if n <= 1:
        return 0.0
    best = 0.0
    rng = np.linspace(0, n - 1, num=min(seeds, n), dtype=np.int64)
    for s in rng:
        row = distance_rows(c, [int(s)])[0]
        far = int(np.argmax(row))
        row2 = distance_rows(c, [far])[0]
        best = max(best, float(row2.max()))
    return best


def point_distance(c: MetricComplex, p: PointLike, q: PointLike) -> float:
    sp = as_seeds(c, p)
    sq = as_seeds(c, q)
    shared = set(sp) & set(sq)
    direct = min((sp[v] + sq[v] for v in shared), default=np.inf)
    f = distance_field(c, p)
    through = min(f.values[v] + off for v, off in sq.items())
    return float(min(direct, through))


# --------------------------------------------------------------------------
# components
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Component:
    vertices: np.ndarray  # sorted vertex ids
    edges: np.ndarray  # sorted edge ids

    @property
    def label(self) -> int:
        return int(self.vertices[0]) if len(self.vertices) else -1


def components(
    c: MetricComplex,
    vertices: Optional[Iterable[int]] = None,
    edges: Optional[Iterable[int]] = None,
) -> List[Component]:
    """Path components of a subcomplex, labeled (and sorted) by least
    contained vertex id.

    With `vertices` only: the induced subgraph on that vertex set.  With
    `edges`: the closed subcomplex spanned by those edges plus any extra
    vertices listed.  With neither: the whole 1-skeleton.
    """
    if vertices is None and edges is None:
        vset = np.arange(c.n_vertices)
        eset = range(c.n_edges)
        induced = True
    elif edges is not None:
        eset = sorted(set(int(e) for e in edges))
        vs = set(int(v) for v in (vertices or ()))
        for e in eset:
            vs.add(int(c.edges[e, 0]))
            vs.add(int(c.edges[e, 1]))
        vset = np.array(sorted(vs), dtype=np.int64)
        induced = False
    else:
        vset = np.array(sorted(set(int(v) for v in vertices)), dtype=np.int64)
        mask = np.zeros(c.n_vertices, dtype=bool)
        mask[vset] = True
        eset = [
            e
            for e in range(c.n_edges)
            if mask[c.edges[e, 0]] and mask[c.edges[e, 1]]
        ]
        induced = True

    parent = {int(v): int(v) for v in vset}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in eset:
        u, v = map(int, c.edges[e])
        if u in parent and v in parent:
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[max(ru, rv)] = min(ru, rv)

    groups_v: Dict[int, List[int]] = {}
    for v in map(int, vset):
        groups_v.setdefault(find(v), []).append(v)
    groups_e: Dict[int, List[int]] = {r: [] for r in groups_v}
    for e in eset:
        u = int(c.edges[e, 0])
        if u in parent:
            groups_e[find(u)].append(e)

    out = []
    for root in sorted(groups_v):
        out.append(
            Component(
                vertices=np.array(sorted(groups_v[root]), dtype=np.int64),
                edges=np.array(sorted(groups_e[root]), dtype=np.int64),
            )
        )
    return out


# --------------------------------------------------------------------------
# diameters
# --------------------------------------------------------------------------


def subset_diameter(
    c: MetricComplex,
    pts: Union[Sequence[PointLike], np.ndarray],
    mode: str = "extrinsic",
) -> float:
    """Exact max pairwise distance over a point set.

    extrinsic: distances measured in the whole complex.  intrinsic:
    distances measured inside the induced subgraph (infinite if it is
    disconnected).  Extrinsic never exceeds intrinsic.
    """
    pts = list(pts)
    if len(pts) <= 1:
        return 0.0
    if all(isinstance(p, (int, np.integer)) for p in pts):
        S = np.array(sorted(set(int(p) for p in pts)), dtype=np.int64)
        if mode == "extrinsic":
            return _pairwise_max(c, S)
        if mode == "intrinsic":
            return _intrinsic_diameter(c, S)
        raise BadParam(f"unknown diameter mode {mode!r}")
    if mode != "extrinsic":
        raise BadParam("intrinsic mode expects vertex subsets")
    best = 0.0
    for i, p in enumerate(pts):
        f = distance_field(c, p)
        for q in pts[i + 1 :]:
            sq = as_seeds(c, q)
            d = min(f.values[v] + off for v, off in sq.items())
            best = max(best, float(d))
    return best


def _pairwise_max(c: MetricComplex, S: np.ndarray) -> float:
    if len(S) < 2:
        return 0.0
    rows = distance_rows(c, [int(S[0])])
    d0 = rows[0][S]
    best = float(d0.max())
    ecc0 = best
    order = S[np.argsort(-d0, kind="stable")]
    batch = []
    for u in order[1:]:
        # max_v d(u, v) <= d(u, u0) + ecc(u0): skip vertices that cannot improve
        bound = float(rows[0][u]) + ecc0
        if bound <= best + 1e-12:
            continue
        batch.append(int(u))
    for i in range(0, len(batch), 64):
        chunk = batch[i : i + 64]
        rr = distance_rows(c, chunk)
        m = float(rr[:, S].max()) if rr.size else 0.0
        best = max(best, m)
    return best


def _intrinsic_diameter(c: MetricComplex, S: np.ndarray) -> float:
    mask = np.zeros(c.n_vertices, dtype=bool)
    mask[S] = True
    sub_adj = {int(v): [] for v in S}
    for e, (u, v) in enumerate(c.edges):
        u, v = int(u), int(v)
        if mask[u] and mask[v]:
            w = float(c.lengths[e])
            sub_adj[u].append((v, w, e))
            sub_adj[v].append((u, w, e))
    best = 0.0
    for v in S:
        dist, _ = _dijkstra(
            _ListAdj(sub_adj), c.n_vertices, {int(v): 0.0}, False
        )
        d = dist[S]
        if np.isinf(d).any():
            return float("inf")
        best = max(best, float(d.max()))
    return best


class _ListAdj:
    """Adapter so the heap Dijkstra can walk a dict-of-lists adjacency."""

    def __init__(self, d):
        self._d = d

    def __getitem__(self, v):
        return self._d.get(v, ())


def component_diameter(
    c: MetricComplex, comp: Component, mode: str = "extrinsic"
) -> float:
    if mode == "intrinsic" and len(comp.edges):
        # measure inside the component's own cells only
        sub_adj = {int(v): [] for v in comp.vertices}
        for e in comp.edges:
            u, v = map(int, c.edges[e])
            w = float(c.lengths[e])
            sub_adj[u].append((v, w, int(e)))
            sub_adj[v].append((u, w, int(e)))
        best = 0.0
        for v in comp.vertices:
            dist, _ = _dijkstra(_ListAdj(sub_adj), c.n_vertices, {int(v): 0.0})
            d = dist[comp.vertices]
            if np.isinf(d).any():
                return float("inf")
            best = max(best, float(d.max()))
        return best
    return subset_diameter(c, comp.vertices, mode=mode)


def complex_diameter(c: MetricComplex) -> float:
    return _pairwise_max(c, np.arange(c.n_vertices))
