"""Surface surgery: cutting along boundary-to-boundary arcs, essential-arc
search, Euclidean strip insertion, and separator rewiring across strips.

Cutting is the combinatorial backbone for unrolled covers of surfaces with
free fundamental group: cut along a disjoint system of essential arcs to get
a simply connected piece, then develop copies of it across the cut sides.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from .complexes import (
    MetricComplex,
    build_complex,
    complex_diameter,
    components,
    distance_rows,
    subset_diameter,
)
from .errors import (
    ArcNotSimple,
    ArcsIntersect,
    BadParam,
    CaseDetectionAmbiguous,
    Disconnected1Skeleton,
    InfiniteIntersection,
    IsDisk,
    PreconditionUnmet,
    TruncationTooSmall,
    UnsupportedTopology,
)
# NB: .separators imports .sweep which imports .covers which imports this
# module; separator helpers are therefore imported lazily inside functions.

__all__ = [
    "CutArc",
    "CutResult",
    "cut_along_paths",
    "path_edges",
    "would_disconnect",
    "shortest_essential_arc",
    "Strip",
    "StripInsertion",
    "insert_strip",
    "collapse_stretch",
    "FillCertificate",
    "fillin_check",
    "fillout_check",
    "PatternPiece",
    "EndPattern",
    "RewiredSeparator",
    "rewire_separator",
    "WordBallPatch",
    "TheoremBReport",
    "theorem_b_pipeline",
]


@dataclass(frozen=True)
class CutArc:
    """A simple boundary-to-boundary path, with its essentiality witness."""

    vertices: Tuple[int, ...]
    edges: Tuple[int, ...]
    length: float
    essential: bool
    witness: str = ""


@dataclass
class CutResult:
    """Outcome of cutting a surface along disjoint simple arcs.

    Each cut arc leaves two copies of itself on the new surface, labeled
    side 0 and side 1 consistently along the arc."""

    complex: MetricComplex
    base: MetricComplex
    vertex_map: np.ndarray          # new vertex id -> base vertex id
    edge_map: np.ndarray            # new edge id -> base edge id
    sides: List[dict]               # per arc: vertices0/1, edges0/1 in new ids


def path_edges(c: MetricComplex, vertices: Sequence[int]) -> List[int]:
    """Resolve a vertex sequence to the edge ids joining consecutive pairs."""
    out = []
    for a, b in zip(vertices, vertices[1:]):
        e = c.edge_between(int(a), int(b))
        if e is None:
            raise BadParam(f"no edge joins vertices {a} and {b}")
        out.append(e)
    return out


def _validate_arcs(c: MetricComplex, paths: Sequence[Sequence[int]]):
    if not c.is_surface:
        raise BadParam("cutting requires a surface complex")
    bnd = c.boundary_vertices
    seen: Dict[int, int] = {}
    all_edges: List[List[int]] = []
    for i, p in enumerate(paths):
        p = [int(v) for v in p]
        if len(p) < 2:
            raise ArcNotSimple(f"arc {i} has fewer than two vertices")
        if len(set(p)) != len(p):
            raise ArcNotSimple(f"arc {i} revisits a vertex")
        if p[0] not in bnd or p[-1] not in bnd:
            raise ArcNotSimple(f"arc {i} endpoints must lie on the boundary")
        for v in p[1:-1]:
            if v in bnd:
                raise ArcNotSimple(f"arc {i} interior touches the boundary at {v}")
        for v in p:
            if v in seen:
                raise ArcsIntersect(f"arcs {seen[v]} and {i} share vertex {v}")
            seen[v] = i
        es = path_edges(c, p)
        for e in es:
            if e in c.boundary_edges:
                raise ArcNotSimple(f"arc {i} runs along boundary edge {e}")
        all_edges.append(es)
    return [list(map(int, p)) for p in paths], all_edges


def _vertex_fans(c: MetricComplex, v: int, cut_edges: set) -> List[List[int]]:
    """Split the triangles around v into fans separated by cut edges."""
    tris = sorted(
        {t for e in c.vertex_edges[v] for t in c.edge_triangles[e]}
    )
    parent = {t: t for t in tris}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in c.vertex_edges[v]:
        if e in cut_edges:
            continue
        ts = c.edge_triangles[e]
        if len(ts) == 2:
            a, b = find(ts[0]), find(ts[1])
            if a != b:
                parent[max(a, b)] = min(a, b)
    groups: Dict[int, List[int]] = {}
    for t in tris:
        groups.setdefault(find(t), []).append(t)
    return [groups[k] for k in sorted(groups)]


@dataclass
class _RawCut:
    """Cut bookkeeping before any complex is rebuilt.

    Vertex and edge ids of the input complex survive unchanged; side-1
    copies of arc cells are appended after them.  `new_edges`/`new_tris`
    describe the cut surface and can be extended (e.g. with a strip mesh)
    before a single build validates the result."""

    vpaths: List[List[int]]
    epaths: List[List[int]]
    vertex_map: List[int]            # new vertex id -> old vertex id
    copy1: Dict[int, int]            # arc vertex -> its side-1 copy
    new_edges: List[Tuple[int, int]]
    new_lengths: List[float]
    edge_map: List[int]              # new edge id -> old edge id
    edge_copy1: Dict[int, int]       # arc edge -> its side-1 copy
    new_wraps: Optional[List[Tuple[int, ...]]]
    new_tris: List[Tuple[int, int, int]]
    coords: Optional[np.ndarray]

    def sides(self) -> List[dict]:
        out = []
        for p, es in zip(self.vpaths, self.epaths):
            out.append(
                {
                    "vertices0": [v for v in p],
                    "vertices1": [self.copy1[v] for v in p],
                    "edges0": [e for e in es],
                    "edges1": [self.edge_copy1[e] for e in es],
                }
            )
        return out


def _cut_data(c: MetricComplex, paths: Sequence[Sequence[int]]) -> _RawCut:
    """Compute the raw cut arrays without building the cut complex."""
    vpaths, epaths = _validate_arcs(c, paths)
    cut_edges = {e for es in epaths for e in es}
    arc_of_vertex = {}
    for i, p in enumerate(vpaths):
        for v in p:
            arc_of_vertex[v] = i

    # fans: per path vertex, exactly two triangle groups
    fans: Dict[int, List[List[int]]] = {}
    for v in arc_of_vertex:
        f = _vertex_fans(c, v, cut_edges)
        if len(f) != 2:
            raise ArcNotSimple(
                f"cut vertex {v} separates its triangle fan into {len(f)} parts"
            )
        fans[v] = f

    n_old = c.n_vertices
    vertex_map = list(range(n_old))
    copy1: Dict[int, int] = {}
    for v in sorted(arc_of_vertex):
        copy1[v] = len(vertex_map)
        vertex_map.append(v)

    def fan_index(v: int, t: int) -> int:
        for i, group in enumerate(fans[v]):
            if t in group:
                return i
        raise AssertionError(f"triangle {t} not around vertex {v}")

    # assign side labels per arc edge, consistent along the arc
    side_tri: Dict[int, Tuple[int, int]] = {}   # cut edge -> (tri side0, tri side1)
    for p, es in zip(vpaths, epaths):
        prev0 = None
        for e in es:
            ts = sorted(c.edge_triangles[e])
            if len(ts) != 2:
                raise ArcNotSimple(f"cut edge {e} is not interior")
            if prev0 is None:
                side_tri[e] = (ts[0], ts[1])
            else:
                # shared vertex with the previous edge: stay in the same fan
                u = int(np.intersect1d(c.edges[e], prev_edge_vs)[0])
                f0 = fan_index(u, prev0)
                if fan_index(u, ts[0]) == f0:
                    side_tri[e] = (ts[0], ts[1])
                else:
                    side_tri[e] = (ts[1], ts[0])
            prev0 = side_tri[e][0]
            prev_edge_vs = c.edges[e]

    # which copy of a path vertex does each triangle see?
    def vertex_in_triangle(v: int, t: int) -> int:
        if v not in fans:
            return v
        side = fan_index(v, t)
        # side 0 fan keeps the original id iff it contains this arc's side-0
        return v if side == 0 else copy1[v]

    # normalize: make fan 0 of every path vertex the one holding side-0
    # triangles of its own arc edges (re-order fans where needed)
    for p, es in zip(vpaths, epaths):
        for e in es:
            t0 = side_tri[e][0]
            for v in map(int, c.edges[e]):
                if fan_index(v, t0) != 0:
                    fans[v] = [fans[v][1], fans[v][0]]
    # verify coherence: both arc edges at a vertex agree on the fan split
    for p, es in zip(vpaths, epaths):
        for e in es:
            t0, t1 = side_tri[e]
            for v in map(int, c.edges[e]):
                if fan_index(v, t0) != 0 or fan_index(v, t1) != 1:
                    raise ArcNotSimple(
                        f"incoherent sides at vertex {v}; the arc system "
                        "does not cut cleanly"
                    )

    # rebuild edges
    new_edges: List[Tuple[int, int]] = [tuple(map(int, uv)) for uv in c.edges]
    new_lengths: List[float] = [float(x) for x in c.lengths]
    edge_map = list(range(c.n_edges))
    new_wraps = [tuple(w) for w in c.wraps] if c.wraps is not None else None

    for e, (u, v) in enumerate(new_edges):
        if e in cut_edges:
            continue
        if u not in fans and v not in fans:
            continue  # away from the arc: endpoints are unchanged
        ts = c.edge_triangles[e]
        if len(ts) == 0:
            raise ArcNotSimple(
                f"dangling edge {e} touches the arc; its side of the cut "
                "cannot be determined"
            )
        t = ts[0]
        uu = vertex_in_triangle(u, t)
        vv = vertex_in_triangle(v, t)
        new_edges[e] = (uu, vv)

    edge_copy1: Dict[int, int] = {}
    for p, es in zip(vpaths, epaths):
        for e in es:
            t0, t1 = side_tri[e]
            u, v = map(int, c.edges[e])
            new_edges[e] = (vertex_in_triangle(u, t0), vertex_in_triangle(v, t0))
            edge_copy1[e] = len(new_edges)
            new_edges.append((vertex_in_triangle(u, t1), vertex_in_triangle(v, t1)))
            new_lengths.append(float(c.lengths[e]))
            edge_map.append(e)
            if new_wraps is not None:
                new_wraps.append(tuple(c.wraps[e]))

    new_tris = []
    for t, tri in enumerate(c.triangles):
        row = []
        for e in map(int, tri):
            if e in cut_edges and side_tri[e][1] == t:
                row.append(edge_copy1[e])
            else:
                row.append(e)
        new_tris.append(tuple(row))

    coords = None
    if c.coords is not None:
        coords = np.vstack([c.coords, c.coords[[vertex_map[i] for i in range(n_old, len(vertex_map))]]])

    return _RawCut(
        vpaths=vpaths,
        epaths=epaths,
        vertex_map=vertex_map,
        copy1=copy1,
        new_edges=new_edges,
        new_lengths=new_lengths,
        edge_map=edge_map,
        edge_copy1=edge_copy1,
        new_wraps=new_wraps,
        new_tris=[tuple(t) for t in new_tris],
        coords=coords,
    )


def cut_along_paths(c: MetricComplex, paths: Sequence[Sequence[int]]) -> CutResult:
    """Cut a surface open along disjoint simple boundary-to-boundary arcs.

    Every arc vertex splits into two copies (one per triangle fan); every arc
    edge splits into a side-0 and side-1 copy. Euler characteristic rises by
    one per arc. Raises if the result is disconnected (the arc system was not
    jointly essential)."""
    raw = _cut_data(c, paths)
    edges_arg = [
        (u, v, raw.new_lengths[i]) for i, (u, v) in enumerate(raw.new_edges)
    ]
    try:
        out = build_complex(
            len(raw.vertex_map),
            edges_arg,
            raw.new_tris,
            coords=raw.coords,
            lattice=c.lattice,
            wraps=np.array(raw.new_wraps, dtype=np.int64) if raw.new_wraps is not None else None,
            name=f"{c.name}|cut" if c.name else "cut",
        )
    except Disconnected1Skeleton as exc:
        raise Disconnected1Skeleton(exc.n_components) from None

    assert out.euler_characteristic() == c.euler_characteristic() + len(raw.vpaths)
    assert out.is_surface

    return CutResult(
        complex=out,
        base=c,
        vertex_map=np.array(raw.vertex_map, dtype=np.int64),
        edge_map=np.array(raw.edge_map, dtype=np.int64),
        sides=raw.sides(),
    )


def would_disconnect(c: MetricComplex, path: Sequence[int]) -> bool:
    """True when cutting along the path splits the surface in two.

    Union-find over triangles glued across non-cut interior edges: the cut
    disconnects iff the triangles fall into two groups."""
    es = set(path_edges(c, [int(v) for v in path]))
    n_t = len(c.triangles)
    parent = list(range(n_t))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in range(c.n_edges):
        if e in es:
            continue
        ts = c.edge_triangles[e]
        if len(ts) == 2:
            a, b = find(ts[0]), find(ts[1])
            if a != b:
                parent[max(a, b)] = min(a, b)
    roots = {find(t) for t in range(n_t)}
    return len(roots) > 1


# --------------------------------------------------------------------------
# shortest essential arcs
# --------------------------------------------------------------------------


def _boundary_components(c: MetricComplex):
    """Components of the boundary 1-subcomplex, sorted by least vertex."""
    return components(c, edges=c.boundary_edges)


def _interior_dijkstra(
    c: MetricComplex,
    sources: Sequence[int],
    targets: Set[int],
) -> List[Tuple[float, List[int]]]:
    """Shortest paths from boundary sources to boundary targets whose
    interior stays strictly off the boundary and off boundary edges.

    Returns one (length, vertex path) per reached target, deterministic
    under ties (smaller predecessor, then smaller vertex, wins)."""
    bnd = c.boundary_vertices
    src = set(int(v) for v in sources)
    dist: Dict[int, float] = {s: 0.0 for s in src}
    parent: Dict[int, Tuple[int, int]] = {}
    heap: List[Tuple[float, int]] = [(0.0, s) for s in sorted(src)]
    heapq.heapify(heap)
    done: Set[int] = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done or d > dist.get(u, math.inf) + 1e-15:
            continue
        done.add(u)
        if u in bnd and u not in src:
            continue  # boundary vertices other than sources never relay
        for v, w, e in c.adjacency[u]:
            if e in c.boundary_edges:
                continue  # arcs may not run along the boundary
            if v in src:
                continue
            if v in bnd and v not in targets:
                continue  # boundary vertices are walls unless targeted
            nd = d + w
            old = dist.get(v, math.inf)
            better = nd < old - 1e-15
            tie = abs(nd - old) <= 1e-15 and v in parent and (u, e) < parent[v]
            if better or tie:
                dist[v] = nd
                parent[v] = (u, e)
                if better:
                    heapq.heappush(heap, (nd, v))
    out = []
    for t in sorted(targets):
        if t in dist and dist[t] > 0.0:
            path = [t]
            while path[-1] in parent:
                path.append(parent[path[-1]][0])
            path.reverse()
            out.append((dist[t], path))
    return out


def _piece_eulers(c: MetricComplex, raw: _RawCut) -> List[int]:
    """Euler characteristic of each connected piece of a raw cut."""
    n_v = len(raw.vertex_map)
    parent = list(range(n_v))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in raw.new_edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[max(ru, rv)] = min(ru, rv)
    n_vert: Dict[int, int] = {}
    n_edge: Dict[int, int] = {}
    n_tri: Dict[int, int] = {}
    for v in range(n_v):
        r = find(v)
        n_vert[r] = n_vert.get(r, 0) + 1
    for u, v in raw.new_edges:
        r = find(u)
        n_edge[r] = n_edge.get(r, 0) + 1
    for tri in raw.new_tris:
        u = raw.new_edges[tri[0]][0]
        r = find(u)
        n_tri[r] = n_tri.get(r, 0) + 1
    return [
        n_vert[r] - n_edge.get(r, 0) + n_tri.get(r, 0) for r in sorted(n_vert)
    ]


def shortest_essential_arc(
    c: MetricComplex,
    allowed_endpoints: Optional[Iterable[int]] = None,
) -> CutArc:
    """Shortest simple boundary-to-boundary arc that no isotopy pushes into
    the boundary.

    On a surface with several boundary circles this is the shortest interior
    path joining two distinct circles (such an arc is always essential).  On
    a surface with one boundary circle, same-circle chords are enumerated in
    length order and the first one that does not cut off a disk is returned.
    Raises IsDisk on disks and UnsupportedTopology on closed surfaces."""
    if not c.is_surface:
        raise BadParam("essential arcs require a surface complex")
    if c.euler_characteristic() == 1:
        raise IsDisk("the surface is a disk: every arc cuts off a disk")
    if not c.boundary_edges:
        raise UnsupportedTopology(
            "closed surface: boundary-to-boundary arcs need a boundary"
        )
    allowed = (
        set(int(v) for v in allowed_endpoints)
        if allowed_endpoints is not None
        else set(c.boundary_vertices)
    )
    comps = _boundary_components(c)
    per_comp = [
        sorted(set(map(int, comp.vertices)) & allowed) for comp in comps
    ]

    candidates: List[Tuple[float, int, int, List[int], str]] = []
    if len(comps) >= 2:
        for i, src in enumerate(per_comp):
            if not src:
                continue
            targets = set()
            for j, tgt in enumerate(per_comp):
                if j != i:
                    targets.update(tgt)
            for d, path in _interior_dijkstra(c, src, targets):
                j = next(
                    k for k, comp in enumerate(comps) if path[-1] in set(map(int, comp.vertices))
                )
                witness = (
                    f"joins boundary components {comps[i].label} and {comps[j].label}"
                )
                candidates.append((d, path[0], path[-1], path, witness))
        if not candidates:
            raise BadParam("no interior path joins two boundary components")
        candidates.sort(key=lambda t: (t[0], t[1], t[2]))
        d, _, _, path, witness = candidates[0]
        return CutArc(
            vertices=tuple(path),
            edges=tuple(path_edges(c, path)),
            length=float(d),
            essential=True,
            witness=witness,
        )

    # one boundary circle: enumerate chords in length order, keep the first
    # whose cut leaves no disk piece
    src_all = per_comp[0]
    chords: List[Tuple[float, int, int, List[int]]] = []
    for s in src_all:
        for d, path in _interior_dijkstra(c, [s], set(v for v in src_all if v != s)):
            if path[0] > path[-1]:
                continue  # each unordered pair once
            chords.append((d, path[0], path[-1], path))
    chords.sort(key=lambda t: (t[0], t[1], t[2]))
    for d, _, _, path in chords:
        try:
            raw = _cut_data(c, [path])
        except (ArcNotSimple, ArcsIntersect):
            continue
        eulers = _piece_eulers(c, raw)
        if 1 in eulers:
            continue  # the chord cuts off a disk: inessential
        return CutArc(
            vertices=tuple(path),
            edges=tuple(path_edges(c, path)),
            length=float(d),
            essential=True,
            witness=f"no piece of the cut is a disk (Euler numbers {eulers})",
        )
    raise BadParam("no essential chord found on the single boundary circle")


# --------------------------------------------------------------------------
# strip insertion
# --------------------------------------------------------------------------


@dataclass
class Strip:
    """Euclidean product strip [-M, M] x [0, L] meshed on a column grid.

    Columns: the two glue lines at -M and M, a geometric stack of `levels`
    pattern columns hugging each glue line (offsets eps_prime/2^j), and
    uniform middle columns spaced at most eps_prime apart, always including
    x = 0.  Rows follow the arc's vertices at their cumulative distances."""

    half_width: float
    length: float
    eps_prime: float
    levels: int
    xs: np.ndarray                 # (C,) column positions, xs[0] = -M, xs[-1] = M
    ts: np.ndarray                 # (n,) row positions, ts[0] = 0, ts[-1] = L
    grid: np.ndarray               # (n, C) vertex ids
    hor: np.ndarray                # (n, C-1) edge ids, row r: col k -> k+1
    ver: np.ndarray                # (n-1, C) edge ids, col k: row r -> r+1
    dia: np.ndarray                # (n-1, C-1) edge ids, (r,k) -> (r+1,k+1)
    mid_cols: np.ndarray           # column indices carrying full verticals
    left_pattern_cols: np.ndarray  # allocation order: widest offset first
    right_pattern_cols: np.ndarray

    @property
    def n_rows(self) -> int:
        return len(self.ts)

    @property
    def n_cols(self) -> int:
        return len(self.xs)


@dataclass
class StripInsertion:
    """A surface cut along one arc with a strip glued into the slit.

    Vertex/edge ids of the input complex survive (arc copies and strip cells
    are appended), so earlier insertions stay valid under later ones.
    `vertex_map` collapses the result back onto the input: surface vertices
    map to themselves, arc copies and strip rows to the arc vertex of their
    row.  The collapse never increases distances."""

    complex: MetricComplex
    base: MetricComplex
    arc: Tuple[int, ...]
    arc_edges: Tuple[int, ...]
    strip: Strip
    vertex_map: np.ndarray     # new vertex -> base vertex
    edge_map: np.ndarray       # new edge -> base edge (-1: collapses to a point)
    side: dict                 # vertices0/1, edges0/1 of the slit
    first_strip_vertex: int
    first_strip_edge: int
    first_strip_triangle: int


def insert_strip(
    c: MetricComplex,
    arc,
    M: float,
    eps_prime: Optional[float] = None,
    levels: int = 8,
) -> StripInsertion:
    """Cut along a simple boundary-to-boundary arc and glue in a flat strip
    of half-width M, so crossing the slit now costs an extra 2M."""
    path = list(arc.vertices) if isinstance(arc, CutArc) else [int(v) for v in arc]
    if len(path) != len(set(path)):
        raise ArcNotSimple("strip arc revisits a vertex")
    if not M > 0:
        raise BadParam(f"strip half-width must be positive, got {M}")
    if not (isinstance(levels, int) and 1 <= levels <= 30):
        raise BadParam(f"levels must be an int in [1, 30], got {levels!r}")

    raw = _cut_data(c, [path])
    epath = raw.epaths[0]
    n = len(path)
    ts = np.concatenate([[0.0], np.cumsum([float(c.lengths[e]) for e in epath])])
    L = float(ts[-1])
    if eps_prime is None:
        eps_prime = min(M, L) / 8.0
    eps_prime = float(eps_prime)
    if not 0 < eps_prime < M / 2:
        raise BadParam(
            f"eps_prime must lie in (0, M/2) = (0, {M / 2}), got {eps_prime}"
        )

    lefts = [-M + eps_prime / 2**j for j in range(levels, 0, -1)]
    rights = [M - eps_prime / 2**j for j in range(1, levels + 1)]
    n_mid = max(2, 2 * math.ceil((M - eps_prime) / eps_prime - 1e-12))
    mids = list(np.linspace(-M + eps_prime, M - eps_prime, n_mid + 1))
    xs = np.array([-M] + lefts + mids + rights + [M])
    assert (np.diff(xs) > 0).all()
    C = len(xs)
    left_pattern = np.arange(levels, 0, -1)
    mid_cols = np.arange(1 + levels, 1 + levels + n_mid + 1)
    right_pattern = np.arange(1 + levels + n_mid + 1, 1 + 2 * levels + n_mid + 1)

    first_v = len(raw.vertex_map)
    first_e = len(raw.new_edges)
    first_t = len(raw.new_tris)

    grid = np.zeros((n, C), dtype=np.int64)
    for r in range(n):
        grid[r, 0] = raw.copy1[path[r]]
        grid[r, C - 1] = path[r]
        for k in range(1, C - 1):
            grid[r, k] = first_v + r * (C - 2) + (k - 1)
            raw.vertex_map.append(path[r])

    wrap_dim = len(raw.new_wraps[0]) if raw.new_wraps else 0

    def add_edge(u: int, v: int, length: float, base_edge: int) -> int:
        eid = len(raw.new_edges)
        raw.new_edges.append((int(u), int(v)))
        raw.new_lengths.append(float(length))
        raw.edge_map.append(base_edge)
        if raw.new_wraps is not None:
            raw.new_wraps.append((0,) * wrap_dim)
        return eid

    hor = np.zeros((n, C - 1), dtype=np.int64)
    ver = np.zeros((max(n - 1, 0), C), dtype=np.int64)
    dia = np.zeros((max(n - 1, 0), C - 1), dtype=np.int64)
    for r in range(n - 1):
        ver[r, 0] = raw.edge_copy1[epath[r]]
        ver[r, C - 1] = epath[r]
        dt = float(ts[r + 1] - ts[r])
        for k in range(1, C - 1):
            ver[r, k] = add_edge(grid[r, k], grid[r + 1, k], dt, epath[r])
    for r in range(n):
        for k in range(C - 1):
            dx = float(xs[k + 1] - xs[k])
            hor[r, k] = add_edge(grid[r, k], grid[r, k + 1], dx, -1)
    for r in range(n - 1):
        dt = float(ts[r + 1] - ts[r])
        for k in range(C - 1):
            dx = float(xs[k + 1] - xs[k])
            dia[r, k] = add_edge(
                grid[r, k], grid[r + 1, k + 1], math.hypot(dx, dt), -1
            )
    for r in range(n - 1):
        for k in range(C - 1):
            raw.new_tris.append((int(hor[r, k]), int(ver[r, k + 1]), int(dia[r, k])))
            raw.new_tris.append((int(dia[r, k]), int(hor[r + 1, k]), int(ver[r, k])))

    coords = raw.coords
    if coords is not None:
        extra = np.zeros((n * (C - 2), 3))
        for r in range(n):
            for k in range(1, C - 1):
                extra[r * (C - 2) + (k - 1)] = coords[path[r]] + [0.0, 0.0, float(xs[k])]
        coords = np.vstack([coords, extra])

    out = build_complex(
        len(raw.vertex_map),
        [(u, v, raw.new_lengths[i]) for i, (u, v) in enumerate(raw.new_edges)],
        raw.new_tris,
        coords=coords,
        lattice=c.lattice,
        wraps=np.array(raw.new_wraps, dtype=np.int64) if raw.new_wraps is not None else None,
        name=f"{c.name}|strip" if c.name else "strip",
    )
    assert out.euler_characteristic() == c.euler_characteristic()
    assert out.is_surface

    strip = Strip(
        half_width=float(M),
        length=L,
        eps_prime=eps_prime,
        levels=levels,
        xs=xs,
        ts=ts,
        grid=grid,
        hor=hor,
        ver=ver,
        dia=dia,
        mid_cols=mid_cols,
        left_pattern_cols=left_pattern,
        right_pattern_cols=right_pattern,
    )
    return StripInsertion(
        complex=out,
        base=c,
        arc=tuple(path),
        arc_edges=tuple(epath),
        strip=strip,
        vertex_map=np.array(raw.vertex_map, dtype=np.int64),
        edge_map=np.array(raw.edge_map, dtype=np.int64),
        side=raw.sides()[0],
        first_strip_vertex=first_v,
        first_strip_edge=first_e,
        first_strip_triangle=first_t,
    )


def collapse_stretch(ins: StripInsertion, n_samples: int = 48, seed: int = 0) -> float:
    """Sampled Lipschitz constant of the collapse back onto the base surface.

    Ratios d_base(f(u), f(v)) / d_new(u, v) over random vertex pairs; the
    collapse squashes the strip onto the arc so this never exceeds 1 up to
    rounding."""
    rng = np.random.default_rng(seed)
    X, B = ins.complex, ins.base
    us = rng.integers(0, X.n_vertices, size=n_samples)
    rows_new = distance_rows(X, [int(u) for u in us])
    rows_base = distance_rows(B, [int(ins.vertex_map[u]) for u in us])
    worst = 0.0
    for i in range(n_samples):
        vs = rng.integers(0, X.n_vertices, size=8)
        for v in vs:
            dn = float(rows_new[i][int(v)])
            db = float(rows_base[i][int(ins.vertex_map[int(v)])])
            if dn > 1e-12:
                worst = max(worst, db / dn)
    return worst


# --------------------------------------------------------------------------
# separator rewiring across a strip
# --------------------------------------------------------------------------


@dataclass
class PatternPiece:
    """One rewired component drawn at a strip end: a vertical segment plus
    horizontal ticks at the rows where its surface-side component meets the
    glue line."""

    comp_index: int                # index into the end's side z-components
    column: int                    # grid column of the vertical segment
    extent: Tuple[int, int]        # row range [lo, hi] of the vertical
    item_rows: Tuple[int, ...]     # rows where the side component crosses
    vertices: FrozenSet[int]
    edges: FrozenSet[int]
    touches: FrozenSet[int]        # true-boundary components of the side comp


@dataclass
class EndPattern:
    """Everything rewired at one end of the strip, with the re-verified
    combinatorial properties: the inner vertical is present, every piece and
    complement pocket meets the glue, glue traces match the surface side
    exactly, and rows beyond a piece's glue range are justified by a
    boundary contact."""

    end: str                       # "left" | "right"
    case: str                      # "special" | "nonspecial"
    crossing_rows: Tuple[int, ...]
    p_item: Optional[int]          # pivot item (nonspecial case)
    order: Tuple[int, ...]         # side z-component indices, allocation order
    pieces: List[PatternPiece]
    properties: Dict[str, bool]
    u_items: List[Tuple[Tuple[int, ...], int]]  # glue items per pocket, side comp


@dataclass
class RewiredSeparator:
    """A separator pushed across an inserted strip.

    Off the strip the new separator agrees with the old one; inside it
    consists of full verticals spaced closer than eps_prime plus one drawn
    pattern per end copying each side's trace on the glue line."""

    base: Separator
    separator: Separator
    eps: float
    eps_prime: float
    slack: float
    bound: float
    verdict: SeparatorVerdict
    ends: List[EndPattern]
    dropped_z_edges: Tuple[int, ...]

    @property
    def ok(self) -> bool:
        return self.verdict.ok and all(
            all(e.properties.values()) for e in self.ends
        )


def _true_boundary(X, strip, boundary_edges):
    """True-boundary components: caller-declared edges (or all boundary
    edges) plus this strip's end rows; returns (components, vertex->index).

    Any remaining boundary edges of X (for truncated cover patches, the
    cut-off frontier) are appended as extra components, one per chain, and
    kept distinct from the declared components even at shared vertices:
    they witness that the surface continues past the patch without letting
    the declared ends join up around the outside."""
    bnd = (
        set(int(e) for e in boundary_edges)
        if boundary_edges is not None
        else set(X.boundary_edges)
    )
    bnd |= set(map(int, strip.hor[0, :]))
    bnd |= set(map(int, strip.hor[-1, :]))
    comps = components(X, edges=sorted(bnd))
    where: Dict[int, int] = {}
    for i, comp in enumerate(comps):
        for v in comp.vertices:
            where[int(v)] = i
    extra = sorted(set(map(int, X.boundary_edges)) - bnd)
    if extra:
        base = len(comps)
        for i, comp in enumerate(components(X, edges=extra)):
            comps.append(comp)
            for v in comp.vertices:
                where.setdefault(int(v), base + i)
        bnd |= set(extra)
    return comps, where, bnd


def _side_complement(X, side_vs, zv, ze):
    """Components of (side minus Z): non-Z vertices, edge interiors and
    triangle interiors of the side, glued by incidence."""
    n_v, n_e = X.n_vertices, X.n_edges
    verts = [v for v in side_vs if v not in zv]
    edges = [
        e
        for e in range(n_e)
        if e not in ze
        and int(X.edges[e, 0]) in side_vs
        and int(X.edges[e, 1]) in side_vs
    ]
    tris = [
        t
        for t in range(len(X.triangles))
        if all(int(v) in side_vs for v in X.tri_vertices[t])
    ]
    parent: Dict[int, int] = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        if a not in parent or b not in parent:
            return
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    for v in verts:
        parent[v] = v
    for e in edges:
        parent[n_v + e] = n_v + e
    for t in tris:
        parent[n_v + n_e + t] = n_v + n_e + t
    for e in edges:
        for v in map(int, X.edges[e]):
            if v not in zv:
                union(n_v + e, v)
    for t in tris:
        for e in map(int, X.triangles[t]):
            if e not in ze:
                union(n_v + n_e + t, n_v + e)
        for v in map(int, X.tri_vertices[t]):
            if v not in zv:
                union(n_v + n_e + t, v)

    groups: Dict[int, Dict[str, set]] = {}
    for v in verts:
        groups.setdefault(find(v), {"v": set(), "e": set()})["v"].add(v)
    for e in edges:
        groups.setdefault(find(n_v + e), {"v": set(), "e": set()})["e"].add(e)
    return [groups[r] for r in sorted(groups)]


def rewire_separator(
    sep: Separator,
    ins: StripInsertion,
    eps: float,
    nudge: bool = True,
    boundary_edges: Optional[Iterable[int]] = None,
) -> RewiredSeparator:
    """Replace a separator's content inside one strip by vertical segments
    plus per-end trace patterns, certifying the (1+eps)-width bound.

    The drawn set agrees with the input off the strip.  Each end gets one
    pattern piece per side component crossing the glue line, nested by the
    outermost-first allocation order; full verticals spaced closer than the
    strip's eps_prime fill the middle.  All structural properties are
    re-checked combinatorially and the result is re-measured."""
    from .separators import verify_separator

    X = sep.complex
    S = ins.strip
    n, C = S.n_rows, S.n_cols
    if int(S.grid.max()) >= X.n_vertices or int(S.dia.max()) >= X.n_edges:
        raise BadParam("strip insertion does not live inside the separator's complex")
    if not eps > 0:
        raise BadParam(f"eps must be positive, got {eps}")
    D = sep.width
    L = S.length
    if L > D + 1e-9:
        raise PreconditionUnmet(
            f"strip length {L} exceeds separator width {D}; the arc cannot "
            "have been shortest-essential for this separator"
        )
    eps_req = min(eps, eps * D)
    if S.eps_prime > eps_req + 1e-12:
        raise BadParam(
            f"strip eps_prime {S.eps_prime} is coarser than min(eps, eps*D) "
            f"= {eps_req}; rebuild the strip finer"
        )

    grid, hor, ver, dia = S.grid, S.hor, S.ver, S.dia
    interior_vs = set(map(int, grid[:, 1 : C - 1].flat))
    glue_edges = {
        "left": [int(ver[r, 0]) for r in range(n - 1)],
        "right": [int(ver[r, C - 1]) for r in range(n - 1)],
    }
    strip_interior_edges = (
        set(map(int, hor.flat))
        | set(map(int, dia.flat))
        | set(map(int, ver[:, 1 : C - 1].flat))
    )

    ze_in = set(map(int, sep.z_edges))
    zv_in = set(map(int, sep.z_vertices))

    dropped = ze_in & strip_interior_edges
    run_edges = {end: ze_in & set(glue_edges[end]) for end in ("left", "right")}
    n_runs = sum(len(v) for v in run_edges.values())
    if n_runs and not nudge:
        raise InfiniteIntersection(
            f"separator runs along the glue line in {n_runs} edge(s); "
            "pass nudge=True to push it off the arc"
        )
    kept_ze = ze_in - dropped - run_edges["left"] - run_edges["right"]

    # bare interior vertices of dropped glue runs disappear with the run
    run_interior: Set[int] = set()
    for end in ("left", "right"):
        count: Dict[int, int] = {}
        for e in run_edges[end]:
            for v in map(int, X.edges[e]):
                count[v] = count.get(v, 0) + 1
        incident_kept: Set[int] = set()
        for e in kept_ze:
            incident_kept.update(map(int, X.edges[e]))
        for v, k in count.items():
            if k == 2 and v not in incident_kept:
                run_interior.add(v)
    kept_zv = zv_in - interior_vs - run_interior
    # re-close over kept edges only: dropped-edge endpoints inside the strip
    # are gone, glue endpoints stay as isolated crossings
    zcl = set(kept_zv)
    for e in kept_ze:
        zcl.add(int(X.edges[e, 0]))
        zcl.add(int(X.edges[e, 1]))

    # sides of the slit: remove the strip interior, look at what's reachable
    side_comps = components(
        X, vertices=[v for v in range(X.n_vertices) if v not in interior_vs]
    )
    glue_v = {
        "left": [int(grid[r, 0]) for r in range(n)],
        "right": [int(grid[r, C - 1]) for r in range(n)],
    }
    side_of_vertex: Dict[int, str] = {}
    for comp in side_comps:
        vs = set(map(int, comp.vertices))
        has_l = any(v in vs for v in glue_v["left"])
        has_r = any(v in vs for v in glue_v["right"])
        if has_l and has_r:
            raise PreconditionUnmet(
                "the strip arc does not separate the surface; rewiring "
                "requires a separating slit"
            )
        if has_l or has_r:
            label = "left" if has_l else "right"
            for v in vs:
                side_of_vertex[v] = label

    tcomps, twhere, bnd_edges = _true_boundary(X, S, boundary_edges)
    bottom_ids = set()
    top_ids = set()
    for v in (int(grid[0, 0]), int(grid[0, C - 1])):
        if v in twhere:
            bottom_ids.add(twhere[v])
    for v in (int(grid[n - 1, 0]), int(grid[n - 1, C - 1])):
        if v in twhere:
            top_ids.add(twhere[v])
    if not bottom_ids or not top_ids:
        raise PreconditionUnmet("arc endpoints are not on the true boundary")
    if bottom_ids & top_ids:
        raise CaseDetectionAmbiguous(
            "top and bottom boundary components coincide; the glue line's "
            "ends cannot be told apart"
        )

    mid_inner = {"left": int(S.mid_cols[0]), "right": int(S.mid_cols[-1])}
    alloc_cols = {
        "left": [int(k) for k in S.left_pattern_cols],
        "right": [int(k) for k in S.right_pattern_cols],
    }
    glue_col = {"left": 0, "right": C - 1}

    ends: List[EndPattern] = []
    all_piece_sets: List[Tuple[FrozenSet[int], FrozenSet[int]]] = []
    new_edges: Set[int] = set(kept_ze)
    seed_owned_mid: Set[int] = set()

    for end in ("left", "right"):
        gk = glue_col[end]
        gverts = glue_v[end]
        side_vs = {v for v, s in side_of_vertex.items() if s == end}
        ze_side = sorted(
            e
            for e in kept_ze
            if int(X.edges[e, 0]) in side_vs and int(X.edges[e, 1]) in side_vs
        )
        zv_side = sorted((zcl & side_vs))
        zcomps = (
            components(X, vertices=zv_side, edges=ze_side)
            if (zv_side or ze_side)
            else []
        )
        comp_of_v: Dict[int, int] = {}
        touches: List[FrozenSet[int]] = []
        for i, comp in enumerate(zcomps):
            for v in comp.vertices:
                comp_of_v[int(v)] = i
            touches.append(
                frozenset(twhere[int(v)] for v in comp.vertices if int(v) in twhere)
            )

        crossing_rows = tuple(r for r in range(n) if gverts[r] in zcl)
        comp_of_row = {r: comp_of_v[gverts[r]] for r in crossing_rows}
        trace_comps = sorted(set(comp_of_row.values()))

        ucomps = _side_complement(X, side_vs, zcl, kept_ze)
        u_of_vertex: Dict[int, int] = {}
        u_of_edge: Dict[int, int] = {}
        u_touch: List[FrozenSet[int]] = []
        for j, g in enumerate(ucomps):
            for v in g["v"]:
                u_of_vertex[v] = j
            for e in g["e"]:
                u_of_edge[e] = j
            tt = {twhere[v] for v in g["v"] if v in twhere}
            for e in g["e"]:
                if e in bnd_edges:
                    for v in map(int, X.edges[e]):
                        if v in twhere:
                            tt.add(twhere[v])
            u_touch.append(frozenset(tt))

        # ---- case detection ------------------------------------------------
        spanning = [
            i
            for i in trace_comps
            if touches[i] & bottom_ids and touches[i] & top_ids
        ]
        p_item: Optional[int] = None
        if len(spanning) > 1:
            raise CaseDetectionAmbiguous(
                f"{end} end: {len(spanning)} separator components join top "
                "and bottom; at most one may span"
            )
        if len(spanning) == 1:
            case = "special"
            seeds = [spanning[0]]
        else:
            case = "nonspecial"
            # glue items: even 2r = vertex row r, odd 2r+1 = edge (r, r+1)
            u_items_of: Dict[int, List[int]] = {}
            for r in range(n):
                if gverts[r] not in zcl:
                    u_items_of.setdefault(u_of_vertex[gverts[r]], []).append(2 * r)
            for r in range(n - 1):
                e = glue_edges[end][r]
                u_items_of.setdefault(u_of_edge[e], []).append(2 * r + 1)
            qualifying = [
                j
                for j in sorted(u_items_of)
                if (u_touch[j] - bottom_ids - top_ids)
                or (u_touch[j] & bottom_ids and u_touch[j] & top_ids)
            ]
            if not qualifying:
                detail = "; ".join(
                    f"U{j}(items {u_items_of[j]}) touches {sorted(u_touch[j])}"
                    for j in sorted(u_items_of)
                )
                raise CaseDetectionAmbiguous(
                    f"{end} end: no spanning separator component and no "
                    "complement component reaching around it; cannot pick "
                    f"the construction case (bottom {sorted(bottom_ids)}, "
                    f"top {sorted(top_ids)}, trace components touch "
                    f"{[sorted(touches[i]) for i in trace_comps]}; {detail})"
                )
            j0 = min(qualifying, key=lambda j: min(u_items_of[j]))
            p_item = min(u_items_of[j0])
            below = [r for r in crossing_rows if 2 * r < p_item]
            above = [r for r in crossing_rows if 2 * r > p_item]
            seeds = []
            if below:
                seeds.append(comp_of_row[max(below)])
            if above:
                ca = comp_of_row[min(above)]
                if ca in seeds:
                    raise CaseDetectionAmbiguous(
                        f"{end} end: one separator component flanks the "
                        "pivot on both sides"
                    )
                seeds.append(ca)

        # ---- allocation order (outermost first) ----------------------------
        order: List[int] = list(seeds)
        picked = set(seeds)
        cr = list(crossing_rows)
        while len(picked) < len(trace_comps):
            found = None
            for pos, r in enumerate(cr):
                ci = comp_of_row[r]
                if ci in picked:
                    continue
                nbs = []
                if pos > 0:
                    nbs.append(comp_of_row[cr[pos - 1]])
                if pos + 1 < len(cr):
                    nbs.append(comp_of_row[cr[pos + 1]])
                if any(b in picked for b in nbs):
                    found = ci
                    break
            if found is None:
                raise CaseDetectionAmbiguous(
                    f"{end} end: crossing components do not chain together "
                    "along the glue line"
                )
            order.append(found)
            picked.add(found)

        # ---- columns and extents -------------------------------------------
        iterative = order[1:] if case == "special" else order
        if len(iterative) > len(alloc_cols[end]):
            raise BadParam(
                f"{end} end needs {len(iterative)} nested columns but the "
                f"strip only has {len(alloc_cols[end])}; rebuild the strip "
                f"with levels >= {len(iterative)}"
            )

        pieces: List[PatternPiece] = []
        for pos, ci in enumerate(order):
            rows = sorted(r for r in crossing_rows if comp_of_row[r] == ci)
            lo, hi = rows[0], rows[-1]
            tt = touches[ci]
            if case == "special" and pos == 0:
                col = mid_inner[end]
                seed_owned_mid.add(col)
                ext = (0, n - 1)
            else:
                col = alloc_cols[end][pos - 1 if case == "special" else pos]
                if case == "special":
                    if tt - bottom_ids - top_ids:
                        raise CaseDetectionAmbiguous(
                            f"{end} end: component {ci} reaches a third "
                            "boundary component despite a spanning component"
                        )
                    if tt & top_ids:
                        ext = (lo, n - 1)
                    elif tt & bottom_ids:
                        ext = (0, hi)
                    else:
                        ext = (lo, hi)
                else:
                    side_lo = all(2 * r < p_item for r in rows)
                    side_hi = all(2 * r > p_item for r in rows)
                    if not (side_lo or side_hi):
                        raise CaseDetectionAmbiguous(
                            f"{end} end: component {ci} crosses on both "
                            "sides of the pivot"
                        )
                    if tt and side_hi:
                        ext = (lo, n - 1)
                    elif tt and side_lo:
                        ext = (0, hi)
                    else:
                        ext = (lo, hi)

            everts: Set[int] = set()
            eedges: Set[int] = set()
            for r in range(ext[0], ext[1]):
                eedges.add(int(ver[r, col]))
            for r in range(ext[0], ext[1] + 1):
                everts.add(int(grid[r, col]))
            for r in rows:
                ks = range(col, C - 1) if end == "right" else range(0, col)
                for k in ks:
                    eedges.add(int(hor[r, k]))
                vs = range(col, C) if end == "right" else range(0, col + 1)
                for k in vs:
                    everts.add(int(grid[r, k]))
            pieces.append(
                PatternPiece(
                    comp_index=ci,
                    column=col,
                    extent=ext,
                    item_rows=tuple(rows),
                    vertices=frozenset(everts),
                    edges=frozenset(eedges),
                    touches=tt,
                )
            )
        ends.append(
            EndPattern(
                end=end,
                case=case,
                crossing_rows=crossing_rows,
                p_item=p_item,
                order=tuple(order),
                pieces=pieces,
                properties={},
                u_items=[],
            )
        )
        for p in pieces:
            all_piece_sets.append((p.vertices, p.edges))
            new_edges |= set(p.edges)
        # stash side analysis for the property checks below
        ends[-1]._analysis = dict(  # type: ignore[attr-defined]
            comp_of_row=comp_of_row,
            u_of_vertex=u_of_vertex,
            u_of_edge=u_of_edge,
            u_touch=u_touch,
            touches=touches,
        )

    # interior verticals, spaced closer than eps_prime
    for m in map(int, S.mid_cols):
        if m in seed_owned_mid:
            continue
        mverts = frozenset(int(grid[r, m]) for r in range(n))
        medges = frozenset(int(ver[r, m]) for r in range(n - 1))
        all_piece_sets.append((mverts, medges))
        new_edges |= set(medges)

    # exact pairwise disjointness of everything drawn inside the strip
    for i in range(len(all_piece_sets)):
        for j in range(i + 1, len(all_piece_sets)):
            if (
                all_piece_sets[i][0] & all_piece_sets[j][0]
                or all_piece_sets[i][1] & all_piece_sets[j][1]
            ):
                raise CaseDetectionAmbiguous(
                    "drawn pattern pieces intersect; the separator's trace "
                    "on the glue line is not laminar"
                )

    slack = float(np.max(np.diff(S.ts))) + S.eps_prime
    bound = (1.0 + eps) * D + 2.0 * slack
    verdict = verify_separator(X, sorted(new_edges), bound, z_vertices=sorted(kept_zv))

    _check_end_properties(X, S, ends, zcl, new_edges, ins, bottom_ids, top_ids)

    return RewiredSeparator(
        base=sep,
        separator=verdict.separator,
        eps=eps,
        eps_prime=S.eps_prime,
        slack=slack,
        bound=bound,
        verdict=verdict,
        ends=ends,
        dropped_z_edges=tuple(sorted(dropped | run_edges["left"] | run_edges["right"])),
    )


def _check_end_properties(X, S, ends, zcl, new_edges, ins, bottom_ids, top_ids):
    """Re-verify, cell by cell, the four structural properties of each end
    pattern: the inner vertical is drawn, every piece and pocket meets the
    glue, glue traces match the surface sides exactly, and any row beyond a
    glue range is backed by the right boundary contact."""
    n, C = S.n_rows, S.n_cols
    grid, hor, ver, dia = S.grid, S.hor, S.ver, S.dia
    pos: Dict[int, Tuple[int, int]] = {}
    for r in range(n):
        for k in range(C):
            pos[int(grid[r, k])] = (r, k)

    for ep in ends:
        end = ep.end
        an = ep._analysis
        gk = 0 if end == "left" else C - 1
        mid = int(S.mid_cols[0]) if end == "left" else int(S.mid_cols[-1])
        zone = list(range(0, mid + 1)) if end == "left" else list(range(mid, C))
        zpair = zone[:-1]  # columns k with both k, k+1 in the zone
        gverts = [int(grid[r, gk]) for r in range(n)]
        gedges = [int(ver[r, gk]) for r in range(n - 1)]

        # (1) the inner vertical is entirely drawn
        prop1 = all(int(ver[r, mid]) in new_edges for r in range(n - 1))

        # zone Z cells and their components
        zone_edges = set()
        for r in range(n - 1):
            for k in zone:
                zone_edges.add(int(ver[r, k]))
        for r in range(n):
            for k in zpair:
                zone_edges.add(int(hor[r, k]))
        zone_dias = set()
        for r in range(n - 1):
            for k in zpair:
                zone_dias.add(int(dia[r, k]))
        zone_verts = set(pos_v for pos_v, (r, k) in pos.items() if k in zone)
        zz_edges = sorted((zone_edges | zone_dias) & new_edges)
        zz_verts = sorted(v for v in zone_verts if v in zcl)
        zc = components(X, vertices=zz_verts, edges=zz_edges)
        zcomp_of: Dict[int, int] = {}
        for i, comp in enumerate(zc):
            for v in comp.vertices:
                zcomp_of[int(v)] = i
        inner_cells = {int(grid[r, mid]) for r in range(n)}

        # (2a) every drawn component except the bare inner vertical meets glue
        prop2 = True
        for i, comp in enumerate(zc):
            vs = set(map(int, comp.vertices))
            if not any(v in vs for v in gverts):
                if not vs <= inner_cells:
                    prop2 = False

        # complement pockets of the zone
        free_v = [v for v in zone_verts if v not in zcl and v not in {
            v2 for e in zz_edges for v2 in map(int, X.edges[e])
        }]
        # (vertices on drawn edges are z-closure; recompute cleanly)
        zdrawn_v = set()
        for e in zz_edges:
            zdrawn_v.add(int(X.edges[e, 0]))
            zdrawn_v.add(int(X.edges[e, 1]))
        zdrawn_v |= {v for v in zone_verts if v in zcl}
        free_v = [v for v in zone_verts if v not in zdrawn_v]
        free_e = [
            e
            for e in (zone_edges | zone_dias)
            if e not in new_edges
        ]
        tris = []
        for r in range(n - 1):
            for k in zpair:
                base = ins.first_strip_triangle + 2 * (r * (C - 1) + k)
                tris.extend((base, base + 1))
        nv, ne = X.n_vertices, X.n_edges
        parent = {}
        for v in free_v:
            parent[v] = v
        for e in free_e:
            parent[nv + e] = nv + e
        for t in tris:
            parent[nv + ne + t] = nv + ne + t

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def union(a, b):
            if a in parent and b in parent:
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)

        for e in free_e:
            for v in map(int, X.edges[e]):
                union(nv + e, v)
        for t in tris:
            for e in map(int, X.triangles[t]):
                union(nv + ne + t, nv + e)
            for v in map(int, X.tri_vertices[t]):
                union(nv + ne + t, v)
        pocket_of_v: Dict[int, int] = {}
        pocket_of_e: Dict[int, int] = {}
        roots: Dict[int, int] = {}
        for v in free_v:
            roots.setdefault(find(v), len(roots))
            pocket_of_v[v] = roots[find(v)]
        for e in free_e:
            roots.setdefault(find(nv + e), len(roots))
            pocket_of_e[e] = roots[find(nv + e)]
        pocket_cells: Dict[int, Dict[str, set]] = {}
        for v in free_v:
            pocket_cells.setdefault(pocket_of_v[v], {"v": set(), "e": set(), "t": set()})["v"].add(v)
        for e in free_e:
            pocket_cells.setdefault(pocket_of_e[e], {"v": set(), "e": set(), "t": set()})["e"].add(e)
        for t in tris:
            r = roots.get(find(nv + ne + t))
            if r is not None:
                pocket_cells.setdefault(r, {"v": set(), "e": set(), "t": set()})["t"].add(t)

        # glue items: even 2r = vertex row r, odd 2r+1 = glue edge (r, r+1)
        side_owner: Dict[int, Tuple[str, int]] = {}
        zone_owner: Dict[int, Tuple[str, int]] = {}
        for r in range(n):
            it = 2 * r
            if gverts[r] in zcl:
                side_owner[it] = ("z", an["comp_of_row"][r])
                zone_owner[it] = ("z", zcomp_of.get(gverts[r], -1))
            else:
                side_owner[it] = ("u", an["u_of_vertex"].get(gverts[r], -1))
                zone_owner[it] = ("u", pocket_of_v.get(gverts[r], -1))
        for r in range(n - 1):
            it = 2 * r + 1
            side_owner[it] = ("u", an["u_of_edge"].get(gedges[r], -1))
            zone_owner[it] = ("u", pocket_of_e.get(gedges[r], -1))

        # (2b) every pocket contains a glue item
        pockets_on_glue = {zone_owner[it][1] for it in zone_owner if zone_owner[it][0] == "u"}
        for p_id, cells in pocket_cells.items():
            if p_id not in pockets_on_glue:
                prop2 = False

        # (3) the two item partitions coincide, types included
        prop3 = all(v[1] != -1 for v in side_owner.values()) and all(
            v[1] != -1 for v in zone_owner.values()
        )
        fwd: Dict[Tuple[str, int], Tuple[str, int]] = {}
        bwd: Dict[Tuple[str, int], Tuple[str, int]] = {}
        if prop3:
            for it in side_owner:
                a, b = side_owner[it], zone_owner[it]
                if a[0] != b[0]:
                    prop3 = False
                    break
                if fwd.setdefault(a, b) != b or bwd.setdefault(b, a) != a:
                    prop3 = False
                    break

        # (4) rows drawn beyond the glue range need a boundary excuse
        prop4 = True

        def cell_rows(kind, x):
            if kind == "v":
                r, _ = pos[x]
                return r, r
            if kind == "e":
                u0, u1 = map(int, X.edges[x])
                r0, r1 = pos[u0][0], pos[u1][0]
                return min(r0, r1), max(r0, r1)
            rs = [pos[int(v)][0] for v in X.tri_vertices[x]]
            return min(rs), max(rs)

        for piece in ep.pieces:
            if not piece.item_rows:
                continue
            lo_i, hi_i = min(piece.item_rows), max(piece.item_rows)
            if piece.extent[0] < lo_i and not (piece.touches - top_ids):
                prop4 = False
            if piece.extent[1] > hi_i and not (piece.touches - bottom_ids):
                prop4 = False

        u_items: Dict[int, List[int]] = {}
        for it, (kind, idx) in zone_owner.items():
            if kind == "u":
                u_items.setdefault(idx, []).append(it)
        ep.u_items = []
        for p_id, items in sorted(u_items.items()):
            side_idx = side_owner[min(items)][1]
            ep.u_items.append((tuple(sorted(items)), side_idx))
            inf_row = min(it // 2 for it in items)
            sup_row = max(it // 2 + (it % 2) for it in items)
            cells = pocket_cells.get(p_id, {"v": set(), "e": set(), "t": set()})
            below = above = False
            for kind in ("v", "e", "t"):
                for x in cells[kind]:
                    a, b = cell_rows(kind, x)
                    if b < inf_row:
                        below = True
                    if a > sup_row:
                        above = True
            tt = an["u_touch"][side_idx] if 0 <= side_idx < len(an["u_touch"]) else frozenset()
            if below and not (tt - top_ids):
                prop4 = False
            if above and not (tt - bottom_ids):
                prop4 = False

        ep.properties = {
            "contains_vertical": bool(prop1),
            "meets_glue": bool(prop2),
            "trace_match": bool(prop3),
            "extension_boundary": bool(prop4),
        }
        del ep._analysis


# --------------------------------------------------------------------------
# distance certificates along the arc
# --------------------------------------------------------------------------


@dataclass
class FillCertificate:
    """Measured justification that a ball around x covers part of the arc.

    kind "interval": B(x, D) holding two arc points and a far-side path
    between them must hold the whole arc interval between the points.
    kind "boundary": B(x, D) holding a far-side boundary point must hold a
    path to the arc's matching endpoint, or the whole arc for a third
    boundary component."""

    kind: str                    # "interval" | "boundary"
    case: str                    # "interval" | "to-bottom" | "to-top" | "whole-arc"
    ok: bool
    bound: float                 # D + slack actually enforced
    measured: float              # worst distance over the certified cells
    rows: Tuple[int, ...]        # arc rows the certificate covers
    path: Tuple[int, ...]        # witness path inside the ball, if any


def _arc_sides(c: MetricComplex, path: Sequence[int]):
    """The two components beside a separating arc; raises when the arc does
    not split the surface."""
    pset = set(int(v) for v in path)
    comps = components(
        c, vertices=[v for v in range(c.n_vertices) if v not in pset]
    )
    beside = []
    arc_nbrs = set()
    for v in pset:
        for nbr, _w, _e in c.adjacency[v]:
            if nbr not in pset:
                arc_nbrs.add(int(nbr))
    for comp in comps:
        vs = set(map(int, comp.vertices))
        if vs & arc_nbrs:
            beside.append(vs)
    if len(beside) != 2:
        raise PreconditionUnmet(
            f"the arc does not separate its surface into two sides "
            f"({len(beside)} adjacent components)"
        )
    return beside


def _ball_path(c, allowed, dist_row, limit, src, dst):
    """Breadth-first witness path from src to dst through allowed vertices
    whose distance field stays within the limit."""
    from collections import deque

    ok = lambda v: v in allowed and float(dist_row[v]) <= limit + 1e-9
    if not (ok(src) and ok(dst)):
        return None
    prev = {src: -1}
    q = deque([src])
    while q:
        u = q.popleft()
        if u == dst:
            out = []
            while u != -1:
                out.append(u)
                u = prev[u]
            return out[::-1]
        for nbr, _w, _e in c.adjacency[u]:
            nbr = int(nbr)
            if nbr not in prev and ok(nbr):
                prev[nbr] = u
                q.append(nbr)
    return None


def fillin_check(
    c: MetricComplex,
    arc,
    x: int,
    a1: int,
    a2: int,
    D: float,
    slack: Optional[float] = None,
) -> FillCertificate:
    """Certify that B(x, D) covering a1, a2 and a far-side path between them
    also covers the whole arc interval from a1 to a2."""
    path = list(arc.vertices) if isinstance(arc, CutArc) else [int(v) for v in arc]
    epath = path_edges(c, path) if not isinstance(arc, CutArc) else list(arc.edges)
    if slack is None:
        slack = max(float(c.lengths[e]) for e in epath)
    limit = D + slack
    if a1 not in path or a2 not in path:
        raise PreconditionUnmet("a1 and a2 must be arc vertices")
    sides = _arc_sides(c, path)
    sx = next((i for i, s in enumerate(sides) if x in s), None)
    if sx is None:
        raise PreconditionUnmet("x must lie beside the arc, off it")
    far = sides[1 - sx]

    row = distance_rows(c, [int(x)])[0]
    if float(row[a1]) > limit or float(row[a2]) > limit:
        raise PreconditionUnmet(
            f"a1/a2 are not within D+slack={limit} of x "
            f"(d={float(row[a1]):.3f}, {float(row[a2]):.3f})"
        )
    i1, i2 = path.index(a1), path.index(a2)
    lo, hi = min(i1, i2), max(i1, i2)
    rows = tuple(range(lo, hi + 1))
    if a1 == a2:
        return FillCertificate(
            kind="interval",
            case="interval",
            ok=True,
            bound=limit,
            measured=float(row[a1]),
            rows=(lo,),
            path=(a1,),
        )

    witness = _ball_path(c, far | {a1, a2}, row, limit, a1, a2)
    if witness is None:
        raise PreconditionUnmet(
            "no far-side path between a1 and a2 stays inside B(x, D+slack)"
        )
    measured = max(float(row[path[i]]) for i in rows)
    return FillCertificate(
        kind="interval",
        case="interval",
        ok=measured <= limit + 1e-9,
        bound=limit,
        measured=measured,
        rows=rows,
        path=tuple(witness),
    )


def fillout_check(
    c: MetricComplex,
    arc,
    x: int,
    b: int,
    D: float,
    slack: Optional[float] = None,
    boundary_edges: Optional[Iterable[int]] = None,
) -> FillCertificate:
    """Certify that B(x, D) covering a far-side true-boundary point b also
    covers a far-side path to the matching arc endpoint (bottom/top case) or
    the whole arc (third-component case)."""
    path = list(arc.vertices) if isinstance(arc, CutArc) else [int(v) for v in arc]
    epath = path_edges(c, path) if not isinstance(arc, CutArc) else list(arc.edges)
    if slack is None:
        slack = max(float(c.lengths[e]) for e in epath)
    limit = D + slack
    bnd = (
        set(int(e) for e in boundary_edges)
        if boundary_edges is not None
        else set(c.boundary_edges)
    )
    bcomps = components(c, edges=sorted(bnd))
    bwhere: Dict[int, int] = {}
    for i, comp in enumerate(bcomps):
        for v in comp.vertices:
            bwhere[int(v)] = i
    if b not in bwhere:
        raise PreconditionUnmet("b must lie on the true boundary")

    sides = _arc_sides(c, path)
    sx = next((i for i, s in enumerate(sides) if x in s), None)
    if sx is None:
        raise PreconditionUnmet("x must lie beside the arc, off it")
    far = sides[1 - sx]
    if b not in far:
        raise PreconditionUnmet("b must lie on the far side of the arc from x")

    row = distance_rows(c, [int(x)])[0]
    if float(row[b]) > limit:
        raise PreconditionUnmet(f"b is not within D+slack={limit} of x")

    bottom = bwhere.get(path[0])
    top = bwhere.get(path[-1])
    comp_b = bwhere[b]
    tol = 1e-9

    def endpoint_case(case, target):
        witness = _ball_path(c, far | {target}, row, limit, b, target)
        ok = witness is not None
        measured = (
            max(float(row[v]) for v in witness) if witness else float("inf")
        )
        return FillCertificate(
            kind="boundary",
            case=case,
            ok=ok,
            bound=limit,
            measured=measured,
            rows=(0,) if case == "to-bottom" else (len(path) - 1,),
            path=tuple(witness) if witness else (),
        )

    if comp_b == bottom and comp_b == top:
        cert = endpoint_case("to-bottom", path[0])
        if not cert.ok:
            cert = endpoint_case("to-top", path[-1])
        return cert
    if comp_b == bottom:
        return endpoint_case("to-bottom", path[0])
    if comp_b == top:
        return endpoint_case("to-top", path[-1])
    measured = max(float(row[v]) for v in path)
    return FillCertificate(
        kind="boundary",
        case="whole-arc",
        ok=measured <= limit + tol,
        bound=limit,
        measured=measured,
        rows=tuple(range(len(path))),
        path=(),
    )


# --------------------------------------------------------------------------
# word-ball patches and the iterated-cut pipeline
# --------------------------------------------------------------------------


def _reduced_mul(w: Tuple[int, ...], g: int) -> Tuple[int, ...]:
    """Append a generator letter to a reduced word, cancelling inverses."""
    if w and w[-1] == -g:
        return w[:-1]
    return w + (g,)


@dataclass
class WordBallPatch:
    """Finite chunk of the free cover: one copy of the cut-open disk per
    reduced word up to the ring radius, glued across matching arc copies.
    Interfaces whose far sheet is outside the ball stay as boundary."""

    complex: MetricComplex
    base: MetricComplex
    cut: CutResult
    words: List[Tuple[int, ...]]
    proj_v: np.ndarray                 # patch vertex -> base vertex
    proj_e: np.ndarray                 # patch edge -> base edge
    sheet_of_v: List[Tuple[int, ...]]  # canonical word per patch vertex
    sheet_of_e: List[Tuple[int, ...]]
    lifts: List[Tuple[int, Tuple[int, ...], Tuple[int, ...]]]
    # (arc index, word on the side-1 sheet, patch vertex path)
    basepoint_lift: int
    true_boundary: List[int]


def _word_ball(
    c: MetricComplex, arcs: Sequence[CutArc], rings: int, basepoint: int
) -> WordBallPatch:
    """Materialize the ball of radius `rings` in the free cover determined
    by a disjoint cut system of essential arcs."""
    paths = [list(a.vertices) for a in arcs]
    on_arc = set(v for p in paths for v in p)
    if basepoint in on_arc:
        raise BadParam("basepoint must not lie on a cut arc")
    cut = cut_along_paths(c, paths)
    F = cut.complex
    if F.euler_characteristic() != 1:
        raise UnsupportedTopology(
            "cutting along the arc system did not produce a disk; the "
            "surface is outside the free-cover scope"
        )
    r = len(paths)

    words: List[Tuple[int, ...]] = [()]
    seen = {()}
    frontier = [()]
    for _ in range(rings):
        nxt = []
        for w in frontier:
            for g in range(1, r + 1):
                for s in (g, -g):
                    w2 = _reduced_mul(w, s)
                    if w2 not in seen:
                        seen.add(w2)
                        words.append(w2)
                        nxt.append(w2)
        frontier = nxt

    side1_vpos = [
        {int(v): j for j, v in enumerate(cut.sides[i]["vertices1"])}
        for i in range(r)
    ]
    side0_v = [[int(v) for v in cut.sides[i]["vertices0"]] for i in range(r)]
    side1_epos = [
        {int(e): j for j, e in enumerate(cut.sides[i]["edges1"])}
        for i in range(r)
    ]
    side0_e = [[int(e) for e in cut.sides[i]["edges0"]] for i in range(r)]

    def canon_v(w: Tuple[int, ...], v: int):
        for i in range(r):
            j = side1_vpos[i].get(v)
            if j is not None:
                w2 = _reduced_mul(w, i + 1)
                if w2 in seen:
                    return (w2, side0_v[i][j])
                break
        return (w, v)

    def canon_e(w: Tuple[int, ...], e: int):
        for i in range(r):
            j = side1_epos[i].get(e)
            if j is not None:
                w2 = _reduced_mul(w, i + 1)
                if w2 in seen:
                    return (w2, side0_e[i][j])
                break
        return (w, e)

    gid_v: Dict[Tuple[Tuple[int, ...], int], int] = {}
    proj_v: List[int] = []
    sheet_of_v: List[Tuple[int, ...]] = []
    for w in words:
        for v in range(F.n_vertices):
            st = canon_v(w, v)
            if st not in gid_v:
                gid_v[st] = len(proj_v)
                proj_v.append(int(cut.vertex_map[st[1]]))
                sheet_of_v.append(st[0])

    gid_e: Dict[Tuple[Tuple[int, ...], int], int] = {}
    edges_arg: List[Tuple[int, int, float]] = []
    proj_e: List[int] = []
    sheet_of_e: List[Tuple[int, ...]] = []
    for w in words:
        for e in range(F.n_edges):
            st = canon_e(w, e)
            if st not in gid_e:
                gid_e[st] = len(edges_arg)
                u0, u1 = map(int, F.edges[st[1]])
                edges_arg.append(
                    (
                        gid_v[canon_v(st[0], u0)],
                        gid_v[canon_v(st[0], u1)],
                        float(F.lengths[st[1]]),
                    )
                )
                proj_e.append(int(cut.edge_map[st[1]]))
                sheet_of_e.append(st[0])

    tris = []
    seen_t = set()
    for w in words:
        for tri in F.triangles:
            key = tuple(gid_e[canon_e(w, int(e))] for e in tri)
            if key not in seen_t:
                seen_t.add(key)
                tris.append(key)

    coords = None
    if F.coords is not None:
        span = float(F.coords[:, 0].max() - F.coords[:, 0].min()) + 2.0
        coords = np.zeros((len(proj_v), 3))
        for (w, v), g in gid_v.items():
            coords[g] = F.coords[v] + [span * words.index(w), 0.0, 0.0]

    patch = build_complex(
        len(proj_v),
        edges_arg,
        tris,
        coords=coords,
        name=f"{c.name}|ball{rings}" if c.name else f"ball{rings}",
    )

    lifts = []
    for i in range(r):
        for w in words:
            w2 = _reduced_mul(w, i + 1)
            if w2 in seen:
                path = tuple(gid_v[(w2, v0)] for v0 in side0_v[i])
                lifts.append((i, w, path))

    base_bnd = c.boundary_edges
    true_bnd = sorted(
        e for e in patch.boundary_edges if int(proj_e[e]) in base_bnd
    )
    return WordBallPatch(
        complex=patch,
        base=c,
        cut=cut,
        words=words,
        proj_v=np.array(proj_v, dtype=np.int64),
        proj_e=np.array(proj_e, dtype=np.int64),
        sheet_of_v=sheet_of_v,
        sheet_of_e=sheet_of_e,
        lifts=lifts,
        basepoint_lift=gid_v[((), int(basepoint))],
        true_boundary=true_bnd,
    )


@dataclass
class TheoremBReport:
    """Staged record of the iterated-cut pipeline.

    Tracks the arcs chosen on the base surface, the strip half-width, the
    separator found on the stripped word-ball patch, each rewiring stage,
    and the final verified separator pulled back to the base surface."""

    eps: float
    rank: int
    arcs: List[CutArc]
    M: float
    rings: int
    retries: int
    direct: Separator
    cover_width: float
    patch_vertices: int
    stages: List[dict]
    separator: Separator
    final_width: float
    bound: float
    slack_total: float
    slack_items: Dict[str, float]
    ok: bool


def _tautology_report(c, eps, rings, direct) -> TheoremBReport:
    return TheoremBReport(
        eps=eps,
        rank=0,
        arcs=[],
        M=0.0,
        rings=rings,
        retries=0,
        direct=direct,
        cover_width=direct.width,
        patch_vertices=c.n_vertices,
        stages=[],
        separator=direct,
        final_width=direct.width,
        bound=direct.width,
        slack_total=0.0,
        slack_items={},
        ok=True,
    )


def theorem_b_pipeline(
    c: MetricComplex,
    eps: float,
    M: Optional[float] = None,
    budget: int = 4,
    seeds: Sequence[int] = (),
    rings: int = 1,
    eps_prime: Optional[float] = None,
    levels: int = 8,
    basepoint: Optional[int] = None,
    max_retries: int = 3,
) -> TheoremBReport:
    """Transfer a cover-patch separator down to the base surface.

    Finds a disjoint system of shortest essential arcs cutting the surface
    to a disk, widens each arc lift in a word-ball patch of the free cover
    into a Euclidean strip, rewires the best separator found there across
    every strip, and projects the fundamental-domain sheet back down, adding
    the arcs themselves to the separating set.  The result is re-verified on
    the base surface against the staged bound."""
    from .separators import _build_separator, search_separator, verify_separator

    if not c.is_surface:
        raise BadParam("the pipeline runs on triangulated surfaces")
    if not eps > 0:
        raise BadParam(f"eps must be positive, got {eps}")
    if rings < 1:
        raise TruncationTooSmall(rings, 1, "the word ball needs at least one ring")
    seed_list = [int(s) for s in seeds] if seeds else [0]
    direct = search_separator(c, budget, seed_list)

    chi = c.euler_characteristic()
    has_boundary = len(c.boundary_edges) > 0
    if (has_boundary and chi == 1) or (not has_boundary and chi == 2):
        return _tautology_report(c, eps, rings, direct)
    if not has_boundary:
        raise UnsupportedTopology(
            "closed non-spherical surface: its free cover has infinite width"
        )
    r = 1 - chi
    assert r >= 1

    # disjoint shortest essential arcs, found on successively cut surfaces
    arcs: List[CutArc] = []
    curc = c
    cum = np.arange(c.n_vertices, dtype=np.int64)  # current complex -> base
    for i in range(r):
        if i == 0:
            arcs.append(shortest_essential_arc(c))
        else:
            used = set(v for a in arcs for v in a.vertices)
            allowed = [
                v
                for v in curc.boundary_vertices
                if int(cum[v]) not in used
            ]
            sub = shortest_essential_arc(curc, allowed_endpoints=allowed)
            sigma = tuple(int(cum[v]) for v in sub.vertices)
            if set(sigma) & used:
                raise ArcsIntersect(
                    f"arc {i + 1} touches an earlier arc", required_m=None
                )
            arcs.append(
                CutArc(
                    vertices=sigma,
                    edges=tuple(path_edges(c, sigma)),
                    length=sub.length,
                    essential=True,
                    witness=sub.witness,
                )
            )
        if i < r - 1:
            # cut the current surface along the arc just found (in its ids)
            local = (
                arcs[-1].vertices
                if i == 0
                else tuple(int(v) for v in sub.vertices)
            )
            nxt = cut_along_paths(curc, [list(local)])
            cum = np.array(
                [int(cum[int(nxt.vertex_map[v])]) for v in range(nxt.complex.n_vertices)],
                dtype=np.int64,
            )
            curc = nxt.complex

    arc_vs = set(v for a in arcs for v in a.vertices)
    if basepoint is None:
        bp = next(v for v in range(c.n_vertices) if v not in arc_vs)
    else:
        bp = int(basepoint)
    L_max = max(a.length for a in arcs)
    L_min = min(a.length for a in arcs)
    factor = (1.0 + 2.0 * eps) ** r
    auto_m = M is None
    ep_val = (
        float(eps_prime) if eps_prime is not None else min(eps, eps * L_min)
    )

    wb = _word_ball(c, arcs, rings, bp)
    X0 = wb.complex
    if auto_m:
        # size the strips from a cheap separator search on the patch itself
        pre = search_separator(X0, budget, [int(wb.basepoint_lift)])
        M_val = 1.05 * factor * max(pre.width, L_max)
    else:
        M_val = float(M)

    retries = 0
    while True:
        inss: List[StripInsertion] = []
        cur = X0
        for (_i, _w, path) in wb.lifts:
            ins = insert_strip(cur, list(path), M_val, eps_prime=ep_val, levels=levels)
            inss.append(ins)
            cur = ins.complex
        Xs = cur
        z0 = search_separator(Xs, budget, [int(wb.basepoint_lift)])
        D_cover = z0.width
        threshold = factor * D_cover
        if M_val <= threshold:
            if auto_m and retries < max_retries:
                retries += 1
                M_val = 1.05 * factor * max(D_cover, L_max)
                continue
            raise ArcsIntersect(
                f"strip half-width M={M_val:.6g} is below the disjointness "
                f"threshold {threshold:.6g}; rerun with M > {threshold:.6g}",
                required_m=float(threshold),
            )
        break

    true_bnd = set(wb.true_boundary)
    for ins in inss:
        true_bnd |= set(map(int, ins.strip.hor[0, :]))
        true_bnd |= set(map(int, ins.strip.hor[-1, :]))

    stages: List[dict] = []
    sep_cur = z0
    for k, ins in enumerate(inss):
        rw = rewire_separator(sep_cur, ins, eps, boundary_edges=sorted(true_bnd))
        stages.append(
            {
                "strip": k,
                "arc": int(wb.lifts[k][0]),
                "word": ".".join(str(x) for x in wb.lifts[k][1]) or "e",
                "arc_length": float(ins.strip.length),
                "M": float(M_val),
                "width_in": float(rw.base.width),
                "rewire_bound": float(rw.bound),
                "width_out": float(rw.separator.width),
                "slack": float(rw.slack),
                "cases": [e.case for e in rw.ends],
                "properties_ok": bool(
                    all(all(e.properties.values()) for e in rw.ends)
                ),
                "verified": bool(rw.verdict.ok),
            }
        )
        sep_cur = rw.separator

    # restrict to the fundamental-domain sheet and project down
    z_edges_sigma: Set[int] = set()
    for a in arcs:
        z_edges_sigma |= set(int(e) for e in a.edges)
    for e in sep_cur.z_edges:
        if e < X0.n_edges and wb.sheet_of_e[e] == ():
            z_edges_sigma.add(int(wb.proj_e[e]))
    z_verts_sigma: Set[int] = set()
    for v in sep_cur.z_vertices:
        if v < X0.n_vertices and wb.sheet_of_v[v] == ():
            z_verts_sigma.add(int(wb.proj_v[v]))

    K = len(inss)
    slack_items: Dict[str, float] = {}
    slack_total = 0.0
    for k, st in enumerate(stages):
        item = 2.0 * st["slack"] * (1.0 + eps) ** (K - 1 - k)
        slack_items[f"rewire_{k}"] = item
        slack_total += item
    bound = (
        (1.0 + eps) ** r * (1.0 + 2.0 * eps) ** (r + 1) * D_cover + slack_total
    )
    verdict = verify_separator(
        c, sorted(z_edges_sigma), bound, z_vertices=sorted(z_verts_sigma)
    )
    final = verdict.separator
    return TheoremBReport(
        eps=eps,
        rank=r,
        arcs=arcs,
        M=float(M_val),
        rings=rings,
        retries=retries,
        direct=direct,
        cover_width=float(D_cover),
        patch_vertices=int(Xs.n_vertices),
        stages=stages,
        separator=final,
        final_width=float(final.width),
        bound=float(bound),
        slack_total=float(slack_total),
        slack_items=slack_items,
        ok=bool(verdict.ok),
    )
