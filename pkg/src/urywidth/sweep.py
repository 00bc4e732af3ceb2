"""Sphere sweeps, tree maps, and the width-transfer certificates.

The sweep quotient collapses each connected component of each distance
sphere around a basepoint to a point.  Spheres are realized as half-open
level slabs [r, r + step) of the discrete distance field, because exact
level sets of piecewise-linear distance functions carry degenerate
plateaus; every certificate therefore carries an explicit 2*step slack.

The polygon-to-tree fiber finder and the thin-triangle bound are the two
combinatorial engines behind the transfer certificate: a loop through a
fat sphere component lifts to a polygon over the cover, the polygon map
into the cover's sweep tree must have a fiber meeting three consecutive
edges, and the three witnesses squeeze the component's diameter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .complexes import (
    MetricComplex,
    PointLike,
    components,
    distance_field,
    point_distance,
    subset_diameter,
)
from .covers import CoverPatch, DeckGroupSpec
from .errors import (
    BadParam,
    InvalidPolygon,
    NotVirtuallyCyclic,
    PreconditionUnmet,
    SimplexTooLarge,
    TruncationTooSmall,
)

__all__ = [
    "SweepQuotient",
    "SweepNode",
    "TreeMap",
    "PolygonTreeMap",
    "PolygonFiber",
    "sweep_quotient",
    "tree_map_from_sweep",
    "polygon_tree_fiber",
    "thin_triangle_bound",
    "transfer_certificate",
    "TransferCertificate",
    "extend_to_full_complex",
    "ExtendedMap",
]


# ------------------------------------------------------------ sweep quotient


@dataclass(frozen=True, eq=False)
class SweepNode:
    slab: int              # level index: radii in [r0, r0 + step)
    label: int             # least vertex id in the component
    vertices: np.ndarray   # sorted vertex ids
    fiber_diameter: float  # extrinsic

    @property
    def r0(self) -> float:
        return self.slab * self._step + self._offset

    # slab geometry is attached by the sweep; nodes are value objects
    _step: float = field(default=0.0, compare=False)
    _offset: float = field(default=0.0, compare=False)


@dataclass
class SweepQuotient:
    complex: MetricComplex
    basepoint: PointLike
    step: float
    nodes: List[SweepNode]
    y_edges: List[Tuple[int, int]]       # node-index pairs, sorted
    assignment: np.ndarray               # vertex -> node index
    critical_radii: np.ndarray
    width: float                         # max node fiber diameter

    @property
    def certified_width(self) -> float:
        return self.width + 2.0 * self.step

    def y_is_acyclic(self) -> bool:
        parent = list(range(len(self.nodes)))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for i, j in self.y_edges:
            ri, rj = find(i), find(j)
            if ri == rj:
                return False
            parent[max(ri, rj)] = min(ri, rj)
        return True


def sweep_quotient(
    c: MetricComplex, x0: PointLike, step: float, offset: float = 0.0
) -> SweepQuotient:
    """Quotient the complex by connected components of distance-sphere slabs.

    Slab boundaries sit at offset + k*step; the optional offset lets a search
    slide the level circles without changing their spacing."""
    if not step > 0:
        raise BadParam(f"sweep step {step} must be positive")
    f = distance_field(c, x0)
    slab = np.floor((f.values - offset) / step + 1e-12).astype(np.int64)

    nodes: List[SweepNode] = []
    assignment = np.full(c.n_vertices, -1, dtype=np.int64)
    for k in sorted(set(map(int, slab))):
        vs = np.flatnonzero(slab == k)
        for comp in components(c, vertices=vs):
            diam = subset_diameter(c, comp.vertices)
            idx = len(nodes)
            nodes.append(
                SweepNode(
                    slab=k,
                    label=int(comp.vertices[0]),
                    vertices=comp.vertices,
                    fiber_diameter=float(diam),
                    _step=float(step),
                    _offset=float(offset),
                )
            )
            assignment[comp.vertices] = idx

    y = set()
    for u, v in c.edges:
        a, b = int(assignment[u]), int(assignment[v])
        if a != b:
            y.add((min(a, b), max(a, b)))

    counts: Dict[int, int] = {}
    for n in nodes:
        counts[n.slab] = counts.get(n.slab, 0) + 1
    ks = sorted(counts)
    critical = [
        (k + 1) * step + offset
        for k, k2 in zip(ks, ks[1:])
        if counts[k] != counts[k2] or k2 != k + 1
    ]

    width = max((n.fiber_diameter for n in nodes), default=0.0)
    return SweepQuotient(
        complex=c,
        basepoint=x0,
        step=float(step),
        nodes=nodes,
        y_edges=sorted(y),
        assignment=assignment,
        critical_radii=np.array(critical),
        width=float(width),
    )


# ------------------------------------------------------------------ tree map


@dataclass
class TreeMap:
    """A vertex assignment into a tree, extended affinely along edges, with a
    certified bound on the diameter of every vertex fiber and every open-edge
    slab fiber."""

    complex: MetricComplex
    n_tree_vertices: int
    tree_edges: List[Tuple[int, int]]
    assignment: np.ndarray
    fiber_bound: float
    node_fibers: List[np.ndarray]


def tree_map_from_sweep(sq: SweepQuotient) -> TreeMap:
    """Certified tree map from a sweep quotient.

    The target is a BFS spanning tree of the quotient graph Y; each complex
    edge is sent along the tree geodesic between its endpoint nodes.  Chord
    adjacencies of Y (discretization artifacts such as staircase stragglers)
    therefore pass through intermediate tree vertices, whose fibers absorb
    the crossing edge — everything re-measured, nothing dropped."""
    c = sq.complex
    n = len(sq.nodes)
    adj = [set() for _ in range(n)]
    for i, j in sq.y_edges:
        adj[i].add(j)
        adj[j].add(i)
    parent = [-1] * n
    depth = [0] * n
    seen = [False] * n
    order = [0]
    seen[0] = True
    qi = 0
    while qi < len(order):
        u = order[qi]
        qi += 1
        for v in sorted(adj[u]):
            if not seen[v]:
                seen[v] = True
                parent[v] = u
                depth[v] = depth[u] + 1
                order.append(v)
    if not all(seen):
        raise BadParam("sweep quotient graph is disconnected")
    tree_edges = [(parent[v], v) for v in range(n) if parent[v] >= 0]

    def tree_path(a: int, b: int) -> List[int]:
        pa, pb = [a], [b]
        while depth[pa[-1]] > depth[pb[-1]]:
            pa.append(parent[pa[-1]])
        while depth[pb[-1]] > depth[pa[-1]]:
            pb.append(parent[pb[-1]])
        while pa[-1] != pb[-1]:
            pa.append(parent[pa[-1]])
            pb.append(parent[pb[-1]])
        return pa + pb[-2::-1]

    fibers = [set(map(int, node.vertices)) for node in sq.nodes]
    edge_fibers: Dict[Tuple[int, int], set] = {}
    for u, v in c.edges:
        a, b = int(sq.assignment[u]), int(sq.assignment[v])
        if a == b:
            continue
        path = tree_path(a, b)
        pts = {int(u), int(v)}
        for t in path:
            fibers[t].update(pts)
        for t1, t2 in zip(path, path[1:]):
            edge_fibers.setdefault((min(t1, t2), max(t1, t2)), set()).update(pts)

    worst = 0.0
    for vs in fibers:
        worst = max(worst, subset_diameter(c, sorted(vs)))
    for vs in edge_fibers.values():
        worst = max(worst, subset_diameter(c, sorted(vs)))
    return TreeMap(
        complex=c,
        n_tree_vertices=n,
        tree_edges=tree_edges,
        assignment=sq.assignment.copy(),
        fiber_bound=float(worst),
        node_fibers=[np.array(sorted(vs), dtype=np.int64) for vs in fibers],
    )


# ------------------------------------------------- polygon-to-tree fibers


@dataclass
class PolygonTreeMap:
    """An n-gon mapped edge-by-edge into a tree: each polygon edge carries a
    walk (vertex sequence) in the tree, consecutive walks sharing endpoints."""

    n_tree_vertices: int
    tree_edges: List[Tuple[int, int]]
    edge_paths: List[List[int]]

    def __post_init__(self):
        n = len(self.edge_paths)
        if n < 3:
            raise InvalidPolygon(f"need at least 3 polygon edges, got {n}")
        adj = _tree_adjacency(self.n_tree_vertices, self.tree_edges)
        for i, p in enumerate(self.edge_paths):
            if not p:
                raise InvalidPolygon(f"polygon edge {i} carries an empty walk")
            for a, b in zip(p, p[1:]):
                if b not in adj[a]:
                    raise InvalidPolygon(
                        f"walk of polygon edge {i} uses a non-tree step {a}-{b}"
                    )
        for i, p in enumerate(self.edge_paths):
            q = self.edge_paths[(i + 1) % n]
            if p[-1] != q[0]:
                raise InvalidPolygon(
                    f"polygon edges {i} and {(i + 1) % n} do not share an endpoint image"
                )


@dataclass(frozen=True)
class PolygonFiber:
    tree_point: int
    edges: Tuple[int, int, int]       # consecutive polygon edge indices (cyclic)
    positions: Tuple[int, int, int]   # index into each edge's walk


def _tree_adjacency(n: int, edges: Sequence[Tuple[int, int]]):
    adj = [set() for _ in range(n)]
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n) or u == v:
            raise BadParam(f"bad tree edge ({u},{v})")
        ru, rv = find(u), find(v)
        if ru == rv:
            raise BadParam("target graph has a cycle; not a tree")
        parent[max(ru, rv)] = min(ru, rv)
        adj[u].add(v)
        adj[v].add(u)
    roots = {find(x) for x in range(n)}
    if len(roots) != 1:
        raise BadParam("target tree is disconnected")
    return adj


def _tree_geodesic(adj, a: int, b: int) -> List[int]:
    if a == b:
        return [a]
    prev = {a: -1}
    queue = [a]
    qi = 0
    while qi < len(queue):
        u = queue[qi]
        qi += 1
        if u == b:
            break
        for v in sorted(adj[u]):
            if v not in prev:
                prev[v] = u
                queue.append(v)
    path = [b]
    while path[-1] != a:
        path.append(prev[path[-1]])
    path.reverse()
    return path


def _tree_median(adj, a: int, b: int, c: int) -> int:
    """The unique common vertex of the three pairwise geodesics."""
    gab = set(_tree_geodesic(adj, a, b))
    gac = set(_tree_geodesic(adj, a, c))
    gbc = set(_tree_geodesic(adj, b, c))
    common = gab & gac & gbc
    assert len(common) == 1
    return common.pop()


def polygon_tree_fiber(m: PolygonTreeMap) -> PolygonFiber:
    """A tree point whose fiber meets three consecutive polygon edges.

    Follows the merge-two-edges induction: fuse the last two edges, recurse,
    and when the inductive witness straddles the fusion, resolve via the tree
    median of the triangle formed by the three walk images."""
    adj = _tree_adjacency(m.n_tree_vertices, m.tree_edges)
    paths = [list(p) for p in m.edge_paths]
    fiber = _fiber_recurse(adj, paths)
    # exact re-verification before returning
    t = fiber.tree_point
    for e, p in zip(fiber.edges, fiber.positions):
        assert m.edge_paths[e][p] == t
    n = len(m.edge_paths)
    assert fiber.edges[1] == (fiber.edges[0] + 1) % n
    assert fiber.edges[2] == (fiber.edges[0] + 2) % n
    return fiber


def _fiber_recurse(adj, paths: List[List[int]]) -> PolygonFiber:
    n = len(paths)
    if n == 3:
        med = _tree_median(adj, paths[0][0], paths[1][0], paths[2][0])
        return PolygonFiber(
            tree_point=med,
            edges=(0, 1, 2),
            positions=tuple(p.index(med) for p in paths),
        )
    # fuse the last two edges into one walk and recurse
    first, second = paths[n - 2], paths[n - 1]
    fused = paths[: n - 2] + [first + second[1:]]
    sub = _fiber_recurse(adj, fused)
    cut = len(first)  # positions < cut lie on `first`

    def unfuse(edge: int, pos: int) -> Tuple[int, int]:
        if edge < n - 2:
            return edge, pos
        return (n - 2, pos) if pos < cut else (n - 1, pos - cut + 1)

    t = sub.tree_point
    mapped = [unfuse(e, p) for e, p in zip(sub.edges, sub.positions)]
    edges = [e for e, _ in mapped]
    if _consecutive(edges, n):
        return PolygonFiber(t, tuple(edges), tuple(p for _, p in mapped))

    # the witnesses skip one edge: (i, i+1, i+3) or (i, i+2, i+3) cyclically.
    # Find the skipped edge j+1 with witnesses on j and j+2, and take the
    # median of (t, start of skipped walk, end of skipped walk): the geodesic
    # [t -> start] lies in walk j, [start -> end] in walk j+1, [t -> end] in
    # walk j+2, so the median hits all three.
    have = set(edges)
    for j in have:
        jm, jp = (j + 1) % n, (j + 2) % n
        if jp in have and jm not in have:
            mid = paths[jm]
            t2 = _tree_median(adj, t, mid[0], mid[-1])
            pj = _position_of(paths[j], t2, f"edge {j}")
            pm = _position_of(mid, t2, f"edge {jm}")
            pp = _position_of(paths[jp], t2, f"edge {jp}")
            return PolygonFiber(t2, (j, jm, jp), (pj, pm, pp))
    raise AssertionError("witness pattern does not match the induction cases")


def _consecutive(edges: List[int], n: int) -> bool:
    e0 = edges[0]
    return edges[1] == (e0 + 1) % n and edges[2] == (e0 + 2) % n


def _position_of(path: List[int], t: int, what: str) -> int:
    try:
        return path.index(t)
    except ValueError:
        raise AssertionError(f"median does not lie on the walk of {what}") from None


# ------------------------------------------------------ thin-triangle bound


def thin_triangle_bound(
    c: MetricComplex,
    x0: PointLike,
    a: PointLike,
    b: PointLike,
    x1: PointLike,
    x2: PointLike,
    x3: PointLike,
    eps: float,
    delta: float,
    slack: float = 0.0,
) -> float:
    """Certified diameter bound 3*eps + 4*delta for two sphere points whose
    geodesics and connecting path carry three mutually close points.

    All preconditions are checked against measured distances (graph metric),
    with `slack` absorbing refinement overshoot."""
    tol = slack + 1e-9

    d = lambda p, q: point_distance(c, p, q)
    d0a, d0b = d(x0, a), d(x0, b)
    d01, d1a = d(x0, x1), d(x1, a)
    d02, d2b = d(x0, x2), d(x2, b)
    d03 = d(x0, x3)

    if d01 + d1a > d0a + tol:
        raise PreconditionUnmet(
            "x1 on geodesic [x0,a]",
            f"d(x0,x1)+d(x1,a) = {d01 + d1a:.6g} exceeds d(x0,a) = {d0a:.6g}",
        )
    if d02 + d2b > d0b + tol:
        raise PreconditionUnmet(
            "x2 on geodesic [x0,b]",
            f"d(x0,x2)+d(x2,b) = {d02 + d2b:.6g} exceeds d(x0,b) = {d0b:.6g}",
        )
    # both endpoints must sit within the 2*delta radial band of x3's radius
    if d0a - d03 > 2 * delta + tol:
        raise PreconditionUnmet(
            "a within the delta-band of x3's sphere",
            f"d(x0,a) - d(x0,x3) = {d0a - d03:.6g} exceeds 2*delta = {2 * delta:.6g}",
        )
    if d0b - d03 > 2 * delta + tol:
        raise PreconditionUnmet(
            "b within the delta-band of x3's sphere",
            f"d(x0,b) - d(x0,x3) = {d0b - d03:.6g} exceeds 2*delta = {2 * delta:.6g}",
        )
    for name, val in (("d(x1,x2)", d(x1, x2)), ("d(x1,x3)", d(x1, x3)), ("d(x2,x3)", d(x2, x3))):
        if val > eps + tol:
            raise PreconditionUnmet(
                f"{name} <= eps", f"{name} = {val:.6g} exceeds eps = {eps:.6g}"
            )

    bound = 3.0 * eps + 4.0 * delta
    assert d(a, b) <= bound + tol, "measured d(a,b) escapes the certified bound"
    return bound


# ------------------------------------------------------ transfer certificate


@dataclass
class TransferDiagnostics:
    node_index: int
    a: int
    b: int
    alpha: List[int]               # vertex path x0 -> a -> b -> x0
    beta: Optional[List[int]]
    m: int
    n: int


@dataclass
class TransferCertificate:
    sweep: SweepQuotient
    factor: int                    # 3 for finite deck groups, 6 for virtually cyclic
    tree_bound: float
    bound: float                   # factor * tree_bound
    slack: float
    max_component_diameter: float
    required_truncation: float
    interior_margin: float
    ok: bool
    diagnostics: Optional[TransferDiagnostics] = None


def transfer_certificate(
    c: MetricComplex,
    g: DeckGroupSpec,
    cover: CoverPatch,
    phi: TreeMap,
    basepoint: int = 0,
    step: Optional[float] = None,
) -> TransferCertificate:
    """Sweep the base and certify that every sphere component has diameter at
    most 3D (finite deck group) or 6D (virtually cyclic), D = phi's bound.

    On a violation the certificate carries the loop data whose lift would
    exhibit the three-witness fiber: the offending component, its two far
    points, and the loop (or loop pair with powers m, n) through them."""
    if g.flag == "finite":
        factor = 3
    elif g.flag == "virtually-cyclic":
        factor = 6
    else:
        raise NotVirtuallyCyclic(
            f"deck group flag {g.flag!r} is neither finite nor virtually cyclic"
        )
    if phi.complex is not cover.complex:
        raise BadParam("tree map must live on the cover patch")

    h = c.refinement.h if c.refinement else float(c.lengths.max())
    if step is None:
        step = h
    D = phi.fiber_bound

    f0 = distance_field(c, basepoint)
    r_max = float(f0.values.max())
    loop_len = 2.0 * r_max + factor * D + 4.0 * step
    if factor == 3:
        if g.table is not None:
            order = int(g.table.shape[0])
        elif g.quotient is not None:
            from .covers import _int_det

            order = abs(_int_det(g.quotient))
        else:
            order = 1
        required = order * loop_len / 2.0
    else:
        required = loop_len
    if cover.truncation_radius < required:
        raise TruncationTooSmall(
            cover.truncation_radius,
            required,
            "lifted power loops must fit inside the patch",
        )

    sweep = sweep_quotient(c, basepoint, step)
    slack = 2.0 * (step + h)
    worst = sweep.width
    ok = worst <= factor * D + slack
    diagnostics = None
    if not ok:
        diagnostics = _violation_loops(c, g, sweep, basepoint, factor)
    return TransferCertificate(
        sweep=sweep,
        factor=factor,
        tree_bound=float(D),
        bound=float(factor * D),
        slack=float(slack),
        max_component_diameter=float(worst),
        required_truncation=float(required),
        interior_margin=float(cover.truncation_radius - factor * D),
        ok=bool(ok),
        diagnostics=diagnostics,
    )


def _violation_loops(c, g, sweep, basepoint, factor) -> TransferDiagnostics:
    from .complexes import shortest_path

    node_idx = max(
        range(len(sweep.nodes)), key=lambda i: sweep.nodes[i].fiber_diameter
    )
    node = sweep.nodes[node_idx]
    # far pair inside the fiber
    vs = node.vertices
    f = distance_field(c, int(vs[0]))
    far = int(vs[np.argmax(f.values[vs])])
    f2 = distance_field(c, far)
    a, b = far, int(vs[np.argmax(f2.values[vs])])

    s1 = shortest_path(c, basepoint, a)
    s2 = shortest_path(c, basepoint, b)
    gamma = _path_inside(c, vs, a, b)
    alpha = s1 + gamma[1:] + list(reversed(s2))[1:]

    m, n = 1, 1
    beta = None
    if factor == 6 and c.wraps is not None and c.wraps.shape[1] == 1:
        # split gamma at a point far from both ends, as the proof does
        mid = gamma[len(gamma) // 2]
        s_mid = shortest_path(c, basepoint, mid)
        i_mid = gamma.index(mid)
        alpha = s1 + gamma[1 : i_mid + 1] + list(reversed(s_mid))[1:]
        beta = s_mid + gamma[i_mid + 1 :] + list(reversed(s2))[1:]
        wa = _loop_winding(c, alpha)
        wb = _loop_winding(c, beta)
        g_ = math.gcd(abs(wa), abs(wb))
        if g_ > 0:
            m, n = wb // g_, -wa // g_
    return TransferDiagnostics(
        node_index=node_idx, a=a, b=b, alpha=alpha, beta=beta, m=m, n=n
    )


def _path_inside(c, vertex_set, a, b) -> List[int]:
    """A path from a to b through the induced subgraph on vertex_set."""
    allowed = set(map(int, vertex_set))
    prev = {a: -1}
    queue = [a]
    qi = 0
    while qi < len(queue):
        u = queue[qi]
        qi += 1
        if u == b:
            break
        for v, _w, _e in c.adjacency[u]:
            if v in allowed and v not in prev:
                prev[v] = u
                queue.append(v)
    path = [b]
    while path[-1] != a:
        path.append(prev[path[-1]])
    path.reverse()
    return path


def _loop_winding(c, loop: List[int]) -> int:
    w = 0
    for u, v in zip(loop, loop[1:]):
        e = c.edge_between(u, v)
        a, _b = map(int, c.edges[e])
        w += int(c.wraps[e][0]) * (1 if a == u else -1)
    return w


# --------------------------------------------------------- skeleton extension


@dataclass
class ExtendedMap:
    complex: MetricComplex
    assignment: np.ndarray
    certified_bound: float
    measured_bound: float


def extend_to_full_complex(f: SweepQuotient, c: MetricComplex, k: float) -> ExtendedMap:
    """Extend a 2-skeleton sweep to the full complex by coning each higher
    simplex into the image of its boundary; the certified fiber bound grows
    to d + 2k*dim."""
    if f.complex.n_vertices != c.n_vertices:
        raise BadParam("map and complex disagree on the vertex set")
    for q, quad in enumerate(c.tets):
        diam = subset_diameter(c, [int(v) for v in quad])
        if diam > k + 1e-9:
            raise SimplexTooLarge(q, float(diam), float(k))

    d = f.width
    certified = d + 2.0 * k * c.dim
    if not len(c.tets):
        return ExtendedMap(c, f.assignment.copy(), float(d), float(d))

    # measured: each node fiber grows by the vertex sets of incident simplices
    fibers: Dict[int, set] = {}
    for v, node in enumerate(f.assignment):
        fibers.setdefault(int(node), set()).add(int(v))
    for quad in c.tets:
        touched = {int(f.assignment[int(v)]) for v in quad}
        for node in touched:
            fibers[node].update(int(v) for v in quad)
    measured = 0.0
    for node, vs in sorted(fibers.items()):
        measured = max(measured, subset_diameter(c, sorted(vs)))
    assert measured <= certified + 1e-9
    return ExtendedMap(c, f.assignment.copy(), float(certified), float(measured))
