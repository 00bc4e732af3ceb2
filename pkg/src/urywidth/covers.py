"""Truncated covering spaces with deck labels, path lifting, and the
grid-surface projection certificate.

Three labeling schemes drive one Dijkstra-based sheet-expansion engine:

* ``lattice`` — integer homology labels carried by periodic meshes (wrap
  vectors); optionally quotiented by a full-rank sublattice.
* ``finite`` — group-element labels on presentation complexes built from a
  finite multiplication table; optionally quotiented by a normal subgroup.
* ``free`` — reduced words over a cut system of disjoint essential arcs; the
  surface is cut to a disk and copies are developed across the cut sides.

Patches are honest finite complexes: all downstream metric work (refinement,
distance fields, sweeps) treats them like any other mesh.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .complexes import MetricComplex, build_complex, components
from .errors import (
    BadParam,
    LiftLeavesTruncation,
    NonNormalSubgroup,
    NotGridSurface,
    TruncationTooSmall,
    UnsupportedTopology,
)
from .generators import grid_field
from .surgery import CutResult, cut_along_paths

__all__ = [
    "Presentation",
    "DeckGroupSpec",
    "CoverPatch",
    "fundamental_group",
    "deck_spec",
    "build_cover",
    "lift_path",
    "true_boundary_edges",
    "projection_width_certificate",
]


# ------------------------------------------------------------- presentations


@dataclass
class Presentation:
    """Spanning-tree presentation of the fundamental group."""

    basepoint: int
    tree_parent: np.ndarray        # per-vertex parent edge id, -1 at the root
    generators: List[int]          # non-tree edge ids, one generator each
    relators: List[Tuple[int, ...]]  # words over signed generator indices (1-based)
    simplified_rank: int
    simplified_relators: List[Tuple[int, ...]]


def _free_reduce(word: Sequence[int]) -> Tuple[int, ...]:
    out: List[int] = []
    for x in word:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def _cyclic_reduce(word: Tuple[int, ...]) -> Tuple[int, ...]:
    w = list(_free_reduce(word))
    while len(w) >= 2 and w[0] == -w[-1]:
        w = w[1:-1]
    return tuple(w)


def _substitute(word, letter, repl):
    """Replace every occurrence of `letter` (and its inverse) in the word."""
    out: List[int] = []
    inv = tuple(-x for x in reversed(repl))
    for x in word:
        if x == letter:
            out.extend(repl)
        elif x == -letter:
            out.extend(inv)
        else:
            out.append(x)
    return _free_reduce(out)


def tietze_simplify(n_gens: int, relators: Sequence[Sequence[int]], max_steps: int = 20000):
    """Deterministic generator elimination: repeatedly solve a relator for a
    letter that appears in it exactly once, substitute, and drop the letter.
    Returns (alive generator count, simplified relators)."""
    words = [w for w in (_cyclic_reduce(tuple(r)) for r in relators) if w]
    alive = set(range(1, n_gens + 1))
    steps = 0
    while steps < max_steps:
        steps += 1
        words = sorted(set(_cyclic_reduce(w) for w in words if _cyclic_reduce(w)))
        pick = None
        for w in words:                      # shortest relator first
            counts: Dict[int, int] = {}
            for x in w:
                counts[abs(x)] = counts.get(abs(x), 0) + 1
            for x in w:
                if counts[abs(x)] == 1:
                    pick = (w, x)
                    break
            if pick:
                break
        if pick is None:
            break
        w, x = pick
        i = w.index(x)
        rest = w[i + 1:] + w[:i]             # w ~ x . rest  =>  x = rest^-1
        repl = tuple(-y for y in reversed(rest))
        letter = abs(x)
        if x < 0:
            repl = tuple(-y for y in reversed(repl))
        words = [_substitute(v, letter, repl) for v in words if v != w]
        alive.discard(letter)
    words = sorted(set(w for w in (_cyclic_reduce(v) for v in words) if w))
    return len(alive), words


def fundamental_group(c: MetricComplex, basepoint: int = 0) -> Presentation:
    """Spanning-tree presentation: one generator per non-tree edge, one
    relator per triangle, then Tietze-simplified for classification."""
    V = c.n_vertices
    tree_parent = np.full(V, -1, dtype=np.int64)
    order = [int(basepoint)]
    seen = {int(basepoint)}
    tree_edges = set()
    qi = 0
    while qi < len(order):
        u = order[qi]
        qi += 1
        for nbr, _w, e in c.adjacency[u]:
            if nbr not in seen:
                seen.add(nbr)
                tree_parent[nbr] = e
                tree_edges.add(e)
                order.append(nbr)
    generators = [e for e in range(c.n_edges) if e not in tree_edges]
    gen_index = {e: i + 1 for i, e in enumerate(generators)}

    relators = []
    for tri in c.triangles:
        word = []
        cyc = _triangle_vertex_cycle(c, tri)
        for e, (u, v) in cyc:
            if e in gen_index:
                a, b = map(int, c.edges[e])
                sign = 1 if (u, v) == (a, b) else -1
                word.append(sign * gen_index[e])
        word = _cyclic_reduce(tuple(word))
        if word:
            relators.append(word)

    rank, simp = tietze_simplify(len(generators), relators)
    return Presentation(
        basepoint=int(basepoint),
        tree_parent=tree_parent,
        generators=generators,
        relators=relators,
        simplified_rank=rank,
        simplified_relators=simp,
    )


def _triangle_vertex_cycle(c: MetricComplex, tri) -> List[Tuple[int, Tuple[int, int]]]:
    """The triangle boundary as [(edge, (from, to)), ...] starting at the
    vertex shared by the first and last edges."""
    e0, e1, e2 = map(int, tri)
    s0 = set(map(int, c.edges[e0]))
    s2 = set(map(int, c.edges[e2]))
    start = min(s0 & s2)
    cur = start
    out = []
    for e in (e0, e1, e2):
        u, v = map(int, c.edges[e])
        nxt = v if u == cur else u
        out.append((e, (cur, nxt)))
        cur = nxt
    assert cur == start
    return out


# --------------------------------------------------------------- deck specs


@dataclass
class DeckGroupSpec:
    """How to label edge traversals with deck-group elements."""

    kind: str                                # trivial | lattice | finite | free
    presentation: Optional[Presentation] = None
    quotient: Optional[np.ndarray] = None    # lattice: (k,k) sublattice columns
    table: Optional[np.ndarray] = None       # finite: multiplication table
    identity: int = 0
    edge_labels: Optional[np.ndarray] = None
    subgroup: Tuple[int, ...] = ()           # finite: quotient subgroup elements
    cut_arcs: Tuple[Tuple[int, ...], ...] = ()  # free: disjoint arc vertex paths
    flag: str = ""                           # finite | virtually-cyclic | ""


def deck_spec(c: MetricComplex, kind: Optional[str] = None, **kw) -> DeckGroupSpec:
    """Assemble a deck-group description for the cover builder.

    Without an explicit kind: presentation complexes use their stored finite
    monodromy, periodic meshes their wrap labels, surfaces with boundary a
    cut system of essential arcs (which must be supplied)."""
    pres = kw.pop("presentation", None)
    if kind is None:
        if getattr(c, "_finite_labels", None) is not None:
            kind = "finite"
        elif c.wraps is not None:
            kind = "lattice"
        else:
            kind = "trivial"
    if kind == "finite":
        table = kw.pop("table", None)
        labels = kw.pop("edge_labels", None)
        ident = kw.pop("identity", None)
        if table is None:
            table = getattr(c, "_finite_table", None)
            labels = getattr(c, "_finite_labels", None)
            ident = getattr(c, "_finite_identity", None)
        if table is None or labels is None:
            raise BadParam("finite cover needs a multiplication table and edge labels")
        table = np.asarray(table, dtype=np.int64)
        subgroup = tuple(sorted(set(map(int, kw.pop("subgroup", ())))))
        spec = DeckGroupSpec(
            kind="finite",
            presentation=pres,
            table=table,
            identity=int(ident if ident is not None else 0),
            edge_labels=np.asarray(labels, dtype=np.int64),
            subgroup=subgroup,
            flag="finite",
        )
        _validate_labels(c, spec)
        return spec
    if kind == "lattice":
        if c.wraps is None:
            raise BadParam("lattice cover needs wrap vectors on the mesh")
        q = kw.pop("quotient", None)
        if q is not None:
            q = np.asarray(q, dtype=np.int64)
            k = c.wraps.shape[1]
            if q.shape != (k, k) or abs(_int_det(q)) == 0:
                raise BadParam("quotient must be a full-rank square integer matrix")
        k = c.wraps.shape[1]
        flag = "virtually-cyclic" if k == 1 else ""
        if q is not None:
            flag = "finite"
        return DeckGroupSpec(kind="lattice", presentation=pres, quotient=q, flag=flag)
    if kind == "free":
        arcs = tuple(tuple(int(v) for v in a) for a in kw.pop("cut_arcs", ()))
        if not arcs:
            raise BadParam("free cover needs cut_arcs")
        flag = "virtually-cyclic" if len(arcs) == 1 else ""
        return DeckGroupSpec(kind="free", presentation=pres, cut_arcs=arcs, flag=flag)
    if kind == "trivial":
        return DeckGroupSpec(kind="trivial", presentation=pres, flag="finite")
    raise BadParam(f"unknown deck group kind {kind!r}")


def _validate_labels(c: MetricComplex, spec: DeckGroupSpec):
    """Monodromy labels must multiply to the identity around every triangle."""
    t = spec.table
    ident = spec.identity
    inv = _inverse_table(t, ident)
    for tri in c.triangles:
        acc = ident
        for e, (u, v) in _triangle_vertex_cycle(c, tri):
            g = int(spec.edge_labels[e])
            a, b = map(int, c.edges[e])
            acc = int(t[acc, g]) if (u, v) == (a, b) else int(t[acc, inv[g]])
        if acc != ident:
            raise BadParam(f"edge labels do not close up around a triangle")


def _inverse_table(t: np.ndarray, ident: int) -> np.ndarray:
    n = t.shape[0]
    inv = np.zeros(n, dtype=np.int64)
    for g in range(n):
        inv[g] = int(np.where(t[g] == ident)[0][0])
    return inv


def _int_det(m: np.ndarray) -> int:
    a = [[Fraction(int(x)) for x in row] for row in m]
    n = len(a)
    det = Fraction(1)
    for i in range(n):
        p = next((r for r in range(i, n) if a[r][i] != 0), None)
        if p is None:
            return 0
        if p != i:
            a[i], a[p] = a[p], a[i]
            det = -det
        det *= a[i][i]
        for r in range(i + 1, n):
            f = a[r][i] / a[i][i]
            for cc in range(i, n):
                a[r][cc] -= f * a[i][cc]
    return int(det)


def _lattice_reduce(q: np.ndarray, n: Tuple[int, ...]) -> Tuple[int, ...]:
    """Canonical representative of n modulo the columns of q (exact)."""
    k = len(n)
    x = _solve_rational(q, n)
    f = [int(math.floor(v)) for v in x]
    red = np.array(n, dtype=np.int64) - q @ np.array(f, dtype=np.int64)
    return tuple(int(v) for v in red)


def _solve_rational(q: np.ndarray, n: Sequence[int]) -> List[Fraction]:
    k = len(n)
    a = [[Fraction(int(q[r, c])) for c in range(k)] + [Fraction(int(n[r]))] for r in range(k)]
    for i in range(k):
        p = next(r for r in range(i, k) if a[r][i] != 0)
        a[i], a[p] = a[p], a[i]
        piv = a[i][i]
        a[i] = [v / piv for v in a[i]]
        for r in range(k):
            if r != i and a[r][i] != 0:
                f = a[r][i]
                a[r] = [vr - f * vi for vr, vi in zip(a[r], a[i])]
    return [a[i][k] for i in range(k)]


# ------------------------------------------------------------------ patches


@dataclass
class CoverPatch:
    """A truncated cover materialized as a finite complex."""

    complex: MetricComplex
    base: MetricComplex
    spec: DeckGroupSpec
    proj_v: np.ndarray            # patch vertex -> base vertex
    proj_e: np.ndarray            # patch edge -> base edge
    sheets: List[str]             # per patch vertex, printable deck label
    basepoint_lift: int
    truncation_radius: float
    isometry_radius: float
    dist_from_basepoint: np.ndarray
    carrier: Optional[CutResult] = None     # free kind: the cut disk

    @property
    def n_sheets(self) -> int:
        return len(set(self.sheets))


def build_cover(
    c: MetricComplex,
    spec: DeckGroupSpec,
    R_trunc: float,
    basepoint: int = 0,
) -> CoverPatch:
    """Breadth-first sheet expansion of the labeled cover out to R_trunc."""
    longest = float(c.lengths.max())
    if R_trunc < 2 * longest:
        raise TruncationTooSmall(R_trunc, 2 * longest, "need two edge lengths of room")

    if spec.kind == "trivial":
        return _trivial_patch(c, spec, R_trunc, basepoint)
    if spec.kind == "lattice":
        return _labeled_patch(c, spec, R_trunc, basepoint, _LatticeScheme(c, spec))
    if spec.kind == "finite":
        return _labeled_patch(c, spec, R_trunc, basepoint, _FiniteScheme(c, spec))
    if spec.kind == "free":
        return _free_patch(c, spec, R_trunc, basepoint)
    raise BadParam(f"unknown deck group kind {spec.kind!r}")


class _LatticeScheme:
    def __init__(self, c: MetricComplex, spec: DeckGroupSpec):
        self.c = c
        self.k = c.wraps.shape[1]
        self.q = spec.quotient
        self.start = tuple([0] * self.k)

    def step(self, label, e, forward):
        w = self.c.wraps[e]
        n = tuple(int(a + (b if forward else -b)) for a, b in zip(label, w))
        if self.q is not None:
            n = _lattice_reduce(self.q, n)
        return n

    def show(self, label):
        return "(" + ",".join(map(str, label)) + ")"

    def coords(self, v, label):
        if self.c.coords is None:
            return None
        return self.c.coords[v] + self.c.lattice @ np.array(label, dtype=float)


class _FiniteScheme:
    def __init__(self, c: MetricComplex, spec: DeckGroupSpec):
        self.c = c
        self.t = spec.table
        self.ident = spec.identity
        self.inv = _inverse_table(self.t, self.ident)
        self.labels = spec.edge_labels
        n = self.t.shape[0]
        sub = set(spec.subgroup) or {self.ident}
        if self.ident not in sub:
            raise BadParam("quotient subgroup must contain the identity")
        for a in sub:
            for b in sub:
                if int(self.t[a, b]) not in sub:
                    raise BadParam("quotient subgroup is not closed")
        for g in range(n):
            gi = int(self.inv[g])
            for h in sub:
                if int(self.t[self.t[gi, h], g]) not in sub:
                    raise NonNormalSubgroup(
                        f"conjugating subgroup element {h} by {g} leaves the subgroup"
                    )
        # right cosets; canonical representative = least element
        self.coset_of = np.full(n, -1, dtype=np.int64)
        for g in range(n):
            if self.coset_of[g] >= 0:
                continue
            members = sorted(int(self.t[h, g]) for h in sub)
            for m in members:
                self.coset_of[m] = members[0]
        self.start = int(self.coset_of[self.ident])

    def step(self, label, e, forward):
        g = int(self.labels[e])
        if not forward:
            g = int(self.inv[g])
        return int(self.coset_of[self.t[label, g]])

    def show(self, label):
        return f"<{label}>"

    def coords(self, v, label):
        return None


def _labeled_patch(c, spec, R, basepoint, scheme) -> CoverPatch:
    states: Dict[Tuple[int, object], int] = {}
    order: List[Tuple[int, object]] = []
    dist: List[float] = []

    def intern(s):
        i = states.get(s)
        if i is None:
            i = len(order)
            states[s] = i
            order.append(s)
            dist.append(math.inf)
        return i

    s0 = (int(basepoint), scheme.start)
    i0 = intern(s0)
    dist[i0] = 0.0
    heap = [(0.0, i0)]
    adj = c.adjacency
    while heap:
        d, i = heapq.heappop(heap)
        if d > dist[i] + 1e-15:
            continue
        v, lab = order[i]
        for nbr, w, e in adj[v]:
            nd = d + w
            if nd > R + 1e-12:
                continue
            forward = int(c.edges[e][0]) == v
            s = (int(nbr), scheme.step(lab, e, forward))
            j = intern(s)
            if nd < dist[j] - 1e-15:
                dist[j] = nd
                heapq.heappush(heap, (nd, j))

    nV = len(order)
    by_vertex: Dict[int, List[object]] = {}
    for i, (v, lab) in enumerate(order):
        by_vertex.setdefault(v, []).append(lab)

    edge_ids: Dict[Tuple[int, int, int], int] = {}
    rows: List[Tuple[int, int, float]] = []
    proj_e: List[int] = []
    for e in range(c.n_edges):
        a, b = map(int, c.edges[e])
        ln = float(c.lengths[e])
        for lab_a in by_vertex.get(a, ()):
            i = states[(a, lab_a)]
            s = (b, scheme.step(lab_a, e, True))
            j = states.get(s)
            if j is None:
                continue
            key = (min(i, j), max(i, j), e)
            if key in edge_ids:
                continue
            edge_ids[key] = len(rows)
            rows.append((i, j, ln))
            proj_e.append(e)

    tris = []
    for tri in c.triangles:
        cyc = _triangle_vertex_cycle(c, tri)
        a = cyc[0][1][0]
        for lab in by_vertex.get(a, ()):
            ids = []
            cur = (a, lab)
            ok = True
            for e, (u, v) in cyc:
                i = states.get(cur)
                nxt = (v, scheme.step(cur[1], e, int(c.edges[e][0]) == u))
                j = states.get(nxt)
                if i is None or j is None:
                    ok = False
                    break
                key = (min(i, j), max(i, j), e)
                pe = edge_ids.get(key)
                if pe is None:
                    ok = False
                    break
                ids.append(pe)
                cur = nxt
            if ok:
                tris.append(tuple(ids))

    coords = None
    cl = [scheme.coords(v, lab) for (v, lab) in order]
    if all(x is not None for x in cl) and cl:
        coords = np.vstack(cl)

    patch = build_complex(
        nV, rows, tris, coords=coords, name=f"{c.name}~cover" if c.name else "cover"
    )
    proj_v = np.array([v for (v, _l) in order], dtype=np.int64)
    sheets = [scheme.show(lab) for (_v, lab) in order]
    iso = _isometry_radius(c, spec, patch, proj_v, np.array(dist))
    return CoverPatch(
        complex=patch,
        base=c,
        spec=spec,
        proj_v=proj_v,
        proj_e=np.array(proj_e, dtype=np.int64),
        sheets=sheets,
        basepoint_lift=i0,
        truncation_radius=float(R),
        isometry_radius=iso,
        dist_from_basepoint=np.array(dist),
    )


def _trivial_patch(c, spec, R, basepoint) -> CoverPatch:
    from .complexes import distance_field

    f = distance_field(c, int(basepoint))
    patch = build_complex(
        c.n_vertices,
        [(int(u), int(v), float(l)) for (u, v), l in zip(c.edges, c.lengths)],
        [tuple(map(int, t)) for t in c.triangles],
        coords=None if c.coords is None else c.coords.copy(),
        name=f"{c.name}~id" if c.name else "identity-cover",
    )
    return CoverPatch(
        complex=patch,
        base=c,
        spec=spec,
        proj_v=np.arange(c.n_vertices, dtype=np.int64),
        proj_e=np.arange(c.n_edges, dtype=np.int64),
        sheets=["<>"] * c.n_vertices,
        basepoint_lift=int(basepoint),
        truncation_radius=float(R),
        isometry_radius=math.inf,
        dist_from_basepoint=f.values.copy(),
    )


# ------------------------------------------------------------- free covers


def _word_mul(w: Tuple[int, ...], x: int) -> Tuple[int, ...]:
    if w and w[-1] == -x:
        return w[:-1]
    return w + (x,)


def _free_patch(c, spec, R, basepoint) -> CoverPatch:
    cut = cut_along_paths(c, spec.cut_arcs)
    F = cut.complex
    if F.euler_characteristic() != 1:
        raise BadParam(
            "cut system does not reduce the surface to a disk; "
            f"Euler characteristic is {F.euler_characteristic()}"
        )
    # side-1 cells jump to the next sheet; a side-0 cell is simultaneously the
    # side-1 cell of the previous sheet, so states have up to two incarnations
    v_jump: Dict[int, Tuple[int, int]] = {}
    e_jump: Dict[int, Tuple[int, int]] = {}
    v_back: Dict[int, Tuple[int, int]] = {}
    for i, side in enumerate(cut.sides):
        for v0, v1 in zip(side["vertices0"], side["vertices1"]):
            v_jump[v1] = (i + 1, v0)
            v_back[v0] = (i + 1, v1)
        for e0, e1 in zip(side["edges0"], side["edges1"]):
            e_jump[e1] = (i + 1, e0)

    if int(basepoint) in v_jump or int(basepoint) in {v for s in cut.sides for v in s["vertices0"]}:
        raise BadParam("basepoint must not lie on a cut arc")

    def canon(v: int, w: Tuple[int, ...]):
        j = v_jump.get(v)
        if j is not None:
            return j[1], _word_mul(w, j[0])
        return v, w

    def incarnations(v: int, w: Tuple[int, ...]):
        yield v, w
        j = v_back.get(v)
        if j is not None:
            yield j[1], _word_mul(w, -j[0])

    states: Dict[Tuple[int, Tuple[int, ...]], int] = {}
    order: List[Tuple[int, Tuple[int, ...]]] = []
    dist: List[float] = []

    def intern(s):
        i = states.get(s)
        if i is None:
            i = len(order)
            states[s] = i
            order.append(s)
            dist.append(math.inf)
        return i

    s0 = canon(int(basepoint), ())
    i0 = intern(s0)
    dist[i0] = 0.0
    heap = [(0.0, i0)]
    while heap:
        d, i = heapq.heappop(heap)
        if d > dist[i] + 1e-15:
            continue
        v, w = order[i]
        for vi, wi in incarnations(v, w):
            for nbr, wt, e in F.adjacency[vi]:
                nd = d + wt
                if nd > R + 1e-12:
                    continue
                s = canon(int(nbr), wi)
                j = intern(s)
                if nd < dist[j] - 1e-15:
                    dist[j] = nd
                    heapq.heappush(heap, (nd, j))

    # materialize edges: every F-edge that is not a side-1 copy, per sheet
    sheet_words = sorted({w for (_v, w) in order}, key=lambda w: (len(w), w))
    edge_ids: Dict[Tuple[int, int, int], int] = {}
    rows: List[Tuple[int, int, float]] = []
    proj_e: List[int] = []
    base_edge_of = cut.edge_map
    for e in range(F.n_edges):
        if e in e_jump:
            continue
        a, b = map(int, F.edges[e])
        ln = float(F.lengths[e])
        for w in sheet_words:
            sa = canon(a, w)
            sb = canon(b, w)
            i = states.get(sa)
            j = states.get(sb)
            if i is None or j is None:
                continue
            key = (min(i, j), max(i, j), e)
            if key in edge_ids:
                continue
            edge_ids[key] = len(rows)
            rows.append((i, j, ln))
            proj_e.append(int(base_edge_of[e]))

    def edge_lift(e: int, w: Tuple[int, ...]):
        jump = e_jump.get(e)
        if jump is not None:
            e = jump[1]
            w = _word_mul(w, jump[0])
        a, b = map(int, F.edges[e])
        i = states.get(canon(a, w))
        j = states.get(canon(b, w))
        if i is None or j is None:
            return None
        return edge_ids.get((min(i, j), max(i, j), e))

    tris = []
    for tri in F.triangles:
        for w in sheet_words:
            ids = [edge_lift(int(e), w) for e in tri]
            if all(x is not None for x in ids):
                key = tuple(ids)
                tris.append(key)
    tris = sorted(set(tris))

    coords = None
    if F.coords is not None:
        coords = np.vstack([F.coords[v] for (v, _w) in order])

    patch = build_complex(
        len(order), rows, tris, coords=coords,
        name=f"{c.name}~cover" if c.name else "cover",
    )
    proj_v = np.array([int(cut.vertex_map[v]) for (v, _w) in order], dtype=np.int64)
    proj_e_arr = np.array(proj_e, dtype=np.int64)
    sheets = ["".join(_letter(x) for x in w) or "1" for (_v, w) in order]
    iso = _isometry_radius(c, spec, patch, proj_v, np.array(dist))
    return CoverPatch(
        complex=patch,
        base=c,
        spec=spec,
        proj_v=proj_v,
        proj_e=proj_e_arr,
        sheets=sheets,
        basepoint_lift=i0,
        truncation_radius=float(R),
        isometry_radius=iso,
        dist_from_basepoint=np.array(dist),
        carrier=cut,
    )


def _letter(x: int) -> str:
    a = "abcdefgh"[abs(x) - 1]
    return a if x > 0 else a.upper()


# -------------------------------------------------------- isometry radius


def _isometry_radius(c, spec, patch, proj_v, dist) -> float:
    """Half the shortest essential loop seen in the patch.

    Lattice covers get the certified ambient bound (half the shortest
    nonzero deck translation); other kinds scan for the closest pair of
    distinct lifts of a common base vertex, with early termination."""
    if spec.kind == "lattice":
        lat = c.lattice @ _deck_sublattice(c, spec)
        k = lat.shape[1]
        best = math.inf
        for combo in itertools.product(range(-3, 4), repeat=k):
            if not any(combo):
                continue
            v = lat @ np.array(combo, dtype=float)
            best = min(best, float(np.linalg.norm(v)))
        return best / 2.0
    return _closest_lift_pair(patch, proj_v) / 2.0


def _deck_sublattice(c, spec) -> np.ndarray:
    k = c.wraps.shape[1]
    if spec.quotient is None:
        return np.eye(k)
    return spec.quotient.astype(float)


def _closest_lift_pair(patch: MetricComplex, proj_v: np.ndarray) -> float:
    groups: Dict[int, List[int]] = {}
    for i, b in enumerate(proj_v):
        groups.setdefault(int(b), []).append(i)
    best = math.inf
    adj = patch.adjacency
    for b in sorted(groups):
        lifts = groups[b]
        if len(lifts) < 2:
            continue
        # labeled multi-source sweep, stop when the frontier passes best/2
        dist: Dict[int, float] = {}
        lab: Dict[int, int] = {}
        heap = []
        for s in lifts:
            dist[s] = 0.0
            lab[s] = s
            heapq.heappush(heap, (0.0, s, s))
        while heap:
            d, v, l = heapq.heappop(heap)
            if d > dist.get(v, math.inf) + 1e-15 or lab[v] != l:
                continue
            if 2 * d >= best:
                break
            for nbr, w, _e in adj[v]:
                nd = d + w
                if nbr in dist:
                    if lab[nbr] != l:
                        best = min(best, nd + dist[nbr])
                    if nd < dist[nbr] - 1e-15:
                        dist[nbr] = nd
                        lab[nbr] = l
                        heapq.heappush(heap, (nd, nbr, l))
                else:
                    dist[nbr] = nd
                    lab[nbr] = l
                    heapq.heappush(heap, (nd, nbr, l))
    return best


# -------------------------------------------------------------- path lifting


def lift_path(p: CoverPatch, path: Sequence[int], start: Optional[int] = None) -> List[int]:
    """Unique lift of a base edge path from a lifted start vertex; returns the
    patch vertex sequence."""
    cur = int(p.basepoint_lift if start is None else start)
    out = [cur]
    for step, e in enumerate(path):
        e = int(e)
        base_prev = int(p.proj_v[cur])
        a, b = map(int, p.base.edges[e])
        if base_prev not in (a, b):
            raise BadParam(f"path edge {e} does not continue from vertex {base_prev}")
        found = None
        for nbr, _w, pe in p.complex.adjacency[cur]:
            if int(p.proj_e[pe]) == e:
                found = nbr
                break
        if found is None:
            raise LiftLeavesTruncation(step)
        cur = found
        out.append(cur)
    return out


def true_boundary_edges(p: CoverPatch) -> List[int]:
    """Patch boundary edges that lie over the base surface's boundary.

    Truncation-frontier edges (boundary only because the patch was cut off)
    are excluded, so the result is the geometrically meaningful boundary."""
    base_bnd = p.base.boundary_edges
    return sorted(
        int(e)
        for e in p.complex.boundary_edges
        if int(p.proj_e[e]) in base_bnd
    )


# ------------------------------------------- grid projection certificate


@dataclass
class ProjectionCertificate:
    """Nearest-grid-cell fiber measurement on a grid-surface cover patch."""

    max_fiber_diameter: float
    bound: float
    n_fibers: int
    max_fiber_size: int
    inner_radius: float
    mesh_slack: float
    fibers_ok: bool


def projection_width_certificate(p: CoverPatch, bound: float = 3.0) -> ProjectionCertificate:
    """Assign every patch vertex to its nearest cell of the integer grid
    skeleton and measure all fiber diameters in the patch metric."""
    patch = p.complex
    if patch.coords is None:
        raise NotGridSurface("patch carries no ambient coordinates")
    base = p.base
    if base.coords is None or base.lattice is None or base.lattice.shape != (3, 3):
        raise NotGridSurface("base is not a periodic space-filling surface")
    if float(np.abs(grid_field(patch.coords)).max()) > 0.25:
        raise NotGridSurface("patch does not track the grid-equidistant set")

    mesh_slack = float(patch.lengths.max())
    inner = p.truncation_radius - (bound + 2 * mesh_slack)
    if inner <= 0:
        raise TruncationTooSmall(p.truncation_radius, bound + 2 * mesh_slack)

    cells: Dict[tuple, List[int]] = {}
    q = patch.coords
    gaps = np.abs(q - np.round(q))
    axis = np.argmax(gaps, axis=1)
    for v in range(patch.n_vertices):
        a = int(axis[v])
        pt = np.round(q[v]).astype(int)
        lo = int(math.floor(q[v][a]))
        t = q[v][a] - lo
        if t == 0.0:
            key = ("v",) + tuple(int(x) for x in np.concatenate([pt[:a], [lo], pt[a + 1:]]))
        else:
            rest = [int(x) for x in pt]
            rest[a] = lo
            key = ("e", a) + tuple(rest)
        cells.setdefault(key, []).append(v)

    inner_mask = p.dist_from_basepoint <= inner
    from .complexes import distance_rows

    worst = 0.0
    n_fibers = 0
    max_size = 0
    cutoff = bound + 1e-9  # anything past the bound is a violation regardless
    batch_v: List[int] = []
    batch_fiber: List[List[int]] = []

    def flush():
        nonlocal worst
        if not batch_v:
            return
        rows = distance_rows(patch, batch_v, limit=cutoff)
        for r, fib in enumerate(batch_fiber):
            # beyond the scan cutoff is already a violation of the bound
            worst = max(worst, float(rows[r, fib].max()))
        batch_v.clear()
        batch_fiber.clear()

    for key in sorted(cells):
        fiber = cells[key]
        if not any(inner_mask[v] for v in fiber):
            continue
        n_fibers += 1
        max_size = max(max_size, len(fiber))
        for v in fiber:
            batch_v.append(v)
            batch_fiber.append(fiber)
        if len(batch_v) >= 512:
            flush()
    flush()
    return ProjectionCertificate(
        max_fiber_diameter=float(worst),
        bound=float(bound),
        n_fibers=n_fibers,
        max_fiber_size=max_size,
        inner_radius=float(inner),
        mesh_slack=mesh_slack,
        fibers_ok=bool(worst <= bound),
    )
