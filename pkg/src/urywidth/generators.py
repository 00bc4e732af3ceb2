"""Built-in example spaces: flat tori, cylinders, planar surfaces, finite-group
presentation complexes, and the periodic grid-equidistant surface family.

Periodic meshes carry integer wrap vectors so covers can unwind them; the
grid-equidistant surface is extracted by marching tetrahedra on a Kuhn cube
split, which (unlike cube-table marching) is invariant under negating the
scalar field — required here because one lattice generator swaps the two
grids and flips the sign of the level function.
"""

from __future__ import annotations

import math
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .complexes import MetricComplex, build_complex
from .errors import BadParam

__all__ = [
    "flat_torus",
    "cylinder",
    "annulus",
    "pair_of_pants",
    "presentation_complex",
    "grid_surface",
    "sector_mesh",
    "generate_example",
]


# ------------------------------------------------------------------ helpers


class _EdgeTable:
    """Accumulates unique (u, v, wrap) edges and hands out ids."""

    def __init__(self, k: int = 0):
        self.k = k
        self.ids: Dict[tuple, int] = {}
        self.rows: List[Tuple[int, int, float]] = []
        self.wraps: List[tuple] = []

    def key(self, u, v, wrap):
        wrap = tuple(int(x) for x in wrap)
        if u > v or (u == v):
            u, v = v, u
            wrap = tuple(-x for x in wrap)
        return (u, v, wrap)

    def add(self, u, v, length, wrap=None):
        wrap = tuple([0] * self.k) if wrap is None else tuple(int(x) for x in wrap)
        k = self.key(u, v, wrap)
        e = self.ids.get(k)
        if e is None:
            e = len(self.rows)
            self.ids[k] = e
            self.rows.append((k[0], k[1], float(length)))
            self.wraps.append(k[2])
        else:
            have = self.rows[e][2]
            if abs(have - length) > 1e-9:
                raise BadParam(
                    f"edge ({u},{v}) assigned inconsistent lengths "
                    f"{have} vs {length}"
                )
        return e


def _check_wrapped_lengths(c: MetricComplex, tol: float = 1e-6):
    """Every stored edge length must match the unwrapped ambient segment."""
    d = c.coords[c.edges[:, 1]] - c.coords[c.edges[:, 0]]
    if c.wraps is not None:
        d = d + c.wraps @ c.lattice.T
    err = np.abs(np.linalg.norm(d, axis=1) - c.lengths)
    if float(err.max()) > tol:
        e = int(err.argmax())
        raise BadParam(
            f"edge {e} length {c.lengths[e]} disagrees with ambient "
            f"displacement by {err[e]:.2e}"
        )


def _mesh_from_coords(coords, cells):
    """Planar-style mesh: vertex coordinates + vertex-triples, lengths Euclidean."""
    coords = np.asarray(coords, dtype=float)
    tab = _EdgeTable()
    tris = []
    for a, b, c in cells:
        eab = tab.add(a, b, np.linalg.norm(coords[a] - coords[b]))
        ebc = tab.add(b, c, np.linalg.norm(coords[b] - coords[c]))
        eca = tab.add(c, a, np.linalg.norm(coords[c] - coords[a]))
        tris.append((eab, ebc, eca))
    return tab, tris


# ------------------------------------------------------------------- tori


def flat_torus(L: int) -> MetricComplex:
    """Square flat torus of side L: unit grid, each square cut by a diagonal."""
    if not (isinstance(L, (int, np.integer)) and L >= 3):
        raise BadParam(f"flat_torus needs an integer side >= 3, got {L!r}")
    L = int(L)

    def vid(i, j):
        return (j % L) * L + (i % L)

    coords = np.array([[i, j, 0.0] for j in range(L) for i in range(L)])
    lattice = np.array([[L, 0], [0, L], [0, 0]], dtype=float)
    tab = _EdgeTable(k=2)
    SQ2 = math.sqrt(2.0)

    # wraps are given for the (first, second) argument direction; the edge
    # table renormalizes them when it sorts the endpoints
    def hor(i, j):
        w = (1, 0) if i + 1 == L else (0, 0)
        return tab.add(vid(i, j), vid(i + 1, j), 1.0, w)

    def ver(i, j):
        w = (0, 1) if j + 1 == L else (0, 0)
        return tab.add(vid(i, j), vid(i, j + 1), 1.0, w)

    def dia(i, j):
        w = ((1 if i + 1 == L else 0), (1 if j + 1 == L else 0))
        return tab.add(vid(i, j), vid(i + 1, j + 1), SQ2, w)

    tris = []
    for j in range(L):
        for i in range(L):
            tris.append((hor(i, j), ver((i + 1) % L, j), dia(i, j)))
            tris.append((dia(i, j), hor(i, (j + 1) % L), ver(i, j)))
    c = build_complex(
        L * L,
        tab.rows,
        tris,
        coords=coords,
        lattice=lattice,
        wraps=np.array(tab.wraps, dtype=np.int64),
        name=f"flat_torus({L})",
    )
    assert not c.boundary_edges
    _check_wrapped_lengths(c)
    return c


def cylinder(L: int, H: int) -> MetricComplex:
    """Flat cylinder: circumference L, height H, unit squares cut by diagonals."""
    if not (isinstance(L, (int, np.integer)) and L >= 3):
        raise BadParam(f"cylinder needs integer circumference >= 3, got {L!r}")
    if not (isinstance(H, (int, np.integer)) and H >= 1):
        raise BadParam(f"cylinder needs integer height >= 1, got {H!r}")
    L, H = int(L), int(H)

    def vid(i, j):
        return j * L + (i % L)

    coords = np.array([[i, j, 0.0] for j in range(H + 1) for i in range(L)])
    lattice = np.array([[L], [0], [0]], dtype=float)
    tab = _EdgeTable(k=1)
    SQ2 = math.sqrt(2.0)

    def hor(i, j):
        w = (1,) if i + 1 == L else (0,)
        return tab.add(vid(i, j), vid(i + 1, j), 1.0, w)

    def ver(i, j):
        return tab.add(vid(i, j), vid(i, j + 1), 1.0, (0,))

    def dia(i, j):
        w = (1,) if i + 1 == L else (0,)
        return tab.add(vid(i, j), vid(i + 1, j + 1), SQ2, w)

    tris = []
    for j in range(H):
        for i in range(L):
            tris.append((hor(i, j), ver((i + 1) % L, j), dia(i, j)))
            tris.append((dia(i, j), hor(i, j + 1), ver(i, j)))
    c = build_complex(
        L * (H + 1),
        tab.rows,
        tris,
        coords=coords,
        lattice=lattice,
        wraps=np.array(tab.wraps, dtype=np.int64),
        name=f"cylinder({L},{H})",
    )
    assert len(_boundary_cycles(c)) == 2
    _check_wrapped_lengths(c)
    return c


def annulus(L: int, H: int) -> MetricComplex:
    c = cylinder(L, H)
    c.name = f"annulus({L},{H})"
    return c


def _boundary_cycles(c: MetricComplex) -> List[List[int]]:
    """Vertex cycles of the boundary, one list per boundary component."""
    from .complexes import components

    if not c.boundary_edges:
        return []
    comps = components(c, edges=sorted(c.boundary_edges))
    return [list(comp.vertices) for comp in comps]


# ----------------------------------------------------------- planar surfaces


def pair_of_pants(scale: float = 1.0) -> MetricComplex:
    """Planar three-holed-sphere: an 8x7 unit-square grid with two square
    holes removed, all lengths multiplied by `scale`."""
    if not (scale > 0):
        raise BadParam(f"pair_of_pants needs scale > 0, got {scale!r}")
    W, He = 8, 7
    holes = {(2, 3), (5, 3)}
    vid = {}
    coords = []
    for j in range(He + 1):
        for i in range(W + 1):
            vid[(i, j)] = len(coords)
            coords.append([i * scale, j * scale, 0.0])
    cells = []
    for j in range(He):
        for i in range(W):
            if (i, j) in holes:
                continue
            a, b = vid[(i, j)], vid[(i + 1, j)]
            cc, d = vid[(i + 1, j + 1)], vid[(i, j + 1)]
            cells.append((a, b, cc))
            cells.append((a, cc, d))
    # drop the four vertices orphaned inside... none: hole corners stay on rims
    tab, tris = _mesh_from_coords(coords, cells)
    c = build_complex(
        len(coords), tab.rows, tris, coords=np.array(coords),
        name=f"pair_of_pants({scale})",
    )
    assert c.euler_characteristic() == -1
    assert len(_boundary_cycles(c)) == 3
    return c


def sector_mesh(radius: float, angle: float, n_r: int = 10, n_a: int = 8) -> MetricComplex:
    """Triangulated planar circular sector (apex at the origin)."""
    if radius <= 0 or not (0 < angle <= math.pi):
        raise BadParam("sector_mesh needs radius > 0 and angle in (0, pi]")
    coords = [[0.0, 0.0, 0.0]]
    ring_ids = [[0] * (n_a + 1)]
    for k in range(1, n_r + 1):
        ring = []
        r = radius * k / n_r
        for j in range(n_a + 1):
            th = angle * j / n_a
            ring.append(len(coords))
            coords.append([r * math.cos(th), r * math.sin(th), 0.0])
        ring_ids.append(ring)
    cells = []
    for j in range(n_a):
        cells.append((0, ring_ids[1][j], ring_ids[1][j + 1]))
    for k in range(1, n_r):
        lo, hi = ring_ids[k], ring_ids[k + 1]
        for j in range(n_a):
            cells.append((lo[j], hi[j], hi[j + 1]))
            cells.append((lo[j], hi[j + 1], lo[j + 1]))
    tab, tris = _mesh_from_coords(coords, cells)
    return build_complex(
        len(coords), tab.rows, tris, coords=np.array(coords),
        name=f"sector({radius},{angle:.3f})",
    )


# ------------------------------------------------- presentation complexes


def _check_group_table(table) -> Tuple[np.ndarray, int]:
    t = np.asarray(table, dtype=np.int64)
    n = t.shape[0]
    if t.ndim != 2 or t.shape != (n, n) or n < 1:
        raise BadParam("group table must be square")
    if t.min() < 0 or t.max() >= n:
        raise BadParam("group table entries must be element indices")
    ident = None
    for e in range(n):
        if all(t[e, g] == g and t[g, e] == g for g in range(n)):
            ident = e
            break
    if ident is None:
        raise BadParam("group table has no identity element")
    for g in range(n):
        if len(set(t[g])) != n or len(set(t[:, g])) != n:
            raise BadParam(f"group table row/column {g} is not a permutation")
    for a in range(n):
        for b in range(n):
            for c in range(n):
                if t[t[a, b], c] != t[a, t[b, c]]:
                    raise BadParam(f"group table is not associative at ({a},{b},{c})")
    return t, ident


def _inv(table: np.ndarray, ident: int, g: int) -> int:
    return int(np.where(table[g] == ident)[0][0])


def presentation_complex(table, loop_len: float = 1.0, spoke_len: float = 0.4) -> MetricComplex:
    """Two-complex with one loop per nontrivial element of a finite group and
    one cell per product relation g*h = gh, metrized with wheel triangulations.

    The returned complex carries the product-table monodromy on its edges
    (read by the covering machinery), so its universal cover has one sheet
    per group element.
    """
    t, ident = _check_group_table(table)
    n = t.shape[0]
    if n < 2:
        raise BadParam("group must have at least 2 elements")
    if not (0 < loop_len / 2.0 < 2 * spoke_len):
        raise BadParam("need loop_len/2 < 2*spoke_len for nondegenerate cells")

    base = 0
    mid = {}
    n_vertices = 1
    for g in range(n):
        if g != ident:
            mid[g] = n_vertices
            n_vertices += 1

    edges: List[Tuple[int, int, float]] = []
    labels: List[int] = []
    loop_edges: Dict[int, Tuple[int, int]] = {}

    def add_edge(u, v, length, label):
        edges.append((u, v, float(length)))
        labels.append(int(label))
        return len(edges) - 1

    half = loop_len / 2.0
    for g in sorted(mid):
        e_out = add_edge(base, mid[g], half, ident)     # base -> mid: neutral
        e_in = add_edge(mid[g], base, half, g)          # mid -> base: acts by g
        loop_edges[g] = (e_out, e_in)

    tris: List[Tuple[int, int, int]] = []

    def walk_of(g, h):
        """Relator boundary walk g . h . (gh)^-1 as (edge id, forward?) list."""
        gh = int(t[g, h])
        w = [(loop_edges[g][0], True), (loop_edges[g][1], True),
             (loop_edges[h][0], True), (loop_edges[h][1], True)]
        if gh != ident:
            w += [(loop_edges[gh][1], False), (loop_edges[gh][0], False)]
        return w

    for g in sorted(mid):
        for h in sorted(mid):
            walk = walk_of(g, h)
            hub = n_vertices
            n_vertices += 1
            # vertices visited by the walk, starting at base
            vs = [base]
            acc = [ident]
            for e, fwd in walk:
                u, v, _ = edges[e]
                lab = labels[e]
                if fwd:
                    vs.append(v)
                    acc.append(int(t[acc[-1], lab]))
                else:
                    vs.append(u)
                    acc.append(int(t[acc[-1], _inv(t, ident, lab)]))
            assert vs[-1] == base and acc[-1] == ident
            spokes = [
                add_edge(hub, vs[i], spoke_len, acc[i]) for i in range(len(walk))
            ]
            m = len(walk)
            for i in range(m):
                tris.append((walk[i][0], spokes[(i + 1) % m], spokes[i]))

    c = build_complex(n_vertices, edges, tris, name=f"presentation_complex(n={n})")
    c._finite_table = t
    c._finite_identity = ident
    c._finite_labels = np.array(labels, dtype=np.int64)
    c._finite_loops = {g: list(loop_edges[g]) for g in loop_edges}
    return c


def cyclic_group_table(k: int) -> List[List[int]]:
    """Multiplication table of the cyclic group of order k (identity = 0)."""
    if not (isinstance(k, (int, np.integer)) and k >= 1):
        raise BadParam(f"cyclic group order must be a positive integer, got {k!r}")
    return [[(a + b) % k for b in range(k)] for a in range(k)]


# --------------------------------------------- grid-equidistant surface


def _grid_gap(x: np.ndarray) -> np.ndarray:
    return np.abs(x - np.round(x))


def grid_field(pts: np.ndarray) -> np.ndarray:
    """Signed equidistance field: d(p, integer grid skeleton) minus
    d(p, the (1/2,1/2,1/2)-shifted skeleton)."""
    p = np.asarray(pts, dtype=float)
    d = _grid_gap(p)
    dd = d * d
    s = dd.sum(axis=-1)
    near = np.sqrt(s - dd.max(axis=-1))
    d2 = 0.5 - d
    dd2 = d2 * d2
    s2 = dd2.sum(axis=-1)
    far = np.sqrt(s2 - dd2.max(axis=-1))
    return near - far


_OFFSET = np.array([1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0])

# Kuhn split of the unit cube: six tetrahedra sharing the main diagonal.
_KUHN = []
for _perm in ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)):
    _c = [np.zeros(3, dtype=np.int64)]
    for _ax in _perm:
        _step = _c[-1].copy()
        _step[_ax] += 1
        _c.append(_step)
    _KUHN.append(np.stack(_c))


def grid_surface(R: int) -> MetricComplex:
    """Closed surface of points equidistant from the integer grid skeleton and
    its half-shifted dual, taken modulo the lattice spanned by (R,0,0),
    (0,R,0), (1/2,1/2,1/2+R)."""
    if not (isinstance(R, (int, np.integer)) and R >= 2):
        raise BadParam(f"grid_surface needs an integer R >= 2, got {R!r}")
    R = int(R)
    n, nz = 4 * R, 4 * R + 2

    idx = np.stack(
        np.meshgrid(np.arange(n), np.arange(n), np.arange(nz), indexing="ij"), -1
    )
    F = grid_field(idx * 0.25 + _OFFSET)
    fmin = float(np.abs(F).min())
    if fmin <= 1e-6:
        raise BadParam("sampling offsets hit the level set; cannot polygonize")

    def F_at(i, j, k):
        """Value lookup with antiperiodic lattice reduction (the skew
        generator swaps the two grids, so odd shifts negate the field)."""
        n3 = np.floor_divide(k, nz)
        i2 = np.mod(i - 2 * n3, n)
        j2 = np.mod(j - 2 * n3, n)
        k2 = k - n3 * nz
        sign = np.where(n3 % 2 == 0, 1.0, -1.0)
        return sign * F[i2, j2, k2]

    def reduce_sample(s):
        """Lattice-canonical form of one integer sample + coefficient vector."""
        i, j, k = (int(x) for x in s)
        n3 = k // nz
        i, j, k = i - 2 * n3, j - 2 * n3, k - n3 * nz
        n1, n2 = i // n, j // n
        return (i - n1 * n, j - n2 * n, k), (n1, n2, n3)

    # March the six tetrahedra of every cell in the fundamental box.
    ci, cj, ck = np.meshgrid(np.arange(n), np.arange(n), np.arange(nz), indexing="ij")
    anchors = np.stack([ci.ravel(), cj.ravel(), ck.ravel()], -1)  # (C,3)

    raw_tris: List[Tuple[tuple, tuple, tuple]] = []

    for tet in _KUHN:
        corner = anchors[:, None, :] + tet[None, :, :]          # (C,4,3)
        vals = F_at(corner[..., 0], corner[..., 1], corner[..., 2])  # (C,4)
        pos = vals > 0
        npos = pos.sum(axis=1)
        # one corner against three (either sign): a single triangle
        for lone_sign, count in ((True, 1), (False, 3)):
            mask = npos == count
            if not mask.any():
                continue
            lone = np.argmax(pos[mask] == lone_sign, axis=1)
            cell_c = corner[mask]
            for row, li in zip(cell_c, lone):
                others = [x for x in range(4) if x != li]
                key = [
                    _edge_key(row[li], row[o]) for o in others
                ]
                raw_tris.append(tuple(key))
        # two against two: a quad, split along a deterministic diagonal
        mask = npos == 2
        if mask.any():
            cell_c = corner[mask]
            cell_p = pos[mask]
            for row, pr in zip(cell_c, cell_p):
                ipos = [x for x in range(4) if pr[x]]
                ineg = [x for x in range(4) if not pr[x]]
                (i, j), (k, l) = ipos, ineg
                quad = [
                    _edge_key(row[i], row[k]),
                    _edge_key(row[i], row[l]),
                    _edge_key(row[j], row[l]),
                    _edge_key(row[j], row[k]),
                ]
                a = min(range(4), key=lambda q: quad[q])
                raw_tris.append((quad[a], quad[(a + 1) % 4], quad[(a + 2) % 4]))
                raw_tris.append((quad[a], quad[(a + 2) % 4], quad[(a + 3) % 4]))

    # Weld: canonical vertex per lattice orbit of crossing edges.
    vert_id: Dict[tuple, int] = {}
    vert_key: List[tuple] = []

    def vertex_of(key):
        (a, b) = key
        ca, lam = reduce_sample(a)
        cb = tuple(int(x) for x in (np.array(b) - np.array(a) + np.array(ca)))
        ck_ = (ca, cb)
        v = vert_id.get(ck_)
        if v is None:
            v = len(vert_key)
            vert_id[ck_] = v
            vert_key.append(ck_)
        return v, lam

    theta_memo: Dict[tuple, np.ndarray] = {}

    def theta(ck_):
        p = theta_memo.get(ck_)
        if p is None:
            a, b = np.array(ck_[0]), np.array(ck_[1])
            fa = float(F_at(*ck_[0]))
            fb = float(F_at(*ck_[1]))
            th = fa / (fa - fb)
            p = a + th * (b - a)
            theta_memo[ck_] = p
        return p

    lattice = np.array([[R, 0, 0.5], [0, R, 0.5], [0, 0, 0.5 + R]], dtype=float)
    lattice_idx = lattice * 4.0

    tab = _EdgeTable(k=3)
    tris: List[Tuple[int, int, int]] = []
    for key3 in raw_tris:
        vs, lams = zip(*(vertex_of(k) for k in key3))
        # positions relative to this triangle's own (unreduced) samples
        loc = [np.array(k[0], dtype=float) for k in key3]
        pts = []
        for k, (v, lam) in zip(key3, zip(vs, lams)):
            p = theta(vert_key[v]) + lattice_idx @ np.array(lam, dtype=float)
            pts.append(p)
        eids = []
        for x, y in ((0, 1), (1, 2), (2, 0)):
            ln = float(np.linalg.norm(pts[y] - pts[x])) * 0.25
            w = tuple(np.array(lams[y]) - np.array(lams[x]))
            eids.append(tab.add(vs[x], vs[y], ln, w))
        tris.append(tuple(eids))

    coords = np.array([theta(k) * 0.25 + _OFFSET for k in vert_key])
    c = build_complex(
        len(vert_key),
        tab.rows,
        tris,
        coords=coords,
        lattice=lattice,
        wraps=np.array(tab.wraps, dtype=np.int64),
        name=f"grid_surface({R})",
    )
    if c.boundary_edges or not c.is_surface:
        raise BadParam("grid-surface extraction produced a non-closed mesh")
    _check_wrapped_lengths(c)
    # vertices track the equidistant set up to the interpolation error of the
    # quarter-step sampling (the field is a min over line families, so it has
    # gradient kinks; ~0.17 observed, an order below any real welding defect)
    gap = np.abs(grid_field(coords))
    if float(gap.max()) > 0.2:
        raise BadParam("extracted mesh strays off the equidistant set")
    return c


def _edge_key(a: np.ndarray, b: np.ndarray) -> tuple:
    ta, tb = tuple(int(x) for x in a), tuple(int(x) for x in b)
    return (ta, tb) if ta <= tb else (tb, ta)


# ----------------------------------------------------------------- dispatch


_KINDS = {
    "grid_surface", "grid-surface", "flat_torus", "flat-torus",
    "annulus", "cylinder", "pair_of_pants", "pair-of-pants",
    "presentation_complex", "presentation-complex",
}


def generate_example(kind: str, **params) -> MetricComplex:
    """Build one of the named example spaces; see the module docstring."""
    k = str(kind).replace("-", "_")
    if str(kind) not in _KINDS and k not in _KINDS:
        raise BadParam(f"unknown example kind {kind!r}")
    if k == "grid_surface":
        return grid_surface(_as_int(params, "R"))
    if k == "flat_torus":
        return flat_torus(_as_int(params, "L"))
    if k == "annulus":
        return annulus(_as_int(params, "L"), _as_int(params, "H"))
    if k == "cylinder":
        return cylinder(_as_int(params, "L"), _as_int(params, "H"))
    if k == "pair_of_pants":
        return pair_of_pants(float(params.get("scale", 1.0)))
    if k == "presentation_complex":
        table = params.get("table")
        if table is None and "cyclic" in params:
            table = cyclic_group_table(int(params["cyclic"]))
        if table is None:
            raise BadParam("presentation_complex needs table=... or cyclic=k")
        return presentation_complex(
            table,
            loop_len=float(params.get("loop_len", 1.0)),
            spoke_len=float(params.get("spoke_len", 0.4)),
        )
    raise BadParam(f"unknown example kind {kind!r}")


def _as_int(params, key):
    if key not in params:
        raise BadParam(f"missing required parameter {key!r}")
    v = params[key]
    if isinstance(v, float) and not v.is_integer():
        raise BadParam(f"parameter {key!r} must be an integer, got {v!r}")
    return int(v)
