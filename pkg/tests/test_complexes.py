"""Core complex machinery: construction, refinement, metric queries."""

import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from urywidth import (
    PointOnComplex,
    build_complex,
    complex_diameter,
    components,
    distance_field,
    point_distance,
    shortest_path,
    steiner_refine,
    subset_diameter,
)
from urywidth.errors import (
    BadParam,
    Disconnected1Skeleton,
    NonPositiveLength,
    TriangleInequalityViolated,
)
from urywidth.fileio import dumps_complex, loads_complex

SQ2 = math.sqrt(2.0)


# ---------------------------------------------------------------- fixtures


def unit_square():
    """Unit square split along the (0,0)-(1,1) diagonal."""
    coords = np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]], dtype=float)
    edges = [
        (0, 1, 1.0),
        (1, 2, 1.0),
        (2, 3, 1.0),
        (3, 0, 1.0),
        (0, 2, SQ2),
    ]
    tris = [(0, 1, 4), (4, 2, 3)]
    return build_complex(4, edges, tris, coords=coords)


def single_edge(length=1.0):
    return build_complex(2, [(0, 1, length)])


def equilateral(side=1.0):
    edges = [(0, 1, side), (1, 2, side), (2, 0, side)]
    return build_complex(3, edges, [(0, 1, 2)])


def y_graph(leg=3, seg=1.0):
    """Three chains of `leg` segments glued at a hub (vertex 0)."""
    edges = []
    n = 1
    for _ in range(3):
        prev = 0
        for _ in range(leg):
            edges.append((prev, n, seg))
            prev = n
            n += 1
    return build_complex(n, edges)


def cycle_graph(n=6, seg=1.0):
    edges = [(i, (i + 1) % n, seg) for i in range(n)]
    return build_complex(n, edges)


# ---------------------------------------------------------------- oracles


def nx_distance_oracle(c, source):
    g = nx.Graph()
    g.add_nodes_from(range(c.n_vertices))
    for e, (u, v) in enumerate(c.edges):
        w = float(c.lengths[e])
        if g.has_edge(int(u), int(v)):
            w = min(w, g[int(u)][int(v)]["weight"])
        g.add_edge(int(u), int(v), weight=w)
    return nx.single_source_dijkstra_path_length(g, source)


def flood_fill_oracle(c, vertex_set):
    """Brute-force component count of an induced vertex subset."""
    vertex_set = set(map(int, vertex_set))
    adj = {v: set() for v in vertex_set}
    for u, v in c.edges:
        u, v = int(u), int(v)
        if u in vertex_set and v in vertex_set:
            adj[u].add(v)
            adj[v].add(u)
    seen = set()
    count = 0
    for v in sorted(vertex_set):
        if v in seen:
            continue
        count += 1
        stack = [v]
        while stack:
            x = stack.pop()
            if x in seen:
                continue
            seen.add(x)
            stack.extend(adj[x] - seen)
    return count


# ---------------------------------------------------------------- validation


def test_build_rejects_nonpositive_length():
    with pytest.raises(NonPositiveLength):
        build_complex(2, [(0, 1, 0.0)])


def test_build_rejects_triangle_inequality_violation():
    edges = [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 5.0)]
    with pytest.raises(TriangleInequalityViolated):
        build_complex(3, edges, [(0, 1, 2)])


def test_build_rejects_disconnected_skeleton():
    with pytest.raises(Disconnected1Skeleton):
        build_complex(4, [(0, 1, 1.0), (2, 3, 1.0)])


def test_build_rejects_self_loop():
    with pytest.raises(BadParam):
        build_complex(2, [(0, 0, 1.0), (0, 1, 1.0)])


def test_surface_boundary_inferred():
    c = unit_square()
    assert c.boundary_edges == frozenset({0, 1, 2, 3})
    assert c.is_surface
    assert c.euler_characteristic() == 1


# ---------------------------------------------------------------- refinement


def test_single_edge_halved():
    c = steiner_refine(single_edge(1.0), 0.5)
    assert c.n_edges == 2
    assert np.allclose(c.lengths, 0.5)


def test_refine_identity_when_already_fine():
    c = unit_square()
    assert steiner_refine(c, 2.0) is c


def test_refine_idempotent():
    c = steiner_refine(unit_square(), 0.25)
    assert steiner_refine(c, 0.25) is c


def test_refine_preserves_structure():
    c = unit_square()
    r = steiner_refine(c, 0.25)
    # each round multiplies triangles by 4; 1.414…→0.25 needs 3 rounds
    assert len(r.triangles) == 2 * 4**3
    assert r.euler_characteristic() == 1
    assert float(r.lengths.max()) <= 0.25 + 1e-9
    # original vertices keep their ids
    assert np.allclose(r.coords[:4], c.coords)


def test_unit_square_corner_distance_within_mesh_slack():
    # planar oracle: the corners joined by the diagonal are sqrt(2) apart
    r = steiner_refine(unit_square(), 0.25)
    f = distance_field(r, 0)
    d = float(f.values[2])
    assert SQ2 - 1e-9 <= d <= 1.2 * SQ2


def test_refining_never_increases_distances():
    c = steiner_refine(unit_square(), 0.5)
    finer = steiner_refine(unit_square(), 0.125)
    f0 = distance_field(c, 0)
    f1 = distance_field(finer, 0)
    for v in range(4):
        assert f1.values[v] <= f0.values[v] + 1e-9
        # never below the ambient straight-line lower bound
        chord = float(np.linalg.norm(c.coords[v] - c.coords[0]))
        assert f1.values[v] >= chord - 1e-9


def test_refine_rejects_tets():
    # a single 3-simplex, all sides 1
    edges = [(a, b, 1.0) for a in range(4) for b in range(a + 1, 4)]
    eid = {(a, b): i for i, (a, b, _) in enumerate(edges)}

    def E(a, b):
        return eid[(min(a, b), max(a, b))]

    tris = [
        (E(0, 1), E(1, 2), E(0, 2)),
        (E(0, 1), E(1, 3), E(0, 3)),
        (E(0, 2), E(2, 3), E(0, 3)),
        (E(1, 2), E(2, 3), E(1, 3)),
    ]
    c = build_complex(4, edges, tris, tets=[(0, 1, 2, 3)])
    assert steiner_refine(c, 2.0) is c
    with pytest.raises(BadParam):
        steiner_refine(c, 0.25)


# ---------------------------------------------------------------- distances


def test_distance_field_matches_networkx_oracle():
    r = steiner_refine(unit_square(), 0.25)
    f = distance_field(r, 0)
    oracle = nx_distance_oracle(r, 0)
    for v in range(r.n_vertices):
        assert f.values[v] == pytest.approx(oracle[v], abs=1e-9)


def test_distance_field_lipschitz_and_zero_on_sources():
    r = steiner_refine(y_graph(), 0.5)
    f = distance_field(r, [0, 3])
    assert f.check_lipschitz()
    assert f.values[0] == 0.0
    assert f.values[3] == 0.0


def test_edge_interior_source():
    c = single_edge(1.0)
    r = steiner_refine(c, 0.25)
    f = distance_field(r, PointOnComplex.on_edge(0, 0.5))
    assert f.values[0] == pytest.approx(0.5)
    assert f.values[1] == pytest.approx(0.5)


def test_triangle_barycenter_source():
    c = equilateral(1.0)
    f = distance_field(c, PointOnComplex.in_triangle(0, (1 / 3, 1 / 3, 1 / 3)))
    # distance from the centroid to each corner of a unit equilateral triangle
    expected = 1.0 / math.sqrt(3.0)
    for v in range(3):
        assert f.values[v] == pytest.approx(expected, abs=1e-12)


def test_shortest_path_deterministic():
    r = steiner_refine(unit_square(), 0.25)
    p1 = shortest_path(r, 0, 2)
    p2 = shortest_path(r, 0, 2)
    assert p1 == p2
    assert p1[0] == 0 and p1[-1] == 2


def test_point_distance_symmetry():
    r = steiner_refine(unit_square(), 0.25)
    p = PointOnComplex.on_edge(0, 0.5)
    q = PointOnComplex.on_edge(2, 0.5)
    assert point_distance(r, p, q) == pytest.approx(point_distance(r, q, p), abs=1e-9)


# ---------------------------------------------------------------- components


def test_two_disjoint_edges_two_components():
    c = build_complex(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)])
    comps = components(c, edges=[0, 2])
    assert len(comps) == 2
    assert comps[0].label == 0


def test_core_circle_single_component():
    c = cycle_graph(6)
    comps = components(c, edges=range(6))
    assert len(comps) == 1
    assert len(comps[0].vertices) == 6


def test_y_graph_sphere_components():
    # sphere of radius past the hub splits into one component per leg
    c = steiner_refine(y_graph(leg=3), 0.25)
    f = distance_field(c, 0)
    shell = [v for v in range(c.n_vertices) if 1.1 <= f.values[v] <= 1.4]
    comps = components(c, vertices=shell)
    assert len(comps) == 3
    assert flood_fill_oracle(c, shell) == 3


def test_component_labels_sorted():
    c = build_complex(5, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0)])
    comps = components(c, vertices=[4, 3, 1, 0])
    labels = [comp.label for comp in comps]
    assert labels == sorted(labels)


# ---------------------------------------------------------------- diameters


def test_equilateral_diameter():
    c = equilateral(1.0)
    assert subset_diameter(c, [0, 1, 2]) == pytest.approx(1.0)
    assert complex_diameter(c) == pytest.approx(1.0)


def test_extrinsic_never_exceeds_intrinsic():
    # two far vertices of a circle: intrinsic along an arc subset is longer
    c = cycle_graph(8)
    arc = [0, 1, 2, 3, 4]
    ex = subset_diameter(c, arc, mode="extrinsic")
    intr = subset_diameter(c, arc, mode="intrinsic")
    assert ex <= intr + 1e-12
    assert ex == pytest.approx(4.0)  # 0 to 4 the short way round is length 4
    assert intr == pytest.approx(4.0)


def test_intrinsic_diameter_disconnected_is_infinite():
    c = build_complex(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)])
    assert subset_diameter(c, [0, 3], mode="intrinsic") == math.inf


def test_diameter_matches_bruteforce_oracle():
    rng = np.random.default_rng(7)
    c = steiner_refine(y_graph(leg=2), 0.5)
    S = sorted(rng.choice(c.n_vertices, size=6, replace=False).tolist())
    oracle = 0.0
    for u in S:
        d = nx_distance_oracle(c, u)
        oracle = max(oracle, max(d[v] for v in S))
    assert subset_diameter(c, S) == pytest.approx(oracle, abs=1e-9)


# ------------------------------------------------------------- serialization


def test_complex_roundtrip():
    c = unit_square()
    text = dumps_complex(c)
    c2 = loads_complex(text)
    assert c2.n_vertices == c.n_vertices
    assert np.array_equal(c2.edges, c.edges)
    assert np.allclose(c2.lengths, c.lengths)
    assert np.array_equal(c2.triangles, c.triangles)
    assert c2.boundary_edges == c.boundary_edges
    assert dumps_complex(c2) == text


def test_length_recovered_from_coords():
    text = "v 0 0 0 0\nv 1 3 4 0\ne 0 0 1\n"
    c = loads_complex(text)
    assert c.lengths[0] == pytest.approx(5.0)


# ------------------------------------------------------- property: distances


@st.composite
def connected_graphs(draw):
    n = draw(st.integers(min_value=2, max_value=14))
    seed = draw(st.integers(min_value=0, max_value=2**31 - 1))
    rng = np.random.RandomState(seed)
    edges = []
    for v in range(1, n):
        u = int(rng.randint(0, v))
        edges.append((u, v, float(rng.uniform(0.1, 2.0))))
    extra = int(rng.randint(0, n))
    for _ in range(extra):
        u, v = rng.randint(0, n, size=2)
        if u != v:
            edges.append((int(min(u, v)), int(max(u, v)), float(rng.uniform(0.1, 2.0))))
    return n, edges


@settings(max_examples=60, deadline=None)
@given(connected_graphs())
def test_distances_match_oracle_on_random_graphs(data):
    n, edges = data
    c = build_complex(n, edges)
    f = distance_field(c, 0)
    oracle = nx_distance_oracle(c, 0)
    assert f.check_lipschitz()
    for v in range(n):
        assert f.values[v] == pytest.approx(oracle[v], abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(connected_graphs(), st.integers(min_value=0, max_value=10**6))
def test_component_count_matches_flood_fill(data, pick):
    n, edges = data
    c = build_complex(n, edges)
    rng = np.random.RandomState(pick % 2**31)
    size = rng.randint(1, n + 1)
    subset = sorted(rng.choice(n, size=size, replace=False).tolist())
    assert len(components(c, vertices=subset)) == flood_fill_oracle(c, subset)
