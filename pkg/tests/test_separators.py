"""Tests for separator verification, map conversions, and separator search.

Diameters are cross-checked against networkx shortest-path oracles that share
nothing with the library's own distance code.
"""

import dataclasses
import math

import networkx as nx
import numpy as np
import pytest

from urywidth.complexes import (
    build_complex,
    complex_diameter,
    steiner_refine,
)
from urywidth.errors import BadParam, FiberBoundViolated
from urywidth.fileio import dumps_separator, loads_separator
from urywidth.generators import cylinder, flat_torus
from urywidth.separators import (
    GraphMap,
    Separator,
    SeparatorVerdict,
    map_from_separator,
    search_separator,
    separator_from_map,
    verify_separator,
)
from urywidth.sweep import sweep_quotient, tree_map_from_sweep

SQ2 = math.sqrt(2.0)


def nx_graph(c):
    g = nx.Graph()
    g.add_nodes_from(range(c.n_vertices))
    for (u, v), l in zip(c.edges, c.lengths):
        w = float(l)
        if g.has_edge(int(u), int(v)):
            w = min(w, g[int(u)][int(v)]["weight"])
        g.add_edge(int(u), int(v), weight=w)
    return g


def oracle_diameter(c, vertices) -> float:
    g = nx_graph(c)
    vs = [int(v) for v in vertices]
    best = 0.0
    for v in vs:
        lengths = nx.single_source_dijkstra_path_length(g, v)
        best = max(best, max(lengths[u] for u in vs))
    return best


def oracle_distance(c, a, b) -> float:
    return nx.dijkstra_path_length(nx_graph(c), int(a), int(b))


def row_edges(c, j, L=4):
    """Edge ids of the horizontal circle at height j of cylinder(L, H)."""
    row = set(range(j * L, j * L + L))
    return [e for e, (u, v) in enumerate(c.edges) if int(u) in row and int(v) in row]


def triangle():
    return build_complex(
        3,
        [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)],
        triangles=[(0, 1, 2)],
    )


def path3():
    return build_complex(3, [(0, 1, 1.0), (1, 2, 1.0)])


# --------------------------------------------------------- verify_separator


class TestVerifySeparator:
    def test_bottom_rim_leaves_one_big_tube(self):
        c = cylinder(4, 3)
        rim = row_edges(c, 0)
        v = verify_separator(c, rim, bound=3.0)
        assert isinstance(v, SeparatorVerdict)
        assert not v.ok
        assert v.bound == 3.0
        s = v.separator
        # one circle of Z, one complementary tube
        assert len(s.z_components) == 1
        assert len(s.complement_components) == 1
        assert s.n_pieces == 2
        assert s.z_diameters[0] == pytest.approx(2.0)
        # the tube's closure is the whole cylinder, so its extrinsic
        # diameter equals the complex diameter
        tube = s.complement_components[0]
        assert sorted(tube.closure_vertices) == list(range(16))
        assert tube.diameter == pytest.approx(complex_diameter(c))
        assert tube.diameter == pytest.approx(oracle_diameter(c, range(16)))
        # the violation names the fat piece and a genuinely far pair
        assert v.violation is not None
        assert v.violation.kind == "complement"
        assert v.violation.index == 0
        a, b = v.violation.far_points
        assert oracle_distance(c, a, b) == pytest.approx(v.violation.diameter)
        assert v.violation.diameter == pytest.approx(s.width)
        # accepting exactly at the measured width succeeds
        assert verify_separator(c, rim, bound=s.width).ok

    def test_two_meridians_cut_five_small_pieces(self):
        c = cylinder(4, 3)
        two = row_edges(c, 1) + row_edges(c, 2)
        v = verify_separator(c, two, bound=1 + SQ2)
        assert v.ok
        s = v.separator
        assert len(s.z_components) == 2
        assert len(s.complement_components) == 3
        assert s.n_pieces == 5
        for d in s.z_diameters:
            assert d == pytest.approx(2.0)
        # tube closures are consecutive row pairs
        closures = sorted(
            tuple(sorted(int(x) for x in u.closure_vertices))
            for u in s.complement_components
        )
        assert closures == [
            tuple(range(0, 8)),
            tuple(range(4, 12)),
            tuple(range(8, 16)),
        ]
        for u in s.complement_components:
            assert u.diameter == pytest.approx(1 + SQ2)
            assert u.diameter == pytest.approx(
                oracle_diameter(c, u.closure_vertices)
            )
        assert s.width == pytest.approx(1 + SQ2)
        # just below the tube diameter the verdict flips
        assert not verify_separator(c, two, bound=2.0).ok

    def test_empty_z_accepts_iff_bound_covers_the_diameter(self):
        c = cylinder(4, 3)
        diam = complex_diameter(c)
        assert diam == pytest.approx(4.0)
        assert verify_separator(c, [], bound=diam).ok
        assert not verify_separator(c, [], bound=diam - 0.01).ok

    def test_isolated_z_vertices_are_their_own_pieces(self):
        c = path3()
        v = verify_separator(c, [], bound=2.0, z_vertices=[1])
        assert v.ok
        s = v.separator
        assert len(s.z_components) == 1
        assert s.z_diameters == [0.0]
        # the two open edges fall into different pieces
        assert len(s.complement_components) == 2
        for u in s.complement_components:
            assert u.diameter == pytest.approx(1.0)

    def test_z_is_closed_automatically(self):
        c = path3()
        s = verify_separator(c, [0], bound=5.0).separator
        assert s.z_vertices == frozenset({0, 1})
        assert s.z_edges == frozenset({0})

    def test_a_triangle_with_boundary_in_z_is_still_a_piece(self):
        c = triangle()
        s = verify_separator(c, [0, 1, 2], bound=1.0).separator
        assert len(s.z_components) == 1
        # the open 2-cell interior survives as its own complementary piece
        assert len(s.complement_components) == 1
        interior = s.complement_components[0]
        assert len(interior.vertices) == 0
        assert len(interior.edges) == 0
        assert list(interior.triangles) == [0]

    def test_triangle_interior_glues_its_open_boundary(self):
        c = triangle()
        # only one side in Z: the other two sides stay connected through the
        # interior, giving a single complementary piece
        s = verify_separator(c, [0], bound=1.0).separator
        assert len(s.complement_components) == 1
        assert s.width == pytest.approx(1.0)

    def test_unknown_edge_id_rejected(self):
        with pytest.raises(BadParam):
            verify_separator(triangle(), [5], bound=1.0)
        with pytest.raises(BadParam):
            verify_separator(triangle(), [0], bound=1.0, z_vertices=[9])


# -------------------------------------------------------- separator_from_map


class TestSeparatorFromMap:
    def test_sweep_separator_is_near_the_sweep_width(self):
        c = cylinder(4, 3)
        step = 0.5
        sq = sweep_quotient(c, 0, step=step)
        h = float(c.lengths.max())
        eps = 2 * (h + step)
        s = separator_from_map(sq, eps=eps)
        assert s.width <= sq.width + eps + 1e-9
        # every vertex is in Z; the verdict machinery agrees with the width
        assert verify_separator(
            c, sorted(s.z_edges), bound=s.width, z_vertices=sorted(s.z_vertices)
        ).ok

    def test_constant_map_collapses_everything_into_z(self):
        c = cylinder(4, 3)
        sq = sweep_quotient(c, 0, step=1e9)
        assert len(sq.nodes) == 1
        s = separator_from_map(sq, eps=0.1)
        # Z swallows the whole 1-skeleton; only the open 2-cell interiors
        # remain, each its own piece with closure a single triangle
        assert len(s.z_components) == 1
        assert len(s.complement_components) == len(c.triangles)
        for u in s.complement_components:
            assert len(u.vertices) == 0 and len(u.edges) == 0
            assert u.diameter == pytest.approx(SQ2)
        assert s.width == pytest.approx(complex_diameter(c))

    def test_point_fibers_on_a_path(self):
        c = path3()
        sq = sweep_quotient(c, 0, step=0.5)
        s = separator_from_map(sq, eps=2 * (1.0 + 0.5))
        assert len(s.z_components) == 3
        assert all(d == 0.0 for d in s.z_diameters)
        assert len(s.complement_components) == 2
        for u in s.complement_components:
            assert u.diameter == pytest.approx(1.0)
        assert s.width == pytest.approx(1.0)

    def test_overclaimed_fiber_bound_is_caught(self):
        c = cylinder(4, 3)
        tm = tree_map_from_sweep(sweep_quotient(c, 0, step=0.5))
        lying = dataclasses.replace(tm, fiber_bound=0.01)
        with pytest.raises(FiberBoundViolated) as e:
            separator_from_map(lying, eps=0.05)
        assert e.value.diameter > e.value.bound
        assert e.value.node[0] in ("z", "complement")

    def test_eps_must_be_positive(self):
        sq = sweep_quotient(path3(), 0, step=0.5)
        with pytest.raises(BadParam):
            separator_from_map(sq, eps=0.0)

    def test_rejects_objects_without_a_fiber_map(self):
        with pytest.raises(BadParam):
            separator_from_map(object(), eps=0.5)


# -------------------------------------------------------- map_from_separator


class TestMapFromSeparator:
    def test_two_meridians_give_a_five_node_path(self):
        c = cylinder(4, 3)
        two = row_edges(c, 1) + row_edges(c, 2)
        s = verify_separator(c, two, bound=1 + SQ2).separator
        g = map_from_separator(s)
        assert isinstance(g, GraphMap)
        assert g.n_target_vertices == 5
        assert g.node_kinds == [("z", 0), ("z", 1), ("u", 0), ("u", 1), ("u", 2)]
        # cones: each tube meets only the circles on its frontier, so the
        # target is a path  u - z - u - z - u
        deg = [0] * 5
        for a, b in g.target_edges:
            deg[a] += 1
            deg[b] += 1
        z_deg = [deg[i] for i, (k, _) in enumerate(g.node_kinds) if k == "z"]
        u_deg = sorted(deg[i] for i, (k, _) in enumerate(g.node_kinds) if k == "u")
        assert z_deg == [2, 2]
        assert u_deg == [1, 1, 2]
        assert len(g.target_edges) == 4
        # the assignment is total and lands on the right kind of node
        assert g.assignment.shape == (c.n_vertices,)
        for vtx in range(c.n_vertices):
            kind, _ = g.node_kinds[int(g.assignment[vtx])]
            assert kind == ("z" if 4 <= vtx < 12 else "u")
        assert g.fiber_bound == pytest.approx(s.width)

    def test_empty_separator_collapses_to_one_vertex(self):
        c = cylinder(4, 3)
        s = verify_separator(c, [], bound=5.0).separator
        g = map_from_separator(s)
        assert g.n_target_vertices == 1
        assert g.node_kinds == [("u", 0)]
        assert g.target_edges == []
        assert (g.assignment == 0).all()
        assert g.fiber_bound == pytest.approx(complex_diameter(c))

    def test_round_trip_does_not_widen(self):
        c = cylinder(4, 3)
        two = row_edges(c, 1) + row_edges(c, 2)
        s = verify_separator(c, two, bound=1 + SQ2).separator
        eps = 0.5
        back = separator_from_map(map_from_separator(s), eps=eps)
        assert back.width <= s.width + eps + 1e-9


# ----------------------------------------------------------- search_separator


class TestSearchSeparator:
    def test_cylinder_search_finds_a_thin_collar(self):
        c = steiner_refine(cylinder(4, 3), h=0.4)
        h = c.refinement.h
        best = search_separator(c, budget=12, seeds=(0,))
        # collar curves of the boundary-distance sweep cut circumference-4
        # meridians: width ~ L/2 plus discretization slack at step = h
        assert best.width <= 2.0 + 2 * (h + h) + 1e-9
        assert best.width < complex_diameter(c) - 1e-9

    def test_search_is_deterministic(self):
        c = steiner_refine(cylinder(4, 3), h=0.4)
        a = search_separator(c, budget=12, seeds=(0, 17))
        b = search_separator(c, budget=12, seeds=(0, 17))
        assert a.width == b.width
        assert sorted(a.z_edges) == sorted(b.z_edges)
        assert sorted(a.z_vertices) == sorted(b.z_vertices)

    def test_budget_one_is_the_empty_separator(self):
        c = cylinder(4, 3)
        s = search_separator(c, budget=1, seeds=(0,))
        assert len(s.z_edges) == 0
        assert s.width == pytest.approx(complex_diameter(c))

    def test_triangle_needs_no_cutting(self):
        s = search_separator(triangle(), budget=1, seeds=(0,))
        assert s.width <= 1.0 + 1e-9

    def test_width_never_increases_with_budget(self):
        c = steiner_refine(cylinder(4, 3), h=0.4)
        widths = [
            search_separator(c, budget=b, seeds=(0, 17)).width
            for b in (1, 3, 6, 12)
        ]
        for small, big in zip(widths, widths[1:]):
            assert big <= small + 1e-12
        assert widths[-1] < widths[0]

    def test_torus_width_lands_between_girth_and_side(self):
        t = flat_torus(6)
        h = float(t.lengths.max())
        s = search_separator(t, budget=16, seeds=(0, 7))
        assert 3.0 <= s.width <= 6.0 + 2 * (h + 2 * h) + 1e-9

    def test_budget_must_be_positive(self):
        with pytest.raises(BadParam):
            search_separator(triangle(), budget=0, seeds=(0,))


# ------------------------------------------------------------------- file io


class TestSeparatorFiles:
    def test_round_trip_preserves_the_separator(self):
        c = cylinder(4, 3)
        two = row_edges(c, 1) + row_edges(c, 2)
        s = verify_separator(c, two, bound=1 + SQ2).separator
        text = dumps_separator(sorted(s.z_edges))
        back = loads_separator(text)
        assert back == sorted(s.z_edges)
        s2 = verify_separator(c, back, bound=1 + SQ2).separator
        assert s2.width == pytest.approx(s.width)
        assert s2.z_edges == s.z_edges

    def test_sub_segment_fields_are_tolerated(self):
        assert loads_separator("z 3 0.25 0.75\nz 1\n") == [1, 3]
