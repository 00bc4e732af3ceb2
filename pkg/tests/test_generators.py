"""Example-space generators: mesh structure, metric consistency, topology."""

import math

import numpy as np
import pytest

from urywidth import complex_diameter, components, distance_field, steiner_refine
from urywidth.errors import BadParam
from urywidth.generators import (
    annulus,
    cyclic_group_table,
    cylinder,
    flat_torus,
    generate_example,
    grid_field,
    grid_surface,
    pair_of_pants,
    presentation_complex,
    sector_mesh,
)


def boundary_components(c):
    return components(c, edges=sorted(c.boundary_edges))


# ------------------------------------------------------------------ torus


def test_flat_torus_cell_counts():
    c = flat_torus(6)
    assert c.n_vertices == 36
    assert len(c.triangles) == 72
    assert c.euler_characteristic() == 0
    assert not c.boundary_edges
    assert c.is_surface


def test_flat_torus_seam_distances():
    c = flat_torus(6)
    f = distance_field(c, 0)
    # wrap-around neighbors are one unit away, the far corner is ~L/2 + L/2
    assert f.values[5] == pytest.approx(1.0)
    assert f.values[30] == pytest.approx(1.0)
    far = 3 * 6 + 3  # vertex (3,3)
    assert f.values[far] <= 6.0 + 1e-9
    assert f.values[far] >= 3.0


def test_flat_torus_refines_with_wraps():
    c = flat_torus(4)
    r = steiner_refine(c, 0.5)
    assert float(r.lengths.max()) <= 0.5 + 1e-9
    f = distance_field(r, 0)
    assert f.values[3] == pytest.approx(1.0)


def test_flat_torus_rejects_small():
    with pytest.raises(BadParam):
        flat_torus(2)


# ---------------------------------------------------------------- cylinder


def test_cylinder_boundary_circles():
    c = cylinder(4, 3)
    cycles = boundary_components(c)
    assert len(cycles) == 2
    for comp in cycles:
        total = sum(c.lengths[e] for e in comp.edges)
        assert total == pytest.approx(4.0)


def test_cylinder_height_field():
    # distance from the whole bottom circle: product metric gives the height
    c = cylinder(4, 3)
    bottom = [v for v in range(4)]
    f = distance_field(c, bottom)
    assert float(f.values.max()) == pytest.approx(3.0)
    top = [v for v in range(c.n_vertices) if f.values[v] == pytest.approx(3.0)]
    assert sorted(top) == list(range(12, 16))


def test_cylinder_circumference_geodesic():
    c = steiner_refine(cylinder(4, 3), 0.5)
    f = distance_field(c, 0)
    antipode = 2  # (2,0): halfway around the bottom circle
    assert f.values[antipode] == pytest.approx(2.0, abs=1e-9)


def test_annulus_is_cylinder_with_name():
    c = annulus(4, 3)
    assert c.name == "annulus(4,3)"
    assert len(boundary_components(c)) == 2


# ------------------------------------------------------------------- pants


def test_pair_of_pants_topology():
    c = pair_of_pants()
    assert c.euler_characteristic() == -1
    cycles = boundary_components(c)
    assert len(cycles) == 3
    lengths = sorted(sum(c.lengths[e] for e in comp.edges) for comp in cycles)
    assert lengths[0] == pytest.approx(4.0)
    assert lengths[1] == pytest.approx(4.0)
    assert lengths[2] == pytest.approx(30.0)


def test_pair_of_pants_scales():
    c = pair_of_pants(0.5)
    cycles = boundary_components(c)
    lengths = sorted(sum(c.lengths[e] for e in comp.edges) for comp in cycles)
    assert lengths[0] == pytest.approx(2.0)


# ------------------------------------------------------------------ sector


def test_sector_mesh_is_disk():
    c = sector_mesh(5.0, math.pi / 6, n_r=10, n_a=6)
    assert c.euler_characteristic() == 1
    assert len(boundary_components(c)) == 1


def test_sector_mesh_radial_distance_matches_plane():
    c = sector_mesh(5.0, math.pi / 6, n_r=20, n_a=8)
    f = distance_field(c, 0)
    # along a ray the mesh contains the straight segments: exact radii
    for v in range(c.n_vertices):
        r = float(np.linalg.norm(c.coords[v]))
        assert f.values[v] >= r - 1e-9
        assert f.values[v] <= 1.1 * r + 1e-9


# ----------------------------------------------------- presentation complex


def test_cyclic_table():
    t = cyclic_group_table(3)
    assert t == [[0, 1, 2], [1, 2, 0], [2, 0, 1]]


def test_bad_tables_rejected():
    with pytest.raises(BadParam):
        presentation_complex([[0, 1], [1, 1]])  # not a latin square
    with pytest.raises(BadParam):
        presentation_complex([[1, 0, 2], [0, 2, 1], [2, 1, 0]])  # no identity
    # smallest non-associative latin square with identity
    t = [
        [0, 1, 2, 3, 4],
        [1, 0, 3, 4, 2],
        [2, 4, 0, 1, 3],
        [3, 2, 4, 0, 1],
        [4, 3, 1, 2, 0],
    ]
    with pytest.raises(BadParam):
        presentation_complex(t)


def test_z3_presentation_structure():
    c = presentation_complex(cyclic_group_table(3))
    # 1 basepoint + 2 loop midpoints + 4 relator hubs
    assert c.n_vertices == 7
    # 4 loop halves + spokes: two cells with 6, two with 4
    assert c.n_edges == 4 + 6 + 4 + 4 + 6
    assert len(c.triangles) == 6 + 4 + 4 + 6
    assert c.euler_characteristic() == 3
    assert not c.is_surface  # loop edges belong to three cells each
    labels = c._finite_labels
    assert labels.shape == (c.n_edges,)
    # monodromy around every 2-cell boundary is trivial by construction:
    # verified per-triangle (each triangle's boundary word multiplies to e)
    t = c._finite_table
    for e0, e1, e2 in c.triangles:
        word = _triangle_word(c, t, (e0, e1, e2))
        assert word == c._finite_identity


def _triangle_word(c, table, tri):
    """Product of the monodromy labels around a triangle's boundary cycle."""
    inv = {g: int(np.where(table[g] == 0)[0][0]) for g in range(table.shape[0])}
    # the cycle starts at the endpoint shared by the first and last edges
    first = set(map(int, c.edges[tri[0]]))
    last = set(map(int, c.edges[tri[2]]))
    (a,) = first & last
    cur = a
    word = c._finite_identity
    for e in tri:
        u, v = map(int, c.edges[e])
        g = int(c._finite_labels[e])
        if u == cur:
            word = int(table[word, g])
            cur = v
        elif v == cur:
            word = int(table[word, inv[g]])
            cur = u
        else:
            raise AssertionError("triangle edges out of order")
    assert cur == a
    return word


def test_presentation_complex_z2():
    c = presentation_complex(cyclic_group_table(2))
    assert c.euler_characteristic() == 1
    assert c.n_vertices == 1 + 1 + 1


# ------------------------------------------------------------ grid surface


@pytest.fixture(scope="module")
def gs2():
    return grid_surface(2)


def test_grid_surface_closed(gs2):
    assert gs2.is_surface
    assert not gs2.boundary_edges
    chi = gs2.euler_characteristic()
    assert chi % 2 == 0
    assert chi < 0  # high genus by construction


def test_grid_surface_on_level_set(gs2):
    vals = np.abs(grid_field(gs2.coords))
    assert float(vals.max()) <= 0.2
    assert float(np.quantile(vals, 0.5)) <= 0.05


def test_grid_surface_near_both_grids(gs2):
    # equidistant points sit within ~(sqrt(3)/2)/... of each grid; generous 0.6
    p = gs2.coords
    d = np.abs(p - np.round(p))
    dd = d * d
    near = np.sqrt(dd.sum(-1) - dd.max(-1))
    assert float(near.max()) <= 0.6


def test_grid_surface_wrap_consistency(gs2):
    d = gs2.coords[gs2.edges[:, 1]] - gs2.coords[gs2.edges[:, 0]]
    d = d + gs2.wraps @ gs2.lattice.T
    assert np.allclose(np.linalg.norm(d, axis=1), gs2.lengths, atol=1e-6)
    assert gs2.wraps.any()  # the quotient really does cross the seams


def test_grid_surface_lattice_matrix(gs2):
    expect = np.array([[2, 0, 0.5], [0, 2, 0.5], [0, 0, 2.5]])
    assert np.allclose(gs2.lattice, expect)


def test_grid_surface_mesh_quality(gs2):
    assert float(gs2.lengths.min()) > 1e-4
    assert float(gs2.lengths.max()) < 0.5
    # strict triangle inequality survived build_complex; also no tiny angles
    # collapse: check area via Heron is positive
    for e0, e1, e2 in gs2.triangles[:200]:
        a, b, c_ = gs2.lengths[[e0, e1, e2]]
        s = (a + b + c_) / 2
        area2 = s * (s - a) * (s - b) * (s - c_)
        assert area2 > 0


def test_grid_surface_connected_and_sized(gs2):
    # fundamental domain has volume R*R*(R+1/2) = 10; the surface crosses
    # a bounded fraction of the sample cells
    assert 500 < gs2.n_vertices < 20000


def test_grid_surface_rejects_bad_R():
    with pytest.raises(BadParam):
        grid_surface(1)
    with pytest.raises(BadParam):
        grid_surface(0)


# ---------------------------------------------------------------- dispatch


def test_generate_example_dispatch():
    c = generate_example("flat-torus", L=4)
    assert c.n_vertices == 16
    c = generate_example("annulus", L=4, H=3)
    assert len(boundary_components(c)) == 2
    c = generate_example("presentation-complex", cyclic=3)
    assert c.n_vertices == 7
    with pytest.raises(BadParam):
        generate_example("klein-bottle")
    with pytest.raises(BadParam):
        generate_example("grid_surface", R=2.5)


def test_generate_example_diameters_sane():
    c = generate_example("cylinder", L=4, H=3)
    d = complex_diameter(c)
    assert 3.0 <= d <= 2.0 + 3.0 + 1e-9
