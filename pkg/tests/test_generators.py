from __future__ import annotations

from fractions import Fraction

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import layered_specs, ring_specs, tail, to_networkx
from cptyper.generators import (FourCornerError, MeshSpec, SquareTiling, comparison_graph, generator_from_dict,
                                hexagonal, layered, mesh_rows, rectangle_tiling, ring_stack, ring_tiling,
                                square_tiling_contact_graph, stack_offsets, tiling_rows, triangular_mesh)
from cptyper.sequences import ExcessSpec, LayerSpec, SpecError, SpecExhausted, seq
from cptyper.triangulation import euler_characteristic, spheres


def sphere_sizes(window):
    return [len(s) for s in spheres(window)][: window.complete_radius + 1]


def test_hexagonal_closed_forms():
    window = hexagonal().build(15)
    sizes = sphere_sizes(window)
    assert sizes[:15] == [1] + [6 * n for n in range(1, 15)]
    balls = [sum(sizes[: n + 1]) for n in range(15)]
    assert balls == [3 * n * n + 3 * n + 1 for n in range(15)]


def test_window_is_planar_and_triangulated(small_windows):
    for window in small_windows.values():
        window.check_triangulation()
        assert nx.check_planarity(to_networkx(window))[0]


@pytest.mark.parametrize("name", sorted(layered_specs()))
def test_layered_degrees_follow_spec(name):
    spec = layered_specs()[name]
    radius = min(6, spec.max_radius() or 6)
    window = layered(spec).build(radius)
    for m, layer in enumerate(spheres(window)[:radius]):
        assert {window.degree(v) for v in layer} == {spec.layer_degree(m)}


@pytest.mark.parametrize("name", sorted(ring_specs()))
def test_ring_stack_spheres_are_a_n(name):
    spec = ring_specs()[name]
    radius = 6 if name != "mixed" else 8
    window = ring_stack(spec).build(radius)
    assert sphere_sizes(window)[1:radius + 1] == spec.a_values(radius)
    k, total = [], 0
    layers = spheres(window)
    for n in range(radius):
        total += sum(window.degree(v) - 6 for v in layers[n])
        k.append(total)
    assert k == spec.k_values(radius - 1)


def test_layered_prefix_limits_radius():
    spec = LayerSpec.make(3, [3, 3], [1, 2])
    with pytest.raises(SpecExhausted):
        layered(spec).build(8)


def test_generator_from_dict():
    assert generator_from_dict({"kind": "hexagonal"}).kind == "hexagonal"
    spec = layered_specs()["h2_d1"]
    gen = generator_from_dict(spec.to_dict())
    assert gen.kind == "layered" and gen.describe() == spec.to_dict()
    with pytest.raises(SpecError):
        generator_from_dict({"kind": "penrose"})


# -- tilings ------------------------------------------------------------------


def test_stack_offsets_recurrence():
    assert stack_offsets([3, 9, 4]) == (0, Fraction(1, 54), Fraction(1, 54) + Fraction(1, 72))


def test_rectangle_contact_graph():
    tiling = rectangle_tiling([1, 2, 3, 4])
    window = square_tiling_contact_graph(tiling)
    window.check_triangulation()
    assert len(window) == 10
    rows = tiling_rows(window)
    # consecutive rows touch along overlapping intervals
    assert window.has_edge(rows[0][0], rows[1][1])
    assert not window.has_edge(rows[1][0], rows[2][2])
    S = window.induced(range(len(window)))
    assert euler_characteristic(S) == 1
    assert tiling.height == Fraction(1) + Fraction(1, 2) + Fraction(1, 3) + Fraction(1, 4)


def test_ring_contact_graph_is_an_annulus():
    window = square_tiling_contact_graph(ring_tiling([3, 9]))
    window.check_triangulation()
    assert euler_characteristic(window.induced(range(len(window)))) == 0


def test_four_corner_rows_are_rejected():
    with pytest.raises(FourCornerError):
        square_tiling_contact_graph(rectangle_tiling([2, 4]))
    with pytest.raises(SpecError):
        SquareTiling("ring", (2,))


def test_tiling_dict_round_trip():
    tiling = ring_tiling([4, 5])
    assert SquareTiling.from_dict(tiling.to_dict()) == tiling


# -- meshes -------------------------------------------------------------------------


@pytest.mark.parametrize("size", range(1, 6))
def test_mesh_rows_and_faces(size):
    window = triangular_mesh(MeshSpec(size))
    window.check_triangulation()
    rows = mesh_rows(window)
    assert [len(r) for r in rows] == list(range(1, size + 2))
    S = window.induced(range(len(window)))
    assert len(S.faces) == size * size
    assert euler_characteristic(S) == 1


def test_folded_meshes():
    assert len(triangular_mesh(MeshSpec(3, 3))) == 1 + 3 * (2 + 3 + 4) - 2 * 3
    separated = triangular_mesh(MeshSpec(3, 3, separated=True))
    assert len(separated) == 1 + 3 * (2 + 3 + 4)
    closed = triangular_mesh(MeshSpec(2, 6, closed=True))
    closed.check_triangulation()
    # the closed 6-fold mesh is a hexagonal ball
    assert len(closed) == 19
    with pytest.raises(SpecError):
        MeshSpec(2, 2, closed=True)


# -- comparison graphs ----------------------------------------------------------------


@pytest.mark.parametrize("spec", [LayerSpec.make(0, [2, 2, 2], [2, 1, 1]), LayerSpec.make(0, [2, 2, 2], [1, 1, 1]),
                                  LayerSpec.make(3, [3, 3], [1, 2])])
def test_comparison_graph_maps_onto_ball(spec):
    for n in (1, 2):
        cg = comparison_graph(spec, n)
        assert cg.check_homomorphism()
        assert cg.check_distances()
        assert cg.check_surjective()
        assert all(cg.window.dist[t] == cg.thetas[-1] for t in cg.terminals)
        assert nx.check_planarity(to_networkx(cg.window))[0]


@settings(max_examples=20, deadline=None)
@given(st.integers(-3, 6), st.integers(1, 4), st.integers(1, 3))
def test_layered_windows_are_triangulations(k0, h, d):
    spec = LayerSpec.make(k0, tail(h), tail(d))
    window = layered(spec).build(4)
    window.check_triangulation()
    assert window.degree(window.root) == k0 + 6


@settings(max_examples=20, deadline=None)
@given(st.lists(st.integers(-3, 8), min_size=5, max_size=5))
def test_ring_stacks_follow_any_valid_spec(ks):
    spec = ExcessSpec(k=seq(ks))
    try:
        a = spec.a_values(5)
    except SpecError:
        return
    window = ring_stack(spec).build(5)
    window.check_triangulation()
    assert sphere_sizes(window)[1:6] == a
