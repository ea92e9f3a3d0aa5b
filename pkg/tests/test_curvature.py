from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from figures import figure_ds
from cptyper.curvature import (corner_curvature, extra_edge_identity, gauss_bonnet_row, inner_left_turn,
                               outer_left_turn, subgraph_curvature, total_curvature, vertex_curvature,
                               verify_gbf1, verify_gbf2)
from cptyper.generators import layered
from cptyper.sequences import seven_regular_spec
from cptyper.triangulation import (ball, boundary_walk, euler_characteristic, inner_boundary_walk, main_body,
                                   random_connected_selection)


def test_flat_and_seven_regular_curvature(hex_window):
    assert vertex_curvature(hex_window, hex_window.root) == 0
    w7 = layered(seven_regular_spec()).build(3)
    assert vertex_curvature(w7, w7.root) == Fraction(-1, 6)
    assert total_curvature(w7, ball(w7, w7.root, 1).vertices) == Fraction(-8, 6)


def test_corner_curvatures_sum_to_vertex_curvature(small_windows):
    for window in small_windows.values():
        for v in list(window.complete_vertices)[:50]:
            faces = window.faces_at(v)
            assert sum(corner_curvature(window, v, f) for f in faces) == vertex_curvature(window, v)
            # on triangulations κ(v) = 1 - deg v / 6
            assert vertex_curvature(window, v) == 1 - Fraction(window.degree(v), 6)


def test_corner_needs_incident_face(hex_window):
    with pytest.raises(ValueError):
        corner_curvature(hex_window, hex_window.root, (1, 2, 3))


def test_both_identities_on_balls_and_main_bodies(small_windows):
    for name, window in small_windows.items():
        for n in range(window.complete_radius - 1):
            B = ball(window, window.root, n)
            for S in (B, main_body(B)):
                assert verify_gbf1(S) == 0, (name, n)
                assert verify_gbf2(S) == 0, (name, n)


@settings(max_examples=80, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.integers(0, 10**6), st.integers(1, 40), st.sampled_from([0.0, 0.3, 0.7]), st.integers(0, 10))
def test_identities_on_random_selections(small_windows, seed, size, drop, which):
    names = sorted(small_windows)
    window = small_windows[names[which % len(names)]]
    rng = random.Random(seed)
    region = [v for v in range(len(window)) if window.dist[v] < window.complete_radius]
    S = random_connected_selection(window, size, rng, region=region, drop_edges=drop)
    row = gauss_bonnet_row(S)
    assert row.residual1 == 0
    assert row.residual2 == 0


def test_figure_selection_identities():
    window, _, edges = figure_ds()
    S = window.selection({v for e in edges for v in e}, edges)
    assert verify_gbf1(S) == 0
    assert verify_gbf2(S) == 0
    # one component with two holes
    assert euler_characteristic(S) == -1


def test_inner_minus_outer_turn_is_curvature_on_simple_cycles(small_windows):
    checked = 0
    for window in small_windows.values():
        for n in range(1, window.complete_radius - 1):
            A = main_body(ball(window, window.root, n))
            outer = boundary_walk(A)
            inner = inner_boundary_walk(A)
            for i, cycle in enumerate(outer.cycles):
                if not outer.is_simple(i) or len(cycle) < 3:
                    continue
                match = [j for j, c in enumerate(inner.cycles) if set(c) == set(cycle)]
                assert match
                tau_o = sum(x.turn for x in outer_left_turn(outer).visits if x.cycle == i)
                tau_i = sum(x.turn for x in inner_left_turn(inner).visits if x.cycle == match[0])
                assert tau_i - tau_o == sum(vertex_curvature(window, v) for v in cycle)
                checked += 1
    assert checked > 20


def test_outer_turn_is_extra_edges_over_six(small_windows):
    for window in small_windows.values():
        for n in range(1, window.complete_radius - 1):
            walk = boundary_walk(main_body(ball(window, window.root, n)))
            for visit in outer_left_turn(walk).visits:
                assert visit.turn == Fraction(visit.extra, 6)


def test_extra_edge_identity(small_windows):
    for window in small_windows.values():
        for n in range(window.complete_radius - 1):
            ident = extra_edge_identity(main_body(ball(window, window.root, n)))
            assert ident.residual == 0


def test_single_vertex_turn(hex_window):
    S = hex_window.induced([hex_window.root])
    report = outer_left_turn(boundary_walk(S))
    assert report.total == 1
    assert subgraph_curvature(S) == 0
    assert "cycle,position" in report.to_csv()


def test_rm1_ball_turn(small_windows):
    # a_n = 3: the second ball is bounded by a triangle whose vertices have degree 6
    window = small_windows["ring:rm1"]
    B = ball(window, window.root, 2)
    assert verify_gbf1(B) == 0
    assert outer_left_turn(boundary_walk(B)).total == euler_characteristic(B) - subgraph_curvature(B)
    # k_1 = -6 gives κ(B_2) = 1 = χ, so the walker just outside never turns
    assert subgraph_curvature(B) == 1
    assert outer_left_turn(boundary_walk(B)).total == 0
