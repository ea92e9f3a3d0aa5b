from __future__ import annotations

import math
import random
from fractions import Fraction

import networkx as nx
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from conftest import delaunay_window, tail, to_networkx
from cptyper.criteria import (BudgetExceeded, HypothesisViolated, ball_degree_certificate, cut_locus,
                              excess_profile, isoperimetric_ratios, log_power, part_verdict, partial_sums,
                              partition_certificate, perimetric_certificate, power, series_nash_williams,
                              series_rodin_sullivan, series_T1, subgraph_scan, twoveriso_inclusions,
                              verify_degree6_identity)
from cptyper.generators import hexagonal, layered, ring_stack
from cptyper.sequences import (ExcessSpec, LayerSpec, mixed_spec, polynomial, rm1_spec, seq,
                               seven_regular_spec)
from cptyper.triangulation import WindowError, ball, random_connected_selection


def brute_connected_supersets(window, base, cap):
    found = set()
    complete = set(window.complete_vertices)

    def grow(S):
        if S in found:
            return
        found.add(S)
        if len(S) >= cap:
            return
        for v in S:
            for u in window.neighbors(v):
                if u not in S and u in complete:
                    grow(S | {u})

    grow(frozenset(base))
    return found


# -- profiles and series --------------------------------------------------------


def test_hexagonal_profile(hex_window):
    profile = excess_profile(hex_window, hex_window.root, 10)
    assert profile.k == [0] * 11
    assert profile.sphere[1:] == [6 * n for n in range(1, 12)]
    assert profile.edge_boundary == [12 * n + 6 for n in range(11)]
    assert profile.m == [1] * 11
    assert profile.rows()[3]["dB"] == 42


def test_ring_stack_profile_attains_edge_bound():
    spec = ExcessSpec(k=seq((), polynomial(0, 1)))
    window = ring_stack(spec).build(9)
    profile = excess_profile(window, window.root, 7)
    a = [0] + spec.a_values(9)
    assert profile.k == spec.k_values(7)
    assert profile.edge_boundary == [a[n] + a[n + 1] for n in range(8)]


def test_main_body_limit():
    window = hexagonal().build(8)
    profile = excess_profile(window, window.root, 6, main_bodies=2)
    assert len(profile.m) == 3
    assert profile.rows()[5]["m"] is None
    assert excess_profile(window, window.root, 6, main_bodies=False).m == []


def test_profile_refuses_incomplete_radius(hex_window):
    with pytest.raises(WindowError):
        excess_profile(hex_window, hex_window.root, 12)


def test_series_classification():
    first, second = series_T1(mixed_spec(), n_terms=2000)
    assert first.classification == "divergent"
    assert second.classification == "convergent"
    first, second = series_T1(rm1_spec(), n_terms=100)
    assert first.classification == second.classification == "divergent"
    assert first.final == pytest.approx(100 / 3)
    undecided = series_T1([3, 5, 9, 17, 33])
    assert undecided[0].classification == "undecided"


def test_profile_series_on_hexagonal(hex_window):
    profile = excess_profile(hex_window, hex_window.root, 10, main_bodies=False)
    assert series_rodin_sullivan(profile).classification == "divergent"
    nw = series_nash_williams(profile)
    assert nw.classification == "divergent"
    assert nw.final == pytest.approx(sum(1 / (12 * n + 6) for n in range(1, 11)))


@given(st.lists(st.floats(1e-6, 1e3), min_size=1, max_size=300))
def test_partial_sums_match_fsum(xs):
    sums = partial_sums(xs)
    assert sums[-1][0] == len(xs)
    assert sums[-1][1] == pytest.approx(math.fsum(xs), rel=1e-12)
    for n, s in sums:
        assert s == pytest.approx(math.fsum(xs[:n]), rel=1e-12)


# -- cut locus ---------------------------------------------------------------------


def test_no_cut_locus_on_flat_and_layered(hex_window):
    assert cut_locus(hex_window, hex_window.root, 8) == frozenset()
    lw = layered(LayerSpec.make(0, tail(2), tail(1))).build(7)
    assert cut_locus(lw, lw.root, 5) == frozenset()
    residuals = verify_degree6_identity(hex_window, hex_window.root, 8)
    assert residuals.ok


@pytest.mark.parametrize("seed", range(6))
def test_cut_locus_matches_bfs_oracle(seed):
    window = delaunay_window(seed)
    dist = nx.single_source_shortest_path_length(to_networkx(window), 0)
    expected = {v for v, d in dist.items() if 1 <= d <= 5 and all(dist[u] <= d for u in window.neighbors(v))}
    assert cut_locus(window, 0, 5) == expected
    if expected:
        with pytest.raises(HypothesisViolated):
            verify_degree6_identity(window, 0, 5)


def test_cut_locus_shows_up_somewhere():
    assert any(cut_locus(delaunay_window(seed), 0, 5) for seed in range(6))


# -- subgraph scan ---------------------------------------------------------------


@pytest.mark.parametrize("cap", [1, 3, 5])
def test_scan_matches_brute_force(hex_window, cap):
    base = [hex_window.root]
    records = list(subgraph_scan(hex_window, base, cap))
    sets = [r.vertices for r in records]
    assert len(sets) == len(set(sets))
    assert set(sets) == brute_connected_supersets(hex_window, base, cap)


def test_scan_records(hex_window):
    B1 = ball(hex_window, hex_window.root, 1)
    record = next(r for r in subgraph_scan(hex_window, B1, 7) if r.size == 7)
    assert record.boundary == 12
    assert record.degree_sum == 42
    assert record.kappa == 0


def test_scan_budget(hex_window):
    with pytest.raises(BudgetExceeded):
        list(subgraph_scan(hex_window, [hex_window.root], 8, budget=50))


def test_scan_requires_connected_base(hex_window):
    far = next(v for v in hex_window.complete_vertices if hex_window.dist[v] == 4)
    with pytest.raises(ValueError):
        list(subgraph_scan(hex_window, [hex_window.root, far], 4))


@settings(max_examples=15, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.integers(0, 10**6), st.integers(1, 3), st.integers(0, 2))
def test_scan_matches_brute_force_on_random_bases(small_windows, seed, base_size, extra):
    window = small_windows["layered:seven_regular"]
    rng = random.Random(seed)
    region = [v for v in window.complete_vertices if window.dist[v] <= 2]
    base = random_connected_selection(window, base_size, rng, region=region).vertices
    cap = len(base) + extra
    got = [r.vertices for r in subgraph_scan(window, base, cap)]
    assert len(got) == len(set(got))
    assert set(got) == brute_connected_supersets(window, base, cap)


# -- certificates -------------------------------------------------------------------


def test_perimetric_certificates():
    w7 = layered(seven_regular_spec()).build(4)
    cert = perimetric_certificate(w7, ball(w7, w7.root, 1), power(1), 9)
    assert cert.value == 1 and cert.passed
    hw = hexagonal().build(4)
    cert = perimetric_certificate(hw, ball(hw, hw.root, 1), power(1), 9)
    assert cert.value == 0 and not cert.passed
    cert = perimetric_certificate(hw, [hw.root], log_power(1), 5)
    assert cert.to_dict()["passed"] is False


def test_partition_certificates():
    w7 = layered(seven_regular_spec()).build(3)
    singles = [[v] for v in w7.complete_vertices]
    assert partition_certificate(w7, singles, Fraction(1, 6), 1).passed
    hw = hexagonal().build(3)
    cert = partition_certificate(hw, [[v] for v in hw.complete_vertices], Fraction(1, 6), 1)
    assert not cert.passed and cert.value == 0
    with pytest.raises(ValueError):
        partition_certificate(hw, singles[:2], Fraction(1, 6), 1)
    assert part_verdict(w7, [w7.root], Fraction(1, 6), 1) == (True, Fraction(-1, 6))


def test_ball_degree_certificates():
    lw = layered(LayerSpec.make(0, tail(2), tail(1))).build(8)
    assert ball_degree_certificate(lw, 2).passed
    assert not ball_degree_certificate(lw, 0).passed
    hw = hexagonal().build(6)
    assert not ball_degree_certificate(hw, 2).passed
    rm = ring_stack(rm1_spec()).build(4)
    with pytest.raises(HypothesisViolated):
        ball_degree_certificate(rm, 1)


# -- isoperimetric sets ------------------------------------------------------------


def test_hex_ball_ratios(hex_window):
    for n in range(1, 6):
        ratios = isoperimetric_ratios(ball(hex_window, hex_window.root, n))
        size = 3 * n * n + 3 * n + 1
        assert ratios.edge == Fraction(12 * n + 6, 6 * size)
        assert ratios.vertex == Fraction(6 * (n + 1), size)
        assert ratios.inner_vertex == Fraction(6 * n, size)
        assert ratios.face == Fraction(6 * n, 6 * n * n)


@settings(max_examples=100, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.integers(0, 10**6), st.integers(1, 50))
def test_vertex_boundary_inclusions(hex_window, seed, size):
    rng = random.Random(seed)
    region = [v for v in range(len(hex_window)) if hex_window.dist[v] <= 8]
    S = random_connected_selection(hex_window, size, rng, region=region)
    assert twoveriso_inclusions(S) == (True, True)
