from __future__ import annotations

import sys
from pathlib import Path

import networkx as nx
import numpy as np
import pytest
from scipy.spatial import Delaunay

from cptyper.generators import hexagonal, layered, ring_stack
from cptyper.sequences import (ExcessSpec, LayerSpec, constant, interleave, mixed_spec, polynomial,
                               rm1_spec, seq, seven_regular_spec)
from cptyper.triangulation import TriangulationWindow, from_plane_graph

sys.path.insert(0, str(Path(__file__).parent))


def tail(c: int):
    """Constant sequence indexed from 1."""
    return seq((), constant(c), 1)


def layered_specs() -> dict[str, LayerSpec]:
    return {
        "h3-3_d1-2": LayerSpec.make(3, [3, 3], [1, 2]),
        "h2-2-2_d2-1-1": LayerSpec.make(0, [2, 2, 2], [2, 1, 1]),
        "seven_regular": seven_regular_spec(),
        "h2_d1": LayerSpec.make(0, tail(2), tail(1)),
        "h3_d2_k0m1": LayerSpec.make(-1, tail(3), tail(2)),
    }


def ring_specs() -> dict[str, ExcessSpec]:
    return {
        "rm1": rm1_spec(),
        "mixed": mixed_spec(),
        "flat": ExcessSpec(k=seq((), constant(0))),
        "linear": ExcessSpec(k=seq((), polynomial(0, 1))),
        "alternating": ExcessSpec(k=seq((), interleave(constant(-3), constant(3)))),
    }


def to_networkx(window: TriangulationWindow) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(range(len(window)))
    g.add_edges_from(window.edges)
    return g


def delaunay_window(seed: int, n_points: int = 300, radius: int = 9) -> TriangulationWindow:
    """Finite triangulation of random points in the unit disk, rooted at the origin."""
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1, 1, (n_points, 2))
    pts = pts[(pts**2).sum(1) < 1]
    pts = np.vstack([[0.0, 0.0], pts])
    edges = set()
    for simplex in Delaunay(pts).simplices:
        for i in range(3):
            a, b = sorted((int(simplex[i]), int(simplex[(i + 1) % 3])))
            edges.add((a, b))
    return from_plane_graph([tuple(p) for p in pts], sorted(edges), 0, radius)


@pytest.fixture(scope="session")
def hex_window():
    return hexagonal().build(12)


@pytest.fixture(scope="session")
def small_windows():
    out = {"hexagonal": hexagonal().build(7)}
    for name, spec in layered_specs().items():
        radius = min(7, spec.max_radius() or 7)
        out[f"layered:{name}"] = layered(spec).build(radius)
    for name, spec in ring_specs().items():
        out[f"ring:{name}"] = ring_stack(spec).build(7 if name != "mixed" else 6)
    return out
