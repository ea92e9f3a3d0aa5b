"""Exact combinatorial curvature, left turns and the two Gauss-Bonnet identities.

Curvature is normalised so that a full turn is 1.  All arithmetic uses
``fractions.Fraction``.  A corner of v is the sector between consecutive
rotation entries i and i+1; the face filling it is traced from the window.
"""
from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .triangulation import (BoundaryWalk, SubgraphSelection, TriangulationWindow, WindowError,
                            boundary_walk, euler_characteristic, inner_boundary_walk,
                            interior_euler_characteristic, interior_vertices)

HALF = Fraction(1, 2)


def vertex_curvature(window: TriangulationWindow, v: int) -> Fraction:
    """κ(v) = 1 - deg v / 2 + Σ_{f ∋ v} 1/deg f."""
    faces = window.faces_at(v)
    deg = len(window.rotation[v])
    return 1 - Fraction(deg, 2) + sum((Fraction(1, len(f)) for f in faces), Fraction(0))


def corner_curvature(window: TriangulationWindow, v: int, face: Iterable[int]) -> Fraction:
    """κ(v, f) = 1/deg v + 1/deg f - 1/2 for a face f through v."""
    face = tuple(face)
    if v not in face:
        raise ValueError(f"vertex {v} is not on face {face}")
    return Fraction(1, window.degree(v)) + Fraction(1, len(face)) - HALF


def _corner_weight(window: TriangulationWindow, v: int, i: int) -> Fraction:
    """1/2 - 1/deg f for the face in corner i of v."""
    return HALF - Fraction(1, len(window.sector_face(v, i)))


def total_curvature(window: TriangulationWindow, vertices: Iterable[int]) -> Fraction:
    """Σ κ(v) over ``vertices``; vertices sharing a local pattern are grouped."""
    patterns = Counter(window.corner_pattern(v) for v in vertices)
    total = Fraction(0)
    for (deg, sizes), count in patterns.items():
        kappa = 1 - Fraction(deg, 2) + sum((Fraction(1, s) for s in sizes), Fraction(0))
        total += count * kappa
    return total


def subgraph_curvature(S: SubgraphSelection) -> Fraction:
    """κ(S) = Σ_{v ∈ V(S)} κ(v)."""
    S.require_complete()
    return total_curvature(S.window, S.vertices)


def interior_curvature(S: SubgraphSelection) -> Fraction:
    """κ(S_-) over the vertices of S not visited by its boundary walk."""
    S.require_complete()
    return total_curvature(S.window, interior_vertices(S))


@dataclass
class TurnVisit:
    cycle: int
    position: int
    vertex: int
    turn: Fraction
    faces: int        # faces on the turning side of the visit
    extra: int        # extra edges (outer turns on triangulations)


@dataclass
class TurnReport:
    """Per-visit left turns along a boundary walk and their total."""

    kind: str
    visits: list[TurnVisit] = field(default_factory=list)

    @property
    def total(self) -> Fraction:
        return sum((x.turn for x in self.visits), Fraction(0))

    @property
    def extra_total(self) -> int:
        return sum(x.extra for x in self.visits)

    def per_cycle(self) -> dict[int, Fraction]:
        out: dict[int, Fraction] = {}
        for x in self.visits:
            out[x.cycle] = out.get(x.cycle, Fraction(0)) + x.turn
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["cycle", "position", "vertex", "turn", "faces", "extra"])
        for x in self.visits:
            writer.writerow([x.cycle, x.position, x.vertex, f"{x.turn.numerator}/{x.turn.denominator}",
                             x.faces, x.extra])
        return buf.getvalue()


def _sector_run(window: TriangulationWindow, v: int, start: int, stop: int) -> list[int]:
    """Corner indices from rotation entry ``start`` counterclockwise up to entry ``stop``."""
    deg = len(window.rotation[v])
    i, j = window.position(v, start), window.position(v, stop)
    count = (j - i) % deg or deg
    return [(i + k) % deg for k in range(count)]


def outer_left_turn(walk: BoundaryWalk) -> TurnReport:
    """τ_o along bS: for every visit, Σ(1/2 - 1/deg f) - 1/2 over the faces on its right.

    An isolated vertex (a length-0 cycle) turns by 1 - κ(v).  When the walk
    comes back along the edge it arrived on, every face at the vertex counts.
    """
    if walk.inner:
        raise ValueError("outer turns need an outer boundary walk")
    w = walk.selection.window
    report = TurnReport("outer")
    for ci, cycle in enumerate(walk.cycles):
        if len(cycle) == 1:
            v = cycle[0]
            deg = w.degree(v)
            report.visits.append(TurnVisit(ci, 0, v, 1 - vertex_curvature(w, v), deg, deg))
            continue
        L = len(cycle)
        for k in range(L):
            p, v, q = cycle[k - 1], cycle[k], cycle[(k + 1) % L]
            if not w.is_complete(v):
                raise WindowError(f"walk visits frontier vertex {v}")
            run = _sector_run(w, v, p, q)
            turn = sum((_corner_weight(w, v, i) for i in run), Fraction(0)) - HALF
            report.visits.append(TurnVisit(ci, k, v, turn, len(run), len(run) - 3))
    return report


def inner_left_turn(walk: BoundaryWalk) -> TurnReport:
    """τ_i along b_iS: for every visit, 1/2 - Σ(1/2 - 1/deg g) over the faces on its left."""
    w = walk.selection.window
    report = TurnReport("inner")
    for ci, cycle in enumerate(walk.cycles):
        L = len(cycle)
        if L < 3:
            raise ValueError("inner turns need cycles of length at least 3")
        for k in range(L):
            p, v, q = cycle[k - 1], cycle[k], cycle[(k + 1) % L]
            if p == q:
                raise ValueError(f"degenerate visit at {v}: the walk turns back")
            if not w.is_complete(v):
                raise WindowError(f"walk visits frontier vertex {v}")
            run = _sector_run(w, v, q, p)
            turn = HALF - sum((_corner_weight(w, v, i) for i in run), Fraction(0))
            report.visits.append(TurnVisit(ci, k, v, turn, len(run), 3 - len(run)))
    return report


def verify_gbf1(S: SubgraphSelection) -> Fraction:
    """κ(S) + τ_o(bS) - χ(S); zero for every finite connected S."""
    if not S.is_connected():
        raise ValueError("the first identity needs a connected selection")
    S.require_complete()
    return subgraph_curvature(S) + outer_left_turn(boundary_walk(S)).total - euler_characteristic(S)


def verify_gbf2(S: SubgraphSelection) -> Fraction:
    """κ(S_-) + τ_i(b_iS) - χ(S_-); zero for every finite S."""
    S.require_complete()
    walk = inner_boundary_walk(S)
    turns = inner_left_turn(walk).total if walk.cycles else Fraction(0)
    return interior_curvature(S) + turns - interior_euler_characteristic(S)


@dataclass(frozen=True)
class GaussBonnetRow:
    label: str
    kappa: Fraction
    tau_o: Fraction
    chi: int
    kappa_interior: Fraction
    tau_i: Fraction
    chi_interior: int

    @property
    def residual1(self) -> Fraction:
        return self.kappa + self.tau_o - self.chi

    @property
    def residual2(self) -> Fraction:
        return self.kappa_interior + self.tau_i - self.chi_interior


def gauss_bonnet_row(S: SubgraphSelection, label: str = "") -> GaussBonnetRow:
    """Both identities' ingredients for one selection."""
    S.require_complete()
    inner = inner_boundary_walk(S)
    return GaussBonnetRow(
        label,
        subgraph_curvature(S),
        outer_left_turn(boundary_walk(S)).total,
        euler_characteristic(S),
        interior_curvature(S),
        inner_left_turn(inner).total if inner.cycles else Fraction(0),
        interior_euler_characteristic(S),
    )


@dataclass(frozen=True)
class ExtraEdgeIdentity:
    m: int
    extra_total: int
    excess: int

    @property
    def residual(self) -> int:
        return self.excess - (6 * self.m - 12 + self.extra_total)


def extra_edge_identity(A: SubgraphSelection) -> ExtraEdgeIdentity:
    """Check Σ_{v ∈ B_n}(deg v - 6) = 6m - 12 + (extra edges) on a main body.

    m counts boundary cycles of A_n; the single vertex B_0 counts as one
    cycle whose extra edges are all edges at v_0.
    """
    A.require_complete()
    walk = boundary_walk(A)
    report = outer_left_turn(walk)
    excess = sum(A.window.degree(v) - 6 for v in A.vertices)
    return ExtraEdgeIdentity(len(walk.cycles), report.extra_total, excess)


__all__ = [
    "vertex_curvature", "corner_curvature", "total_curvature", "subgraph_curvature", "interior_curvature",
    "TurnVisit", "TurnReport", "outer_left_turn", "inner_left_turn",
    "verify_gbf1", "verify_gbf2", "GaussBonnetRow", "gauss_bonnet_row",
    "ExtraEdgeIdentity", "extra_edge_identity",
]
