"""Vertex extremal length, square-tiling values, water flows and their energy.

``vel_solve`` computes VEL(A, B) = sup_μ L_μ(Γ)² / area(μ) on a finite graph
by constraint generation.  The equivalent program

    minimise Σ μ(v)²   subject to   Σ_{v ∈ γ} μ(v) >= 1 for every A-B path γ

is relaxed to the paths found so far; each relaxation is a least-distance
problem solved exactly through non-negative least squares, and the
μ-shortest path is the separation oracle.
"""
from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Sequence

import numpy as np
from scipy.optimize import nnls

from .generators import SquareTiling, square_tiling_contact_graph
from .sequences import ExcessSpec, fraction_str
from .triangulation import TriangulationWindow

log = logging.getLogger(__name__)


class VelCapExceeded(RuntimeError):
    """The solver hit its round cap; carries the bounds reached so far."""

    def __init__(self, lower: float, upper: float, rounds: int):
        super().__init__(f"round cap reached after {rounds} rounds: VEL in [{lower:.6g}, {upper:.6g}]")
        self.lower = lower
        self.upper = upper
        self.rounds = rounds


@dataclass
class VertexMetric:
    """Nonnegative vertex weights μ."""

    values: dict[int, Any]

    @property
    def area(self) -> Any:
        return sum((x * x for x in self.values.values()), type(next(iter(self.values.values()), 0))(0))

    def __getitem__(self, v: int) -> Any:
        return self.values.get(v, 0)

    def admissible(self) -> bool:
        return all(x >= 0 for x in self.values.values()) and 0 < self.area

    def scaled(self, t: Any) -> "VertexMetric":
        return VertexMetric({v: t * x for v, x in self.values.items()})

    def to_rows(self) -> list[tuple[int, str]]:
        def enc(x):
            return fraction_str(x) if isinstance(x, Fraction) else repr(float(x))
        return [(v, enc(x)) for v, x in sorted(self.values.items())]


def mu_length(metric: VertexMetric, path: Sequence[int]) -> Any:
    """L_μ(γ): the sum of μ over the distinct vertices of the path."""
    return sum((metric[v] for v in set(path)), 0)


def _shortest(window: TriangulationWindow, weight: dict[int, float] | VertexMetric, sources: Iterable[int],
              allowed: set[int] | None = None) -> tuple[dict[int, float], dict[int, int]]:
    """Vertex-weighted Dijkstra; a path's length counts both of its endpoints."""
    w = weight if isinstance(weight, dict) else weight.values
    dist: dict[int, float] = {}
    parent: dict[int, int] = {}
    heap = []
    for a in sources:
        d = w.get(a, 0)
        if a not in dist or d < dist[a]:
            dist[a] = d
            parent[a] = -1
            heapq.heappush(heap, (d, 0, a))
    done = set()
    while heap:
        d, hops, x = heapq.heappop(heap)
        if x in done:
            continue
        done.add(x)
        for y in window.neighbors(x):
            if allowed is not None and y not in allowed:
                continue
            nd = d + w.get(y, 0)
            if y not in dist or nd < dist[y] - 1e-15:
                dist[y] = nd
                parent[y] = x
                heapq.heappush(heap, (nd, hops + 1, y))
    return dist, parent


def _path_to(parent: dict[int, int], b: int) -> list[int]:
    out = [b]
    while parent[out[-1]] != -1:
        out.append(parent[out[-1]])
    return out[::-1]


def mu_min_length(window: TriangulationWindow, metric: VertexMetric, A: Iterable[int], B: Iterable[int]) -> Any:
    """L_μ(Γ(A, B)): the least μ-length of a path from A to B."""
    A, B = list(A), set(B)
    for v in list(A) + list(B):
        if not 0 <= v < len(window):
            raise ValueError(f"vertex {v} is not in the window")
    dist, _ = _shortest(window, metric, A)
    reach = [dist[b] for b in B if b in dist]
    if not reach:
        raise ValueError("B is not reachable from A")
    return min(reach)


@dataclass
class PathFamily:
    """Paths from A to B inside ``allowed`` (all window vertices when None)."""

    A: frozenset[int]
    B: frozenset[int]
    allowed: frozenset[int] | None = None

    def __post_init__(self):
        if not self.A or not self.B:
            raise ValueError("A and B must be nonempty")


def frontier_family(window: TriangulationWindow, A: Iterable[int]) -> PathFamily:
    """Paths from A to the outermost sphere: a within-window stand-in for paths to infinity."""
    far = max(window.dist)
    return PathFamily(frozenset(A), frozenset(v for v, d in enumerate(window.dist) if d == far))


def _least_distance(paths: list[list[int]], index: dict[int, int]) -> np.ndarray:
    """Minimum-norm x >= 0 with Σ_{v∈γ} x_v >= 1 for all given paths."""
    n, m = len(index), len(paths)
    E = np.zeros((n + 1, m))
    for j, p in enumerate(paths):
        for v in p:
            E[index[v], j] = 1.0
    E[n, :] = 1.0
    f = np.zeros(n + 1)
    f[n] = 1.0
    u, _ = nnls(E, f, maxiter=max(50 * (n + m), 1000))
    r = E @ u - f
    if abs(r[n]) < 1e-14:
        raise RuntimeError("least-distance subproblem reported infeasible")
    return np.maximum(-r[:n] / r[n], 0.0)


@dataclass
class VelResult:
    value: float
    lower: float
    upper: float
    metric: VertexMetric          # normalised so the shortest A-B path has μ-length 1
    witnesses: list[list[int]]    # the path constraints used
    rounds: int
    trace: list[tuple[int, float, float]] = field(default_factory=list)  # (round, shortest length, area)


def vel_solve(window: TriangulationWindow, family: PathFamily, tolerance: float = 1e-6,
              iteration_cap: int = 10_000, batch: int | None = None) -> VelResult:
    """VEL(A, B) by constraint generation.

    Each round solves the relaxation over the collected paths, then adds the
    μ-shortest path to every target whose length is below 1 - tolerance.
    The relaxed optimum bounds VEL from above (1/area) and the current metric
    bounds it from below (L²/area).
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    A, B, allowed = family.A, family.B, family.allowed
    allowed_set = None if allowed is None else set(allowed)
    # start from hop-count shortest paths
    unit = {v: 1.0 for v in range(len(window))}
    dist, parent = _shortest(window, unit, A, allowed_set)
    if not any(b in dist for b in B):
        raise ValueError("B is not reachable from A")
    targets = sorted((b for b in B if b in dist), key=lambda b: (dist[b], b))
    paths = [_path_to(parent, targets[0])]
    seen = {tuple(paths[0])}
    index: dict[int, int] = {}
    trace = []
    lower = upper = 0.0
    mu: dict[int, float] = {}
    for rnd in range(1, iteration_cap + 1):
        for p in paths:
            for v in p:
                if v not in index:
                    index[v] = len(index)
        x = _least_distance(paths, index)
        mu = {v: float(x[i]) for v, i in index.items() if x[i] > 0}
        area = float(np.dot(x, x))
        dist, parent = _shortest(window, mu, A, allowed_set)
        reach = {b: dist[b] for b in B if b in dist}
        shortest = min(reach.values())
        upper = 1.0 / area
        lower = shortest * shortest / area
        trace.append((rnd, shortest, area))
        log.debug("round %d shortest %.9f area %.9f", rnd, shortest, area)
        if shortest >= 1 - tolerance:
            metric = VertexMetric({v: x_v / shortest for v, x_v in mu.items()})
            return VelResult(lower, lower, upper, metric, paths, rnd, trace)
        violated = sorted((b for b, d in reach.items() if d < 1 - tolerance), key=lambda b: reach[b])
        if batch is not None:
            violated = violated[:batch]
        added = 0
        for b in violated:
            p = _path_to(parent, b)
            key = tuple(p)
            if key not in seen:
                seen.add(key)
                paths.append(p)
                added += 1
        if not added:
            # numerical stall: the violated paths are already constraints
            metric = VertexMetric({v: x_v / shortest for v, x_v in mu.items()})
            return VelResult(lower, lower, upper, metric, paths, rnd, trace)
    raise VelCapExceeded(lower, upper, iteration_cap)


def vel_exact_tiling(tiling: SquareTiling) -> tuple[Fraction, VertexMetric, TriangulationWindow]:
    """Exact VEL between the bottom and top rows of a row tiling: its height.

    The extremal metric gives every square its side length; it is unique up
    to a positive factor.
    """
    window = square_tiling_contact_graph(tiling)
    rows = window.meta["rows"]
    values = {}
    for i, row in enumerate(rows):
        side = Fraction(1, tiling.counts[i])
        for v in row:
            values[v] = side
    return tiling.height, VertexMetric(values), window


def tiling_family(window: TriangulationWindow) -> PathFamily:
    rows = window.meta["rows"]
    return PathFamily(frozenset(rows[0]), frozenset(rows[-1]))


# ---------------------------------------------------------------------------
# water flow on ring stacks


@dataclass
class FlowAssignment:
    """Antisymmetric edge flow stored on forward (inner to outer) edges."""

    source: int
    forward: dict[tuple[int, int], Fraction]
    levels: dict[tuple[int, int], int]          # edge -> level n (0 for source edges)
    counts: list[int]                           # a_1, ..., a_R
    closed_vertices: frozenset[int]             # vertices with every edge inside the window

    def value(self, v: int, w: int) -> Fraction:
        if (v, w) in self.forward:
            return self.forward[(v, w)]
        if (w, v) in self.forward:
            return -self.forward[(w, v)]
        return Fraction(0)

    def net_outflow(self, v: int) -> Fraction:
        total = Fraction(0)
        for (x, y), val in self.forward.items():
            if x == v:
                total += val
            elif y == v:
                total -= val
        return total

    def conservation_residuals(self) -> dict[int, Fraction]:
        """Net outflow at every vertex other than the source (all should vanish)."""
        out = {v: Fraction(0) for v in self.closed_vertices}
        for (x, y), val in self.forward.items():
            if x in out:
                out[x] += val
            if y in out:
                out[y] -= val
        out.pop(self.source, None)
        return out

    def to_rows(self) -> list[tuple[int, int, int, str]]:
        return [(self.levels[e], e[0], e[1], fraction_str(val)) for e, val in sorted(self.forward.items())]


def _arc_overlap(s1: Fraction, e1: Fraction, s2: Fraction, e2: Fraction) -> Fraction:
    """Length of the intersection of two arcs of a circle of circumference 1."""
    best = Fraction(0)
    shift = (s1 - s2) // 1
    for k in (shift - 1, shift, shift + 1):
        lo = max(s1, s2 + k)
        hi = min(e1, e2 + k)
        if hi > lo:
            best += hi - lo
    return best


def water_flow(window: TriangulationWindow) -> FlowAssignment:
    """θ(v, w) = length of the overlap of the arcs of squares v and w; 1/a_1 out of v0."""
    if window.meta.get("kind") != "ring_stack":
        raise ValueError("water flow needs a ring-stack window")
    tiling: SquareTiling = window.meta["tiling"]
    rows: list[list[int]] = window.meta["rows"]
    counts = list(tiling.counts)
    arc = {}
    for i, row in enumerate(rows):
        c = counts[i]
        for j, v in enumerate(row):
            start = tiling.offset(i) + Fraction(j, c)
            arc[v] = (start, start + Fraction(1, c), i)
    forward: dict[tuple[int, int], Fraction] = {}
    levels: dict[tuple[int, int], int] = {}
    root = window.root
    for v in rows[0]:
        forward[(root, v)] = Fraction(1, counts[0])
        levels[(root, v)] = 0
    for i in range(len(rows) - 1):
        upper = set(rows[i + 1])
        for v in rows[i]:
            s1, e1, _ = arc[v]
            for w in window.neighbors(v):
                if w in upper:
                    s2, e2, _ = arc[w]
                    forward[(v, w)] = _arc_overlap(s1, e1, s2, e2)
                    levels[(v, w)] = i + 1
    closed = frozenset([root] + [v for row in rows[:-1] for v in row])
    return FlowAssignment(root, forward, levels, counts, closed)


@dataclass
class EnergyReport:
    level_energy: list[Fraction]       # level n = 0..n_max
    truncated: list[Fraction]          # running totals
    bound: list[Fraction]              # 1/a_1 + Σ_{j<=n} 4/(a_j + a_{j+1})
    edge_bound_ok: bool

    @property
    def ok(self) -> bool:
        return self.edge_bound_ok and all(t <= b for t, b in zip(self.truncated, self.bound))


def flow_energy(flow: FlowAssignment, n_max: int | None = None) -> EnergyReport:
    """Truncated energy Σ θ(e)² by level, with the per-edge and total bounds."""
    counts = flow.counts
    top = len(counts) - 1
    n_max = top if n_max is None else n_max
    if n_max > top:
        raise ValueError(f"the flow covers levels <= {top}")
    energy = [Fraction(0) for _ in range(n_max + 1)]
    edge_ok = True
    for e, val in flow.forward.items():
        n = flow.levels[e]
        if n > n_max:
            continue
        energy[n] += val * val
        if n >= 1 and abs(val) > Fraction(2, counts[n - 1] + counts[n]):
            edge_ok = False
    return _energy_report(energy, counts, edge_ok)


def _energy_report(energy: list[Fraction], counts: Sequence[int], edge_ok: bool) -> EnergyReport:
    truncated, bound = [], []
    acc = Fraction(0)
    b = Fraction(1, counts[0])
    for n, e in enumerate(energy):
        acc += e
        if n >= 1:
            b += Fraction(4, counts[n - 1] + counts[n])
        truncated.append(acc)
        bound.append(b)
    return EnergyReport(energy, truncated, bound, edge_ok)


def level_energy(a_inner: int, a_outer: int, o_inner: Fraction, o_outer: Fraction) -> Fraction:
    """Energy of the water flow between two consecutive rings without listing edges.

    With p = min and q = max square counts, every small square of side 1/q
    contains at most one corner of the coarser ring; a corner cutting it at
    distance x contributes x² + (1/q - x)² instead of 1/q².
    """
    if a_inner <= a_outer:
        p, q, o_p, o_q = a_inner, a_outer, o_inner, o_outer
    else:
        p, q, o_p, o_q = a_outer, a_inner, o_outer, o_inner
    side = Fraction(1, q)
    total = side
    for i in range(p):
        x = (o_p + Fraction(i, p) - o_q) % side
        total -= 2 * x * (side - x)
    return total


def ring_stack_energies(spec: ExcessSpec, n_max: int) -> EnergyReport:
    """Level energies of the water flow for levels 0..n_max, straight from a_n and the ring offsets."""
    counts = spec.a_values(n_max + 1)
    energy = [Fraction(1, counts[0])]
    offset = Fraction(0)
    per_edge_ok = True
    for n in range(1, n_max + 1):
        a, b = counts[n - 1], counts[n]
        nxt = offset + Fraction(1, 2 * a * b)
        energy.append(level_energy(a, b, offset, nxt))
        # every overlap is at most the smaller side
        per_edge_ok = per_edge_ok and Fraction(1, max(a, b)) <= Fraction(2, a + b)
        offset = nxt
    return _energy_report(energy, counts, per_edge_ok)


__all__ = [
    "VelCapExceeded", "VertexMetric", "mu_length", "mu_min_length", "PathFamily", "frontier_family",
    "VelResult", "vel_solve", "vel_exact_tiling", "tiling_family",
    "FlowAssignment", "water_flow", "EnergyReport", "flow_energy", "level_energy", "ring_stack_energies",
]
