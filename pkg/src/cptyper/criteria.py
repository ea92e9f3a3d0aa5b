"""Degree-excess profiles, type series, cut loci and hyperbolicity certificates.

Series verdicts come only from symbolic growth rules attached to a spec.  A
profile read off a window yields partial sums tagged ``undecided``.
Certificates record the scale they were checked at: they are evidence about
a finite window, not proofs about the infinite graph.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Iterator, Sequence

from .curvature import extra_edge_identity, vertex_curvature
from .sequences import ExcessSpec, Growth, LayerSpec, fraction_str
from .triangulation import (SubgraphSelection, TriangulationWindow, WindowError, ball,
                            boundary_walk, edge_key, inner_vertex_boundary, main_body,
                            vertex_boundary, edge_boundary)

DEFAULT_BUDGET = 10**6


class BudgetExceeded(RuntimeError):
    """Raised when an enumeration would visit more subgraphs than allowed."""


class HypothesisViolated(ValueError):
    """Raised when a certificate's hypothesis fails on the window."""


def enumeration_budget(budget: int | None = None) -> int:
    if budget is not None:
        return budget
    return int(os.environ.get("CPTYPER_BUDGET", DEFAULT_BUDGET))


# ---------------------------------------------------------------------------
# degree-excess profiles


@dataclass
class ExcessProfile:
    """Per-radius data of a window around v0.

    ``k[n]`` and ``edge_boundary[n]`` for n <= n_max, ``a[n]`` and
    ``sphere[n]`` for n <= n_max + 1 (with a[0] = 0).  ``m`` and
    ``extra`` hold main-body cycle counts and extra-edge totals when
    computed.  ``sphere_growth`` and ``a_growth`` carry symbolic growth
    classes known from the generating spec, if any.
    """

    n_max: int
    k: list[int]
    a: list[int]
    sphere: list[int]
    edge_boundary: list[int]
    m: list[int] = field(default_factory=list)
    extra: list[int] = field(default_factory=list)
    sphere_growth: Growth | None = None
    a_growth: Growth | None = None

    def rows(self) -> list[dict[str, Any]]:
        out = []
        for n in range(self.n_max + 1):
            row: dict[str, Any] = {"n": n, "k": self.k[n], "a": self.a[n], "S": self.sphere[n],
                                   "dB": self.edge_boundary[n]}
            if self.m:
                row["m"] = self.m[n] if n < len(self.m) else None
                row["extra"] = self.extra[n] if n < len(self.extra) else None
            out.append(row)
        return out


def _layers(window: TriangulationWindow, v0: int, n_max: int) -> tuple[list[int], list[list[int]]]:
    limit = window.complete_radius
    if limit is not None:
        limit -= window.dist[v0]
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    if limit is not None and n_max + 1 > limit:
        raise WindowError(f"n_max = {n_max} needs complete_radius >= {n_max + 1 + window.dist[v0]}")
    dist = window.distances_from(v0)
    layers: list[list[int]] = [[] for _ in range(n_max + 2)]
    for v, d in enumerate(dist):
        if 0 <= d <= n_max + 1:
            layers[d].append(v)
    return dist, layers


def excess_profile(window: TriangulationWindow, v0: int | None = None, n_max: int | None = None,
                   main_bodies: bool | int = True) -> ExcessProfile:
    """k_n = Σ_{v ∈ B_n}(deg v - 6) with sphere and edge-boundary sizes.

    With ``main_bodies`` the extra-edge identity is evaluated for every A_n
    and a nonzero residual raises.  An integer limits the check to n up to
    that radius.
    """
    v0 = window.root if v0 is None else v0
    if n_max is None:
        if window.complete_radius is None:
            raise ValueError("n_max is required for finite windows")
        n_max = window.complete_radius - window.dist[v0] - 1
    dist, layers = _layers(window, v0, n_max)
    k, total = [], 0
    boundary = []
    for n in range(n_max + 1):
        total += sum(window.degree(v) - 6 for v in layers[n])
        k.append(total)
        crossing = 0
        for v in layers[n]:
            for u in window.neighbors(v):
                if dist[u] > n:
                    if dist[u] != n + 1:
                        raise WindowError("an edge skips a sphere")
                    crossing += 1
        boundary.append(crossing)
    a = [0]
    for n in range(n_max + 1):
        a.append(a[-1] + k[n] + 6)
    profile = ExcessProfile(n_max, k, a, [len(x) for x in layers], boundary)
    if main_bodies is not False:
        last = n_max if main_bodies is True else min(n_max, int(main_bodies))
        for n in range(last + 1):
            ident = extra_edge_identity(main_body(ball(window, v0, n), v0))
            if ident.residual != 0:
                raise AssertionError(f"extra-edge identity fails at n = {n}")
            profile.m.append(ident.m)
            profile.extra.append(ident.extra_total)
    if v0 == window.root:
        kind = window.meta.get("kind")
        if kind == "hexagonal":
            profile.sphere_growth = profile.a_growth = Growth("polynomial", 1)
        elif kind == "ring_stack":
            profile.sphere_growth = profile.a_growth = window.meta["spec"].a_growth()
    return profile


# ---------------------------------------------------------------------------
# series verdicts


@dataclass
class SeriesVerdict:
    """Partial sums of a positive series with a classification.

    ``classification`` is ``divergent`` or ``convergent`` only when a
    symbolic rule decides it; otherwise ``undecided``.
    """

    name: str
    partial_sums: list[tuple[int, float]]
    classification: str
    justification: str
    error_bound: float = 0.0      # bound on floating-point error of the last partial sum

    @property
    def final(self) -> float:
        return self.partial_sums[-1][1] if self.partial_sums else 0.0

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "classification": self.classification,
                "justification": self.justification, "error_bound": self.error_bound,
                "partial_sums": [[n, s] for n, s in self.partial_sums]}


def _checkpoints(n_terms: int) -> set[int]:
    marks = {n_terms}
    p = 1
    while p < n_terms:
        marks.add(p)
        p *= 2
    return marks


def partial_sums(terms: Iterable[float], start: int = 1, n_terms: int | None = None) -> list[tuple[int, float]]:
    """Running sums recorded at powers of two and at the last term."""
    values = list(terms)
    n_terms = len(values) if n_terms is None else n_terms
    marks = _checkpoints(n_terms)
    out, acc = [], 0.0
    comp = 0.0
    for i, x in enumerate(values[:n_terms]):
        # Kahan summation keeps long harmonic-type sums accurate
        y = x - comp
        t = acc + y
        comp = (t - acc) - y
        acc = t
        if i + 1 in marks:
            out.append((start + i, acc))
    return out


def _verdict(name: str, sums: list[tuple[int, float]], diverges: bool | None, growth: Growth | None) -> SeriesVerdict:
    if diverges is None:
        why = "prefix only" if growth is None else f"no symbolic rule for {growth.describe()}"
        return SeriesVerdict(name, sums, "undecided", why)
    return SeriesVerdict(name, sums, "divergent" if diverges else "convergent",
                         f"symbolic rule: {growth.describe()}")


def series_T1(source: ExcessSpec | ExcessProfile | Sequence[int], n_terms: int = 1000) -> tuple[SeriesVerdict, SeriesVerdict]:
    """Σ 1/a_n and Σ 1/(a_n + a_{n+1}).

    The first diverging gives CP parabolicity, the second diverging gives
    recurrence.  An ExcessSpec with a closed-form tail is classified
    symbolically; anything else yields partial sums only.
    """
    growth = None
    if isinstance(source, ExcessSpec):
        available = source.available()
        if available is not None:
            n_terms = min(n_terms, available - 1)
        a = source.a_values(n_terms + 1)
        growth = source.a_growth()
    elif isinstance(source, ExcessProfile):
        a = source.a[1:]
        n_terms = len(a) - 1
        growth = source.a_growth
    else:
        a = list(source)
        n_terms = len(a) - 1
    if n_terms < 1:
        raise ValueError("need at least two values of a_n")
    first = partial_sums((1 / x for x in a[:n_terms]), 1, n_terms)
    second = partial_sums((1 / (a[i] + a[i + 1]) for i in range(n_terms)), 1, n_terms)
    d1 = growth.reciprocal_sum_diverges() if growth else None
    d2 = growth.pair_reciprocal_sum_diverges() if growth else None
    return (_verdict("sum 1/a_n", first, d1, growth),
            _verdict("sum 1/(a_n + a_{n+1})", second, d2, growth))


def series_rodin_sullivan(profile: ExcessProfile) -> SeriesVerdict:
    """Σ_{n >= 1} 1/|S_n|; divergence gives CP parabolicity."""
    sizes = profile.sphere[1:]
    sums = partial_sums(1 / x for x in sizes)
    g = profile.sphere_growth
    return _verdict("sum 1/|S_n|", sums, g.reciprocal_sum_diverges() if g else None, g)


def series_nash_williams(profile: ExcessProfile) -> SeriesVerdict:
    """Σ_{n >= 1} 1/|∂B_n| over the edge cutsets between consecutive spheres; divergence gives recurrence."""
    sizes = profile.edge_boundary[1:]
    sums = partial_sums(1 / x for x in sizes)
    g = profile.sphere_growth
    return _verdict("sum 1/|dB_n|", sums, g.pair_reciprocal_sum_diverges() if g else None, g)


# ---------------------------------------------------------------------------
# cut locus and the no-cut-locus identities


def cut_locus(window: TriangulationWindow, w: int, n_max: int) -> frozenset[int]:
    """Vertices of B_{n_max}(w) where the distance from w has a local maximum."""
    dist, layers = _layers(window, w, n_max)
    out = set()
    for n in range(1, n_max + 1):
        for v in layers[n]:
            window.require_complete([v])
            if all(dist[u] <= dist[v] for u in window.neighbors(v)):
                out.add(v)
    return frozenset(out)


@dataclass
class Degree6Residuals:
    sphere: list[int]   # |S_n| - a_n, n = 1..n_max
    ball: list[int]     # |B_n| - (1 + Σ_{j<=n} a_j), n = 0..n_max

    @property
    def ok(self) -> bool:
        return not any(self.sphere) and not any(self.ball)


def verify_degree6_identity(window: TriangulationWindow, v0: int | None = None, n_max: int | None = None) -> Degree6Residuals:
    """Residuals of |S_n| = a_n and |B_n| = 1 + Σ a_j; only asserted without a cut locus."""
    v0 = window.root if v0 is None else v0
    profile = excess_profile(window, v0, n_max, main_bodies=False)
    locus = cut_locus(window, v0, profile.n_max)
    if locus:
        raise HypothesisViolated(f"cut locus is nonempty: {sorted(locus)[:5]}")
    sphere = [profile.sphere[n] - profile.a[n] for n in range(1, profile.n_max + 1)]
    balls, size, acc = [], 0, 0
    for n in range(profile.n_max + 1):
        size += profile.sphere[n]
        acc += profile.a[n]
        balls.append(size - (1 + acc))
    return Degree6Residuals(sphere, balls)


# ---------------------------------------------------------------------------
# subgraph enumeration


@dataclass(frozen=True)
class ScanRecord:
    vertices: frozenset[int]
    size: int
    boundary: int
    degree_sum: int
    kappa: Fraction


def subgraph_scan(window: TriangulationWindow, S0: SubgraphSelection | Iterable[int], size_cap: int,
                  budget: int | None = None) -> Iterator[ScanRecord]:
    """Every connected induced S ⊇ S0 with |S| <= size_cap, each exactly once.

    Candidates are restricted to complete vertices so that dS and degrees
    are known.  Each branch fixes one candidate and forbids it in later
    branches, so no set is produced twice.
    """
    base = frozenset(S0.vertices if isinstance(S0, SubgraphSelection) else S0)
    if not base:
        raise ValueError("S0 must be nonempty")
    window.require_complete(base)
    if not window.induced(base).is_connected():
        raise ValueError("S0 must be connected")
    budget = enumeration_budget(budget)
    complete = set(window.complete_vertices)
    kappa = {}

    def kap(v: int) -> Fraction:
        if v not in kappa:
            kappa[v] = vertex_curvature(window, v)
        return kappa[v]

    def record(S: frozenset[int], deg_sum: int, kap_sum: Fraction) -> ScanRecord:
        boundary = {u for v in S for u in window.neighbors(v) if u not in S}
        return ScanRecord(S, len(S), len(boundary), deg_sum, kap_sum)

    emitted = 0
    start_ext = [u for u in sorted({u for v in base for u in window.neighbors(v)} - base) if u in complete]
    stack = [(base, start_ext, frozenset(), sum(window.degree(v) for v in base),
              sum((kap(v) for v in base), Fraction(0)))]
    while stack:
        S, ext, forbidden, deg_sum, kap_sum = stack.pop()
        emitted += 1
        if emitted > budget:
            raise BudgetExceeded(f"more than {budget} subgraphs; raise the budget or lower the cap")
        yield record(S, deg_sum, kap_sum)
        if len(S) >= size_cap:
            continue
        ext = list(ext)
        blocked = set(forbidden)
        branches = []
        while ext:
            v = ext.pop()
            seen = S | blocked | set(ext) | {v}
            new_ext = ext + [u for u in window.neighbors(v) if u not in seen and u in complete]
            branches.append((S | {v}, new_ext, frozenset(blocked), deg_sum + window.degree(v), kap_sum + kap(v)))
            blocked.add(v)
        stack.extend(reversed(branches))


# ---------------------------------------------------------------------------
# certificates


@dataclass
class HyperbolicityCertificate:
    """Outcome of a hyperbolicity test on a finite window.

    ``passed`` reflects only the checked scale; ``scale`` records it.
    """

    kind: str
    params: dict[str, Any]
    passed: bool
    scale: str
    value: Any = None
    witness: Any = None
    notes: str = ""

    def to_dict(self) -> dict[str, Any]:
        def enc(x: Any) -> Any:
            if isinstance(x, Fraction):
                return fraction_str(x)
            if isinstance(x, (set, frozenset)):
                return sorted(enc(y) for y in x)
            if isinstance(x, (list, tuple)):
                return [enc(y) for y in x]
            if isinstance(x, dict):
                return {str(k): enc(v) for k, v in x.items()}
            return x
        return {"kind": self.kind, "params": enc(self.params), "passed": self.passed,
                "scale": self.scale, "value": enc(self.value), "witness": enc(self.witness),
                "notes": self.notes or "evidence at the stated window scale, not a proof for the infinite graph"}


@dataclass(frozen=True)
class GrowthFunction:
    """Named monotone function g used in the perimetric test."""

    name: str
    alpha: Fraction

    def __call__(self, x: int) -> Fraction | float:
        if self.name == "power":
            if self.alpha == 1:
                return Fraction(x)
            return float(x) ** float(self.alpha)
        if self.name == "log_power":
            return math.log(1 + x) ** float(self.alpha)
        raise ValueError(f"unknown growth function {self.name!r}")

    def describe(self) -> str:
        return f"x^{self.alpha}" if self.name == "power" else f"ln(1+x)^{self.alpha}"


def power(alpha: Fraction | int | str = 1) -> GrowthFunction:
    return GrowthFunction("power", Fraction(alpha))


def log_power(alpha: Fraction | int | str = 1) -> GrowthFunction:
    return GrowthFunction("log_power", Fraction(alpha))


def perimetric_certificate(window: TriangulationWindow, S0: SubgraphSelection | Iterable[int],
                           g: GrowthFunction, size_cap: int, budget: int | None = None) -> HyperbolicityCertificate:
    """min over scanned S ⊇ S0 of Σ_{v∈S}(deg v - 6) / g(|S|); passes when positive."""
    best, witness, count = None, None, 0
    for rec in subgraph_scan(window, S0, size_cap, budget):
        count += 1
        value = (rec.degree_sum - 6 * rec.size) / g(rec.size)
        if best is None or value < best:
            best, witness = value, rec.vertices
    base = S0.vertices if isinstance(S0, SubgraphSelection) else frozenset(S0)
    return HyperbolicityCertificate(
        "perimetric", {"g": g.describe(), "size_cap": size_cap, "S0": base},
        best is not None and best > 0, f"connected S containing S0 with |S| <= {size_cap} ({count} sets)",
        best, witness)


def _part_connected(window: TriangulationWindow, part: frozenset[int]) -> bool:
    return window.induced(part).is_connected()


def partition_certificate(window: TriangulationWindow, partition: Sequence[Iterable[int]],
                          eps: Fraction, K: int, region: Iterable[int] | None = None) -> HyperbolicityCertificate:
    """Every part connected, at most K vertices and κ(part) <= -eps.

    ``region`` defaults to the complete vertices of the window; the parts
    must be disjoint and cover it exactly.
    """
    parts = [frozenset(p) for p in partition]
    region = set(window.complete_vertices if region is None else region)
    seen: set[int] = set()
    for p in parts:
        if seen & p:
            raise ValueError("partition parts overlap")
        seen |= p
    if seen != region:
        raise ValueError("partition does not cover the region exactly")
    eps = Fraction(eps)
    worst = None
    failures = []
    for p in parts:
        window.require_complete(p)
        kap = sum((vertex_curvature(window, v) for v in p), Fraction(0))
        avg = Fraction(sum(window.degree(v) for v in p), len(p))
        ok = len(p) <= K and kap <= -eps and _part_connected(window, p)
        if worst is None or kap > worst:
            worst = kap
        if not ok:
            failures.append({"part": p, "kappa": kap, "average_degree": avg})
    return HyperbolicityCertificate(
        "partition", {"eps": eps, "K": K}, not failures,
        f"{len(parts)} parts covering {len(region)} vertices",
        worst, failures[:5])


def part_verdict(window: TriangulationWindow, part: Iterable[int], eps: Fraction, K: int) -> tuple[bool, Fraction]:
    """(passes, κ(part)) for one part."""
    p = frozenset(part)
    kap = sum((vertex_curvature(window, v) for v in p), Fraction(0))
    return (len(p) <= K and kap <= -Fraction(eps) and _part_connected(window, p)), kap


def ball_degree_certificate(window: TriangulationWindow, K: int) -> HyperbolicityCertificate:
    """Every B_K(v) in the testable core contains a vertex of degree >= 7.

    The core holds the vertices whose K-ball lies inside the completed
    region.  A vertex of degree <= 5 voids the certificate.
    """
    if K < 0:
        raise ValueError("K must be nonnegative")
    complete = window.complete_vertices
    low = [v for v in complete if window.degree(v) < 6]
    if low:
        raise HypothesisViolated(f"vertex {low[0]} has degree {window.degree(low[0])} < 6")
    R = window.complete_radius
    core = [v for v in complete if R is None or window.dist[v] + K < R]
    heavy = {v for v in complete if window.degree(v) >= 7}
    missing = []
    for v in core:
        dist = {v: 0}
        frontier = [v]
        found = v in heavy
        while frontier and not found:
            nxt = []
            for x in frontier:
                if dist[x] == K:
                    continue
                for u in window.neighbors(x):
                    if u not in dist:
                        dist[u] = dist[x] + 1
                        if u in heavy:
                            found = True
                        nxt.append(u)
            frontier = nxt
        if not found:
            missing.append(v)
    return HyperbolicityCertificate(
        "ball_degree", {"K": K}, bool(core) and not missing,
        f"{len(core)} centres with complete {K}-balls", len(missing), missing[:5])


@dataclass(frozen=True)
class IsoperimetricRatios:
    edge: Fraction           # |∂S| / Vol(S)
    face: Fraction | None    # |bS| / |F(S)|
    vertex: Fraction         # |dS| / |V(S)|
    inner_vertex: Fraction   # |d0 S| / |V(S)|


def isoperimetric_ratios(S: SubgraphSelection) -> IsoperimetricRatios:
    """The four boundary-to-bulk ratios of one finite selection (face ratio None when F(S) is empty)."""
    S.require_complete()
    w = S.window
    vol = sum(w.degree(v) for v in S.vertices)
    n = len(S.vertices)
    faces = len(S.faces)
    face = Fraction(len(boundary_walk(S)), faces) if faces else None
    return IsoperimetricRatios(Fraction(len(edge_boundary(S)), vol), face,
                               Fraction(len(vertex_boundary(S)), n),
                               Fraction(len(inner_vertex_boundary(S)), n))


def twoveriso_inclusions(S: SubgraphSelection) -> tuple[bool, bool]:
    """The two set inclusions behind comparing the outer and inner vertex constants.

    For T = ⟨V(S) ∪ dS⟩ every inner boundary vertex of T lies in dS; for
    T' = ⟨V(S) \\ d0 S⟩ every outer boundary vertex of T' lies in d0 S.
    """
    w = S.window
    dS = vertex_boundary(S)
    d0S = inner_vertex_boundary(S)
    T = w.induced(S.vertices | dS)
    first = inner_vertex_boundary(T) <= dS
    core = S.vertices - d0S
    second = True
    if core:
        second = vertex_boundary(w.induced(core)) <= d0S
    return first, second


__all__ = [
    "BudgetExceeded", "HypothesisViolated", "enumeration_budget",
    "ExcessProfile", "excess_profile", "SeriesVerdict", "partial_sums",
    "series_T1", "series_rodin_sullivan", "series_nash_williams",
    "cut_locus", "Degree6Residuals", "verify_degree6_identity",
    "ScanRecord", "subgraph_scan", "HyperbolicityCertificate", "GrowthFunction", "power", "log_power",
    "perimetric_certificate", "partition_certificate", "part_verdict", "ball_degree_certificate",
    "IsoperimetricRatios", "isoperimetric_ratios", "twoveriso_inclusions",
]
