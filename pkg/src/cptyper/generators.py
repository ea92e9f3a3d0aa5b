"""Deterministic constructors of triangulation windows.

Every sphere-grown window assigns vertex ids sphere by sphere, so ids are in
BFS order from the root.  The sphere S_m is kept as a counterclockwise cycle
and each vertex's rotation reads

    [next on sphere, parents (forward-most first), previous on sphere, children]

which makes the construction planar by design.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

from .sequences import (ExcessSpec, LayerSpec, SpecError, SpecExhausted,
                        hexagonal_layer_spec)
from .triangulation import GAP, InvalidWindow, TriangulationWindow


class FourCornerError(SpecError):
    """Four squares of a tiling meet at one point."""


# ---------------------------------------------------------------------------
# sphere-by-sphere growth


def _grow(root_degree: int, layer_degree: Callable[[int], int], radius: int,
          meta: dict[str, Any]) -> TriangulationWindow:
    """Grow spheres S_0..S_radius where every vertex of S_m has degree ``layer_degree(m)``.

    Consecutive vertices of S_m share one child; a vertex with p parents and
    degree D also gets D - p - 4 private children between its two shared ones.
    """
    if radius < 1:
        raise SpecError("radius must be at least 1")
    if root_degree < 3:
        raise SpecError(f"root degree {root_degree} < 3")
    rotation: list[list[int]] = [list(range(1, root_degree + 1))]
    parents: list[list[int]] = [[]]
    children: list[list[int]] = [list(range(1, root_degree + 1))]
    spheres = [[0], list(range(1, root_degree + 1))]
    for _ in spheres[1]:
        rotation.append([])
        parents.append([0])
        children.append([])
    for m in range(1, radius):
        sphere = spheres[m]
        size = len(sphere)
        degree = layer_degree(m)
        next_id = len(rotation)
        new_sphere: list[int] = []
        privates: list[list[int]] = []
        shared: list[int] = []
        for i, v in enumerate(sphere):
            count = degree - len(parents[v]) - 4
            if count < 0:
                raise SpecError(f"layer {m}: degree {degree} leaves no room for children")
            own = list(range(next_id, next_id + count))
            next_id += count
            privates.append(own)
            shared.append(next_id)
            next_id += 1
            new_sphere.extend(own)
            new_sphere.append(shared[-1])
            for c in own:
                parents.append([v])
            parents.append([sphere[(i + 1) % size], v])
            rotation.extend([] for _ in range(count + 1))
            children.extend([] for _ in range(count + 1))
        for i, v in enumerate(sphere):
            kids = [shared[i - 1]] + privates[i] + [shared[i]]
            children[v] = kids
            rotation[v] = [sphere[(i + 1) % size]] + parents[v] + [sphere[i - 1]] + kids
        spheres.append(new_sphere)
    last = spheres[radius]
    size = len(last)
    for i, v in enumerate(last):
        rotation[v] = [last[(i + 1) % size]] + parents[v] + [last[i - 1], GAP]
    meta = dict(meta)
    meta["spheres"] = spheres
    meta["children"] = children
    meta["parents"] = parents
    return TriangulationWindow(rotation, 0, radius, meta)


@dataclass(frozen=True)
class GraphGenerator:
    """A named recipe that builds windows of one infinite triangulation."""

    kind: str
    spec: Any = None

    def build(self, radius: int) -> TriangulationWindow:
        if radius < 1:
            raise SpecError("radius must be at least 1")
        if self.kind == "hexagonal":
            return _grow(6, lambda m: 6, radius, {"kind": "hexagonal"})
        if self.kind == "layered":
            spec: LayerSpec = self.spec
            limit = spec.max_radius()
            if limit is not None and radius > limit:
                raise SpecExhausted(f"layer data covers radius <= {limit}")
            return _grow(spec.k0 + 6, spec.layer_degree, radius, {"kind": "layered", "spec": spec})
        if self.kind == "ring_stack":
            return _ring_stack_window(self.spec, radius)
        raise SpecError(f"unknown generator kind {self.kind!r}")

    def describe(self) -> dict[str, Any]:
        if self.kind == "hexagonal":
            return {"kind": "hexagonal"}
        return self.spec.to_dict()


def hexagonal() -> GraphGenerator:
    """The flat lattice: every vertex has degree 6."""
    return GraphGenerator("hexagonal")


def layered(spec: LayerSpec) -> GraphGenerator:
    return GraphGenerator("layered", spec)


def ring_stack(spec: ExcessSpec) -> GraphGenerator:
    return GraphGenerator("ring_stack", spec)


def build_window(generator: GraphGenerator, radius: int) -> TriangulationWindow:
    """Window of the generator's triangulation with complete_radius = radius."""
    return generator.build(radius)


def generator_from_dict(data: dict[str, Any]) -> GraphGenerator:
    kind = str(data.get("kind", "")).replace("-", "_")
    if kind == "hexagonal":
        return hexagonal()
    if kind == "layered":
        return layered(LayerSpec.from_dict(data))
    if kind == "ring_stack":
        return ring_stack(ExcessSpec.from_dict(data))
    raise SpecError(f"unknown generator kind {data.get('kind')!r}")


# ---------------------------------------------------------------------------
# rows of equal squares: rectangles, rings, ring stacks


@dataclass(frozen=True)
class SquareTiling:
    """Rows of equal squares stacked bottom to top.

    Row i holds ``counts[i]`` squares of side 1/counts[i].  On a rectangle of
    width 1 the squares sit at [j/c, (j+1)/c); on a ring of circumference 1
    row i is rotated by ``offsets[i]``.  The total height is sum 1/counts[i].
    """

    shape: str
    counts: tuple[int, ...]
    offsets: tuple[Fraction, ...] = ()

    def __post_init__(self):
        if self.shape not in ("rectangle", "ring"):
            raise SpecError(f"unknown tiling shape {self.shape!r}")
        if not self.counts or min(self.counts) < 1:
            raise SpecError("every row needs at least one square")
        if self.shape == "ring" and min(self.counts) < 3:
            raise SpecError("ring rows need at least 3 squares")
        if self.offsets and len(self.offsets) != len(self.counts):
            raise SpecError("one offset per row")

    def offset(self, i: int) -> Fraction:
        return Fraction(self.offsets[i]) if self.offsets else Fraction(0)

    @property
    def height(self) -> Fraction:
        return sum((Fraction(1, c) for c in self.counts), Fraction(0))

    def squares(self) -> list[dict[str, Any]]:
        out = []
        for i, c in enumerate(self.counts):
            for j in range(c):
                out.append({"row": i, "index": j, "side": Fraction(1, c),
                            "start": self.offset(i) + Fraction(j, c)})
        return out

    def to_dict(self) -> dict[str, Any]:
        return {"shape": self.shape, "counts": list(self.counts),
                "offsets": [f"{Fraction(o).numerator}/{Fraction(o).denominator}" for o in self.offsets]}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SquareTiling":
        offsets = tuple(Fraction(o) for o in data.get("offsets", ()))
        return cls(data["shape"], tuple(int(c) for c in data["counts"]), offsets)


def stack_offsets(counts: Sequence[int]) -> tuple[Fraction, ...]:
    """Ring rotations o_1 = 0, o_{n+1} = o_n + 1/(2 a_n a_{n+1}).

    Corners of consecutive rings then never line up, since
    j a_{n+1} - k a_n = 1/2 has no integer solutions.
    """
    out = [Fraction(0)]
    for a, b in zip(counts, counts[1:]):
        out.append(out[-1] + Fraction(1, 2 * a * b))
    return tuple(out)


def rectangle_tiling(counts: Sequence[int]) -> SquareTiling:
    return SquareTiling("rectangle", tuple(counts))


def ring_tiling(counts: Sequence[int]) -> SquareTiling:
    return SquareTiling("ring", tuple(counts), stack_offsets(counts))


def _covering_run(start: Fraction, end: Fraction, count: int, offset: Fraction,
                  cyclic: bool) -> list[int]:
    """Indices of squares in a row that overlap [start, end) in positive length."""
    lo = (start - offset) * count
    hi = (end - offset) * count
    first = math.floor(lo)
    last = math.ceil(hi) - 1
    if cyclic:
        if lo.denominator == 1 or hi.denominator == 1:
            raise FourCornerError("square corners of neighbouring rows coincide")
        return [k % count for k in range(first, last + 1)]
    inner = [x for x in (lo, hi) if 0 < x < count and x.denominator == 1]
    if inner:
        raise FourCornerError("square corners of neighbouring rows coincide")
    return list(range(max(first, 0), min(last, count - 1) + 1))


def _rows_rotation(tiling: SquareTiling, apex: bool, frontier: bool) -> tuple[list[list[int]], list[list[int]]]:
    """Rotation system of the contact graph of a row tiling.

    Returns (rotation, rows) with rows[i] the vertex ids of row i.  With
    ``apex`` a vertex 0 is joined to all of row 0; with ``frontier`` the
    last row is left open with a gap above it.
    """
    cyclic = tiling.shape == "ring"
    base = 1 if apex else 0
    rows: list[list[int]] = []
    for c in tiling.counts:
        rows.append(list(range(base, base + c)))
        base += c
    rotation: list[list[int]] = [[] for _ in range(base)]
    if apex:
        rotation[0] = list(rows[0])

    def run(i_from: int, j: int, i_to: int) -> list[int]:
        c = tiling.counts[i_from]
        start = tiling.offset(i_from) + Fraction(j, c)
        idx = _covering_run(start, start + Fraction(1, c), tiling.counts[i_to],
                            tiling.offset(i_to), cyclic)
        return [rows[i_to][k] for k in idx]

    n_rows = len(rows)
    for i, row in enumerate(rows):
        c = len(row)
        for j, v in enumerate(row):
            if i > 0:
                down = run(i, j, i - 1)[::-1]
            else:
                down = [0] if apex else []
            if i + 1 < n_rows:
                up = run(i, j, i + 1)
            else:
                up = [GAP] if frontier else []
            if cyclic:
                nxt, prv = [row[(j + 1) % c]], [row[j - 1]]
            else:
                nxt = [row[j + 1]] if j + 1 < c else []
                prv = [row[j - 1]] if j > 0 else []
            rotation[v] = nxt + down + prv + up
    return rotation, rows


def _ring_stack_window(spec: ExcessSpec, radius: int) -> TriangulationWindow:
    if radius < 1:
        raise SpecError("radius must be at least 1")
    available = spec.available()
    if available is not None and radius > available:
        raise SpecExhausted(f"a_n known for n <= {available}")
    counts = spec.a_values(radius)
    tiling = ring_tiling(counts)
    rotation, rows = _rows_rotation(tiling, apex=True, frontier=True)
    meta = {"kind": "ring_stack", "spec": spec, "tiling": tiling, "rows": rows,
            "spheres": [[0]] + rows}
    return TriangulationWindow(rotation, 0, radius, meta)


def square_tiling_contact_graph(tiling: SquareTiling) -> TriangulationWindow:
    """Contact graph of a row tiling: squares are vertices, touching squares are adjacent.

    The root is the first square of the bottom row.  The window is finite;
    the faces outside the tiling (and the hole of a ring) are excluded from
    every face count.
    """
    rotation, rows = _rows_rotation(tiling, apex=False, frontier=False)
    meta: dict[str, Any] = {"kind": "tiling", "tiling": tiling, "rows": rows}
    if tiling.shape == "ring":
        # rows run counterclockwise with the next row on their right, so the
        # hole lies left of the bottom cycle and the outside left of the reversed top
        meta["outer_dart"] = (rows[-1][1], rows[-1][0])
        meta["hole_darts"] = [(rows[0][0], rows[0][1])]
        return TriangulationWindow(rotation, rows[0][0], None, meta)
    probe = TriangulationWindow(rotation, rows[0][0], None)
    a = rows[0][0]
    b = rows[0][1] if len(rows[0]) > 1 else (rows[1][0] if len(rows) > 1 else None)
    if b is not None:
        rim = set(rows[0]) | set(rows[-1])
        darts = [(a, b), (b, a)]
        darts = [x for x in darts if rim <= set(probe.face_left(*x))]
        meta["outer_dart"] = max(darts, key=lambda x: len(probe.face_left(*x)))
    return TriangulationWindow(rotation, rows[0][0], None, meta)


def tiling_rows(window: TriangulationWindow) -> list[list[int]]:
    rows = window.meta.get("rows")
    if rows is None:
        raise SpecError("window does not carry a square tiling")
    return rows


# ---------------------------------------------------------------------------
# triangular meshes

# direction codes around a mesh vertex (r, t), counterclockwise
_DIRS = ((1, 0), (1, 1), (0, 1), (-1, 0), (-1, -1), (0, -1))


@dataclass(frozen=True)
class MeshSpec:
    """Triangular mesh of a given size, with ``folds`` copies around the apex."""

    size: int
    folds: int = 1
    closed: bool = False
    separated: bool = False

    def __post_init__(self):
        if self.size < 0:
            raise SpecError("mesh size must be nonnegative")
        if self.folds < 1:
            raise SpecError("fold count must be positive")
        if self.closed and self.separated:
            raise SpecError("a closed mesh cannot be separated")
        if self.closed and self.folds < 3:
            raise SpecError("a closed mesh needs at least 3 folds")


def _mesh_neighbors(r: int, t: int, size: int) -> list[tuple[int, int, int]]:
    """(direction, r', t') for the in-range neighbours of (r, t) in one sector."""
    out = []
    for k, (dr, dt) in enumerate(_DIRS):
        rr, tt = r + dr, t + dt
        if 0 <= rr <= size and 0 <= tt <= rr:
            out.append((k, rr, tt))
    return out


def triangular_mesh(spec: MeshSpec) -> TriangulationWindow:
    """The (d-fold, closed or separated) triangular mesh as a finite window.

    Sector s holds vertices (s, r, t) with 0 <= t <= r <= size, rows of
    1, 2, ..., size+1 vertices.  Pasting identifies (s, r, r) with
    (s+1, r, 0); the apex is shared by every sector.  ``meta["labels"]``
    gives the canonical (s, r, t) of every vertex id.
    """
    n, d = spec.size, spec.folds
    pasted = not spec.separated

    def canon(s: int, r: int, t: int) -> tuple[int, int, int]:
        if r == 0:
            return (0, 0, 0)
        if pasted and t == r and (s + 1 < d or spec.closed):
            return ((s + 1) % d, r, 0)
        return (s, r, t)

    labels = sorted({canon(s, r, t) for s in range(d) for r in range(n + 1) for t in range(r + 1)},
                    key=lambda x: (x[1], x[0], x[2]))
    ids = {lab: i for i, lab in enumerate(labels)}

    def instances(lab: tuple[int, int, int]) -> list[tuple[int, int, int, int]]:
        """(sort offset, s, r, t) for every sector copy of a canonical vertex."""
        s, r, t = lab
        if r == 0:
            return [(k, k, 0, 0) for k in range(d)]
        out = [(s, s, r, t)]
        if pasted and t == 0:
            if s > 0:
                out.insert(0, (s - 1, s - 1, r, r))
            elif spec.closed:
                out = [(d - 1, d - 1, r, r), (d, 0, r, 0)]
        return out

    rotation: list[list[int]] = []
    for lab in labels:
        keyed: dict[int, Any] = {}
        for off, s, r, t in instances(lab):
            for k, rr, tt in _mesh_neighbors(r, t, n):
                u = ids[canon(s, rr, tt)]
                key = (s, k) if spec.separated else off + k
                if u not in keyed or key < keyed[u]:
                    keyed[u] = key
        rotation.append(sorted(keyed, key=keyed.__getitem__))
    meta: dict[str, Any] = {"kind": "mesh", "spec": spec, "labels": labels, "ids": ids}
    if n >= 1:
        if spec.closed:
            meta["outer_dart"] = (ids[canon(0, n, 1)], ids[canon(0, n, 0)])
        else:
            meta["outer_dart"] = (ids[canon(0, 1, 0)], 0)
    return TriangulationWindow(rotation, 0, None, meta)


def mesh_rows(window: TriangulationWindow) -> list[list[int]]:
    """Vertex ids of a mesh grouped by distance from the apex."""
    out: dict[int, list[int]] = {}
    for v, lab in enumerate(window.meta["labels"]):
        out.setdefault(lab[1], []).append(v)
    return [out[r] for r in sorted(out)]


# ---------------------------------------------------------------------------
# the comparison graph of a layered triangulation


@dataclass
class ComparisonGraph:
    """The unfolded graph 𝒜_n with its homomorphism onto the layered window.

    ``phi[w]`` is the image of 𝒜-vertex w in ``target``; ``terminals`` is
    𝒯_n, the vertices at distance θ_n from the apex w_0 = 0.
    """

    window: TriangulationWindow
    phi: list[int]
    target: TriangulationWindow
    spec: LayerSpec
    n: int
    thetas: list[int]
    terminals: list[int]
    generation_counts: list[int] = field(default_factory=list)

    def preimage_counts(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for v in self.phi:
            out[v] = out.get(v, 0) + 1
        return out

    def check_homomorphism(self) -> bool:
        return all(self.target.has_edge(self.phi[a], self.phi[b]) for a, b in self.window.edges)

    def check_distances(self) -> bool:
        return all(self.window.dist[w] == self.target.dist[self.phi[w]] for w in range(len(self.window)))

    def check_surjective(self) -> bool:
        ball = {v for v, dv in enumerate(self.target.dist) if dv <= self.thetas[-1]}
        return set(self.phi) == ball


def comparison_graph(spec: LayerSpec, n: int) -> ComparisonGraph:
    """Build 𝒜_n: separated meshes unfolded generation by generation.

    Generation 1 is the separated (k0+6)-fold mesh of size h_1 at w_0.  A
    vertex v of S_{θ_k} with D = d_k (two parents) or d_k + 1 (one parent)
    receives D separated meshes of size h_{k+1}; when v has two preimages
    the counterclockwise-first one (a row end) gets one mesh and the other
    gets the remaining d_k.
    """
    if n < 1:
        raise SpecError("n must be at least 1")
    thetas = _first_thetas(spec, n)
    target = layered(spec).build(thetas[-1] + 1)
    spheres = target.meta["spheres"]
    children = target.meta["children"]
    parents = target.meta["parents"]
    sphere_pos = {}
    for m, sph in enumerate(spheres):
        for i, v in enumerate(sph):
            sphere_pos[v] = i

    labels: list[tuple[int, int, int, int]] = [(0, 0, 0, 0)]  # (mesh id, s, r, t)
    phi: list[int] = [0]
    rotation: list[list[int]] = [[]]
    generation_counts: list[int] = []
    mesh_count = 0

    def attach(w: int, sectors: Sequence[int], size: int, image: Callable[[int, int, int], int]) -> list[int]:
        """Attach separated mesh sectors at w; returns the new last-row vertices with their labels."""
        nonlocal mesh_count
        local: dict[tuple[int, int, int], int] = {}
        for s in sectors:
            for r in range(1, size + 1):
                for t in range(r + 1):
                    local[(s, r, t)] = len(labels)
                    labels.append((mesh_count, s, r, t))
                    phi.append(image(s, r, t))
                    rotation.append([])
        for (s, r, t), x in local.items():
            nb = []
            for k, rr, tt in _mesh_neighbors(r, t, size):
                nb.append(w if rr == 0 else local[(s, rr, tt)])
            rotation[x] = nb
        for s in sectors:
            rotation[w].extend([local[(s, 1, 0)], local[(s, 1, 1)]])
        mesh_count += 1
        return [local[(s, size, t)] for s in sectors for t in range(size + 1)]

    M = spec.k0 + 6
    h1 = thetas[0]

    def first_image(s: int, r: int, t: int) -> int:
        sph = spheres[r]
        return sph[(s * r + t) % len(sph)]

    last_row = attach(0, range(M), h1, first_image)
    generation_counts.append(M)
    for k in range(1, n):
        theta = thetas[k - 1]
        size = thetas[k] - theta
        d_k = spec.d_at(k)
        by_image: dict[int, list[int]] = {}
        for w in last_row:
            by_image.setdefault(phi[w], []).append(w)
        new_last: list[int] = []
        count = 0
        for v in spheres[theta]:
            pre = by_image.get(v, [])
            folds = d_k + (1 if len(parents[v]) == 1 else 0)
            count += folds
            starts = [children[v][0]]
            for _ in range(1, size):
                starts.append(children[starts[-1]][0])

            def image(s: int, r: int, t: int, starts=starts) -> int:
                sph = spheres[theta + r]
                return sph[(sphere_pos[starts[r - 1]] + s * r + t) % len(sph)]

            if len(pre) == 1:
                new_last += attach(pre[0], range(folds), size, image)
            elif len(pre) == 2:
                ends = [w for w in pre if labels[w][3] == labels[w][2]]
                if len(ends) != 1 or len(parents[v]) != 1:
                    raise InvalidWindow(f"unexpected preimages of vertex {v}")
                first = ends[0]
                second = pre[0] if pre[1] == first else pre[1]
                new_last += attach(first, [0], size, image)
                new_last += attach(second, range(1, folds), size, image)
            else:
                raise InvalidWindow(f"vertex {v} has {len(pre)} preimages")
        generation_counts.append(count)
        last_row = new_last
    window = TriangulationWindow(rotation, 0, None, {"kind": "comparison", "labels": labels})
    terminals = [w for w in range(len(window)) if window.dist[w] == thetas[-1]]
    return ComparisonGraph(window, phi, target, spec, n, thetas, terminals, generation_counts)


def _first_thetas(spec: LayerSpec, n: int) -> list[int]:
    out, total = [], 0
    for k in range(1, n + 1):
        total += spec.h_at(k)
        out.append(total)
    return out


__all__ = [
    "GraphGenerator", "hexagonal", "layered", "ring_stack", "build_window", "generator_from_dict",
    "SquareTiling", "rectangle_tiling", "ring_tiling", "stack_offsets", "square_tiling_contact_graph",
    "MeshSpec", "triangular_mesh", "mesh_rows", "ComparisonGraph", "comparison_graph",
    "FourCornerError", "hexagonal_layer_spec",
]
