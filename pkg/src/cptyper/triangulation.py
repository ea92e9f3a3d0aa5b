"""Finite windows of infinite planar triangulations as rotation systems.

A window stores, for every vertex, its neighbours in counterclockwise order.
Vertices far from the root only know part of their neighbourhood; the unknown
stretches of their rotation are marked with ``GAP``.  Faces are traced with
the rule "after arriving at v from u, leave along the neighbour preceding u
in the rotation at v", which keeps the traced face on the left.
"""
from __future__ import annotations

import json
import math
import random
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, Sequence

GAP = -1


class WindowError(ValueError):
    """Raised when an operation needs data the window does not hold."""


class InvalidWindow(ValueError):
    """Raised when a rotation system violates the window invariants."""


def edge_key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


def face_key(cycle: Sequence[int]) -> tuple[int, ...]:
    """Canonical form of a face: its cyclic vertex sequence rotated to start at the minimum."""
    low = min(cycle)
    return min(tuple(cycle[i:]) + tuple(cycle[:i]) for i, x in enumerate(cycle) if x == low)


class TriangulationWindow:
    """Rotation-system window around a root vertex.

    Parameters
    ----------
    rotation
        Counterclockwise neighbour lists, one per vertex id ``0..n-1``.
        ``GAP`` entries mark stretches of unknown neighbours.
    root
        The distinguished vertex v0.
    complete_radius
        Vertices at distance ``< complete_radius`` from the root carry full
        data.  ``None`` declares a finite graph where every vertex is complete.
    meta
        Free-form generator data (specs, sphere lists, tiling geometry).
    """

    def __init__(self, rotation: Sequence[Sequence[int]], root: int = 0,
                 complete_radius: int | None = None, meta: dict[str, Any] | None = None,
                 *, validate: bool = True):
        self.rotation: tuple[tuple[int, ...], ...] = tuple(tuple(int(x) for x in r) for r in rotation)
        self.root = int(root)
        self.complete_radius = complete_radius
        self.meta: dict[str, Any] = dict(meta or {})
        n = len(self.rotation)
        if not 0 <= self.root < n:
            raise InvalidWindow("root out of range")
        self._pos: list[dict[int, int]] = []
        for v, rot in enumerate(self.rotation):
            pos = {}
            for i, u in enumerate(rot):
                if u == GAP:
                    continue
                if not 0 <= u < n:
                    raise InvalidWindow(f"vertex {v} lists unknown neighbour {u}")
                if u == v:
                    raise InvalidWindow(f"self-loop at {v}")
                if u in pos:
                    raise InvalidWindow(f"repeated edge {v}-{u}")
                pos[u] = i
            self._pos.append(pos)
        self._face_cache: dict[tuple[int, int], tuple[int, ...] | None] = {}
        self._face_id_cache: dict[tuple[int, int], tuple[int, ...] | None] = {}
        self._pattern_cache: dict[int, tuple[int, tuple[int, ...]]] = {}
        self.dist = self._bfs(self.root)
        if validate:
            self._validate()

    # -- basic structure -------------------------------------------------

    def __len__(self) -> int:
        return len(self.rotation)

    @property
    def n_vertices(self) -> int:
        return len(self.rotation)

    def __repr__(self) -> str:
        return (f"TriangulationWindow(n_vertices={len(self)}, root={self.root}, "
                f"complete_radius={self.complete_radius})")

    def neighbors(self, v: int) -> list[int]:
        return [u for u in self.rotation[v] if u != GAP]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._pos[u]

    def position(self, v: int, u: int) -> int:
        """Index of u in the rotation at v."""
        try:
            return self._pos[v][u]
        except KeyError:
            raise WindowError(f"{u} is not a neighbour of {v}") from None

    def is_complete(self, v: int) -> bool:
        if self.complete_radius is None:
            return GAP not in self.rotation[v]
        return self.dist[v] < self.complete_radius and GAP not in self.rotation[v]

    def require_complete(self, vertices: Iterable[int]) -> None:
        for v in vertices:
            if not self.is_complete(v):
                raise WindowError(f"vertex {v} lies outside the completed region")

    def degree(self, v: int) -> int:
        if not self.is_complete(v):
            raise WindowError(f"degree of frontier vertex {v} is not known")
        return len(self.rotation[v])

    @cached_property
    def edges(self) -> tuple[tuple[int, int], ...]:
        out = set()
        for v in range(len(self)):
            for u in self._pos[v]:
                out.add(edge_key(u, v))
        return tuple(sorted(out))

    @cached_property
    def complete_vertices(self) -> tuple[int, ...]:
        return tuple(v for v in range(len(self)) if self.is_complete(v))

    def _bfs(self, source: int) -> list[int]:
        dist = [-1] * len(self)
        dist[source] = 0
        queue = deque([source])
        while queue:
            v = queue.popleft()
            for u in self._pos[v]:
                if dist[u] < 0:
                    dist[u] = dist[v] + 1
                    queue.append(u)
        return dist

    def distances_from(self, source: int) -> list[int]:
        """Graph distances inside the window (-1 for unreachable)."""
        return self.dist if source == self.root else self._bfs(source)

    def _validate(self) -> None:
        for v, pos in enumerate(self._pos):
            for u in pos:
                if v not in self._pos[u]:
                    raise InvalidWindow(f"edge {v}-{u} listed on one side only")
        if min(self.dist) < 0:
            raise InvalidWindow("some vertex is unreachable from the root")
        if self.complete_radius is not None:
            for v in range(len(self)):
                if self.dist[v] < self.complete_radius and GAP in self.rotation[v]:
                    raise InvalidWindow(f"vertex {v} at distance {self.dist[v]} has unknown neighbours")
                if self.dist[v] > self.complete_radius:
                    raise InvalidWindow(f"vertex {v} lies beyond the window radius")
        if self.complete_radius is None:
            return
        for v in self.complete_vertices:
            if len(self.rotation[v]) < 3:
                raise InvalidWindow(f"vertex {v} has degree {len(self.rotation[v])} < 3")

    # -- faces -----------------------------------------------------------

    def next_dart(self, u: int, v: int) -> tuple[int, int] | None:
        """Dart following u->v along the face on its left (None across a gap)."""
        rot = self.rotation[v]
        w = rot[self.position(v, u) - 1]
        return None if w == GAP else (v, w)

    def face_left(self, u: int, v: int) -> tuple[int, ...] | None:
        """Vertex cycle of the face to the left of the dart u->v, starting at u.

        Returns None when the face runs through a gap in a frontier rotation.
        """
        key = (u, v)
        if key in self._face_cache:
            return self._face_cache[key]
        cycle = [u]
        dart = (u, v)
        limit = 2 * len(self.edges) + 2
        for _ in range(limit):
            nxt = self.next_dart(*dart)
            if nxt is None:
                self._face_cache[key] = None
                return None
            if nxt == (u, v):
                break
            cycle.append(nxt[0])
            dart = nxt
        else:  # pragma: no cover - defensive
            raise InvalidWindow("face tracing did not close")
        out = tuple(cycle)
        self._face_cache[key] = out
        return out

    def face_id(self, u: int, v: int) -> tuple[int, ...] | None:
        """Canonical key of the face left of u->v (None across a gap)."""
        key = (u, v)
        out = self._face_id_cache.get(key, False)
        if out is False:
            face = self.face_left(u, v)
            out = None if face is None else face_key(face)
            self._face_id_cache[key] = out
        return out

    def sector_face(self, v: int, i: int) -> tuple[int, ...]:
        """Face in the corner at v between rotation entries i and i+1."""
        u = self.rotation[v][i]
        face = self.face_left(v, u)
        if face is None:
            raise WindowError(f"face at corner ({v}, {i}) is not known")
        return face

    def faces_at(self, v: int) -> list[tuple[int, ...]]:
        """Faces around a complete vertex, in counterclockwise corner order."""
        if not self.is_complete(v):
            raise WindowError(f"faces around frontier vertex {v} are not known")
        return [self.sector_face(v, i) for i in range(len(self.rotation[v]))]

    def corner_pattern(self, v: int) -> tuple[int, tuple[int, ...]]:
        """(deg v, sorted sizes of the faces at v); all κ(v) depends on."""
        out = self._pattern_cache.get(v)
        if out is None:
            out = (self.degree(v), tuple(sorted(len(f) for f in self.faces_at(v))))
            self._pattern_cache[v] = out
        return out

    @cached_property
    def faces(self) -> tuple[tuple[int, ...], ...]:
        """Every face incident to a complete vertex, canonicalised."""
        out = set()
        for v in self.complete_vertices:
            for f in self.faces_at(v):
                out.add(face_key(f))
        return tuple(sorted(out))

    def is_triangulation(self) -> bool:
        """True when every face at a complete vertex is a triangle (declared boundary faces excepted)."""
        skip = self.excluded_faces()
        return all(len(f) == 3 for f in self.faces if f not in skip)

    def outer_face(self) -> tuple[int, ...] | None:
        """The unbounded face of a finite window, when declared in ``meta``."""
        dart = self.meta.get("outer_dart")
        if dart is None:
            return None
        face = self.face_left(*dart)
        return None if face is None else face_key(face)

    @cached_property
    def _excluded(self) -> frozenset[tuple[int, ...]]:
        out = set()
        outer = self.outer_face()
        if outer is not None:
            out.add(outer)
        for dart in self.meta.get("hole_darts", ()):
            face = self.face_left(*dart)
            if face is not None:
                out.add(face_key(face))
        return frozenset(out)

    @cached_property
    def irregular_vertices(self) -> frozenset[int]:
        """Vertices next to a gap, a non-triangular face or an excluded face."""
        out = set()
        skip = self.excluded_faces()
        for v, rot in enumerate(self.rotation):
            if GAP in rot:
                out.add(v)
                continue
            for u in rot:
                f = self.face_left(v, u)
                if f is None or len(f) != 3 or face_key(f) in skip:
                    out.add(v)
                    break
        return frozenset(out)

    def excluded_faces(self) -> frozenset[tuple[int, ...]]:
        """Faces that are not cells of the surface: the outer face and declared holes."""
        return self._excluded

    def check_triangulation(self) -> None:
        skip = self.excluded_faces()
        for f in self.faces:
            if f in skip:
                continue
            if len(f) != 3 or len(set(f)) != 3:
                raise InvalidWindow(f"bounded face {f} is not a triangle on 3 distinct vertices")

    # -- selections --------------------------------------------------------

    def induced(self, vertices: Iterable[int]) -> "SubgraphSelection":
        return SubgraphSelection.induced_by(self, vertices)

    def selection(self, vertices: Iterable[int], edges: Iterable[tuple[int, int]]) -> "SubgraphSelection":
        return SubgraphSelection(self, vertices, edges)

    # -- serialisation -----------------------------------------------------

    def to_dict(self, with_lists: bool = True) -> dict[str, Any]:
        out: dict[str, Any] = {
            "n_vertices": len(self),
            "root": self.root,
            "complete_radius": self.complete_radius,
            "rotation": [list(r) for r in self.rotation],
        }
        if self.meta.get("outer_dart") is not None:
            out["outer_dart"] = list(self.meta["outer_dart"])
        if with_lists:
            out["edges"] = [list(e) for e in self.edges]
            out["faces"] = [list(f) for f in self.faces]
        return out

    def to_json(self, with_lists: bool = True) -> str:
        return json.dumps(self.to_dict(with_lists), separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "TriangulationWindow":
        try:
            rotation = data["rotation"]
            root = int(data.get("root", 0))
        except (KeyError, TypeError) as exc:
            raise InvalidWindow(f"malformed window document: {exc}") from None
        if "n_vertices" in data and int(data["n_vertices"]) != len(rotation):
            raise InvalidWindow("n_vertices disagrees with the rotation table")
        meta = {}
        if data.get("outer_dart") is not None:
            meta["outer_dart"] = tuple(data["outer_dart"])
        radius = data.get("complete_radius")
        return cls(rotation, root, None if radius is None else int(radius), meta)

    @classmethod
    def from_json(cls, text: str) -> "TriangulationWindow":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# constructing windows from other descriptions


def truncate(rotation: Sequence[Sequence[int]], root: int, radius: int,
             meta: dict[str, Any] | None = None) -> TriangulationWindow:
    """Cut a rotation system down to the ball of the given radius around ``root``.

    Vertices are relabelled in BFS order (ties broken by rotation order at the
    discovering vertex).  Dropped neighbours of the outermost vertices become
    ``GAP`` markers.
    """
    order = [root]
    dist = {root: 0}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        if dist[v] == radius:
            continue
        for u in rotation[v]:
            if u != GAP and u not in dist:
                dist[u] = dist[v] + 1
                order.append(u)
                queue.append(u)
    label = {v: i for i, v in enumerate(order)}
    new_rot = []
    for v in order:
        out: list[int] = []
        for u in rotation[v]:
            if u != GAP and u in label:
                out.append(label[u])
            elif not out or out[-1] != GAP:
                out.append(GAP)
        if len(out) > 1 and out[0] == GAP and out[-1] == GAP:
            out.pop()
        new_rot.append(out)
    meta = dict(meta or {})
    meta["original_ids"] = order
    return TriangulationWindow(new_rot, 0, radius, meta)


def rotation_from_plane_graph(points: Sequence[tuple[float, float]],
                              edges: Iterable[tuple[int, int]]) -> list[list[int]]:
    """Counterclockwise rotation system of a straight-line plane graph."""
    nbrs: list[set[int]] = [set() for _ in points]
    for u, v in edges:
        if u == v:
            continue
        nbrs[u].add(v)
        nbrs[v].add(u)
    rotation = []
    for v, (x, y) in enumerate(points):
        rotation.append(sorted(nbrs[v], key=lambda u: math.atan2(points[u][1] - y, points[u][0] - x)))
    return rotation


def from_plane_graph(points: Sequence[tuple[float, float]], edges: Iterable[tuple[int, int]],
                     root: int, radius: int | None = None) -> TriangulationWindow:
    """Window of a straight-line plane graph, optionally truncated to a radius."""
    rotation = rotation_from_plane_graph(points, edges)
    if radius is None:
        return TriangulationWindow(rotation, root, None)
    return truncate(rotation, root, radius)


# ---------------------------------------------------------------------------
# subgraph selections


class SubgraphSelection:
    """Vertex set V(S) and edge set E(S) inside a window; F(S) is derived."""

    def __init__(self, window: TriangulationWindow, vertices: Iterable[int],
                 edges: Iterable[tuple[int, int]], induced: bool = False):
        self.window = window
        self.vertices = frozenset(int(v) for v in vertices)
        self.edges = frozenset(edge_key(int(u), int(v)) for u, v in edges)
        self.induced = induced
        self._dart_cache: dict[tuple[int, int], bool] = {}
        self._walks: dict[bool, BoundaryWalk] = {}
        for u, v in self.edges:
            if u not in self.vertices or v not in self.vertices:
                raise ValueError(f"edge {u}-{v} has an endpoint outside V(S)")
            if not window.has_edge(u, v):
                raise ValueError(f"{u}-{v} is not an edge of the window")

    @classmethod
    def induced_by(cls, window: TriangulationWindow, vertices: Iterable[int]) -> "SubgraphSelection":
        vs = frozenset(vertices)
        edges = [(u, v) for v in vs for u in window.neighbors(v) if u in vs and u < v]
        return cls(window, vs, edges, induced=True)

    def __len__(self) -> int:
        return len(self.vertices)

    def __repr__(self) -> str:
        return f"SubgraphSelection(|V|={len(self.vertices)}, |E|={len(self.edges)}, induced={self.induced})"

    def has_edge(self, u: int, v: int) -> bool:
        return edge_key(u, v) in self.edges

    def require_complete(self) -> None:
        self.window.require_complete(self.vertices)

    def _face_in(self, u: int, v: int) -> tuple[int, ...] | None:
        """The face left of u->v if all its edges lie in E(S), else None."""
        if edge_key(u, v) not in self.edges:
            return None
        f = self.window.face_left(u, v)
        if f is None:
            return None
        edges = self.edges
        last = len(f) - 1
        for i in range(last):
            if edge_key(f[i], f[i + 1]) not in edges:
                return None
        if edge_key(f[last], f[0]) not in edges:
            return None
        return f

    @cached_property
    def faces(self) -> frozenset[tuple[int, ...]]:
        """F(S): faces all of whose edges lie in E(S)."""
        out = set()
        seen: set[tuple[int, int]] = set()
        cache = self._dart_cache
        excluded = self.window.excluded_faces()
        for a, b in self.edges:
            for u, v in ((a, b), (b, a)):
                if (u, v) in seen:
                    continue
                f = self._face_in(u, v)
                if f is None:
                    cache[(u, v)] = False
                    continue
                key = self.window.face_id(u, v)
                inside = key not in excluded
                # every dart of the face gets the same answer
                for i in range(len(f)):
                    dart = (f[i], f[(i + 1) % len(f)])
                    seen.add(dart)
                    cache[dart] = inside
                if inside:
                    out.add(key)
        return frozenset(out)

    def dart_face_in(self, u: int, v: int) -> bool:
        """Whether the face to the left of u->v belongs to F(S)."""
        cache = self._dart_cache
        hit = cache.get((u, v))
        if hit is None:
            hit = self._face_in(u, v) is not None and self.window.face_id(u, v) not in self.window.excluded_faces()
            cache[(u, v)] = hit
        return hit

    def corner_in(self, v: int, i: int) -> bool:
        """Whether the face in corner i at v (between entries i and i+1) is in F(S)."""
        u = self.window.rotation[v][i]
        return u != GAP and self.dart_face_in(v, u)

    def is_connected(self) -> bool:
        if not self.vertices:
            return False
        adj = self.adjacency()
        start = next(iter(self.vertices))
        seen = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for u in adj[v]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return len(seen) == len(self.vertices)

    def adjacency(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {v: [] for v in self.vertices}
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return adj

    def reduced(self) -> "SubgraphSelection":
        """S_0: drop the vertices and edges not incident to a face of F(S)."""
        verts, edges = set(), set()
        for f in self.faces:
            verts.update(f)
            for i in range(len(f)):
                edges.add(edge_key(f[i], f[(i + 1) % len(f)]))
        return SubgraphSelection(self.window, verts, edges)

    def interior_edges(self) -> set[tuple[int, int]]:
        """Edges of S with faces of F(S) on both sides."""
        outside = {e for e in _candidate_edges(self)
                   if not (self.dart_face_in(*e) and self.dart_face_in(e[1], e[0]))}
        return set(self.edges) - outside


# ---------------------------------------------------------------------------
# balls and spheres


def _check_ball_range(window: TriangulationWindow, n: int, v0: int) -> None:
    if n < 0:
        raise ValueError("radius must be nonnegative")
    if v0 != window.root:
        limit = None if window.complete_radius is None else window.complete_radius - window.dist[v0]
    else:
        limit = window.complete_radius
    if limit is not None and n + 1 > limit:
        raise WindowError(f"ball of radius {n} needs complete_radius >= {n + 1 + window.dist[v0]}")


def sphere(window: TriangulationWindow, v0: int, n: int) -> frozenset[int]:
    """S_n(v0): vertices at distance exactly n."""
    _check_ball_range(window, n, v0)
    dist = window.distances_from(v0)
    return frozenset(v for v, d in enumerate(dist) if d == n)


def ball(window: TriangulationWindow, v0: int, n: int) -> SubgraphSelection:
    """B_n(v0) as an induced selection."""
    _check_ball_range(window, n, v0)
    dist = window.distances_from(v0)
    return window.induced(v for v, d in enumerate(dist) if 0 <= d <= n)


def spheres(window: TriangulationWindow, v0: int | None = None) -> list[list[int]]:
    """All spheres around v0 (default root) as sorted vertex lists, by distance."""
    v0 = window.root if v0 is None else v0
    dist = window.distances_from(v0)
    out: list[list[int]] = [[] for _ in range(max(dist) + 1)]
    for v, d in enumerate(dist):
        if d >= 0:
            out[d].append(v)
    return out


# ---------------------------------------------------------------------------
# boundary operators


def vertex_boundary(S: SubgraphSelection) -> frozenset[int]:
    """dS: outside vertices with a neighbour in S."""
    S.require_complete()
    w = S.window
    return frozenset(u for v in S.vertices for u in w.neighbors(v) if u not in S.vertices)


def inner_vertex_boundary(S: SubgraphSelection) -> frozenset[int]:
    """d_0 S: vertices of S with a neighbour outside S."""
    S.require_complete()
    w = S.window
    return frozenset(v for v in S.vertices if any(u not in S.vertices for u in w.neighbors(v)))


def edge_boundary(S: SubgraphSelection) -> frozenset[tuple[int, int]]:
    """∂S: edges with exactly one endpoint in S."""
    S.require_complete()
    w = S.window
    return frozenset(edge_key(u, v) for v in S.vertices for u in w.neighbors(v) if u not in S.vertices)


@dataclass(frozen=True)
class BoundaryWalk:
    """Closed walks around D(S).

    Each cycle is a vertex tuple (v_0, ..., v_{L-1}) closing back to v_0; a
    single-vertex tuple is the length-0 cycle of an isolated vertex.
    ``labels`` tag every cycle with the region it bounds: a complementary
    component for outer walks, an interior component for inner walks.
    """

    selection: SubgraphSelection
    cycles: tuple[tuple[int, ...], ...]
    labels: tuple[int, ...]
    inner: bool = False

    @staticmethod
    def cycle_length(cycle: tuple[int, ...]) -> int:
        return 0 if len(cycle) == 1 else len(cycle)

    def __len__(self) -> int:
        """|bS|: total number of edge traversals."""
        return sum(self.cycle_length(c) for c in self.cycles)

    @property
    def lengths(self) -> list[int]:
        return [self.cycle_length(c) for c in self.cycles]

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset(v for c in self.cycles for v in c)

    def visits(self) -> Iterable[tuple[int, int, int, int, int]]:
        """(cycle index, position, previous, current, next) for every visit."""
        for ci, c in enumerate(self.cycles):
            L = len(c)
            if L == 1:
                continue
            for k in range(L):
                yield ci, k, c[k - 1], c[k], c[(k + 1) % L]

    def is_simple(self, index: int) -> bool:
        c = self.cycles[index]
        return len(set(c)) == len(c) and (len(c) >= 3 or len(c) == 1)

    @cached_property
    def bounded(self) -> tuple[bool | None, ...]:
        """For outer walks: whether each cycle bounds a bounded complementary component."""
        if self.inner:
            raise ValueError("boundedness is defined for outer walks")
        return tuple(_complement_component(self.selection, c)[0] for c in self.cycles)


def _candidate_edges(S: SubgraphSelection) -> list[tuple[int, int]]:
    """Edges of S that may carry a face outside F(S) on either side.

    For an induced selection a triangle next to two inner vertices lies in
    F(S), so only edges touching d0 S or an irregular vertex qualify.
    """
    if not S.induced:
        return sorted(S.edges)
    w = S.window
    irregular = w.irregular_vertices
    near = {v for v in S.vertices if v in irregular or any(u not in S.vertices for u in w.rotation[v])}
    return sorted(e for e in S.edges if e[0] in near or e[1] in near)


def _boundary_darts(S: SubgraphSelection) -> list[tuple[int, int]]:
    """Darts u->v of E(S) whose right-hand face is not in F(S), in a fixed order."""
    out = []
    for a, b in _candidate_edges(S):
        for u, v in ((a, b), (b, a)):
            if not S.dart_face_in(v, u):
                out.append((u, v))
    return out


def boundary_walk(S: SubgraphSelection) -> BoundaryWalk:
    """bS: walks around each complementary component, with D(S) on the left."""
    if not S.vertices:
        raise ValueError("empty selection")
    if False in S._walks:
        return S._walks[False]
    S.require_complete()
    w = S.window
    cycles: list[tuple[int, ...]] = []
    used: set[tuple[int, int]] = set()
    touched = {v for e in S.edges for v in e}
    for v in sorted(S.vertices - touched):
        cycles.append((v,))
    for dart in _boundary_darts(S):
        if dart in used:
            continue
        walk = []
        u, v = dart
        while (u, v) not in used:
            used.add((u, v))
            walk.append(u)
            rot = w.rotation[v]
            deg = len(rot)
            i = w.position(v, u)
            for step in range(1, deg + 1):
                x = rot[(i + step) % deg]
                if edge_key(v, x) in S.edges:
                    break
            u, v = v, x
        cycles.append(tuple(walk))
    labels = _label_outer(S, cycles)
    S._walks[False] = BoundaryWalk(S, tuple(cycles), labels, inner=False)
    return S._walks[False]


def _label_outer(S: SubgraphSelection, cycles: list[tuple[int, ...]]) -> tuple[int, ...]:
    # every boundary cycle of a connected S bounds its own complementary
    # component; cycles of different components of S are labelled apart
    return tuple(range(len(cycles)))


def inner_boundary_walk(S: SubgraphSelection) -> BoundaryWalk:
    """b_i S: walks around each component of the interior of D(S_0), interior on the left.

    At a vertex where several fans of F(S) meet, the walk stays with the fan
    it arrived in, so distinct interior components get distinct cycles.
    """
    if True in S._walks:
        return S._walks[True]
    S.require_complete()
    w = S.window
    faces = S.faces
    if not faces:
        return BoundaryWalk(S, (), (), inner=True)
    # union-find of faces through interior edges
    parent: dict[tuple[int, ...], tuple[int, ...]] = {f: f for f in faces}

    def find(f):
        while parent[f] != f:
            parent[f] = parent[parent[f]]
            f = parent[f]
        return f

    for a, b in S.edges:
        if S.dart_face_in(a, b) and S.dart_face_in(b, a):
            ka, kb = find(w.face_id(a, b)), find(w.face_id(b, a))
            if ka != kb:
                parent[ka] = kb
    roots = sorted({find(f) for f in faces})
    comp_id = {r: i for i, r in enumerate(roots)}

    darts = []
    for a, b in _candidate_edges(S):
        for u, v in ((a, b), (b, a)):
            if S.dart_face_in(u, v) and not S.dart_face_in(v, u):
                darts.append((u, v))
    cycles, labels = [], []
    used: set[tuple[int, int]] = set()
    for dart in darts:
        if dart in used:
            continue
        label = comp_id[find(w.face_id(*dart))]
        walk = []
        u, v = dart
        while (u, v) not in used:
            used.add((u, v))
            walk.append(u)
            rot = w.rotation[v]
            deg = len(rot)
            cur = w.position(v, u)
            # rotate clockwise through corners of F(S)
            for _ in range(deg):
                prev = (cur - 1) % deg
                if S.corner_in(v, prev):
                    cur = prev
                else:
                    break
            u, v = v, rot[cur]
        cycles.append(tuple(walk))
        labels.append(label)
    S._walks[True] = BoundaryWalk(S, tuple(cycles), tuple(labels), inner=True)
    return S._walks[True]


def interior_component_count(S: SubgraphSelection) -> int:
    """Number of connected components of the interior of D(S)."""
    walk = inner_boundary_walk(S)
    return len(set(walk.labels))


def _right_side_vertices(S: SubgraphSelection, cycle: tuple[int, ...]) -> set[int]:
    w = S.window
    out: set[int] = set()
    if len(cycle) == 1:
        return {u for u in w.neighbors(cycle[0]) if u not in S.vertices}
    L = len(cycle)
    for k in range(L):
        p, v, q = cycle[k - 1], cycle[k], cycle[(k + 1) % L]
        rot = w.rotation[v]
        deg = len(rot)
        i = w.position(v, p)
        j = w.position(v, q)
        span = (j - i) % deg or deg
        for step in range(1, span):
            x = rot[(i + step) % deg]
            if x not in S.vertices:
                out.add(x)
        # the face right of p->v may contain outside vertices even if no edge leaves here
        face = w.face_left(v, p)
        if face is not None:
            out.update(x for x in face if x not in S.vertices)
    return out


def _complement_component(S: SubgraphSelection, cycle: tuple[int, ...]) -> tuple[bool | None, frozenset[int]]:
    """(bounded?, vertices) of the complementary component to the right of a boundary cycle.

    A component is unbounded when its vertices reach beyond the completed
    region.  For finite windows the declared outer face decides.
    """
    w = S.window
    seeds = _right_side_vertices(S, cycle)
    seen = set(seeds)
    stack = list(seeds)
    reaches_out = False
    while stack:
        v = stack.pop()
        if not w.is_complete(v):
            reaches_out = True
            continue
        for u in w.neighbors(v):
            if u not in S.vertices and u not in seen:
                seen.add(u)
                stack.append(u)
    if w.complete_radius is None:
        outer = w.outer_face()
        if outer is None:
            return None, frozenset(seen)
        touches = bool(seen & set(outer)) or _cycle_borders_face(S, cycle, outer)
        return (not touches), frozenset(seen)
    return (not reaches_out), frozenset(seen)


def _cycle_borders_face(S: SubgraphSelection, cycle: tuple[int, ...], face: tuple[int, ...]) -> bool:
    w = S.window
    L = len(cycle)
    if L == 1:
        return cycle[0] in face
    for k in range(L):
        f = w.face_left(cycle[(k + 1) % L], cycle[k])
        if f is not None and face_key(f) == face:
            return True
    return False


# ---------------------------------------------------------------------------
# topology


def euler_characteristic(S: SubgraphSelection) -> int:
    """χ(S) = |V(S)| - |E(S)| + |F(S)|."""
    return len(S.vertices) - len(S.edges) + len(S.faces)


def interior_vertices(S: SubgraphSelection) -> frozenset[int]:
    """S_-: the vertices of S that are not visited by bS."""
    return S.vertices - boundary_walk(S).vertices


def interior_euler_characteristic(S: SubgraphSelection) -> int:
    """Euler characteristic of the open region D(S)°, counted over open cells."""
    return len(interior_vertices(S)) - len(S.interior_edges()) + len(S.faces)


# ---------------------------------------------------------------------------
# main body and hole filling


def main_body(B: SubgraphSelection, v0: int | None = None) -> SubgraphSelection:
    """A_n: keep the part of D(B_n) around the root's interior component.

    All vertices of B_n are kept; edges are kept when they lie on the closure
    of the interior component containing v0.
    """
    w = B.window
    v0 = w.root if v0 is None else v0
    B.require_complete()
    if B.induced and v0 in B.vertices:
        fast = _main_body_from_core(B, v0)
        if fast is not None:
            return fast
    faces = B.faces
    if not faces or len(B.vertices) == 1:
        return SubgraphSelection(w, B.vertices, B.edges)
    start = [face_key(f) for f in w.faces_at(v0) if face_key(f) in faces]
    if not start:
        raise WindowError("the root is not incident to a face of the ball")
    # flood faces through interior edges
    comp = set(start)
    stack = list(start)
    while stack:
        f = stack.pop()
        for i in range(len(f)):
            a, b = f[i], f[(i + 1) % len(f)]
            g = B._face_in(b, a)
            if g is not None:
                g = face_key(g)
                if g in faces and g not in comp:
                    comp.add(g)
                    stack.append(g)
    edges = set()
    covered = set()
    for f in comp:
        covered.update(f)
        for i in range(len(f)):
            edges.add(edge_key(f[i], f[(i + 1) % len(f)]))
    missing = B.vertices - covered
    if missing:
        raise WindowError(f"vertices {sorted(missing)[:5]} are not on the main body closure")
    return SubgraphSelection(w, B.vertices, edges)


def _main_body_from_core(B: SubgraphSelection, v0: int) -> SubgraphSelection | None:
    """Main body of an induced selection through its core of inner vertices.

    A vertex whose neighbours and surrounding triangles all lie in B is an
    interior point of D(B); the stars of the inner vertices connected to v0
    all belong to the interior component of v0, so only faces away from
    that core need flooding.  Returns None when v0 is not an inner vertex.
    """
    w = B.window
    verts = B.vertices
    irregular = w.irregular_vertices

    def inner(v: int) -> bool:
        return v not in irregular and all(u in verts for u in w.rotation[v])

    if not inner(v0):
        return None
    core = {v0}
    stack = [v0]
    while stack:
        x = stack.pop()
        for y in w.rotation[x]:
            if y not in core and inner(y):
                core.add(y)
                stack.append(y)
    rest = verts - core
    # faces of F(B) with no vertex in the core
    outer_faces: dict[tuple[int, ...], tuple[int, ...]] = {}
    for v in rest:
        for u in w.rotation[v]:
            if u in rest and B._face_in(v, u) is not None:
                f = w.face_left(v, u)
                if not any(x in core for x in f):
                    key = w.face_id(v, u)
                    if key not in w.excluded_faces():
                        outer_faces[key] = f
    kept: set[tuple[int, ...]] = set()
    stack = []
    for key, f in outer_faces.items():
        for i in range(len(f)):
            a, b = f[i], f[(i + 1) % len(f)]
            other = B._face_in(b, a)
            if other is not None and any(x in core for x in other):
                kept.add(key)
                stack.append(key)
                break
    while stack:
        f = outer_faces[stack.pop()]
        for i in range(len(f)):
            a, b = f[i], f[(i + 1) % len(f)]
            if B._face_in(b, a) is None:
                continue
            g = w.face_id(b, a)
            if g in outer_faces and g not in kept:
                kept.add(g)
                stack.append(g)
    edges = set()
    for v in core:
        rot = w.rotation[v]
        for i, u in enumerate(rot):
            edges.add(edge_key(v, u))
            edges.add(edge_key(u, rot[i - 1]))
    covered = set(core)
    for key in kept:
        f = outer_faces[key]
        covered.update(f)
        for i in range(len(f)):
            edges.add(edge_key(f[i], f[(i + 1) % len(f)]))
    for e in edges:
        covered.update(e)
    if covered != verts:
        missing = sorted(verts - covered)[:5]
        raise WindowError(f"vertices {missing} are not on the main body closure")
    return SubgraphSelection(w, verts, edges)


def fill_holes(T: SubgraphSelection) -> SubgraphSelection:
    """W: T together with every bounded complementary component of D(T)."""
    if not T.induced:
        raise ValueError("fill_holes expects an induced selection")
    if not T.is_connected():
        raise ValueError("fill_holes expects a connected selection")
    T.require_complete()
    walk = boundary_walk(T)
    extra: set[int] = set()
    for c in walk.cycles:
        bounded, verts = _complement_component(T, c)
        if bounded is None:
            raise WindowError("cannot tell bounded components apart in this window")
        if bounded:
            extra |= verts
    if not extra:
        return T
    return T.window.induced(T.vertices | extra)


def interior_graph(W: SubgraphSelection) -> SubgraphSelection:
    """Z: induced on V(W) minus the vertices of bW."""
    return W.window.induced(W.vertices - boundary_walk(W).vertices)


# ---------------------------------------------------------------------------
# observations about main bodies


MAIN_BODY_CHECKS = ("edge_to_right", "on_sphere", "simple_cycles", "cycles_share_one", "core_connected",
                    "unions_meet_once")


def main_body_report(window: TriangulationWindow, n: int, v0: int | None = None) -> dict[str, Any]:
    """Check the structural facts about the main body A_n of B_n.

    Returns a dict of booleans (plus a few counts) covering: every boundary
    vertex has an edge leaving to the right (edge_to_right), boundary vertices
    lie on S_n (on_sphere), boundary cycles are simple (simple_cycles), two
    cycles share at most one vertex (cycles_share_one), removing boundary
    vertices keeps A_n connected (core_connected), a connected union of cycles
    meets another cycle in at most one vertex (unions_meet_once), and the
    sphere-size bound |S_n| >= |bA_n| - (m - 1).
    """
    v0 = window.root if v0 is None else v0
    B = ball(window, v0, n)
    A = main_body(B, v0)
    bB = boundary_walk(B)
    bA = boundary_walk(A)
    Sn = sphere(window, v0, n)
    cycles = [c for c in bA.cycles]
    m = len(cycles)
    report: dict[str, Any] = {"n": n, "m": m, "bA": len(bA), "S_n": len(Sn)}

    # at every visit some edge leaves strictly to the right
    o1 = True
    for _, _, p, v, q in bA.visits():
        rot = window.rotation[v]
        deg = len(rot)
        i, j = window.position(v, p), window.position(v, q)
        span = (j - i) % deg or deg
        if not any(rot[(i + s) % deg] not in A.vertices for s in range(1, span)):
            o1 = False
    if n == 0:
        o1 = True
    report["edge_to_right"] = o1
    report["on_sphere"] = bA.vertices <= Sn and bA.vertices == bB.vertices
    report["simple_cycles"] = all(bA.is_simple(i) for i in range(m))
    sets = [set(c) for c in cycles]
    report["cycles_share_one"] = all(len(sets[i] & sets[j]) <= 1 for i in range(m) for j in range(i + 1, m))
    # connectivity on the full boundary vertex set and every single boundary vertex
    def connected_without(K: set[int]) -> bool:
        rest = A.vertices - K
        if not rest:
            return True
        adj = A.adjacency()
        start = v0 if v0 in rest else next(iter(rest))
        seen = {start}
        stack = [start]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y in rest and y not in seen:
                    seen.add(y)
                    stack.append(y)
        return len(seen) == len(rest)
    bverts = set(bA.vertices)
    o5 = connected_without(bverts) and all(connected_without({x}) for x in bverts)
    rng = random.Random(n)
    for _ in range(10):
        if not bverts:
            break
        K = set(rng.sample(sorted(bverts), rng.randint(1, len(bverts))))
        o5 = o5 and connected_without(K)
    report["core_connected"] = o5
    # for a connected union U of cycles (via shared vertices) and a cycle outside U
    o6 = True
    if m >= 2:
        for i in range(m):
            for j in range(m):
                if i == j:
                    continue
                union = set(sets[i])
                changed = True
                members = {i}
                while changed:
                    changed = False
                    for k in range(m):
                        if k not in members and k != j and union & sets[k]:
                            union |= sets[k]
                            members.add(k)
                            changed = True
                if len(union & sets[j]) > 1:
                    o6 = False
    report["unions_meet_once"] = o6
    report["sphere_bound"] = len(Sn) >= len(bA) - (m - 1)
    report["chi"] = euler_characteristic(A) == 2 - m if n > 0 else True
    return report


# ---------------------------------------------------------------------------
# random selections for property checks


def random_connected_vertices(window: TriangulationWindow, size: int, rng: random.Random,
                              region: Sequence[int] | None = None) -> set[int]:
    """Grow a random connected vertex set of up to ``size`` vertices inside ``region``."""
    pool = list(region) if region is not None else list(window.complete_vertices)
    allowed = set(pool)
    start = rng.choice(pool)
    chosen = {start}
    frontier = [u for u in window.neighbors(start) if u in allowed]
    while len(chosen) < size and frontier:
        v = frontier.pop(rng.randrange(len(frontier)))
        if v in chosen:
            continue
        chosen.add(v)
        frontier.extend(u for u in window.neighbors(v) if u in allowed and u not in chosen)
    return chosen


def random_connected_selection(window: TriangulationWindow, size: int, rng: random.Random,
                               region: Sequence[int] | None = None,
                               drop_edges: float = 0.0) -> SubgraphSelection:
    """Random connected selection; with ``drop_edges`` > 0 some non-tree edges are removed."""
    verts = random_connected_vertices(window, size, rng, region)
    S = window.induced(verts)
    if drop_edges <= 0:
        return S
    # keep a random spanning tree, drop other edges with the given probability
    edges = sorted(S.edges)
    rng.shuffle(edges)
    parent = {v: v for v in verts}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    keep = []
    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            keep.append((u, v))
        elif rng.random() >= drop_edges:
            keep.append((u, v))
    return SubgraphSelection(window, verts, keep)
