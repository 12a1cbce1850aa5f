"""Undirected graphs, terminal augmentation and Hamiltonian-path utilities.

Nodes are dense integers ``0..n-1``. Arcs are stored as ``(min, max)`` pairs.
The sorted arc list of the original graph fixes the coordinate order of every
conductance vector used elsewhere in the package.
"""

from __future__ import annotations

import enum
import json
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    DisconnectedGraph,
    DimensionMismatch,
    DuplicateArc,
    EndpointOutOfRange,
    InconsistentEndpoints,
    MalformedGraph,
    NoHamiltonianPath,
    PathNotInGraph,
    SelfLoop,
    TooFewNodes,
)

Arc = tuple[int, int]

MIN_NODES = 3


def norm_arc(i: int, j: int) -> Arc:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph with optional endpoint hints from the file."""

    n_nodes: int
    arcs: tuple[Arc, ...]
    h_start: int | None = None
    h_end: int | None = None

    def __post_init__(self):
        seen = set()
        arcs = []
        for a in self.arcs:
            i, j = int(a[0]), int(a[1])
            if i == j:
                raise SelfLoop(f"self-loop at node {i}")
            if not (0 <= i < self.n_nodes and 0 <= j < self.n_nodes):
                raise EndpointOutOfRange(f"arc {(i, j)} has endpoint outside 0..{self.n_nodes - 1}")
            arc = norm_arc(i, j)
            if arc in seen:
                raise DuplicateArc(f"duplicate arc {arc}")
            seen.add(arc)
            arcs.append(arc)
        object.__setattr__(self, "arcs", tuple(arcs))
        for h in (self.h_start, self.h_end):
            if h is not None and not 0 <= h < self.n_nodes:
                raise EndpointOutOfRange(f"endpoint {h} outside 0..{self.n_nodes - 1}")

    @classmethod
    def from_arcs(cls, n_nodes: int, arcs: Iterable[Sequence[int]], **kw) -> "Graph":
        """Build a graph with its arcs in canonical (sorted) order."""
        return cls(n_nodes, tuple(sorted(norm_arc(int(i), int(j)) for i, j in arcs)), **kw)

    @property
    def nodes(self) -> range:
        return range(self.n_nodes)

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n_nodes)]
        for i, j in self.arcs:
            adj[i].append(j)
            adj[j].append(i)
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def arc_set(self) -> frozenset[Arc]:
        return frozenset(self.arcs)

    def degree(self, i: int) -> int:
        return len(self.adjacency[i])

    def has_arc(self, i: int, j: int) -> bool:
        return norm_arc(i, j) in self.arc_set

    def is_connected(self) -> bool:
        if self.n_nodes == 0:
            return True
        seen = {0}
        stack = [0]
        while stack:
            for j in self.adjacency[stack.pop()]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        return len(seen) == self.n_nodes

    def to_dict(self) -> dict:
        d = {"nodes": self.n_nodes, "arcs": [list(a) for a in sorted(self.arcs)]}
        if self.h_start is not None:
            d["h_start"] = self.h_start
        if self.h_end is not None:
            d["h_end"] = self.h_end
        return d


def parse_graph(text: str) -> Graph:
    """Parse the JSON graph format ``{"nodes": n, "arcs": [[i, j], ...]}``."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedGraph(f"invalid JSON: {exc}") from None
    if not isinstance(data, dict) or "nodes" not in data or "arcs" not in data:
        raise MalformedGraph('expected an object with "nodes" and "arcs"')
    n = data["nodes"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 0:
        raise MalformedGraph('"nodes" must be a non-negative integer')
    arcs = data["arcs"]
    if not isinstance(arcs, list) or not all(
        isinstance(a, list) and len(a) == 2 and all(isinstance(x, int) and not isinstance(x, bool) for x in a)
        for a in arcs
    ):
        raise MalformedGraph('"arcs" must be a list of integer pairs')
    hints = {}
    for key in ("h_start", "h_end"):
        v = data.get(key)
        if v is not None and (isinstance(v, bool) or not isinstance(v, int)):
            raise MalformedGraph(f'"{key}" must be an integer')
        hints[key] = v
    g = Graph.from_arcs(n, arcs, **hints)
    if n < MIN_NODES:
        raise TooFewNodes(f"graph has {n} nodes, at least {MIN_NODES} required")
    return g


def dump_graph(g: Graph) -> str:
    return json.dumps(g.to_dict())


def load_graph(path) -> Graph:
    with open(path) as fh:
        return parse_graph(fh.read())


class Case(enum.Enum):
    TWO_LEAVES = "TwoLeaves"
    ONE_LEAF = "OneLeaf"
    NO_LEAVES = "NoLeaves"


@dataclass(frozen=True)
class AugmentedGraph:
    """Original graph plus terminal nodes/arcs connecting the voltage source.

    ``arcs`` lists the original arcs (sorted) followed by the added arcs, so the
    first ``n_base_arcs`` coordinates of any per-arc vector are the free
    conductances.
    """

    base: Graph
    full: Graph
    v_in: int
    v_out: int
    h_start: int
    h_end: int
    case: Case
    added_nodes: tuple[int, ...]
    added_arcs: tuple[Arc, ...]
    forced_zero_arcs: frozenset[Arc] = field(default_factory=frozenset)

    @property
    def n_total(self) -> int:
        return self.full.n_nodes

    @property
    def n_base_arcs(self) -> int:
        return len(self.base.arcs)

    @cached_property
    def arcs(self) -> tuple[Arc, ...]:
        return self.base.arcs + self.added_arcs

    @cached_property
    def arc_index(self) -> dict[Arc, int]:
        return {a: k for k, a in enumerate(self.arcs)}

    @cached_property
    def tails(self) -> np.ndarray:
        return np.array([a[0] for a in self.arcs], dtype=np.intp)

    @cached_property
    def heads(self) -> np.ndarray:
        return np.array([a[1] for a in self.arcs], dtype=np.intp)

    @cached_property
    def forced_zero_mask(self) -> np.ndarray:
        """Boolean mask over the original arcs whose conductance is clamped to 0."""
        return np.array([a in self.forced_zero_arcs for a in self.base.arcs], dtype=bool)


def _default_node(n: int, exclude: set[int]) -> int:
    return min(i for i in range(n) if i not in exclude)


def augment(
    g0: Graph,
    h_start: int | None = None,
    h_end: int | None = None,
    require_connected: bool = True,
) -> AugmentedGraph:
    """Attach the voltage-source terminals to ``g0``.

    The number of degree-1 nodes decides the construction: more than two means
    no Hamiltonian path exists; two leaves become the terminals directly; a
    single leaf is the start and a new sink node hangs off ``h_end``; with no
    leaves both a source and a sink node are appended (ids ``n0`` and ``n0+1``).
    Unspecified endpoints default to the smallest node ids not otherwise forced.
    """
    n0 = g0.n_nodes
    if n0 < MIN_NODES:
        raise TooFewNodes(f"graph has {n0} nodes, at least {MIN_NODES} required")
    for h in (h_start, h_end):
        if h is not None and not 0 <= h < n0:
            raise EndpointOutOfRange(f"endpoint {h} outside 0..{n0 - 1}")
    if h_start is not None and h_start == h_end:
        raise InconsistentEndpoints("h_start and h_end must differ")
    if require_connected and not g0.is_connected():
        raise DisconnectedGraph("graph is not connected")

    leaves = [i for i in g0.nodes if g0.degree(i) == 1]
    if len(leaves) > 2:
        raise NoHamiltonianPath(f"graph has {len(leaves)} nodes of degree 1")

    forced: set[Arc] = set()
    if len(leaves) == 2:
        a, b = leaves
        for h in (h_start, h_end):
            if h is not None and h not in leaves:
                raise InconsistentEndpoints(f"node {h} is not one of the leaves {a}, {b}")
        if h_start is not None:
            s = h_start
        elif h_end is not None:
            s = a if h_end == b else b
        else:
            s = a
        t = b if s == a else a
        if g0.has_arc(s, t):
            forced.add(norm_arc(s, t))
        return AugmentedGraph(
            base=g0, full=g0, v_in=s, v_out=t, h_start=s, h_end=t,
            case=Case.TWO_LEAVES, added_nodes=(), added_arcs=(),
            forced_zero_arcs=frozenset(forced),
        )

    if len(leaves) == 1:
        (s,) = leaves
        if h_start is not None and h_start != s:
            raise InconsistentEndpoints(f"the only leaf {s} must be the start node")
        if h_end == s:
            raise InconsistentEndpoints(f"the only leaf {s} cannot be the end node")
        t = h_end if h_end is not None else _default_node(n0, {s})
        v_out = n0
        added = (norm_arc(t, v_out),)
        full = Graph(n0 + 1, g0.arcs + added)
        return AugmentedGraph(
            base=g0, full=full, v_in=s, v_out=v_out, h_start=s, h_end=t,
            case=Case.ONE_LEAF, added_nodes=(v_out,), added_arcs=added,
        )

    if h_start is None:
        h_start = _default_node(n0, {h_end} if h_end is not None else set())
    if h_end is None:
        h_end = _default_node(n0, {h_start})
    v_in, v_out = n0, n0 + 1
    added = (norm_arc(v_in, h_start), norm_arc(h_end, v_out))
    full = Graph(n0 + 2, g0.arcs + added)
    return AugmentedGraph(
        base=g0, full=full, v_in=v_in, v_out=v_out, h_start=h_start, h_end=h_end,
        case=Case.NO_LEAVES, added_nodes=(v_in, v_out), added_arcs=added,
    )


@dataclass(frozen=True)
class HamiltonianPath:
    nodes: tuple[int, ...]

    @property
    def arcs(self) -> tuple[Arc, ...]:
        return tuple(norm_arc(u, v) for u, v in zip(self.nodes, self.nodes[1:]))

    def __str__(self):
        return "->".join(map(str, self.nodes))


def brute_force_hp(g: Graph, start: int, end: int, limit: int | None = None) -> list[HamiltonianPath]:
    """All Hamiltonian paths from ``start`` to ``end``, lexicographically ordered.

    Plain backtracking over sorted adjacency lists. ``end`` is only entered as
    the last node.
    """
    n = g.n_nodes
    adj = g.adjacency
    out: list[HamiltonianPath] = []
    if start == end or n == 0:
        return out
    visited = [False] * n
    visited[start] = True
    path = [start]

    def extend(u: int) -> bool:
        if len(path) == n:
            if u == end:
                out.append(HamiltonianPath(tuple(path)))
                return limit is not None and len(out) >= limit
            return False
        for v in adj[u]:
            if visited[v] or (v == end and len(path) != n - 1):
                continue
            visited[v] = True
            path.append(v)
            done = extend(v)
            path.pop()
            visited[v] = False
            if done:
                return True
        return False

    extend(start)
    return out


def path_from_arcs(n_nodes: int, arcs: Iterable[Arc], start: int, end: int) -> HamiltonianPath | None:
    """Walk ``arcs`` from ``start``; return the path if they form a Hamiltonian path to ``end``."""
    arcs = list(arcs)
    if len(arcs) != n_nodes - 1:
        return None
    adj: list[list[int]] = [[] for _ in range(n_nodes)]
    for i, j in arcs:
        adj[i].append(j)
        adj[j].append(i)
    if len(adj[start]) != 1 or len(adj[end]) != 1:
        return None
    if any(len(adj[v]) != 2 for v in range(n_nodes) if v not in (start, end)):
        return None
    seq = [start]
    prev, cur = -1, start
    while cur != end:
        nxt = [v for v in adj[cur] if v != prev]
        if not nxt:
            return None
        prev, cur = cur, nxt[0]
        seq.append(cur)
        if len(seq) > n_nodes:
            return None
    return HamiltonianPath(tuple(seq)) if len(seq) == n_nodes else None


def _check_dim(ag: AugmentedGraph, g) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if g.shape != (ag.n_base_arcs,):
        raise DimensionMismatch(f"expected {ag.n_base_arcs} conductances, got shape {g.shape}")
    return g


def decode_target(ag: AugmentedGraph, g) -> HamiltonianPath | None:
    """The Hamiltonian path encoded by a binary configuration, or None."""
    g = _check_dim(ag, g)
    if not np.all((g == 0.0) | (g == 1.0)):
        return None
    arcs = [a for a, x in zip(ag.base.arcs, g) if x == 1.0] + list(ag.added_arcs)
    return path_from_arcs(ag.n_total, arcs, ag.v_in, ag.v_out)


def is_target_config(ag: AugmentedGraph, g) -> bool:
    return decode_target(ag, g) is not None


def encode_hp(ag: AugmentedGraph, hp: HamiltonianPath) -> np.ndarray:
    """Binary configuration with conductance 1 exactly on the original arcs of ``hp``."""
    if hp.nodes[0] != ag.v_in or hp.nodes[-1] != ag.v_out or sorted(hp.nodes) != list(ag.full.nodes):
        raise PathNotInGraph(f"{hp} is not a Hamiltonian path from {ag.v_in} to {ag.v_out}")
    g = np.zeros(ag.n_base_arcs)
    idx = ag.arc_index
    for a in hp.arcs:
        k = idx.get(a)
        if k is None:
            raise PathNotInGraph(f"arc {a} not in graph")
        if k < ag.n_base_arcs:
            g[k] = 1.0
    return g


def lift_path(ag: AugmentedGraph, hp: HamiltonianPath) -> HamiltonianPath:
    """Extend an h_start -> h_end path of the original graph to a v_in -> v_out path."""
    nodes = list(hp.nodes)
    if ag.v_in != ag.h_start:
        nodes.insert(0, ag.v_in)
    if ag.v_out != ag.h_end:
        nodes.append(ag.v_out)
    return HamiltonianPath(tuple(nodes))


def target_paths(ag: AugmentedGraph, limit: int | None = None) -> list[HamiltonianPath]:
    """Oracle: every Hamiltonian path of the augmented graph from v_in to v_out."""
    return brute_force_hp(ag.full, ag.v_in, ag.v_out, limit)
