"""Weighted undirected communication graph over agents.

Vertices carry measured intensities as weights; edges carry the mean of
their endpoint weights. Cluster-side quantities (volume, cut, isoperimetric
functional) are defined over a membership view of the same graph.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .geometry import EPS_GEO, Scenario, segment_clear


@dataclass
class Vertex:
    id: int
    pos: np.ndarray
    weight: float = 1.0
    in_cluster: bool = False
    completed: bool = False
    contact: bool = False  # touched a barrier while being placed


class SwarmGraph:
    """Undirected weighted graph with dense integer vertex ids.

    Neighborhoods and vertex listings always iterate in ascending id order so
    that every run is reproducible.
    """

    def __init__(self):
        self._vertices: dict[int, Vertex] = {}
        self._adj: dict[int, dict[int, float]] = {}

    # -- construction -----------------------------------------------------

    def add_vertex(self, vid: int, pos, weight: float = 1.0, contact: bool = False) -> Vertex:
        if vid in self._vertices:
            raise ValueError(f"vertex {vid} already present")
        v = Vertex(id=vid, pos=np.asarray(pos, dtype=float), weight=weight, contact=contact)
        self._vertices[vid] = v
        self._adj[vid] = {}
        return v

    def add_edge(self, i: int, j: int, weight: float = 1.0):
        if i == j:
            raise ValueError("self-loops are not allowed")
        if i not in self._vertices or j not in self._vertices:
            raise KeyError("both endpoints must exist")
        self._adj[i][j] = weight
        self._adj[j][i] = weight

    def remove_vertex(self, vid: int):
        for other in list(self._adj[vid]):
            del self._adj[other][vid]
        del self._adj[vid]
        del self._vertices[vid]

    def copy(self) -> "SwarmGraph":
        g = SwarmGraph()
        for vid in self.vertex_ids():
            v = self._vertices[vid]
            w = g.add_vertex(vid, v.pos.copy(), v.weight, v.contact)
            w.in_cluster = v.in_cluster
            w.completed = v.completed
        for i, j, w in self.edges():
            g.add_edge(i, j, w)
        return g

    # -- queries -----------------------------------------------------------

    def __len__(self) -> int:
        return len(self._vertices)

    def __contains__(self, vid: int) -> bool:
        return vid in self._vertices

    def vertex(self, vid: int) -> Vertex:
        return self._vertices[vid]

    def vertex_ids(self) -> list:
        return sorted(self._vertices)

    def positions(self) -> np.ndarray:
        return np.array([self._vertices[v].pos for v in self.vertex_ids()])

    def neighbors(self, vid: int) -> list:
        return sorted(self._adj[vid])

    def degree(self, vid: int) -> int:
        return len(self._adj[vid])

    def has_edge(self, i: int, j: int) -> bool:
        return j in self._adj.get(i, ())

    def edge_weight(self, i: int, j: int) -> float:
        return self._adj[i][j]

    def set_edge_weight(self, i: int, j: int, w: float):
        if not self.has_edge(i, j):
            raise KeyError((i, j))
        self._adj[i][j] = w
        self._adj[j][i] = w

    def edges(self):
        """Each undirected edge once, as (i, j, weight) with i < j."""
        for i in self.vertex_ids():
            for j in sorted(self._adj[i]):
                if i < j:
                    yield i, j, self._adj[i][j]

    def adjacency_matrix(self) -> np.ndarray:
        ids = self.vertex_ids()
        index = {v: k for k, v in enumerate(ids)}
        a = np.zeros((len(ids), len(ids)))
        for i, j, _ in self.edges():
            a[index[i], index[j]] = 1.0
            a[index[j], index[i]] = 1.0
        return a

    # -- structure ---------------------------------------------------------

    def is_connected(self, subset=None) -> bool:
        """Breadth-first reachability within the induced subgraph."""
        nodes = set(self.vertex_ids()) if subset is None else set(subset)
        if not nodes:
            return True
        start = min(nodes)
        seen = {start}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in self.neighbors(u):
                if v in nodes and v not in seen:
                    seen.add(v)
                    queue.append(v)
        return seen == nodes

    def unreachable_from(self, start: int, subset=None) -> set:
        nodes = set(self.vertex_ids()) if subset is None else set(subset)
        seen = {start}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in self.neighbors(u):
                if v in nodes and v not in seen:
                    seen.add(v)
                    queue.append(v)
        return nodes - seen


def visible_pair(pos_i, pos_j, scenario: Scenario, r_v: float) -> bool:
    """Mutual visibility: centers within r_v (inclusive) and clear line of sight."""
    d = math.hypot(pos_i[0] - pos_j[0], pos_i[1] - pos_j[1])
    if d > r_v + EPS_GEO:
        return False
    return segment_clear(pos_i, pos_j, scenario)


def build_visibility_edges(graph: SwarmGraph, scenario: Scenario, r_v: float):
    """Insert every visible pair as a unit-weight edge."""
    ids = graph.vertex_ids()
    for a in range(len(ids)):
        for b in range(a + 1, len(ids)):
            i, j = ids[a], ids[b]
            if visible_pair(graph.vertex(i).pos, graph.vertex(j).pos, scenario, r_v):
                graph.add_edge(i, j, 1.0)


def weigh_edges_from_vertices(graph: SwarmGraph) -> SwarmGraph:
    """Set every edge weight to the mean of its endpoint vertex weights."""
    for i, j, _ in list(graph.edges()):
        graph.set_edge_weight(i, j, 0.5 * (graph.vertex(i).weight + graph.vertex(j).weight))
    return graph


@dataclass
class ClusterView:
    """A graph together with the membership set of the cluster subgraph."""

    graph: SwarmGraph
    members: frozenset

    def __post_init__(self):
        self.members = frozenset(self.members)
        missing = self.members - set(self.graph.vertex_ids())
        if missing:
            raise ValueError(f"cluster members not in graph: {sorted(missing)}")

    @classmethod
    def from_flags(cls, graph: SwarmGraph) -> "ClusterView":
        return cls(graph, frozenset(v for v in graph.vertex_ids() if graph.vertex(v).in_cluster))

    def complement(self) -> "ClusterView":
        return ClusterView(self.graph, frozenset(set(self.graph.vertex_ids()) - self.members))


def cluster_volume(view: ClusterView) -> float:
    """Sum over members of vertex weight times the member-internal neighbor count."""
    g = view.graph
    total = 0.0
    for v in sorted(view.members):
        internal = sum(1 for u in g.neighbors(v) if u in view.members)
        total += g.vertex(v).weight * internal
    return total


def cut_weight(view: ClusterView, weighted: bool = True) -> float:
    """Total weight (or count) of edges with exactly one endpoint in the cluster."""
    g = view.graph
    total = 0.0
    for i, j, w in g.edges():
        if (i in view.members) != (j in view.members):
            total += w if weighted else 1.0
    return total


@dataclass
class IsoperimetricValue:
    value: float
    cut: float
    volume_in: float
    volume_out: float
    diagnostic: str = ""

    @property
    def reduced(self) -> float:
        """First term only (cut over cluster volume); used by the dispatch criterion."""
        if self.volume_in <= 0.0:
            return math.inf
        return self.cut / self.volume_in


def isoperimetric(view: ClusterView, weighted_cut: bool = True) -> IsoperimetricValue:
    """Bottleneckedness of the cluster: cut/volume plus cut/complement-volume.

    A zero volume on either side makes the ratio meaningless; the sentinel
    +inf is returned with a diagnostic instead of raising, except in the
    cut-free case where the functional is exactly zero.
    """
    eps_c = cut_weight(view, weighted_cut)
    vol_in = cluster_volume(view)
    vol_out = cluster_volume(view.complement())
    if eps_c == 0.0:
        return IsoperimetricValue(0.0, 0.0, vol_in, vol_out)
    if vol_in <= 0.0 or vol_out <= 0.0:
        side = "cluster" if vol_in <= 0.0 else "complement"
        return IsoperimetricValue(
            math.inf, eps_c, vol_in, vol_out, diagnostic=f"zero {side} volume with nonzero cut"
        )
    return IsoperimetricValue(eps_c / vol_in + eps_c / vol_out, eps_c, vol_in, vol_out)


# ---------------------------------------------------------------------------
# snapshot serialization (structured text for logging, replay and figures)


def graph_to_dict(graph: SwarmGraph) -> dict:
    return {
        "vertices": [
            {
                "id": v,
                "pos": [float(graph.vertex(v).pos[0]), float(graph.vertex(v).pos[1])],
                "weight": float(graph.vertex(v).weight),
                "in_cluster": bool(graph.vertex(v).in_cluster),
                "completed": bool(graph.vertex(v).completed),
                "contact": bool(graph.vertex(v).contact),
            }
            for v in graph.vertex_ids()
        ],
        "edges": [[i, j, float(w)] for i, j, w in graph.edges()],
    }


def graph_from_dict(data: dict) -> SwarmGraph:
    g = SwarmGraph()
    try:
        for entry in data["vertices"]:
            v = g.add_vertex(
                int(entry["id"]),
                entry["pos"],
                float(entry["weight"]),
                bool(entry.get("contact", False)),
            )
            v.in_cluster = bool(entry.get("in_cluster", False))
            v.completed = bool(entry.get("completed", False))
        for i, j, w in data["edges"]:
            g.add_edge(int(i), int(j), float(w))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed graph snapshot: {exc}") from exc
    return g
