"""Greedy connected cluster growth around the elected leader.

The cluster grows by a single hop token travelling the graph. Each vertex
runs three phases with persistent counters: absorb neighbors and chase
strictly better ones, then force-visit the rest (marking itself complete
when its whole neighborhood is clustered), then re-visit non-complete
neighbors. Growth stops the moment the requested size is reached. The only
payload a hop carries is the current cluster cardinality.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

from .netgraph import SwarmGraph


def sorted_neighborhood(graph: SwarmGraph, vid: int) -> list:
    """Neighbor ids by descending vertex weight, ties by ascending id."""
    return sorted(graph.neighbors(vid), key=lambda j: (-graph.vertex(j).weight, j))


@dataclass
class HopRecord:
    """One token transfer; the payload is deliberately just the cardinality."""

    src: int
    dst: int
    payload: int


@dataclass
class ClusterState:
    members: set = field(default_factory=set)
    completed: set = field(default_factory=set)
    target_size: int = 1
    phase: dict = field(default_factory=dict)  # 1..3, then 4 when done
    scan: dict = field(default_factory=dict)
    hops: list = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.members)


def clustering(graph: SwarmGraph, leader: int, n_cl: int) -> ClusterState:
    """Grow a connected cluster of n_cl vertices containing the leader."""
    if leader not in graph:
        raise ValueError(f"leader {leader} not in graph")
    if n_cl < 1:
        raise ValueError("cluster size must be at least 1")
    if n_cl > len(graph):
        warnings.warn(
            f"requested cluster size {n_cl} exceeds the {len(graph)}-vertex graph; clustering everything",
            stacklevel=2,
        )
        n_cl = len(graph)

    state = ClusterState(members={leader}, target_size=n_cl)
    phase = state.phase
    scan = state.scan
    stack = [leader]

    while stack and state.size < n_cl:
        i = stack[-1]
        phase.setdefault(i, 1)
        scan.setdefault(i, 0)
        hopped = False
        while phase[i] <= 3 and not hopped:
            nbrs = sorted_neighborhood(graph, i)
            while scan[i] < len(nbrs) and state.size < n_cl:
                scan[i] += 1
                j = nbrs[scan[i] - 1]
                if j not in state.members or phase[i] == 3:
                    if phase[i] < 3:
                        state.members.add(j)
                    hop = (
                        (phase[i] == 1 and graph.vertex(j).weight > graph.edge_weight(i, j))
                        or phase[i] == 2
                        or (phase[i] == 3 and j not in state.completed)
                    )
                    if state.size < n_cl and hop:
                        state.hops.append(HopRecord(src=i, dst=j, payload=state.size))
                        stack.append(j)
                        hopped = True
                        break
            if hopped:
                break
            # completion fires the moment the phase-2 scan is exhausted
            if phase[i] == 2 and scan[i] == len(nbrs):
                state.completed.add(i)
            if state.size >= n_cl:
                break
            phase[i] += 1
            scan[i] = 0
        if not hopped and (phase[i] > 3 or state.size >= n_cl):
            done = stack.pop()
            if stack:
                # return hop carries the cardinality back to the caller
                state.hops.append(HopRecord(src=done, dst=stack[-1], payload=state.size))

    for v in graph.vertex_ids():
        graph.vertex(v).in_cluster = v in state.members
        graph.vertex(v).completed = v in state.completed
    return state
