"""Distributed max-consensus leader election over vertex weights."""

from __future__ import annotations

from dataclasses import dataclass, field

from .netgraph import SwarmGraph


@dataclass
class ConsensusState:
    """Per-vertex (value, id) best seen so far, plus the round count."""

    best: dict = field(default_factory=dict)
    rounds: int = 0


class DisconnectedSubgraphError(ValueError):
    def __init__(self, unreachable):
        self.unreachable = sorted(unreachable)
        super().__init__(f"max-consensus needs a connected subgraph; unreachable: {self.unreachable}")


def _better(a, b):
    """Max by value; ties broken toward the lower id."""
    if a[0] != b[0]:
        return a if a[0] > b[0] else b
    return a if a[1] < b[1] else b


def max_consensus(graph: SwarmGraph, start: int, subset=None):
    """Synchronous neighbor-max flooding; returns (leader id, ConsensusState).

    Every vertex repeatedly replaces its (value, id) pair with the best in its
    closed neighborhood. On a connected subgraph the pair with the maximum
    weight floods everywhere within diameter rounds.
    """
    nodes = sorted(set(graph.vertex_ids()) if subset is None else set(subset))
    if start not in nodes:
        raise ValueError(f"start vertex {start} not in the consensus subgraph")
    unreachable = graph.unreachable_from(start, nodes)
    if unreachable:
        raise DisconnectedSubgraphError(unreachable)

    node_set = set(nodes)
    state = ConsensusState(best={v: (graph.vertex(v).weight, v) for v in nodes})
    for _ in range(len(nodes)):
        current = state.best
        proposed = {}
        for v in nodes:
            best = current[v]
            for u in graph.neighbors(v):
                if u in node_set:
                    best = _better(best, current[u])
            proposed[v] = best
        if proposed == current:
            break
        state.best = proposed
        state.rounds += 1

    leader = state.best[nodes[0]][1]
    return leader, state
