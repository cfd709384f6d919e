"""Cluster dispatch: creep toward the leader while the cut stays fixed.

One hop token walks the cluster depth-first from the elected leader. Each
visited member drags its not-yet-visited cluster neighbors toward itself in
micro-steps; a step is taken only if the body still fits, no agent is hit,
every existing communication edge survives, and the step strictly increases
the cluster volume (equivalently, strictly decreases the reduced
isoperimetric ratio, since the cut cannot change). New edges are registered
only between cluster members, so the cut is constant across a whole run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .consensus import max_consensus
from .geometry import EPS_GEO, Scenario, disk_fits, segment_clear
from .netgraph import ClusterView, SwarmGraph, cluster_volume, cut_weight, isoperimetric
from .sensing import EventField, NoiseModel, sense_event, snr_correction


@dataclass(frozen=True)
class DispatchConfig:
    max_iter: int = 10
    step: float = 0.25  # micro-step length, half a body radius by default
    leg_steps: int = 20  # micro-step budget per visit
    fir_window: int = 5
    r_b: float = 0.5
    r_v: float = 5.0
    weighted_cut: bool = True

    def __post_init__(self):
        if self.step <= 0 or self.leg_steps < 1 or self.fir_window < 1:
            raise ValueError("step, leg budget and filter window must be positive")
        if self.max_iter < 0:
            raise ValueError("max_iter must be non-negative")


@dataclass
class SessionState:
    """Session counter, global movement flag and the per-vertex visit stamps."""

    session: int = 0  # global session counter
    flag: bool = False  # true once a whole session rejects every step
    stamp: dict = field(default_factory=dict)  # per-vertex last visited session
    moved: dict = field(default_factory=dict)  # per-vertex ever-moved flag


@dataclass(frozen=True)
class VolumeDelta:
    """Contribution of one candidate step to the cluster volume."""

    value: float
    new_neighbors: tuple
    old_internal: int
    new_internal: int
    old_weight: float
    estimate: float


class FirFilter:
    """Moving average over the samples taken while an agent holds still."""

    def __init__(self, window: int):
        if window < 1:
            raise ValueError("window must be at least 1")
        self.window = window
        self._buffers: dict[int, list] = {}

    def update(self, vid: int, sample: float) -> float:
        buf = self._buffers.setdefault(vid, [])
        buf.append(sample)
        del buf[: -self.window]
        return float(sum(buf) / len(buf))

    def reset(self, vid: int):
        self._buffers.pop(vid, None)


def restricted_neighborhood(graph: SwarmGraph, cluster, vid: int, stamps: dict, session: int) -> list:
    """Cluster neighbors not yet visited this session, best weight first."""
    out = [
        j
        for j in graph.neighbors(vid)
        if j in cluster and stamps.get(j, 0) != session
    ]
    out.sort(key=lambda j: (-graph.vertex(j).weight, j))
    return out


def volume_delta(
    graph: SwarmGraph,
    cluster,
    vid: int,
    candidate,
    estimate: float,
    scenario: Scenario,
    r_v: float,
    noise: NoiseModel,
) -> VolumeDelta:
    """Volume change if vid moved to candidate while everyone else stands still.

    Gains: weights of newly visible cluster members plus the refreshed own
    contribution; loss: the current contribution, discounted by the
    noise-dependent divisor that eases link formation in noisy runs.
    """
    members_now = [j for j in graph.neighbors(vid) if j in cluster]
    new_neighbors = []
    for k in sorted(cluster):
        if k == vid or graph.has_edge(vid, k):
            continue
        pk = graph.vertex(k).pos
        d = math.hypot(candidate[0] - pk[0], candidate[1] - pk[1])
        if d <= r_v + EPS_GEO and segment_clear(candidate, pk, scenario):
            new_neighbors.append(k)

    old_internal = len(members_now)
    new_internal = old_internal + len(new_neighbors)
    old_weight = graph.vertex(vid).weight
    value = (
        sum(graph.vertex(k).weight for k in new_neighbors)
        - old_internal * old_weight / snr_correction(noise)
        + new_internal * estimate
    )
    return VolumeDelta(
        value=value,
        new_neighbors=tuple(new_neighbors),
        old_internal=old_internal,
        new_internal=new_internal,
        old_weight=old_weight,
        estimate=estimate,
    )


@dataclass
class TraceRow:
    """One accepted micro-step of the functional trace."""

    step: int
    session: int
    agent: int
    h_full: float
    h_cl: float
    eps_s: float
    eps_c: float
    delta_local: float
    delta_global: float
    new_edges: tuple


@dataclass
class DispatchResult:
    trace: list
    sessions: int
    visits: int
    leader: int
    start_positions: dict
    flag: bool

    def displacement(self, graph: SwarmGraph) -> dict:
        out = {}
        for vid, p0 in self.start_positions.items():
            p1 = graph.vertex(vid).pos
            out[vid] = math.hypot(p1[0] - p0[0], p1[1] - p0[1])
        return out


class Dispatcher:
    """Single-run dispatch engine holding graph, cluster and sensing context."""

    def __init__(
        self,
        graph: SwarmGraph,
        cluster,
        scenario: Scenario,
        event: EventField,
        noise: NoiseModel,
        cfg: DispatchConfig,
        rngs: dict | None = None,
    ):
        self.graph = graph
        self.cluster = frozenset(cluster)
        self.scenario = scenario
        self.event = event
        self.noise = noise
        self.cfg = cfg
        self.state = SessionState()
        self.fir = FirFilter(cfg.fir_window)
        self.trace: list[TraceRow] = []
        self.visits = 0
        self._rngs: dict[int, np.random.Generator] = {} if rngs is None else rngs
        self._step_index = 0

    def _rng(self, vid: int) -> np.random.Generator:
        if vid not in self._rngs:
            self._rngs[vid] = self.noise.rng_for(vid)
        return self._rngs[vid]

    def _sense(self, vid: int, pos) -> float:
        return sense_event(pos, self.event, self.noise, self._rng(vid))

    def _view(self) -> ClusterView:
        return ClusterView(self.graph, self.cluster)

    # -- one candidate micro-step ------------------------------------------

    def move_step(self, vid: int, target_vid: int):
        """Try one micro-step of vid toward target_vid; returns (accepted, reason)."""
        g = self.graph
        p = g.vertex(vid).pos
        q = g.vertex(target_vid).pos
        gap = math.hypot(q[0] - p[0], q[1] - p[1])
        if gap <= EPS_GEO:
            return False, "coincident"
        cand = p + (self.cfg.step / gap) * (q - p)

        if not disk_fits(cand, self.cfg.r_b, self.scenario):
            return False, "free-space"
        for other in g.vertex_ids():
            if other == vid:
                continue
            po = g.vertex(other).pos
            if math.hypot(cand[0] - po[0], cand[1] - po[1]) < 2.0 * self.cfg.r_b - EPS_GEO:
                return False, "collision"
        for nb in g.neighbors(vid):
            pn = g.vertex(nb).pos
            if math.hypot(cand[0] - pn[0], cand[1] - pn[1]) > self.cfg.r_v + EPS_GEO:
                return False, "edge-break"
            if not segment_clear(cand, pn, self.scenario):
                return False, "edge-occluded"

        estimate = self._sense(vid, cand)
        delta = volume_delta(
            g, self.cluster, vid, cand, estimate, self.scenario, self.cfg.r_v, self.noise
        )
        if delta.value <= 0.0:
            return False, "volume"

        eps_s_before = cluster_volume(self._view())
        g.vertex(vid).pos = np.asarray(cand, dtype=float)
        g.vertex(vid).weight = estimate
        for k in delta.new_neighbors:
            g.add_edge(vid, k, 0.5 * (estimate + g.vertex(k).weight))
        self.fir.reset(vid)
        self.state.moved[vid] = True
        self.state.flag = False
        eps_s_after = cluster_volume(self._view())

        iso = isoperimetric(self._view(), self.cfg.weighted_cut)
        self._step_index += 1
        self.trace.append(
            TraceRow(
                step=self._step_index,
                session=self.state.session,
                agent=vid,
                h_full=iso.value,
                h_cl=iso.reduced,
                eps_s=iso.volume_in,
                eps_c=iso.cut,
                delta_local=delta.value,
                delta_global=eps_s_after - eps_s_before,
                new_edges=tuple((vid, k) for k in delta.new_neighbors),
            )
        )
        return True, "accepted"

    # -- session traversal ---------------------------------------------------

    def _visit(self, vid: int):
        self.visits += 1
        st = self.state
        if st.stamp.get(vid, 0) < st.session:
            st.stamp[vid] = st.session
        pos = self.graph.vertex(vid).pos
        self.graph.vertex(vid).weight = self.fir.update(vid, self._sense(vid, pos))
        for j in restricted_neighborhood(self.graph, self.cluster, vid, st.stamp, st.session):
            if st.stamp.get(j, 0) == st.session:
                continue  # stamped by a deeper hop meanwhile; never revisit
            for _ in range(self.cfg.leg_steps):
                accepted, _reason = self.move_step(j, vid)
                if not accepted:
                    break
            self._visit(j)

    def run_session(self, leader: int):
        """One leader-rooted traversal; c_d* advances, f_d* reports motion."""
        self.state.session += 1
        self.state.flag = True
        self._visit(leader)
        return self.state.session, self.state.flag


def dispatch_loop(
    graph: SwarmGraph,
    cluster,
    leader: int,
    scenario: Scenario,
    event: EventField,
    noise: NoiseModel,
    cfg: DispatchConfig,
    rngs: dict | None = None,
) -> DispatchResult:
    """Repeat leader re-election and dispatch sessions until motion dies out."""
    engine = Dispatcher(graph, cluster, scenario, event, noise, cfg, rngs=rngs)
    start = {v: tuple(graph.vertex(v).pos) for v in sorted(engine.cluster)}
    state = engine.state

    while state.session < cfg.max_iter and not state.flag:
        leader, _ = max_consensus(graph, leader, subset=engine.cluster)
        engine.run_session(leader)

    return DispatchResult(
        trace=engine.trace,
        sessions=state.session,
        visits=engine.visits,
        leader=leader,
        start_positions=start,
        flag=state.flag,
    )
