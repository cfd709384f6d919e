"""Agent deployment until the scenario is covered, and redundancy pruning.

Deployment expands a triangular lattice of spacing r_v outward from the base
station, breadth-first. A new agent is pushed along the network to the slot
owner, marched toward the slot with contact probing, polished by the bearing
controller, and registered in the visibility graph. Marches that hit a
barrier are deferred: once lattice growth is exhausted, each contact
position is accepted only if it is not crowding an existing agent and still
adds grid coverage. Redundant agents are then located purely from reciprocal
bearing values (straight-angle and full-turn tests) and removed while
connectivity and coverage hold.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .geometry import (
    EPS_GEO,
    Scenario,
    clearance_of_points,
    disk_fits,
    free_space_mask,
)
from .netgraph import SwarmGraph, visible_pair
from .sensing import EPS_ANG, wrap_angle


@dataclass(frozen=True)
class DeploymentConfig:
    """Geometry and controller settings for the coverage stage."""

    base_station: tuple
    r_b: float = 0.5
    r_v: float = 5.0
    k_p: float = 1.0
    max_agents: int = 600
    eps_ang: float = EPS_ANG
    heading: float = 0.0  # reference direction of the hexagonal slot star
    ctrl_dt: float = 0.05
    ctrl_budget: int = 10_000
    march_step: float | None = None  # default r_b / 2
    grid_pitch: float | None = None  # default r_b / 2

    def __post_init__(self):
        if self.r_b <= 0 or self.r_v <= 0:
            raise ValueError("radii must be positive")
        if self.r_v < 4.0 * self.r_b:
            raise ValueError("hexagonal packing needs r_v >= 4 r_b")

    @property
    def step(self) -> float:
        return self.march_step if self.march_step is not None else self.r_b / 2.0

    @property
    def pitch(self) -> float:
        return self.grid_pitch if self.grid_pitch is not None else self.r_b / 2.0


class PartialCoverageError(RuntimeError):
    """Agent cap exhausted; carries whatever graph was achieved."""

    def __init__(self, graph: SwarmGraph, message: str):
        super().__init__(message)
        self.graph = graph


class NavigationBudgetError(RuntimeError):
    """Bearing controller failed to settle within its step budget."""


# ---------------------------------------------------------------------------
# coverage sampling grid


class CoverageGrid:
    """Fixed sampling grid used as the coverage oracle.

    Coverage is distance-based: a sample is covered when some agent is within
    r_v. The denominator is restricted to *coverable* samples: free-space
    points within r_v of the grid component the agent body can actually
    reach from the base station.
    """

    def __init__(self, scenario: Scenario, r_b: float, r_v: float, pitch: float, base_station):
        self.r_v = r_v
        # a sample covered with half a cell diagonal to spare certifies its
        # whole grid cell; the strict mask drives the placement gain filter
        self.margin = pitch * math.sqrt(2.0) / 2.0
        x0, y0, x1, y1 = scenario.bounding_box()
        xs = np.arange(x0 + pitch / 2.0, x1, pitch)
        ys = np.arange(y0 + pitch / 2.0, y1, pitch)
        gx, gy = np.meshgrid(xs, ys)
        self.points = np.column_stack([gx.ravel(), gy.ravel()])
        self.shape = (len(ys), len(xs))
        self.free = free_space_mask(self.points, scenario)
        clear = clearance_of_points(self.points, scenario)
        enterable = self.free & (clear > r_b + EPS_GEO)

        labels, _ = ndimage.label(enterable.reshape(self.shape), structure=np.ones((3, 3)))
        labels = labels.ravel()
        bs = np.asarray(base_station, dtype=float)
        enter_idx = np.flatnonzero(enterable)
        if len(enter_idx) == 0:
            raise ValueError("no grid cell admits the agent body anywhere in the scenario")
        d2 = ((self.points[enter_idx] - bs) ** 2).sum(axis=1)
        home = enter_idx[int(np.argmin(d2))]
        reachable = enterable & (labels == labels[home])

        tree = cKDTree(self.points[reachable])
        dist, _ = tree.query(self.points, distance_upper_bound=r_v + EPS_GEO)
        self.coverable = self.free & np.isfinite(dist)
        self.covered = np.zeros(len(self.points), dtype=bool)
        self.covered_strict = np.zeros(len(self.points), dtype=bool)

    def add_agent(self, pos):
        d2 = ((self.points - np.asarray(pos, dtype=float)) ** 2).sum(axis=1)
        self.covered |= d2 <= (self.r_v + EPS_GEO) ** 2
        self.covered_strict |= d2 <= (self.r_v - self.margin) ** 2

    def would_gain(self, pos) -> bool:
        """True if an agent at pos would certifiably cover a new coverable cell."""
        candidates = self.coverable & ~self.covered_strict
        if not candidates.any():
            return False
        d2 = ((self.points[candidates] - np.asarray(pos, dtype=float)) ** 2).sum(axis=1)
        return bool((d2 <= (self.r_v - self.margin) ** 2).any())

    def fraction(self) -> float:
        n = int(self.coverable.sum())
        return 1.0 if n == 0 else float(self.covered[self.coverable].sum()) / n

    def fraction_for(self, positions) -> float:
        """Coverage fraction recomputed from scratch for an arbitrary agent set."""
        pts = self.points[self.coverable]
        if len(pts) == 0:
            return 1.0
        positions = np.atleast_2d(np.asarray(positions, dtype=float))
        if len(positions) == 0:
            return 0.0
        dist, _ = cKDTree(positions).query(pts)
        return float((dist <= self.r_v + EPS_GEO).mean())


# ---------------------------------------------------------------------------
# motion primitives


def _march(origin, angle: float, scenario: Scenario, r_b: float, max_range: float, step: float):
    """Straight contact-probed push from origin; returns (position, contact).

    On contact the stop position is bisected against the body-fit predicate,
    so wall placements land on the offset line to within a nanometer.
    """
    origin = np.asarray(origin, dtype=float)
    direction = np.array([math.cos(angle), math.sin(angle)])
    t = 0.0
    while t < max_range - 1e-12:
        t_next = min(t + step, max_range)
        if disk_fits(origin + t_next * direction, r_b, scenario):
            t = t_next
            continue
        lo, hi = t, t_next
        while hi - lo > 1e-12:
            mid = 0.5 * (lo + hi)
            if disk_fits(origin + mid * direction, r_b, scenario):
                lo = mid
            else:
                hi = mid
        return origin + lo * direction, True
    return origin + max_range * direction, False


def navigate_to_slot(
    start,
    landmark_positions,
    desired_bearings,
    scenario: Scenario,
    r_b: float,
    k_p: float = 1.0,
    dt: float = 0.05,
    eps_ang: float = EPS_ANG,
    budget: int = 10_000,
    heading: float = 0.0,
):
    """Bearing-based visual homing toward the point realizing the desired bearings.

    Each landmark contributes a velocity along the perpendicular of its line
    of sight, proportional to its bearing error; the fixed point is the
    position where every measured bearing matches its desired value. Returns
    (position, contact_flag); raises NavigationBudgetError when the error
    never falls below eps_ang.
    """
    if len(landmark_positions) == 0:
        raise ValueError("homing needs at least one landmark")
    if len(landmark_positions) != len(desired_bearings):
        raise ValueError("one desired bearing per landmark")
    pos = np.asarray(start, dtype=float).copy()
    marks = [np.asarray(q, dtype=float) for q in landmark_positions]

    for _ in range(budget):
        worst = 0.0
        vel = np.zeros(2)
        for q, th_des in zip(marks, desired_bearings):
            w = q - pos
            d = math.hypot(w[0], w[1])
            if d < EPS_GEO:
                continue
            err = wrap_angle(th_des - wrap_angle(math.atan2(w[1], w[0]) - heading))
            worst = max(worst, abs(err))
            vel += k_p * err * np.array([w[1], -w[0]]) / d
        if worst < eps_ang:
            return pos, False
        cand = pos + vel * dt
        if disk_fits(cand, r_b, scenario):
            pos = cand
            continue
        lo, hi = 0.0, 1.0
        while hi - lo > 1e-12:
            mid = 0.5 * (lo + hi)
            if disk_fits(pos + mid * (cand - pos), r_b, scenario):
                lo = mid
            else:
                hi = mid
        return pos + lo * (cand - pos), True
    raise NavigationBudgetError(f"bearing errors above {eps_ang} after {budget} steps")


def hex_directions(heading: float):
    """The six slot bearings of the packing star."""
    return [wrap_angle(heading + k * math.pi / 3.0) for k in range(6)]


def frontier_slots(agent_pos, existing_positions, scenario: Scenario, cfg: DeploymentConfig):
    """Surviving lattice targets around one agent.

    A slot survives when no existing agent sits within r_v/2 of the target
    and a contact-probed push from the agent reaches a target that admits
    the body disk.
    """
    agent_pos = np.asarray(agent_pos, dtype=float)
    existing = np.atleast_2d(np.asarray(existing_positions, dtype=float)) if len(existing_positions) else np.empty((0, 2))
    slots = []
    for k, angle in enumerate(hex_directions(cfg.heading)):
        target = agent_pos + cfg.r_v * np.array([math.cos(angle), math.sin(angle)])
        if len(existing) and (((existing - target) ** 2).sum(axis=1) < (cfg.r_v / 2.0) ** 2).any():
            continue
        if not disk_fits(target, cfg.r_b, scenario):
            continue
        end, contact = _march(agent_pos, angle, scenario, cfg.r_b, cfg.r_v, cfg.step)
        if contact:
            continue
        slots.append((k, target))
    return slots


# ---------------------------------------------------------------------------
# coverage run


@dataclass
class AgentRecord:
    id: int
    pos: np.ndarray
    parent: int | None
    contact: bool
    directions: dict = field(default_factory=dict)  # k -> status string


@dataclass
class CoverageResult:
    graph: SwarmGraph
    grid: CoverageGrid
    agents: dict
    fraction: float
    deferred_rejections: int


def _occupied(target, positions: list, r_v: float) -> bool:
    limit = (r_v / 2.0) ** 2
    return any((p[0] - target[0]) ** 2 + (p[1] - target[1]) ** 2 < limit for p in positions)


def _min_separation_ok(cand, positions: list, r_b: float) -> bool:
    limit = (2.0 * r_b - EPS_GEO) ** 2
    return all((p[0] - cand[0]) ** 2 + (p[1] - cand[1]) ** 2 >= limit for p in positions)


def coverage_run(scenario: Scenario, cfg: DeploymentConfig) -> CoverageResult:
    """Deploy agents from the base station until the frontier is exhausted.

    Lattice expansion is breadth-first from the base station; pushes that hit
    a barrier are queued and re-examined only after lattice growth stalls, so
    wall positions are taken only where they still add coverage.
    """
    bs = np.asarray(cfg.base_station, dtype=float)
    if not disk_fits(bs, cfg.r_b, scenario):
        raise ValueError("base station must admit the agent body inside free space")

    grid = CoverageGrid(scenario, cfg.r_b, cfg.r_v, cfg.pitch, bs)
    graph = SwarmGraph()
    agents: dict[int, AgentRecord] = {}
    positions: list[np.ndarray] = []

    def place(pos, parent, contact) -> int:
        nid = len(agents) + 1
        if nid > cfg.max_agents:
            raise PartialCoverageError(graph, f"agent cap {cfg.max_agents} exhausted before coverage")
        graph.add_vertex(nid, pos, weight=1.0, contact=contact)
        for other in agents.values():
            if visible_pair(pos, other.pos, scenario, cfg.r_v):
                graph.add_edge(nid, other.id, 1.0)
        rec = AgentRecord(id=nid, pos=np.asarray(pos, dtype=float), parent=parent, contact=contact,
                          directions={k: "open" for k in range(6)})
        agents[nid] = rec
        positions.append(rec.pos)
        grid.add_agent(rec.pos)
        return nid

    def polish(end, target, owner_pos):
        """Fine bearing-controlled docking onto the exact slot point."""
        marks = [owner_pos]
        for other in sorted(agents.values(), key=lambda a: float(((a.pos - target) ** 2).sum())):
            if len(marks) >= 3:
                break
            if np.array_equal(other.pos, owner_pos):
                continue
            if visible_pair(target, other.pos, scenario, cfg.r_v):
                marks.append(other.pos)
        desired = [
            wrap_angle(math.atan2(q[1] - target[1], q[0] - target[0]) - cfg.heading) for q in marks
        ]
        pos, contact = navigate_to_slot(
            end, marks, desired, scenario, cfg.r_b,
            k_p=cfg.k_p, dt=cfg.ctrl_dt, eps_ang=cfg.eps_ang, budget=cfg.ctrl_budget,
            heading=cfg.heading,
        )
        if contact:
            return pos, True
        if math.hypot(pos[0] - target[0], pos[1] - target[1]) <= 10.0 * cfg.eps_ang * cfg.r_v:
            return np.asarray(target, dtype=float), False
        return pos, False

    place(bs, parent=None, contact=False)
    lattice_queue = deque([1])
    # deferred contact slots, longest push first: far wall positions are more
    # fundamental than short diagonal slivers near the owner
    contact_heap: list[tuple[float, int, int]] = []
    deferred_rejections = 0

    while lattice_queue or contact_heap:
        if lattice_queue:
            i = lattice_queue.popleft()
            rec = agents[i]
            for k, angle in enumerate(hex_directions(cfg.heading)):
                if rec.directions[k] != "open":
                    continue
                target = rec.pos + cfg.r_v * np.array([math.cos(angle), math.sin(angle)])
                if _occupied(target, positions, cfg.r_v):
                    rec.directions[k] = "occupied"
                    continue
                end, contact = _march(rec.pos, angle, scenario, cfg.r_b, cfg.r_v, cfg.step)
                if contact:
                    rec.directions[k] = "deferred"
                    reach = math.hypot(end[0] - rec.pos[0], end[1] - rec.pos[1])
                    heapq.heappush(contact_heap, (-reach, i, k))
                    continue
                try:
                    final, contact = polish(end, target, rec.pos)
                except NavigationBudgetError:
                    rec.directions[k] = "abandoned"
                    continue
                if contact or not _min_separation_ok(final, positions, cfg.r_b):
                    rec.directions[k] = "rejected"
                    continue
                if not grid.would_gain(final):
                    rec.directions[k] = "rejected-no-gain"
                    continue
                nid = place(final, parent=i, contact=False)
                rec.directions[k] = "lattice"
                lattice_queue.append(nid)
            continue

        _, owner, k = heapq.heappop(contact_heap)
        rec = agents[owner]
        angle = hex_directions(cfg.heading)[k]
        target = rec.pos + cfg.r_v * np.array([math.cos(angle), math.sin(angle)])
        if _occupied(target, positions, cfg.r_v):
            rec.directions[k] = "occupied"
            continue
        cand, contact = _march(rec.pos, angle, scenario, cfg.r_b, cfg.r_v, cfg.step)
        if not contact:
            # the environment is static, so a deferred push cannot suddenly
            # reach the slot; keep the branch for safety and place normally
            final, _ = polish(cand, target, rec.pos)
            if _min_separation_ok(final, positions, cfg.r_b) and grid.would_gain(final):
                nid = place(final, parent=owner, contact=False)
                rec.directions[k] = "lattice"
                lattice_queue.append(nid)
            else:
                rec.directions[k] = "rejected"
            continue
        crowded = _occupied(cand, positions, cfg.r_v)
        if crowded or not _min_separation_ok(cand, positions, cfg.r_b):
            rec.directions[k] = "rejected-crowded"
            deferred_rejections += 1
            continue
        if not grid.would_gain(cand):
            rec.directions[k] = "rejected-no-gain"
            deferred_rejections += 1
            continue
        nid = place(cand, parent=owner, contact=True)
        rec.directions[k] = "contact"
        lattice_queue.append(nid)

    for rec in agents.values():
        graph.vertex(rec.id).contact = rec.contact

    return CoverageResult(
        graph=graph,
        grid=grid,
        agents=agents,
        fraction=grid.fraction(),
        deferred_rejections=deferred_rejections,
    )


# ---------------------------------------------------------------------------
# Vietoris-Rips complex


@dataclass(frozen=True)
class RipsComplex:
    """Proximity complex at scale r_v with its fence subcomplexes.

    A simplex belongs to the obstacle subcomplex when every one of its agents
    holds the barrier-contact flag, and to the frontier subcomplex when any
    of its agents still has an unexplored open direction.
    """

    vertices: tuple
    edges: tuple
    triangles: tuple
    frontier: tuple
    obstacle: tuple

    @property
    def fence(self) -> tuple:
        return tuple(sorted(set(self.frontier) | set(self.obstacle)))


def build_rips(positions: dict, scenario: Scenario, r_v: float,
               contact_ids=(), frontier_ids=()) -> RipsComplex:
    """Build the visibility complex: edges are visible pairs, triangles their 3-cliques."""
    ids = sorted(positions)
    contact_ids = set(contact_ids)
    frontier_ids = set(frontier_ids)
    adj = {i: set() for i in ids}
    edges = []
    for a in range(len(ids)):
        for b in range(a + 1, len(ids)):
            i, j = ids[a], ids[b]
            if visible_pair(positions[i], positions[j], scenario, r_v):
                adj[i].add(j)
                adj[j].add(i)
                edges.append((i, j))
    triangles = []
    for i, j in edges:
        for k in sorted(adj[i] & adj[j]):
            if k > j:
                triangles.append((i, j, k))

    simplices = [(i,) for i in ids] + [tuple(e) for e in edges] + [tuple(t) for t in triangles]
    obstacle = tuple(s for s in simplices if contact_ids and all(v in contact_ids for v in s))
    frontier = tuple(s for s in simplices if any(v in frontier_ids for v in s))
    return RipsComplex(
        vertices=tuple(ids),
        edges=tuple(edges),
        triangles=tuple(triangles),
        frontier=frontier,
        obstacle=obstacle,
    )


# ---------------------------------------------------------------------------
# redundancy from reciprocal bearings


@dataclass(frozen=True)
class RedundancyLabel:
    agent: int
    kind: str  # "1-simplex" | "2-simplex"


def _relative_bearing_at(positions, v, i, j) -> float:
    """Relative bearing at v between the directions to i and j (heading cancels)."""
    pv, pi, pj = positions[v], positions[i], positions[j]
    ti = math.atan2(pi[1] - pv[1], pi[0] - pv[0])
    tj = math.atan2(pj[1] - pv[1], pj[0] - pv[0])
    return wrap_angle(ti - tj)


def redundant_agent_search(graph: SwarmGraph, eps_ang: float = EPS_ANG,
                           protected=(1,)) -> list:
    """Label agents removable by the straight-angle and full-turn bearing tests.

    For every visibility triangle: a member whose internal relative bearing
    reaches magnitude pi sits on the segment joining the other two; a common
    neighbor whose three relative bearings wind to magnitude 2 pi sits inside
    the triangle. The base station is never labeled.
    """
    protected = set(protected)
    positions = {v: graph.vertex(v).pos for v in graph.vertex_ids()}
    adj = {v: set(graph.neighbors(v)) for v in graph.vertex_ids()}

    labels: list[RedundancyLabel] = []
    seen = set()

    triangles = []
    for i in graph.vertex_ids():
        for j in sorted(adj[i]):
            if j <= i:
                continue
            for k in sorted(adj[i] & adj[j]):
                if k > j:
                    triangles.append((i, j, k))

    for a, b, c in triangles:
        for v, o1, o2 in ((a, b, c), (b, a, c), (c, a, b)):
            if v in protected or v in seen:
                continue
            rel = _relative_bearing_at(positions, v, o1, o2)
            if abs(abs(rel) - math.pi) <= eps_ang:
                labels.append(RedundancyLabel(agent=v, kind="1-simplex"))
                seen.add(v)
        for j in sorted(adj[a] & adj[b] & adj[c]):
            if j in protected or j in seen:
                continue
            winding = (
                _relative_bearing_at(positions, j, a, b)
                + _relative_bearing_at(positions, j, b, c)
                + _relative_bearing_at(positions, j, c, a)
            )
            if abs(abs(winding) - 2.0 * math.pi) <= eps_ang:
                labels.append(RedundancyLabel(agent=j, kind="2-simplex"))
                seen.add(j)

    return labels


def prune_redundant(graph: SwarmGraph, grid: CoverageGrid, eps_ang: float = EPS_ANG,
                    protected=(1,)) -> list:
    """Remove labeled agents one at a time while connectivity and coverage hold.

    The coverage threshold is frozen before the first removal; any removal
    that would push the fraction below it, or disconnect the graph, is
    rolled back. The search is re-run after every removal.
    """
    def frac(ids):
        return grid.fraction_for([graph.vertex(v).pos for v in ids])

    threshold = frac(graph.vertex_ids())
    removed: list[int] = []

    while True:
        progressed = False
        for label in sorted(redundant_agent_search(graph, eps_ang, protected), key=lambda l: l.agent):
            remaining = [v for v in graph.vertex_ids() if v != label.agent]
            if not graph.is_connected(remaining):
                continue
            if frac(remaining) < threshold - 1e-12:
                continue
            graph.remove_vertex(label.agent)
            removed.append(label.agent)
            progressed = True
            break
        if not progressed:
            return removed
