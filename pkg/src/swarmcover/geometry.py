"""Polygonal scenario model and the spatial predicates the simulator is built on.

A scenario is an enclosure polygon plus a set of polygon/segment obstacles.
Free space is the open region strictly inside the enclosure and strictly
outside every obstacle closure: any boundary contact counts as blocked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import yaml

# Tie-breaking tolerance (meters) for boundary contact decisions.
EPS_GEO = 1e-9


def _as_points(vertices) -> np.ndarray:
    pts = np.asarray(vertices, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("vertex list must be an (n, 2) array of coordinates")
    if not np.all(np.isfinite(pts)):
        raise ValueError("vertex coordinates must be finite")
    return pts


def _cross(o, a, b) -> float:
    """Signed area of the parallelogram (a-o) x (b-o)."""
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def point_segment_distance(p, a, b) -> float:
    """Euclidean distance from point p to the closed segment ab."""
    ab = (b[0] - a[0], b[1] - a[1])
    ap = (p[0] - a[0], p[1] - a[1])
    denom = ab[0] * ab[0] + ab[1] * ab[1]
    if denom == 0.0:
        return math.hypot(ap[0], ap[1])
    t = (ap[0] * ab[0] + ap[1] * ab[1]) / denom
    t = min(1.0, max(0.0, t))
    dx = p[0] - (a[0] + t * ab[0])
    dy = p[1] - (a[1] + t * ab[1])
    return math.hypot(dx, dy)


def segments_intersect(p, q, a, b, eps: float = EPS_GEO) -> bool:
    """True if closed segments pq and ab share any point (within eps).

    Touching at an endpoint or grazing a vertex counts as intersecting,
    matching the blocked-on-contact boundary semantics.
    """
    d1 = _cross(a, b, p)
    d2 = _cross(a, b, q)
    d3 = _cross(p, q, a)
    d4 = _cross(p, q, b)
    if ((d1 > eps and d2 < -eps) or (d1 < -eps and d2 > eps)) and (
        (d3 > eps and d4 < -eps) or (d3 < -eps and d4 > eps)
    ):
        return True
    # touching / collinear cases
    if point_segment_distance(p, a, b) <= eps:
        return True
    if point_segment_distance(q, a, b) <= eps:
        return True
    if point_segment_distance(a, p, q) <= eps:
        return True
    if point_segment_distance(b, p, q) <= eps:
        return True
    return False


def _signed_area(pts: np.ndarray) -> float:
    x = pts[:, 0]
    y = pts[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _is_simple(pts: np.ndarray, eps: float = EPS_GEO) -> bool:
    """Pairwise O(n^2) edge test; scenarios are small so this is plenty."""
    n = len(pts)
    for i in range(n):
        for j in range(i + 1, n):
            if (j + 1) % n == i or (i + 1) % n == j:
                continue  # shared-vertex neighbours checked separately
            if segments_intersect(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n], eps):
                return False
    # adjacent edges may meet only at the shared vertex
    for i in range(n):
        a, b, c = pts[i], pts[(i + 1) % n], pts[(i + 2) % n]
        if point_segment_distance(c, a, b) <= eps or point_segment_distance(a, b, c) <= eps:
            return False
    return True


def _has_repeated_vertices(pts: np.ndarray, eps: float = EPS_GEO) -> bool:
    n = len(pts)
    for i in range(n):
        for j in range(i + 1, n):
            if math.hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]) <= eps:
                return True
    return False


def polygon_area(vertices) -> float:
    """Shoelace area of a simple polygon; a 2-vertex segment has area 0."""
    pts = _as_points(vertices)
    if len(pts) == 2:
        return 0.0
    if len(pts) < 3:
        raise ValueError("polygon needs at least 3 vertices")
    if _has_repeated_vertices(pts) or not _is_simple(pts):
        raise ValueError("polygon is self-intersecting or degenerate")
    return abs(_signed_area(pts))


def polygon_perimeter(vertices) -> float:
    """Sum of edge lengths; for a 2-vertex segment, its length."""
    pts = _as_points(vertices)
    if len(pts) == 2:
        length = math.hypot(pts[1][0] - pts[0][0], pts[1][1] - pts[0][1])
        if length <= EPS_GEO:
            raise ValueError("degenerate zero-length segment")
        return length
    if len(pts) < 3:
        raise ValueError("polygon needs at least 3 vertices")
    diffs = np.roll(pts, -1, axis=0) - pts
    return float(np.hypot(diffs[:, 0], diffs[:, 1]).sum())


def _ensure_ccw(pts: np.ndarray) -> np.ndarray:
    if _signed_area(pts) < 0:
        return pts[::-1].copy()
    return pts


@dataclass(frozen=True)
class Obstacle:
    """A physical barrier: a simple polygon or a bare wall segment."""

    kind: str  # "polygon" | "segment"
    vertices: np.ndarray

    def __post_init__(self):
        pts = _as_points(self.vertices)
        if self.kind == "segment":
            if len(pts) != 2:
                raise ValueError("segment obstacle needs exactly 2 vertices")
            if math.hypot(*(pts[1] - pts[0])) <= EPS_GEO:
                raise ValueError("segment obstacle vertices must be distinct")
        elif self.kind == "polygon":
            if len(pts) < 3:
                raise ValueError("polygon obstacle needs at least 3 vertices")
            if _has_repeated_vertices(pts):
                raise ValueError("polygon obstacle has repeated vertices")
            if not _is_simple(pts):
                raise ValueError("polygon obstacle is self-intersecting")
            pts = _ensure_ccw(pts)
        else:
            raise ValueError(f"unknown obstacle kind {self.kind!r}")
        object.__setattr__(self, "vertices", pts)

    def edges(self):
        pts = self.vertices
        if self.kind == "segment":
            yield pts[0], pts[1]
        else:
            n = len(pts)
            for i in range(n):
                yield pts[i], pts[(i + 1) % n]

    def area(self) -> float:
        return 0.0 if self.kind == "segment" else abs(_signed_area(self.vertices))

    def perimeter(self) -> float:
        return polygon_perimeter(self.vertices)


@dataclass(frozen=True)
class Scenario:
    """Enclosure polygon, obstacle set and the occupancy bound k_sc."""

    enclosure: np.ndarray
    obstacles: tuple = ()
    k_sc: float = 0.5

    def __post_init__(self):
        pts = _as_points(self.enclosure)
        if len(pts) < 3:
            raise ValueError("enclosure needs at least 3 vertices")
        if _has_repeated_vertices(pts):
            raise ValueError("enclosure has repeated vertices")
        if not _is_simple(pts):
            raise ValueError("enclosure is self-intersecting")
        object.__setattr__(self, "enclosure", _ensure_ccw(pts))
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        if not (0.0 < self.k_sc < 1.0):
            raise ValueError("k_sc must lie in (0, 1)")

    def enclosure_edges(self):
        pts = self.enclosure
        n = len(pts)
        for i in range(n):
            yield pts[i], pts[(i + 1) % n]

    def barrier_edges(self):
        """All edges an agent can collide with: enclosure walls first, then obstacles."""
        yield from self.enclosure_edges()
        for ob in self.obstacles:
            yield from ob.edges()

    def enclosure_area(self) -> float:
        return abs(_signed_area(self.enclosure))

    def bounding_box(self):
        pts = self.enclosure
        return (
            float(pts[:, 0].min()),
            float(pts[:, 1].min()),
            float(pts[:, 0].max()),
            float(pts[:, 1].max()),
        )


@dataclass
class ValidationReport:
    """Outcome of the three obstacle-structure checks."""

    passed: bool
    violations: list = field(default_factory=list)


def _point_in_polygon(p, pts: np.ndarray, eps: float = EPS_GEO) -> str:
    """Classify p against simple polygon pts: 'in', 'out' or 'boundary'."""
    n = len(pts)
    for i in range(n):
        if point_segment_distance(p, pts[i], pts[(i + 1) % n]) <= eps:
            return "boundary"
    inside = False
    x, y = p[0], p[1]
    x1, y1 = pts[-1]
    for x2, y2 in pts:
        if (y1 > y) != (y2 > y):
            xi = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < xi:
                inside = not inside
        x1, y1 = x2, y2
    return "in" if inside else "out"


def _point_in_obstacle_closure(p, ob: Obstacle, eps: float = EPS_GEO) -> bool:
    if ob.kind == "segment":
        return point_segment_distance(p, ob.vertices[0], ob.vertices[1]) <= eps
    return _point_in_polygon(p, ob.vertices, eps) != "out"


def point_in_free_space(p, scenario: Scenario, eps: float = EPS_GEO) -> bool:
    """True iff p is strictly inside the enclosure and outside every obstacle closure."""
    if _point_in_polygon(p, scenario.enclosure, eps) != "in":
        return False
    for ob in scenario.obstacles:
        if _point_in_obstacle_closure(p, ob, eps):
            return False
    return True


def segment_clear(p, q, scenario: Scenario, eps: float = EPS_GEO) -> bool:
    """True iff the open segment pq touches no barrier.

    Callers guarantee p and q are in free space; under that precondition an
    edge-intersection sweep over all barriers is exact (any excursion out of
    free space must cross a barrier edge).
    """
    for a, b in scenario.barrier_edges():
        if segments_intersect(p, q, a, b, eps):
            return False
    return True


def clearance(p, scenario: Scenario) -> float:
    """Distance from p to the nearest barrier edge."""
    return min(point_segment_distance(p, a, b) for a, b in scenario.barrier_edges())


def disk_fits(p, r_b: float, scenario: Scenario, eps: float = EPS_GEO) -> bool:
    """True iff the closed disk of radius r_b at p lies inside free space."""
    if not point_in_free_space(p, scenario, eps):
        return False
    return clearance(p, scenario) > r_b + eps


def validate_scenario(scenario: Scenario) -> ValidationReport:
    """Check the three obstacle-structure properties independently.

    Reported properties: pairwise-disjoint obstacle interiors, strict
    containment of every obstacle inside the enclosure interior, and total
    obstacle area within the k_sc occupancy fraction.
    """
    violations = []
    obs = scenario.obstacles

    for i in range(len(obs)):
        for j in range(i + 1, len(obs)):
            if _obstacles_overlap(obs[i], obs[j]):
                violations.append(f"overlap: obstacles {i} and {j} share interior or touch")

    for i, ob in enumerate(obs):
        if not _obstacle_inside_enclosure(ob, scenario):
            violations.append(f"containment: obstacle {i} is not strictly inside the enclosure")

    total = sum(ob.area() for ob in obs)
    budget = scenario.k_sc * scenario.enclosure_area()
    if total > budget + EPS_GEO:
        violations.append(
            f"occupancy: obstacle area {total:.6g} exceeds k_sc * enclosure area {budget:.6g}"
        )

    return ValidationReport(passed=not violations, violations=violations)


def _obstacles_overlap(a: Obstacle, b: Obstacle) -> bool:
    for e1 in a.edges():
        for e2 in b.edges():
            if segments_intersect(e1[0], e1[1], e2[0], e2[1]):
                return True
    # full containment without edge contact
    if a.kind == "polygon" and _point_in_polygon(b.vertices[0], a.vertices) == "in":
        return True
    if b.kind == "polygon" and _point_in_polygon(a.vertices[0], b.vertices) == "in":
        return True
    return False


def _obstacle_inside_enclosure(ob: Obstacle, scenario: Scenario) -> bool:
    for v in ob.vertices:
        if _point_in_polygon(v, scenario.enclosure) != "in":
            return False
    # vertices inside is not sufficient for non-convex enclosures
    for a, b in ob.edges():
        for c, d in scenario.enclosure_edges():
            if segments_intersect(a, b, c, d):
                return False
    return True


# ---------------------------------------------------------------------------
# vectorized grid helpers (used by the coverage oracle)


def points_in_polygon(pts: np.ndarray, polygon: np.ndarray) -> np.ndarray:
    """Crossing-number test for an (n, 2) batch of points. Boundary not special-cased."""
    x = pts[:, 0]
    y = pts[:, 1]
    inside = np.zeros(len(pts), dtype=bool)
    x1, y1 = polygon[-1]
    for x2, y2 in polygon:
        crosses = (y1 > y) != (y2 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xi = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
        inside ^= crosses & (x < xi)
        x1, y1 = x2, y2
    return inside


def points_segment_distance(pts: np.ndarray, a, b) -> np.ndarray:
    """Distance from each row of pts to the closed segment ab."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ab = b - a
    denom = float(ab @ ab)
    ap = pts - a
    if denom == 0.0:
        return np.hypot(ap[:, 0], ap[:, 1])
    t = np.clip((ap @ ab) / denom, 0.0, 1.0)
    proj = a + t[:, None] * ab
    d = pts - proj
    return np.hypot(d[:, 0], d[:, 1])


def clearance_of_points(pts: np.ndarray, scenario: Scenario) -> np.ndarray:
    """Vectorized distance from each point to the nearest barrier edge."""
    dist = np.full(len(pts), np.inf)
    for a, b in scenario.barrier_edges():
        np.minimum(dist, points_segment_distance(pts, a, b), out=dist)
    return dist


def free_space_mask(pts: np.ndarray, scenario: Scenario, eps: float = EPS_GEO) -> np.ndarray:
    """Vectorized point_in_free_space over an (n, 2) batch."""
    mask = points_in_polygon(pts, scenario.enclosure)
    for ob in scenario.obstacles:
        if ob.kind == "polygon":
            mask &= ~points_in_polygon(pts, ob.vertices)
        for a, b in ob.edges():
            mask &= points_segment_distance(pts, a, b) > eps
    for a, b in scenario.enclosure_edges():
        mask &= points_segment_distance(pts, a, b) > eps
    return mask


# ---------------------------------------------------------------------------
# scenario files

_SCENARIO_KEYS = {"enclosure", "obstacles", "k_sc"}


def scenario_from_dict(data: dict) -> Scenario:
    unknown = set(data) - _SCENARIO_KEYS
    if unknown:
        raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
    if "enclosure" not in data:
        raise ValueError("scenario file must define 'enclosure'")
    obstacles = []
    for entry in data.get("obstacles") or []:
        extra = set(entry) - {"kind", "vertices"}
        if extra:
            raise ValueError(f"unknown obstacle keys: {sorted(extra)}")
        obstacles.append(Obstacle(kind=entry["kind"], vertices=entry["vertices"]))
    return Scenario(
        enclosure=data["enclosure"],
        obstacles=tuple(obstacles),
        k_sc=float(data.get("k_sc", 0.5)),
    )


def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "enclosure": [[float(x), float(y)] for x, y in scenario.enclosure],
        "obstacles": [
            {"kind": ob.kind, "vertices": [[float(x), float(y)] for x, y in ob.vertices]}
            for ob in scenario.obstacles
        ],
        "k_sc": float(scenario.k_sc),
    }


def load_scenario(path) -> Scenario:
    """Load and validate a scenario file; invalid structure is rejected outright."""
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: scenario file must be a mapping")
    scenario = scenario_from_dict(data)
    report = validate_scenario(scenario)
    if not report.passed:
        raise ValueError(f"{path}: invalid scenario: " + "; ".join(report.violations))
    return scenario
