"""Closed-form bounds on the minimum number of covering agents.

For an obstacle-free rectangle covered by visibility disks of radius r_v
under a connectivity-preserving hexagonal policy, the agent count is
sandwiched by floor/ceiling expressions of the side lengths measured in
r_v units. Thin strips admit an exact count; generic scenarios get a rough
estimate by segmentation into rectangles plus perimeter corrections.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import EPS_GEO, Scenario, point_in_free_space, segments_intersect

SQRT3 = math.sqrt(3.0)


def _snap(x: float, eps: float = EPS_GEO) -> float:
    """Snap near-integer reals to the integer before floor/ceil.

    Dimensionless ratios like sqrt(3) arrive with representation noise; a
    floor across an epsilon gap would silently change the bound by one.
    """
    r = round(x)
    return float(r) if abs(x - r) <= eps else x


def _floor(x: float) -> int:
    return math.floor(_snap(x))


def _ceil(x: float) -> int:
    return math.ceil(_snap(x))


def g_upper(rho1: float, rho2: float) -> int:
    """Agents sufficient for a rho1 x rho2 (in r_v and sqrt(3)*r_v units) sheet."""
    if rho1 <= 0 or rho2 <= 0:
        raise ValueError("dimensionless sides must be positive")
    return 1 + _floor(rho1) * _floor(rho2) + _ceil(rho1) * _ceil(rho2 - 0.5)


def g_lower(rho1: float, rho2: float) -> int:
    """Agents necessary for the same sheet under the row-packing argument."""
    if rho1 <= 0 or rho2 <= 0:
        raise ValueError("dimensionless sides must be positive")
    return (
        _ceil(rho1) * (_ceil(rho2 + 0.5) + _floor(rho2 - 1.0))
        + _floor(rho1) * _ceil(rho2 - 1.0)
        - _floor(rho1 + 1.0) * _floor(rho2)
    )


def g_exact(rho1: float, rho2: float) -> int:
    """Exact count for a thin strip (rho2 <= sqrt(3)): a single connected chain.

    The two printed radical forms are algebraically identical; both are
    evaluated and cross-checked on every call.
    """
    if rho1 <= 0 or rho2 <= 0:
        raise ValueError("dimensionless sides must be positive")
    if _snap(rho2) > SQRT3 + EPS_GEO:
        raise ValueError("thin-strip formula needs rho2 <= sqrt(3)")
    via_sqrt4 = 1 + _ceil(rho1 - math.sqrt(4.0 - rho2 * rho2))
    via_half = 1 + _ceil(rho1 - 2.0 * math.sqrt(1.0 - (rho2 / 2.0) ** 2))
    if via_sqrt4 != via_half:
        raise AssertionError(f"radical forms disagree: {via_sqrt4} vs {via_half}")
    return max(1, via_sqrt4)


def proof_form_upper(rho1: float, rho2: float) -> int:
    """Row-occupancy form of the sufficiency count (oracle for g_upper)."""
    f2 = _snap(rho2) - _floor(rho2)
    chi_half = 1 if f2 > 0.5 else 0
    return 1 + (_floor(rho1) + _ceil(rho1)) * _floor(rho2) + _ceil(rho1) * chi_half


def proof_form_lower(rho1: float, rho2: float) -> int:
    """Row-occupancy form with boundary-redundancy terms (oracle for g_lower)."""
    f1 = _snap(rho1) - _floor(rho1)
    f2 = _snap(rho2) - _floor(rho2)
    chi_half = 1 if f2 > 0.5 else 0
    chi0_1 = 1 if f1 == 0.0 else 0
    chi0_2 = 1 if f2 == 0.0 else 0
    return (
        (_floor(rho1) + _ceil(rho1)) * _floor(rho2)
        + _ceil(rho1) * chi_half
        - _floor(rho2) * chi0_1
        - _floor(rho1) * chi0_2
    )


def proof_form_check(rho1: float, rho2: float):
    """Evaluate both occupancy forms; used only as an oracle for the closed forms."""
    return proof_form_upper(rho1, rho2), proof_form_lower(rho1, rho2)


@dataclass(frozen=True)
class BoundsReport:
    """Lower/upper or exact agent counts for one rectangle."""

    case: str  # general | thin-horizontal | thin-vertical | single
    lower: int
    upper: int
    exact: int | None = None

    def best_lower(self) -> int:
        return self.exact if self.exact is not None else self.lower


def rect_bounds(width: float, height: float, r_v: float) -> BoundsReport:
    """Case dispatch over the rectangle proportions measured in r_v units."""
    if width <= 0 or height <= 0 or r_v <= 0:
        raise ValueError("rectangle sides and r_v must be positive")
    rb = _snap(width / r_v)
    rh = _snap(height / r_v)
    rb3 = _snap(rb / SQRT3)
    rh3 = _snap(rh / SQRT3)

    if rb <= 1.0 and rh <= 1.0:
        return BoundsReport(case="single", lower=1, upper=1, exact=1)
    if rh3 <= 1.0 and rb > 1.0:
        n = g_exact(rb, rh)
        return BoundsReport(case="thin-horizontal", lower=n, upper=n, exact=n)
    if rb3 <= 1.0 and rh > 1.0:
        n = g_exact(rh, rb)
        return BoundsReport(case="thin-vertical", lower=n, upper=n, exact=n)

    lower = min(g_lower(rb, rh3), g_lower(rh, rb3))
    upper = min(g_upper(rb, rh3), g_upper(rh, rb3))
    return BoundsReport(case="general", lower=lower, upper=upper)


def perimeter_correction(perimeter: float, r_v: float) -> int:
    """Border-effect heuristic: one extra agent per r_v of boundary length."""
    if perimeter <= 0 or r_v <= 0:
        raise ValueError("perimeter and r_v must be positive")
    return _floor(perimeter / r_v)


@dataclass(frozen=True)
class SegmentRect:
    """One axis-aligned rectangle of a scenario segmentation."""

    origin: tuple
    width: float
    height: float
    inside_free_space: bool | None = None  # None: decide geometrically

    def corners(self):
        x, y = self.origin
        return [(x, y), (x + self.width, y), (x + self.width, y + self.height), (x, y + self.height)]

    def edges(self):
        c = self.corners()
        for k in range(4):
            yield c[k], c[(k + 1) % 4]


def rect_inside_free_space(rect: SegmentRect, scenario: Scenario, margin: float = 1e-6) -> bool:
    """True iff the rectangle lies in free space, up to a hair-width margin.

    Free space is open, so a segmentation rectangle flush with the enclosure
    wall would never test inside; the rectangle is shrunk by `margin` first.
    """
    x0, y0 = rect.origin
    x1, y1 = x0 + rect.width, y0 + rect.height
    sx0, sy0, sx1, sy1 = x0 + margin, y0 + margin, x1 - margin, y1 - margin
    if sx0 >= sx1 or sy0 >= sy1:
        return False
    corners = [(sx0, sy0), (sx1, sy0), (sx1, sy1), (sx0, sy1)]
    for c in corners:
        if not point_in_free_space(c, scenario):
            return False
    for k in range(4):
        for c, d in scenario.barrier_edges():
            if segments_intersect(corners[k], corners[(k + 1) % 4], c, d):
                return False
    # an obstacle fully inside the rectangle leaves corners and edges clean
    for ob in scenario.obstacles:
        for vx, vy in ob.vertices:
            if sx0 < vx < sx1 and sy0 < vy < sy1:
                return False
    return True


def segmented_lower_bound(
    scenario: Scenario,
    rectangles: list,
    r_v: float,
    sigma_enclosure: float = 1.0,
    sigma_obstacles=None,
) -> int:
    """Rough whole-scenario estimate: perimeter terms plus per-rectangle bounds.

    Every rectangle flagged as inside free space contributes its own lower
    bound; boundary coefficients scale the perimeter corrections of the
    enclosure and of each obstacle.
    """
    from .geometry import polygon_perimeter

    if sigma_obstacles is None:
        sigma_obstacles = [0.5] * len(scenario.obstacles)
    if len(sigma_obstacles) != len(scenario.obstacles):
        raise ValueError("need one boundary coefficient per obstacle")
    for s in [sigma_enclosure, *sigma_obstacles]:
        if not (0.0 <= s <= 1.0):
            raise ValueError("boundary coefficients must lie in [0, 1]")

    total = sigma_enclosure * perimeter_correction(polygon_perimeter(scenario.enclosure), r_v)
    for s, ob in zip(sigma_obstacles, scenario.obstacles):
        total += s * perimeter_correction(ob.perimeter(), r_v)

    for k, rect in enumerate(rectangles):
        inside = rect_inside_free_space(rect, scenario)
        if rect.inside_free_space is not None:
            if rect.inside_free_space and not inside:
                raise ValueError(f"rectangle {k} flagged inside free space but is not")
            inside = rect.inside_free_space
        if inside:
            total += rect_bounds(rect.width, rect.height, r_v).best_lower()

    return _floor(total)
