"""Deterministic SVG emission for graph snapshots and functional traces.

Everything is written with fixed-precision formatting and no timestamps, so
identical inputs produce byte-identical files.
"""

from __future__ import annotations

import math

from .geometry import Scenario
from .netgraph import SwarmGraph


def _fmt(x: float) -> str:
    return f"{x:.4f}"


def _poly_points(vertices) -> str:
    return " ".join(f"{_fmt(x)},{_fmt(-y)}" for x, y in vertices)


def _star_path(cx: float, cy: float, r: float) -> str:
    pts = []
    for k in range(10):
        rad = r if k % 2 == 0 else 0.42 * r
        ang = math.pi / 2 + k * math.pi / 5
        pts.append((cx + rad * math.cos(ang), cy + rad * math.sin(ang)))
    return "M " + " L ".join(f"{_fmt(x)} {_fmt(-y)}" for x, y in pts) + " Z"


def render_snapshot(
    scenario: Scenario,
    graph: SwarmGraph,
    r_b: float,
    cluster=(),
    event_center=None,
    leader=None,
    base_station: int = 1,
) -> str:
    """Scenario outline, obstacles, communication edges and agent bodies.

    Cluster members are drawn in red, the leader gets a dark ring, the base
    station a black ring, and the event a gold star. The y axis points up.
    """
    x0, y0, x1, y1 = scenario.bounding_box()
    margin = 0.06 * max(x1 - x0, y1 - y0) + 1.0
    vx, vy = x0 - margin, -(y1 + margin)
    vw, vh = (x1 - x0) + 2 * margin, (y1 - y0) + 2 * margin
    cluster = set(cluster)

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{_fmt(vx)} {_fmt(vy)} {_fmt(vw)} {_fmt(vh)}" '
        f'width="720" height="{_fmt(720 * vh / vw)}">',
        f'<rect x="{_fmt(vx)}" y="{_fmt(vy)}" width="{_fmt(vw)}" height="{_fmt(vh)}" fill="white"/>',
        f'<polygon points="{_poly_points(scenario.enclosure)}" fill="#fcfcfc" stroke="#202020" stroke-width="0.12"/>',
    ]
    for ob in scenario.obstacles:
        if ob.kind == "polygon":
            parts.append(
                f'<polygon points="{_poly_points(ob.vertices)}" fill="#9aa0a6" stroke="#5f6368" stroke-width="0.08"/>'
            )
        else:
            (ax, ay), (bx, by) = ob.vertices
            parts.append(
                f'<line x1="{_fmt(ax)}" y1="{_fmt(-ay)}" x2="{_fmt(bx)}" y2="{_fmt(-by)}" '
                'stroke="#5f6368" stroke-width="0.18"/>'
            )

    for i, j, _w in graph.edges():
        pi = graph.vertex(i).pos
        pj = graph.vertex(j).pos
        color = "#d4a5a5" if (i in cluster and j in cluster) else "#b0c4de"
        parts.append(
            f'<line x1="{_fmt(pi[0])}" y1="{_fmt(-pi[1])}" x2="{_fmt(pj[0])}" y2="{_fmt(-pj[1])}" '
            f'stroke="{color}" stroke-width="0.06"/>'
        )

    for v in graph.vertex_ids():
        p = graph.vertex(v).pos
        fill = "#d93025" if v in cluster else "#4285f4"
        ring = ""
        if v == base_station:
            ring = ' stroke="#000000" stroke-width="0.12"'
        elif leader is not None and v == leader:
            ring = ' stroke="#7b1fa2" stroke-width="0.12"'
        parts.append(
            f'<circle cx="{_fmt(p[0])}" cy="{_fmt(-p[1])}" r="{_fmt(r_b)}" fill="{fill}"{ring}/>'
        )

    if event_center is not None:
        parts.append(
            f'<path d="{_star_path(event_center[0], event_center[1], 0.9)}" '
            'fill="#fbbc04" stroke="#202020" stroke-width="0.08"/>'
        )

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_trace(rows, width: int = 720, height: int = 360) -> str:
    """Functional value per accepted micro-step, with session and new-edge markers."""
    ml, mr, mt, mb = 60.0, 15.0, 15.0, 40.0
    pw, ph = width - ml - mr, height - mt - mb
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width} {height}" '
        f'width="{width}" height="{height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{_fmt(ml)}" y="{_fmt(mt)}" width="{_fmt(pw)}" height="{_fmt(ph)}" '
        'fill="none" stroke="#202020" stroke-width="1"/>',
    ]
    finite = [r for r in rows if math.isfinite(r.h_full)]
    if not finite:
        parts.append(
            f'<text x="{_fmt(ml + pw / 2)}" y="{_fmt(mt + ph / 2)}" text-anchor="middle" '
            'font-size="14" font-family="monospace">no accepted steps</text>'
        )
        parts.append("</svg>")
        return "\n".join(parts) + "\n"

    lo = min(r.h_full for r in finite)
    hi = max(r.h_full for r in finite)
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    n = max(r.step for r in finite)

    def sx(step):
        return ml + pw * (step - 1) / max(1, n - 1)

    def sy(value):
        return mt + ph * (1.0 - (value - lo) / (hi - lo))

    seen_sessions = set()
    for r in finite:
        if r.session not in seen_sessions and r.session > 1:
            seen_sessions.add(r.session)
            x = sx(r.step)
            parts.append(
                f'<line x1="{_fmt(x)}" y1="{_fmt(mt)}" x2="{_fmt(x)}" y2="{_fmt(mt + ph)}" '
                'stroke="#bbbbbb" stroke-width="1" stroke-dasharray="4 3"/>'
            )

    pts = " ".join(f"{_fmt(sx(r.step))},{_fmt(sy(r.h_full))}" for r in finite)
    parts.append(f'<polyline points="{pts}" fill="none" stroke="#1a73e8" stroke-width="1.5"/>')

    for r in finite:
        if r.new_edges:
            parts.append(
                f'<circle cx="{_fmt(sx(r.step))}" cy="{_fmt(sy(r.h_full))}" r="3.5" fill="#7b1fa2"/>'
            )

    parts.append(
        f'<text x="{_fmt(ml - 8)}" y="{_fmt(sy(hi) + 4)}" text-anchor="end" font-size="11" '
        f'font-family="monospace">{hi:.4g}</text>'
    )
    parts.append(
        f'<text x="{_fmt(ml - 8)}" y="{_fmt(sy(lo) + 4)}" text-anchor="end" font-size="11" '
        f'font-family="monospace">{lo:.4g}</text>'
    )
    parts.append(
        f'<text x="{_fmt(ml + pw / 2)}" y="{_fmt(height - 12)}" text-anchor="middle" font-size="12" '
        f'font-family="monospace">accepted micro-steps (1..{n})</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
