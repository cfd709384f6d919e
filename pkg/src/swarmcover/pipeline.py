"""End-to-end seeded runs: configuration, staging, artifacts and replay.

A run executes coverage (with redundancy pruning), event sensing and edge
weighting, leader election, cluster growth and the dispatch loop, writing a
graph snapshot and SVG after each stage plus a CSV functional trace. All
randomness derives from one root seed fanned out per agent, so identical
configurations produce byte-identical artifacts.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

import yaml

from . import svg
from .clustering import clustering
from .consensus import max_consensus
from .coverage import CoverageGrid, DeploymentConfig, coverage_run, prune_redundant
from .dispatch import DispatchConfig, TraceRow, dispatch_loop
from .geometry import Scenario, load_scenario, scenario_from_dict, scenario_to_dict
from .netgraph import (
    ClusterView,
    SwarmGraph,
    graph_from_dict,
    graph_to_dict,
    isoperimetric,
    weigh_edges_from_vertices,
)
from .sensing import EventField, NoiseModel, sense_event

STAGES = ("coverage", "clustering", "dispatch")


@dataclass
class RunConfig:
    """Flat run configuration; defaults follow the reference simulation setup."""

    scenario: str = ""
    r_b: float = 0.5  # body radius [m]
    r_v: float = 5.0  # visibility radius [m]
    k_p: float = 1.0  # homing controller gain
    n_t: int = 1  # contact points per touch sensor
    heading: float = 0.0  # lattice reference direction [rad]
    event: tuple = (1.0, 0.0)  # event position [m]
    k_ev: float = 160.0  # peak event intensity
    r_ev: float = 15.0  # event decay distance [m]
    sigma_w: float = 0.0  # relative sensing noise amplitude
    alpha_w: float = 3.0  # link-formation ease constant
    n_cl: int = 15  # cluster size
    max_iter: int = 10  # dispatch session cap
    fir_window: int = 5  # moving-average window [samples]
    delta: float | None = None  # dispatch micro-step [m]; default r_b/2
    leg_steps: int = 20  # micro-steps per dispatch visit
    eps_ang: float = 1e-3  # angle tolerance [rad]
    max_agents: int = 600
    prune: bool = True
    weighted_cut: bool = True
    seed: int = 0
    stages: tuple = STAGES
    base_station: tuple | None = None  # default: enclosure bbox center

    def __post_init__(self):
        self.stages = tuple(self.stages)
        bad = [s for s in self.stages if s not in STAGES]
        if bad:
            raise ValueError(f"unknown stages {bad}; valid: {list(STAGES)}")
        if self.stages != STAGES[: len(self.stages)]:
            raise ValueError("stages must be a prefix of coverage, clustering, dispatch")

    @property
    def micro_step(self) -> float:
        return self.delta if self.delta is not None else self.r_b / 2.0


_CONFIG_KEYS = {f.name for f in fields(RunConfig)}


def load_config(path) -> RunConfig:
    """Read a flat config mapping; unknown keys are rejected, not ignored."""
    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise ValueError(f"{path}: run config must be a mapping")
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise ValueError(f"{path}: unknown config keys: {sorted(unknown)}")
    if "event" in data:
        data["event"] = tuple(float(v) for v in data["event"])
    if "base_station" in data and data["base_station"] is not None:
        data["base_station"] = tuple(float(v) for v in data["base_station"])
    if "stages" in data:
        data["stages"] = tuple(data["stages"])
    return RunConfig(**data)


@dataclass
class RunArtifacts:
    out_dir: Path
    snapshots: dict = field(default_factory=dict)  # stage -> path
    svg_files: dict = field(default_factory=dict)
    trace_path: Path | None = None
    metrics_path: Path | None = None
    metrics: dict = field(default_factory=dict)
    graph: SwarmGraph | None = None
    dispatch: DispatchResult | None = None
    cluster: tuple = ()


def _metrics_from_graph(graph: SwarmGraph, cluster, scenario: Scenario,
                        r_b: float, r_v: float, weighted_cut: bool, pitch: float) -> dict:
    """The replayable portion of the metrics: functional values and coverage."""
    out = {
        "n_agents": len(graph),
        "connected": bool(graph.is_connected()),
        "cluster_size": len(cluster),
    }
    if 1 in graph:
        grid = CoverageGrid(scenario, r_b, r_v, pitch, graph.vertex(1).pos)
        out["coverage_fraction"] = round(
            grid.fraction_for([graph.vertex(v).pos for v in graph.vertex_ids()]), 9
        )
    if cluster:
        iso = isoperimetric(ClusterView(graph, frozenset(cluster)), weighted_cut)
        out["h_full"] = round(iso.value, 9) if math.isfinite(iso.value) else "inf"
        out["h_cl"] = round(iso.reduced, 9) if math.isfinite(iso.reduced) else "inf"
        out["eps_s"] = round(iso.volume_in, 9)
        out["eps_c"] = round(iso.cut, 9)
    return out


def _write_snapshot(path: Path, stage: str, cfg: RunConfig, scenario: Scenario,
                    graph: SwarmGraph, cluster=()):
    doc = {
        "format": "swarmcover-snapshot-v1",
        "stage": stage,
        "r_b": cfg.r_b,
        "r_v": cfg.r_v,
        "weighted_cut": cfg.weighted_cut,
        "scenario": scenario_to_dict(scenario),
        "event": {"center": list(cfg.event), "peak": cfg.k_ev, "decay": cfg.r_ev},
        "cluster": sorted(cluster),
        "graph": graph_to_dict(graph),
    }
    path.write_text(yaml.safe_dump(doc, sort_keys=False))


def load_snapshot(path):
    """Parse a snapshot file back into (graph, cluster, scenario, params)."""
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ValueError(f"{path}: not parseable as a snapshot: {exc}") from exc
    if not isinstance(data, dict) or data.get("format") != "swarmcover-snapshot-v1":
        raise ValueError(f"{path}: missing snapshot format marker")
    for key in ("r_b", "r_v", "scenario", "graph"):
        if key not in data:
            raise ValueError(f"{path}: snapshot lacks required field {key!r}")
    scenario = scenario_from_dict(data["scenario"])
    graph = graph_from_dict(data["graph"])
    cluster = tuple(int(v) for v in data.get("cluster") or ())
    return graph, cluster, scenario, data


def replay(path) -> dict:
    """Recompute the functional metrics of a snapshot from the file alone."""
    graph, cluster, scenario, data = load_snapshot(path)
    return _metrics_from_graph(
        graph,
        cluster,
        scenario,
        float(data["r_b"]),
        float(data["r_v"]),
        bool(data.get("weighted_cut", True)),
        pitch=float(data["r_b"]) / 2.0,
    )


def _write_trace(path: Path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["step", "session", "agent", "h_full", "h_cl", "eps_s", "eps_c",
             "delta_local", "delta_global", "new_edges"]
        )
        for r in rows:
            writer.writerow(
                [r.step, r.session, r.agent, repr(r.h_full), repr(r.h_cl), repr(r.eps_s),
                 repr(r.eps_c), repr(r.delta_local), repr(r.delta_global),
                 ";".join(f"{i}-{j}" for i, j in r.new_edges)]
            )


def read_trace(path) -> list:
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append(
                TraceRow(
                    step=int(rec["step"]),
                    session=int(rec["session"]),
                    agent=int(rec["agent"]),
                    h_full=float(rec["h_full"]),
                    h_cl=float(rec["h_cl"]),
                    eps_s=float(rec["eps_s"]),
                    eps_c=float(rec["eps_c"]),
                    delta_local=float(rec["delta_local"]),
                    delta_global=float(rec["delta_global"]),
                    new_edges=tuple(
                        tuple(int(x) for x in pair.split("-"))
                        for pair in rec["new_edges"].split(";")
                        if pair
                    ),
                )
            )
    return rows


def run_pipeline(cfg: RunConfig, out_dir, scenario: Scenario | None = None) -> RunArtifacts:
    """Execute the selected stage prefix and write all artifacts under out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if scenario is None:
        scenario = load_scenario(cfg.scenario)
    art = RunArtifacts(out_dir=out)

    x0, y0, x1, y1 = scenario.bounding_box()
    bs = cfg.base_station if cfg.base_station is not None else (0.5 * (x0 + x1), 0.5 * (y0 + y1))

    # --- coverage ----------------------------------------------------------
    deploy = DeploymentConfig(
        base_station=bs, r_b=cfg.r_b, r_v=cfg.r_v, k_p=cfg.k_p,
        max_agents=cfg.max_agents, eps_ang=cfg.eps_ang, heading=cfg.heading,
    )
    result = coverage_run(scenario, deploy)
    graph = result.graph
    pruned = prune_redundant(graph, result.grid, cfg.eps_ang) if cfg.prune else []
    art.graph = graph

    snap = out / "snapshot_coverage.yaml"
    _write_snapshot(snap, "coverage", cfg, scenario, graph)
    art.snapshots["coverage"] = snap
    fig = out / "coverage.svg"
    fig.write_text(svg.render_snapshot(scenario, graph, cfg.r_b, event_center=cfg.event))
    art.svg_files["coverage"] = fig

    metrics = {
        "stages": list(cfg.stages),
        "seed": cfg.seed,
        "n_agents": len(graph),
        "pruned": sorted(pruned),
        "coverage_fraction": round(result.grid.fraction_for(
            [graph.vertex(v).pos for v in graph.vertex_ids()]), 9),
        "connected": bool(graph.is_connected()),
    }

    event = EventField(center=cfg.event, peak=cfg.k_ev, decay=cfg.r_ev)
    noise = NoiseModel(sigma=cfg.sigma_w, alpha=cfg.alpha_w, seed=cfg.seed)
    rngs = {v: noise.rng_for(v) for v in graph.vertex_ids()}

    cluster = ()
    leader = None
    if "clustering" in cfg.stages:
        # event sensing assigns vertex weights, then edges take endpoint means
        for v in graph.vertex_ids():
            graph.vertex(v).weight = sense_event(graph.vertex(v).pos, event, noise, rngs[v])
        weigh_edges_from_vertices(graph)
        leader, state = max_consensus(graph, 1)
        cstate = clustering(graph, leader, min(cfg.n_cl, len(graph)))
        cluster = tuple(sorted(cstate.members))
        art.cluster = cluster
        metrics.update(
            {
                "leader": leader,
                "consensus_rounds": state.rounds,
                "cluster_size": len(cluster),
                "cluster_connected": bool(graph.is_connected(cluster)),
            }
        )
        snap = out / "snapshot_clustering.yaml"
        _write_snapshot(snap, "clustering", cfg, scenario, graph, cluster)
        art.snapshots["clustering"] = snap
        fig = out / "clustering.svg"
        fig.write_text(
            svg.render_snapshot(scenario, graph, cfg.r_b, cluster=cluster,
                                event_center=cfg.event, leader=leader)
        )
        art.svg_files["clustering"] = fig

    if "dispatch" in cfg.stages:
        dcfg = DispatchConfig(
            max_iter=cfg.max_iter, step=cfg.micro_step, leg_steps=cfg.leg_steps,
            fir_window=cfg.fir_window, r_b=cfg.r_b, r_v=cfg.r_v,
            weighted_cut=cfg.weighted_cut,
        )
        # per-agent noise streams continue from the sensing stage
        dres = dispatch_loop(graph, cluster, leader, scenario, event, noise, dcfg, rngs=rngs)
        art.dispatch = dres

        trace_path = out / "functional_trace.csv"
        _write_trace(trace_path, dres.trace)
        art.trace_path = trace_path

        disp = dres.displacement(graph)
        metrics.update(
            {
                "sessions": dres.sessions,
                "iterations": dres.visits,
                "accepted_steps": len(dres.trace),
                "final_leader": dres.leader,
                "mean_displacement": round(
                    sum(disp.values()) / len(disp), 9) if disp else 0.0,
                "new_cluster_edges": sum(len(r.new_edges) for r in dres.trace),
            }
        )
        snap = out / "snapshot_dispatch.yaml"
        _write_snapshot(snap, "dispatch", cfg, scenario, graph, cluster)
        art.snapshots["dispatch"] = snap
        fig = out / "dispatch.svg"
        fig.write_text(
            svg.render_snapshot(scenario, graph, cfg.r_b, cluster=cluster,
                                event_center=cfg.event, leader=dres.leader)
        )
        art.svg_files["dispatch"] = fig
        fig = out / "functional.svg"
        fig.write_text(svg.render_trace(dres.trace))
        art.svg_files["functional"] = fig

    metrics.update(
        _metrics_from_graph(graph, cluster, scenario, cfg.r_b, cfg.r_v,
                            cfg.weighted_cut, pitch=cfg.r_b / 2.0)
    )
    metrics_path = out / "metrics.yaml"
    metrics_path.write_text(yaml.safe_dump(metrics, sort_keys=False))
    art.metrics = metrics
    art.metrics_path = metrics_path
    return art
