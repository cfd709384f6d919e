"""Command line front end: seeded pipeline runs, bounds tables and replay."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import yaml

from .bounds import SegmentRect, perimeter_correction, rect_bounds, segmented_lower_bound
from .geometry import load_scenario
from .pipeline import RunConfig, load_config, replay, run_pipeline


def _cmd_run(args) -> int:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.scenario:
        cfg.scenario = args.scenario
    if args.seed is not None:
        cfg.seed = args.seed
    if args.stages:
        cfg.stages = tuple(s.strip() for s in args.stages.split(","))
        cfg.__post_init__()
    if not cfg.scenario:
        print("error: no scenario given (use --scenario or the config file)", file=sys.stderr)
        return 2
    try:
        art = run_pipeline(cfg, args.out)
    except Exception as exc:  # noqa: BLE001 - surface stage failures as exit codes
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(yaml.safe_dump(art.metrics, sort_keys=False), end="")
    print(f"artifacts written to {Path(args.out).resolve()}")
    return 0


def _load_segmentation(path):
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: segmentation file must be a mapping")
    unknown = set(data) - {"r_v", "scenario", "sigma_enclosure", "sigma_obstacles", "rectangles"}
    if unknown:
        raise ValueError(f"{path}: unknown segmentation keys: {sorted(unknown)}")
    scen_path = Path(data["scenario"])
    if not scen_path.is_absolute():
        scen_path = Path(path).parent / scen_path
    scenario = load_scenario(scen_path)
    rects = []
    for entry in data.get("rectangles") or []:
        extra = set(entry) - {"origin", "width", "height", "inside"}
        if extra:
            raise ValueError(f"{path}: unknown rectangle keys: {sorted(extra)}")
        rects.append(
            SegmentRect(
                origin=tuple(float(v) for v in entry["origin"]),
                width=float(entry["width"]),
                height=float(entry["height"]),
                inside_free_space=entry.get("inside"),
            )
        )
    return (
        scenario,
        rects,
        float(data["r_v"]),
        float(data.get("sigma_enclosure", 1.0)),
        data.get("sigma_obstacles"),
    )


def _cmd_bounds(args) -> int:
    if args.segmentation:
        try:
            scenario, rects, r_v, sig_en, sig_ob = _load_segmentation(args.segmentation)
            estimate = segmented_lower_bound(scenario, rects, r_v, sig_en, sig_ob)
        except (ValueError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        print(f"{'rectangles':>12}  {len(rects)}")
        print(f"{'r_v':>12}  {r_v:g}")
        print(f"{'lower bound':>12}  {estimate}")
        return 0
    if args.width is None or args.height is None:
        print("error: give --width and --height, or --segmentation", file=sys.stderr)
        return 2
    try:
        report = rect_bounds(args.width, args.height, args.rv)
        n_ap = perimeter_correction(2.0 * (args.width + args.height), args.rv)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"{'case':>20}  {report.case}")
    print(f"{'lower':>20}  {report.lower}")
    print(f"{'upper':>20}  {report.upper}")
    print(f"{'exact':>20}  {report.exact if report.exact is not None else '-'}")
    print(f"{'perimeter correction':>20}  {n_ap}")
    return 0


def _cmd_replay(args) -> int:
    try:
        metrics = replay(args.snapshot)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(yaml.safe_dump(metrics, sort_keys=False), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swarmcover",
        description="Metric-free coverage, clustering and dispatch simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute the seeded pipeline")
    p_run.add_argument("--scenario", help="scenario file (overrides config)")
    p_run.add_argument("--config", help="run configuration file")
    p_run.add_argument("--seed", type=int, help="root RNG seed (overrides config)")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--stages", help="comma list prefix of coverage,clustering,dispatch")
    p_run.set_defaults(func=_cmd_run)

    p_bounds = sub.add_parser("bounds", help="agent-count bounds for a rectangle or segmentation")
    p_bounds.add_argument("--width", type=float)
    p_bounds.add_argument("--height", type=float)
    p_bounds.add_argument("--rv", type=float, default=5.0, help="visibility radius (default 5)")
    p_bounds.add_argument("--segmentation", help="segmentation file")
    p_bounds.set_defaults(func=_cmd_bounds)

    p_replay = sub.add_parser("replay", help="recompute metrics from a snapshot")
    p_replay.add_argument("--snapshot", required=True)
    p_replay.set_defaults(func=_cmd_replay)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
