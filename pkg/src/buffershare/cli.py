"""Command-line orchestrator: grid expansion, sweep execution, reporting.

Subcommands:
  grid    expand a grid spec (preset or file) and print or save the configs
  run     execute a sweep into an output directory (resumable, parallel)
  report  emit a heatmap CSV (plus a rendered figure) from sweep results
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from .config import PRESETS, generate_grid, load_grid_file, parse_duration
from .report import emit_heatmap_table, load_rows, write_table_csv
from .sweep import failed_records, run_sweep


def _load_grid(args) -> list:
    if args.grid_file:
        spec = load_grid_file(args.grid_file)
    elif args.preset:
        spec = PRESETS[args.preset]()
    else:
        raise SystemExit("need --grid-file or --preset")
    configs = generate_grid(spec, master_seed=args.master_seed)
    if getattr(args, "duration", None):
        duration = parse_duration(args.duration)
        configs = [dataclasses.replace(c, sim_duration=duration) for c in configs]
    return configs


def _cmd_grid(args) -> int:
    configs = _load_grid(args)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            for c in configs:
                fh.write(json.dumps(c.to_dict(), sort_keys=True) + "\n")
        print(f"wrote {len(configs)} configs to {args.out}")
    else:
        print(f"{len(configs)} configs")
        for c in configs[: args.head]:
            print(json.dumps(c.flat()))
        if len(configs) > args.head:
            print(f"... ({len(configs) - args.head} more)")
    return 0


def _cmd_run(args) -> int:
    configs = _load_grid(args)
    records = run_sweep(configs, args.out, workers=args.workers)
    failed = failed_records(records)
    done = sum(r.status == "ok" for r in records)
    cached = sum(r.status == "cached" for r in records)
    print(f"sweep: {done} run, {cached} cached, {len(failed)} failed -> {args.out}")
    for rec in failed:
        print(f"  FAILED {rec.archive}:\n{rec.error}", file=sys.stderr)
    return 1 if failed else 0


def _cmd_report(args) -> int:
    rows = load_rows(args.archives)
    filters = {}
    for item in args.filter or []:
        key, _, value = item.partition("=")
        filters[key] = float(value)
    table = emit_heatmap_table(rows, args.x, args.y, args.z, filters)
    write_table_csv(table, args.out)
    print(f"wrote {len(table)} cells to {args.out}")
    if not args.no_fig:
        from .plots import render_heatmap

        fig_path = os.path.splitext(args.out)[0] + ".png"
        render_heatmap(table, args.x, args.y, args.z, fig_path)
        print(f"rendered {fig_path}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="buffershare",
        description="DCTCP/Cubic shared-buffer simulation sweeps",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_grid_args(p):
        p.add_argument("--grid-file", help="declarative YAML/JSON grid spec")
        p.add_argument("--preset", choices=sorted(PRESETS),
                       help="shipped grid preset")
        p.add_argument("--master-seed", type=int, default=None,
                       help="override the grid's master seed")
        p.add_argument("--duration", default=None,
                       help="override sim duration (e.g. 5s)")

    p_grid = sub.add_parser("grid", help="expand and inspect a grid")
    add_grid_args(p_grid)
    p_grid.add_argument("--out", help="write configs as JSONL")
    p_grid.add_argument("--head", type=int, default=5,
                        help="rows to print without --out")
    p_grid.set_defaults(func=_cmd_grid)

    p_run = sub.add_parser("run", help="execute a sweep")
    add_grid_args(p_run)
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--workers", type=int, default=1)
    p_run.set_defaults(func=_cmd_run)

    p_rep = sub.add_parser("report", help="emit heatmap CSV and figure")
    p_rep.add_argument("--archives", required=True,
                       help="sweep directory or results.csv")
    p_rep.add_argument("--x", required=True)
    p_rep.add_argument("--y", required=True)
    p_rep.add_argument("--z", required=True)
    p_rep.add_argument("--filter", action="append", metavar="DIM=VALUE")
    p_rep.add_argument("--out", required=True, help="output CSV path")
    p_rep.add_argument("--no-fig", action="store_true",
                       help="skip the rendered figure")
    p_rep.set_defaults(func=_cmd_report)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
