"""Command-line interface.

Subcommands:
  generate    write a synthetic dataset (CSV + ground-truth manifest)
  infer       decide the causal direction of a two-column dataset
  experiment  run a seeded benchmark grid, journaled and resumable
  report      render grid results as text/json/csv plus a figure

Exit codes: 0 success, 2 usage or validation error, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .datagen import DIRECTIONS, GenConfig, generate_mixture_dataset, read_dataset, write_dataset
from .harness import ExperimentConfig, ExperimentResult, report, run_experiment_grid
from .inference import decide_direction
from .rngdist import RngStream


def _load_config_file(path):
    if path is None:
        return {}
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"config file not found: {p}")
    return json.loads(p.read_text())


def _add_shared(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=0, help="master seed (u64)")
    p.add_argument("--config", help="JSON config file overriding defaults")
    p.add_argument("--threads", type=int, default=1, help="parallelism degree")
    p.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lingammix", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a synthetic mixture dataset")
    _add_shared(g)
    g.add_argument("--n", type=int, required=True, help="sample size N")
    g.add_argument("--classes", type=int, required=True, help="true class count l")
    g.add_argument("--direction", choices=DIRECTIONS, default="x1->x2")
    g.add_argument("--separation", type=float, default=3.0, help="class mean separation")

    i = sub.add_parser("infer", help="decide the causal direction of a dataset")
    _add_shared(i)
    i.add_argument("dataset", help="dataset CSV file or directory")
    i.add_argument("--draws", type=int, default=10_000, help="Monte Carlo draws per grid cell")

    e = sub.add_parser("experiment", help="run a benchmark grid")
    _add_shared(e)
    e.add_argument("--cells", default="50:2,100:2,500:2", help="comma list of N:l cells")
    e.add_argument("--datasets-per-cell", type=int, default=100)
    e.add_argument("--draws", type=int, default=10_000)
    e.add_argument("--separation", type=float, default=3.0)
    e.add_argument("--quiet", action="store_true", help="suppress per-dataset progress")

    r = sub.add_parser("report", help="render grid results")
    _add_shared(r)
    r.add_argument("result", help="experiment result JSON file")
    r.add_argument("--format", choices=("text", "json", "csv"), default="text")
    r.add_argument("--baseline", action="store_true", help="include published reference counts")
    r.add_argument("--no-figure", action="store_true", help="skip the accuracy figure")

    return parser


def _parse_cells(spec: str):
    cells = []
    for part in spec.split(","):
        try:
            n_str, l_str = part.split(":")
            cells.append((int(n_str), int(l_str)))
        except ValueError:
            raise ValueError(f"bad cell spec {part!r}, expected N:l")
    return tuple(cells)


def _cmd_generate(args) -> int:
    overrides = _load_config_file(args.config)
    cfg = GenConfig(
        N=overrides.get("N", args.n),
        l=overrides.get("l", args.classes),
        direction=overrides.get("direction", args.direction),
        class_mean_separation=overrides.get("class_mean_separation", args.separation),
        mixing=tuple(overrides["mixing"]) if "mixing" in overrides else "equal",
        seed=overrides.get("seed", args.seed),
    )
    out_dir = Path(args.out or ".")
    dataset = generate_mixture_dataset(cfg)
    csv_path, manifest_path = write_dataset(dataset, out_dir)
    print(csv_path)
    print(manifest_path)
    return 0


def _cmd_infer(args) -> int:
    overrides = _load_config_file(args.config)
    dataset = read_dataset(args.dataset)
    direction, rep = decide_direction(
        dataset,
        K=overrides.get("K", args.draws),
        rng=RngStream(overrides.get("seed", args.seed)),
    )
    payload = rep.to_dict()
    payload["direction"] = direction
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "posterior.json").write_text(text + "\n")
        print(out_dir / "posterior.json")
    else:
        print(text)
    return 0


def _cmd_experiment(args) -> int:
    overrides = _load_config_file(args.config)
    cfg = ExperimentConfig(
        cells=tuple(tuple(c) for c in overrides["cells"]) if "cells" in overrides else _parse_cells(args.cells),
        datasets_per_cell=overrides.get("datasets_per_cell", args.datasets_per_cell),
        K=overrides.get("K", args.draws),
        master_seed=overrides.get("master_seed", args.seed),
        out_dir=args.out,
        threads=overrides.get("threads", args.threads),
        class_mean_separation=overrides.get("class_mean_separation", args.separation),
        hyper_overrides=overrides.get("hyper", {}),
    )
    result = run_experiment_grid(cfg, progress=not args.quiet)
    text = json.dumps(result.to_dict(), indent=2, sort_keys=True)
    if args.out:
        path = Path(args.out) / "result.json"
        path.write_text(text + "\n")
        print(path)
    else:
        print(text)
    print(report(result, "text"), end="")
    return 0


def _cmd_report(args) -> int:
    raw = json.loads(Path(args.result).read_text())
    cfg_raw = raw["config"]
    cfg = ExperimentConfig(
        cells=tuple(tuple(c) for c in cfg_raw["cells"]),
        datasets_per_cell=cfg_raw["datasets_per_cell"],
        K=cfg_raw["K"],
        master_seed=cfg_raw["master_seed"],
        threads=cfg_raw.get("threads", 1),
        class_mean_separation=cfg_raw.get("class_mean_separation", 3.0),
        hyper_overrides=cfg_raw.get("hyper_overrides", {}),
    )
    result = ExperimentResult(config=cfg, records=raw["records"], version=raw.get("version", "?"))
    rendered = report(result, args.format, include_baseline=args.baseline)
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        ext = {"text": "txt", "json": "json", "csv": "csv"}[args.format]
        out_path = out_dir / f"report.{ext}"
        out_path.write_text(rendered if rendered.endswith("\n") else rendered + "\n")
        print(out_path)
        if not args.no_figure:
            from .figures import render_accuracy_figure

            fig_path = render_accuracy_figure(result, out_dir / "accuracy.png")
            print(fig_path)
    else:
        print(rendered, end="" if rendered.endswith("\n") else "\n")
        if not args.no_figure:
            from .figures import render_accuracy_figure

            fig_path = render_accuracy_figure(result, Path("accuracy.png"))
            print(fig_path)
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "infer": _cmd_infer,
    "experiment": _cmd_experiment,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
