"""Benchmark harness: seeded experiment grids and report rendering.

A grid run generates datasets for every (sample size, true class count)
cell, runs the direction decision on each, and scores it against the
generator's ground truth. Per-dataset records are journaled as they
finish so an interrupted run resumes without recomputing or
double-counting anything.
"""

from __future__ import annotations

import hashlib
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .datagen import GenConfig, generate_mixture_dataset
from .inference import decide_direction
from .priors import Hyperparams
from .rngdist import RngStream

__all__ = [
    "ExperimentConfig",
    "ExperimentResult",
    "child_seed",
    "run_experiment_grid",
    "report",
    "PAPER_BASELINE",
]

VERSION = "0.1.0"

# Published full-scale reference counts (out of 1000 datasets per cell),
# rendered as a static comparison row on request.
PAPER_BASELINE = {
    (50, 2): 913, (100, 2): 947, (500, 2): 981,
    (50, 4): 908, (100, 4): 937, (500, 4): 973,
    (50, 6): 922, (100, 6): 957, (500, 6): 967,
}


@dataclass(frozen=True)
class ExperimentConfig:
    """A full grid run: cells, per-cell dataset count, and seeding."""

    cells: Tuple[Tuple[int, int], ...] = ((50, 2), (100, 2), (500, 2))
    datasets_per_cell: int = 100
    K: int = 10_000
    master_seed: int = 0
    out_dir: Optional[str] = None
    threads: int = 1
    class_mean_separation: float = 3.0
    hyper_overrides: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.datasets_per_cell < 1:
            raise ValueError("datasets_per_cell must be >= 1")
        if any(N < 1 or l < 1 for N, l in self.cells):
            raise ValueError("all grid cells must be positive")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    def to_dict(self) -> dict:
        return {
            "cells": [list(c) for c in self.cells],
            "datasets_per_cell": self.datasets_per_cell,
            "K": self.K,
            "master_seed": self.master_seed,
            "threads": self.threads,
            "class_mean_separation": self.class_mean_separation,
            "hyper_overrides": dict(sorted(self.hyper_overrides.items())),
        }


@dataclass
class ExperimentResult:
    """Per-dataset records plus the configuration that produced them."""

    config: ExperimentConfig
    records: List[dict]
    version: str = VERSION

    def cell_counts(self) -> Dict[Tuple[int, int], Tuple[int, int]]:
        """(correct, total) per grid cell."""
        out: Dict[Tuple[int, int], Tuple[int, int]] = {}
        for cell in self.config.cells:
            rows = [r for r in self.records if (r["N"], r["l_true"]) == tuple(cell)]
            correct = sum(1 for r in rows if r["correct"])
            out[cell] = (correct, len(rows))
        return out

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "records": self.records,
            "version": self.version,
        }


def child_seed(master_seed: int, N: int, l_true: int, dataset_index: int) -> int:
    """Keyed-hash child seed: stable under parallel scheduling order."""
    h = hashlib.sha256()
    for v in (master_seed, N, l_true, dataset_index):
        h.update(int(v).to_bytes(8, "little", signed=False))
    return int.from_bytes(h.digest()[:8], "little")


def _hyper_base(overrides: Dict[str, float]) -> Optional[Hyperparams]:
    if not overrides:
        return None
    kwargs = dict(
        alpha=3.0, beta=3.0, eta=3.0, zeta=3.0, chi=3.0, epsilon=3.0, tau=0.5
    )
    unknown = set(overrides) - set(kwargs)
    if unknown:
        raise ValueError(f"unknown hyperparameter overrides: {sorted(unknown)}")
    kwargs.update(overrides)
    return Hyperparams(a=np.ones(1), phi=np.zeros((1, 2)), **kwargs)


def run_one_dataset(
    config: ExperimentConfig, N: int, l_true: int, index: int
) -> dict:
    """Generate, decide, and score a single grid entry."""
    seed = child_seed(config.master_seed, N, l_true, index)
    gen = GenConfig(
        N=N,
        l=l_true,
        direction="x1->x2",
        class_mean_separation=config.class_mean_separation,
        seed=seed,
    )
    dataset = generate_mixture_dataset(gen)
    started = time.perf_counter()
    direction, rep = decide_direction(
        dataset,
        hyper_base=_hyper_base(config.hyper_overrides),
        K=config.K,
        rng=RngStream(seed, stream_id=1),
    )
    elapsed = time.perf_counter() - started
    idx = rep.hypothesis_ids.index(direction)
    return {
        "N": N,
        "l_true": l_true,
        "index": index,
        "seed": seed,
        "decision": direction,
        "correct": direction == gen.direction,
        "posterior": float(rep.posteriors[idx]),
        "selected_l": rep.selected_l,
        "concentration": rep.config.get("concentration"),
        "wall_time_s": elapsed,
    }


def _journal_path(out_dir: Union[str, Path]) -> Path:
    return Path(out_dir) / "journal.jsonl"


def _load_journal(path: Path) -> Dict[Tuple[int, int, int], dict]:
    done: Dict[Tuple[int, int, int], dict] = {}
    if path.exists():
        for line in path.read_text().splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            done[(rec["N"], rec["l_true"], rec["index"])] = rec
    return done


def run_experiment_grid(config: ExperimentConfig, progress: bool = False) -> ExperimentResult:
    """Run every (cell, dataset index) task and aggregate the records.

    When an output directory is configured, each finished record is
    appended to ``journal.jsonl`` immediately; tasks already present in
    the journal are skipped, which makes interrupted runs resumable.
    """
    journal: Dict[Tuple[int, int, int], dict] = {}
    journal_file = None
    if config.out_dir is not None:
        out_dir = Path(config.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        jpath = _journal_path(out_dir)
        journal = _load_journal(jpath)
        journal_file = open(jpath, "a")

    tasks = [
        (N, l_true, i)
        for (N, l_true) in config.cells
        for i in range(config.datasets_per_cell)
    ]
    pending = [t for t in tasks if t not in journal]
    records: List[dict] = [journal[t] for t in tasks if t in journal]

    def _note(rec: dict):
        records.append(rec)
        if journal_file is not None:
            journal_file.write(json.dumps(rec, sort_keys=True) + "\n")
            journal_file.flush()
        if progress:
            print(
                f"cell N={rec['N']} l={rec['l_true']} dataset "
                f"{rec['index'] + 1}/{config.datasets_per_cell}: "
                f"{'ok' if rec['correct'] else 'WRONG'} "
                f"(posterior {rec['posterior']:.3f}, {rec['wall_time_s']:.1f}s)",
                flush=True,
            )

    try:
        if config.threads > 1 and len(pending) > 1:
            # Every task derives its own child seed, so scheduling order
            # cannot change any numeric result; the journal stays
            # single-writer in this process.
            with ProcessPoolExecutor(max_workers=config.threads) as pool:
                futures = {
                    pool.submit(run_one_dataset, config, N, l_true, i): (N, l_true, i)
                    for N, l_true, i in pending
                }
                for fut in as_completed(futures):
                    _note(fut.result())
        else:
            for N, l_true, i in pending:
                _note(run_one_dataset(config, N, l_true, i))
    finally:
        if journal_file is not None:
            journal_file.close()
    # Deterministic record order regardless of journal interleaving.
    records.sort(key=lambda r: (r["N"], r["l_true"], r["index"]))
    return ExperimentResult(config=config, records=records)


def _wilson_interval(correct: int, total: int, z: float = 1.959963984540054):
    """95% Wilson score interval for a binomial proportion."""
    if total == 0:
        return (0.0, 0.0, 0.0)
    p = correct / total
    denom = 1.0 + z * z / total
    center = (p + z * z / (2 * total)) / denom
    half = z * math.sqrt(p * (1 - p) / total + z * z / (4 * total * total)) / denom
    return (p, max(0.0, center - half), min(1.0, center + half))


def report(
    result: ExperimentResult,
    fmt: str = "text",
    include_baseline: bool = False,
) -> str:
    """Render the results table in text, json, or csv form.

    Text layout follows the benchmark table: one row per true class
    count, one column per sample size, entries are correct-decision
    counts, plus totals and the 95% binomial interval of the overall
    proportion.
    """
    counts = result.cell_counts()
    sizes = sorted({N for N, _ in counts})
    l_values = sorted({l for _, l in counts})

    if fmt == "json":
        payload = {
            "cells": [
                {
                    "N": N,
                    "l_true": l,
                    "correct": counts[(N, l)][0],
                    "total": counts[(N, l)][1],
                }
                for (N, l) in sorted(counts)
            ],
            "config": result.config.to_dict(),
            "version": result.version,
        }
        correct = sum(c for c, _ in counts.values())
        total = sum(t for _, t in counts.values())
        p, lo, hi = _wilson_interval(correct, total)
        payload["overall"] = {
            "correct": correct,
            "total": total,
            "proportion": p,
            "ci95": [lo, hi],
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    if fmt == "csv":
        buf = io.StringIO()
        buf.write("N,l_true,correct,total\n")
        for (N, l) in sorted(counts):
            c, t = counts[(N, l)]
            buf.write(f"{N},{l},{c},{t}\n")
        return buf.getvalue()

    if fmt != "text":
        raise ValueError(f"unknown report format: {fmt!r}")

    lines = []
    width = 8
    header = " " * 8 + "".join(f"N={N:<{width}}" for N in sizes)
    lines.append("Correct direction decisions per cell")
    lines.append(header)
    for l in l_values:
        row = f"l={l:<6}"
        for N in sizes:
            c, t = counts.get((N, l), (0, 0))
            row += f"{c}/{t}".ljust(width + 2)
        lines.append(row)
    if include_baseline:
        for l in l_values:
            row = f"ref l={l:<2}"
            for N in sizes:
                base = PAPER_BASELINE.get((N, l))
                row += (f"{base}/1000" if base else "-").ljust(width + 2)
            lines.append(row)
    correct = sum(c for c, _ in counts.values())
    total = sum(t for _, t in counts.values())
    p, lo, hi = _wilson_interval(correct, total)
    lines.append(f"total {correct}/{total}" + (f" = {p:.3f} (95% CI {lo:.3f}-{hi:.3f})" if total else ""))
    return "\n".join(lines) + "\n"
