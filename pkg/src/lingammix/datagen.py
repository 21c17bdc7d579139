"""Synthetic two-variable mixture data with known causal direction.

Each latent class is a basic linear non-Gaussian acyclic model: the
cause is its own disturbance around the class mean, the effect adds a
linear term with coefficient magnitude in [0.5, 1.5] and sign chosen at
random. Disturbances are unit-variance Laplace, uniform, or scaled
Student-t(5), drawn independently per class and variable. Class means
sit on a deterministic separated grid; rows are shuffled after mixing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .model import Dataset
from .rngdist import DisturbanceKind, RngStream, sample_disturbance

__all__ = [
    "GenConfig",
    "GroundTruth",
    "sample_connection_strength",
    "generate_class",
    "generate_mixture_dataset",
    "write_dataset",
    "read_dataset",
]

DIRECTIONS = ("x1->x2", "x2->x1")
_FAMILIES = (
    DisturbanceKind.LAPLACE,
    DisturbanceKind.UNIFORM,
    DisturbanceKind.STUDENT_T5,
)


@dataclass(frozen=True)
class GenConfig:
    """Recipe for one synthetic dataset."""

    N: int
    l: int
    direction: str = "x1->x2"
    class_mean_separation: float = 3.0
    mixing: Union[str, Tuple[float, ...]] = "equal"
    seed: int = 0

    def __post_init__(self):
        if self.l < 1 or self.N < self.l:
            raise ValueError("need N >= l >= 1")
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}")
        if self.class_mean_separation < 0:
            raise ValueError("class_mean_separation must be non-negative")
        if self.mixing != "equal":
            m = np.asarray(self.mixing, dtype=float)
            if m.size != self.l or np.any(m <= 0) or abs(m.sum() - 1.0) > 1e-12:
                raise ValueError("mixing must be 'equal' or a length-l simplex vector")

    def mixing_vector(self) -> np.ndarray:
        if self.mixing == "equal":
            return np.full(self.l, 1.0 / self.l)
        return np.asarray(self.mixing, dtype=float)


@dataclass(frozen=True)
class GroundTruth:
    """Generator-side annotations used for scoring decisions."""

    direction: str
    b: Tuple[float, ...]                      # one coefficient per class
    mu: Tuple[Tuple[float, float], ...]       # per-class means
    families: Tuple[Tuple[str, str], ...]     # per-class, per-variable
    labels: np.ndarray                        # per-row class index
    config: Optional[GenConfig] = None

    def __post_init__(self):
        if any(not 0.5 <= abs(v) <= 1.5 for v in self.b):
            raise ValueError("coefficient magnitudes must lie in [0.5, 1.5]")


def sample_connection_strength(rng: RngStream) -> float:
    """Uniform over [-1.5, -0.5] union [0.5, 1.5]."""
    gen = rng.generator
    magnitude = gen.uniform(0.5, 1.5)
    sign = 1.0 if gen.uniform() < 0.5 else -1.0
    return sign * magnitude


def generate_class(
    count: int,
    direction: str,
    b: float,
    mu: Sequence[float],
    families: Tuple[DisturbanceKind, DisturbanceKind],
    rng: RngStream,
) -> np.ndarray:
    """Rows from one basic LiNGAM class.

    For x1->x2: x1 = mu1 + e1 and x2 = mu2 + b (x1 - mu1) + e2, with
    unit-variance disturbances; mirrored for x2->x1.
    """
    if not 0.5 <= abs(b) <= 1.5:
        raise ValueError("coefficient magnitude must lie in [0.5, 1.5]")
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}")
    mu = np.asarray(mu, dtype=float)
    e1 = sample_disturbance(families[0], rng, size=count)
    e2 = sample_disturbance(families[1], rng, size=count)
    X = np.empty((count, 2))
    if direction == "x1->x2":
        X[:, 0] = mu[0] + e1
        X[:, 1] = mu[1] + b * (X[:, 0] - mu[0]) + e2
    else:
        X[:, 1] = mu[1] + e2
        X[:, 0] = mu[0] + b * (X[:, 1] - mu[1]) + e1
    return X


def _largest_remainder_counts(N: int, mixing: np.ndarray) -> np.ndarray:
    ideal = N * mixing
    counts = np.floor(ideal).astype(int)
    remainder = ideal - counts
    short = N - counts.sum()
    # Hand leftover rows to the largest fractional remainders, ties to
    # lower class index for determinism.
    order = np.lexsort((np.arange(mixing.size), -remainder))
    counts[order[:short]] += 1
    return counts


def generate_mixture_dataset(config: GenConfig) -> Dataset:
    """Generate a labeled mixture dataset per the config, with ground truth."""
    rng = RngStream(config.seed)
    mixing = config.mixing_vector()
    counts = _largest_remainder_counts(config.N, mixing)
    s = config.class_mean_separation

    bs, mus, fams, blocks, labels = [], [], [], [], []
    for c in range(config.l):
        crng = rng.substream("class", c)
        b = sample_connection_strength(crng)
        fam = tuple(
            _FAMILIES[crng.generator.integers(len(_FAMILIES))] for _ in range(2)
        )
        mu = ((c + 1) * s, -(c + 1) * s)
        blocks.append(generate_class(counts[c], config.direction, b, mu, fam, crng))
        bs.append(b)
        mus.append(mu)
        fams.append(tuple(f.value for f in fam))
        labels.append(np.full(counts[c], c))
    X = np.vstack(blocks)
    labels = np.concatenate(labels)
    perm = rng.substream("shuffle").generator.permutation(config.N)
    truth = GroundTruth(
        direction=config.direction,
        b=tuple(bs),
        mu=tuple(mus),
        families=tuple(fams),
        labels=labels[perm],
        config=config,
    )
    return Dataset(values=X[perm], truth=truth)


def write_dataset(dataset: Dataset, out_dir: Union[str, Path]) -> Tuple[Path, Path]:
    """Write dataset.csv plus manifest.json (ground truth and config)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "dataset.csv"
    X = dataset.values
    header = ",".join(f"x{i + 1}" for i in range(X.shape[1]))
    rows = [header]
    rows += [",".join(format(v, ".17g") for v in row) for row in X]
    csv_path.write_text("\n".join(rows) + "\n")

    manifest: dict = {"n_samples": int(X.shape[0]), "n_vars": int(X.shape[1])}
    truth = dataset.truth
    if isinstance(truth, GroundTruth):
        manifest["ground_truth"] = {
            "direction": truth.direction,
            "b": list(truth.b),
            "mu": [list(m) for m in truth.mu],
            "families": [list(f) for f in truth.families],
            "labels": [int(v) for v in truth.labels],
        }
        if truth.config is not None:
            cfg = truth.config
            manifest["config"] = {
                "N": cfg.N,
                "l": cfg.l,
                "direction": cfg.direction,
                "class_mean_separation": cfg.class_mean_separation,
                "mixing": cfg.mixing if cfg.mixing == "equal" else list(cfg.mixing),
                "seed": cfg.seed,
            }
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return csv_path, manifest_path


def read_dataset(path: Union[str, Path]) -> Dataset:
    """Read a dataset from a CSV file or a directory holding dataset.csv.

    The sidecar manifest.json is loaded into ``truth`` when present.
    """
    path = Path(path)
    csv_path = path / "dataset.csv" if path.is_dir() else path
    if not csv_path.exists():
        raise FileNotFoundError(f"dataset file not found: {csv_path}")
    lines = csv_path.read_text().strip().splitlines()
    if not lines:
        raise ValueError(f"{csv_path}: empty file")
    n_cols = len(lines[0].split(","))
    values = np.empty((len(lines) - 1, n_cols))
    for idx, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != n_cols:
            raise ValueError(f"{csv_path}:{idx}: expected {n_cols} fields, got {len(parts)}")
        try:
            values[idx - 2] = [float(p) for p in parts]
        except ValueError as exc:
            raise ValueError(f"{csv_path}:{idx}: {exc}") from None

    truth = None
    manifest_path = csv_path.parent / "manifest.json"
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text())
        gt = manifest.get("ground_truth")
        if gt is not None:
            cfg = manifest.get("config")
            config = None
            if cfg is not None:
                mixing = cfg["mixing"]
                config = GenConfig(
                    N=cfg["N"],
                    l=cfg["l"],
                    direction=cfg["direction"],
                    class_mean_separation=cfg["class_mean_separation"],
                    mixing=mixing if mixing == "equal" else tuple(mixing),
                    seed=cfg["seed"],
                )
            truth = GroundTruth(
                direction=gt["direction"],
                b=tuple(gt["b"]),
                mu=tuple(tuple(m) for m in gt["mu"]),
                families=tuple(tuple(f) for f in gt["families"]),
                labels=np.asarray(gt["labels"], dtype=int),
                config=config,
            )
    return Dataset(values=values, truth=truth)
