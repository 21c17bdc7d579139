"""Linear non-Gaussian acyclic mixture model: structures and likelihoods.

A :class:`DagHypothesis` fixes which variables feed which; every latent
class shares that structure but carries its own coefficients, means, and
disturbance scale/shape. Observation likelihoods factor into per-variable
generalized Gaussian terms evaluated at the residuals, because the map
from disturbances to observations is triangular with unit Jacobian.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from .rngdist import ggd_log_pdf

__all__ = [
    "Dataset",
    "DagHypothesis",
    "ClassParams",
    "MixtureParams",
    "residuals",
    "class_log_density",
    "mixture_log_density",
    "dataset_log_likelihood",
    "enumerate_pairwise_hypotheses",
]

_SIMPLEX_TOL = 1e-12


@dataclass(frozen=True)
class DagHypothesis:
    """A directed acyclic structure shared by all latent classes.

    Parameters
    ----------
    n : int
        Number of observed variables.
    parents : tuple of tuples
        ``parents[i]`` lists the parent indices of variable ``i``.
    order : tuple of ints
        A causal (topological) order: parents come strictly earlier.
    name : str
        Identifier used in reports.
    """

    n: int
    parents: Tuple[Tuple[int, ...], ...]
    order: Tuple[int, ...]
    name: str = ""

    def __post_init__(self):
        if self.n < 1 or len(self.parents) != self.n:
            raise ValueError("parents must have one entry per variable")
        if sorted(self.order) != list(range(self.n)):
            raise ValueError("order must be a permutation of 0..n-1")
        rank = {v: k for k, v in enumerate(self.order)}
        for i, ps in enumerate(self.parents):
            for j in ps:
                if not 0 <= j < self.n or j == i:
                    raise ValueError(f"invalid parent {j} of variable {i}")
                if rank[j] >= rank[i]:
                    raise ValueError(
                        f"edge {j}->{i} violates the causal order (not acyclic)"
                    )

    @property
    def edges(self) -> Tuple[Tuple[int, int], ...]:
        """All (child, parent) pairs, in a fixed (child-major) order."""
        return tuple((i, j) for i in range(self.n) for j in self.parents[i])


@dataclass(frozen=True)
class ClassParams:
    """Parameters of one latent class.

    ``b`` holds one coefficient per DAG edge, aligned with
    ``DagHypothesis.edges``. ``sigma`` are disturbance standard
    deviations, ``lam`` the shape parameters of the generalized Gaussian
    disturbance densities.
    """

    b: np.ndarray
    mu: np.ndarray
    sigma: np.ndarray
    lam: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float))
        object.__setattr__(self, "mu", np.asarray(self.mu, dtype=float))
        object.__setattr__(self, "sigma", np.asarray(self.sigma, dtype=float))
        object.__setattr__(self, "lam", np.asarray(self.lam, dtype=float))
        if np.any(self.sigma <= 0) or np.any(self.lam <= 0):
            raise ValueError("sigma and lambda must be positive")


@dataclass(frozen=True)
class MixtureParams:
    """Class weights plus per-class parameters: one full parameter draw."""

    weights: np.ndarray
    classes: Tuple[ClassParams, ...]

    def __post_init__(self):
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        object.__setattr__(self, "classes", tuple(self.classes))
        if len(self.classes) != self.weights.size:
            raise ValueError("weights and classes must have equal length")
        if np.any(self.weights <= 0) or abs(self.weights.sum() - 1.0) > _SIMPLEX_TOL:
            raise ValueError("weights must be strictly positive and sum to 1")

    @property
    def l(self) -> int:
        return len(self.classes)


@dataclass(frozen=True)
class Dataset:
    """N observations of n variables, rows are observations."""

    values: np.ndarray
    truth: Optional[object] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 2:
            raise ValueError("values must be an N x n matrix with N >= 1, n >= 2")
        if not np.all(np.isfinite(v)):
            raise ValueError("dataset entries must be finite")

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_vars(self) -> int:
        return self.values.shape[1]


def _check_params(dag: DagHypothesis, params: ClassParams):
    if params.mu.shape != (dag.n,) or params.sigma.shape != (dag.n,):
        raise ValueError("per-variable parameter length must equal dag.n")
    if params.lam.shape != (dag.n,):
        raise ValueError("per-variable parameter length must equal dag.n")
    if params.b.shape != (len(dag.edges),):
        raise ValueError("b must hold exactly one value per DAG edge")


def residuals(x, dag: DagHypothesis, params: ClassParams) -> np.ndarray:
    """Recover the disturbances: e_i = x_i - mu_i - sum_j b_ij (x_j - mu_j).

    ``x`` may be a length-n vector or an N x n matrix (rows independent).
    """
    _check_params(dag, params)
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    if X.shape[1] != dag.n:
        raise ValueError(f"x has {X.shape[1]} variables, dag expects {dag.n}")
    centered = X - params.mu
    e = centered.copy()
    for k, (i, j) in enumerate(dag.edges):
        e[:, i] -= params.b[k] * centered[:, j]
    return e[0] if single else e


def class_log_density(x, dag: DagHypothesis, params: ClassParams) -> float:
    """Log-density of an observation within one class.

    The disturbance-to-observation map is triangular with unit Jacobian,
    so this is just the sum of per-variable disturbance log-densities at
    the residuals.
    """
    e = residuals(x, dag, params)
    out = np.sum(ggd_log_pdf(e, params.sigma, params.lam), axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def mixture_log_density(x, dag: DagHypothesis, params: MixtureParams) -> float:
    """Log of the class-weighted mixture density at an observation."""
    terms = np.stack(
        [
            np.log(params.weights[c]) + np.atleast_1d(class_log_density(x, dag, params.classes[c]))
            for c in range(params.l)
        ]
    )
    out = logsumexp(terms, axis=0)
    return float(out[0]) if out.size == 1 else out


def dataset_log_likelihood(D: Dataset, dag: DagHypothesis, params: MixtureParams) -> float:
    """Joint log-likelihood of all rows (IID product)."""
    per_row = mixture_log_density(D.values, dag, params)
    return float(np.sum(per_row))


def enumerate_pairwise_hypotheses() -> Tuple[DagHypothesis, DagHypothesis]:
    """The two directed hypotheses on a pair of variables."""
    g1 = DagHypothesis(n=2, parents=((), (0,)), order=(0, 1), name="x1->x2")
    g2 = DagHypothesis(n=2, parents=((1,), ()), order=(1, 0), name="x2->x1")
    return (g1, g2)
