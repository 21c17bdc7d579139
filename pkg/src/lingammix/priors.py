"""Prior hierarchy over mixture parameters.

Class weights get a Dirichlet prior (sampled by gamma normalization),
coefficients and means get Gaussians, and the disturbance scale/shape
plus the coefficient-prior variance get inverse gammas. The Gaussian
mean-prior centers are set heuristically from a diagonal Gaussian
mixture fit by EM, because direct estimation of per-class means gets
harder as the class count grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np
from scipy.special import logsumexp

from .model import ClassParams, DagHypothesis, Dataset, MixtureParams
from .rngdist import (
    RngStream,
    sample_dirichlet,
    sample_gaussian,
    sample_inverse_gamma,
)

__all__ = [
    "Hyperparams",
    "GmmFit",
    "gmm_em",
    "fit_phi",
    "sample_parameters",
    "sample_parameter_block",
]

# Reference hyperparameter values used throughout the benchmark runs.
DEFAULT_SHAPE_SCALE = 3.0
DEFAULT_TAU = 0.5
CONCENTRATION_CHOICES = (3.0, 5.0, 7.0)


@dataclass(frozen=True)
class Hyperparams:
    """Fixed prior constants plus the EM-derived mean-prior centers.

    ``a`` holds the per-class Dirichlet concentrations; ``phi`` is the
    l x n matrix of prior centers for the per-class variable means.
    (alpha, beta): inverse-gamma shape/scale for sigma^2;
    (eta, zeta): for lambda; (chi, epsilon): for the coefficient-prior
    variance v^2; tau: std dev of the mean prior.
    """

    a: np.ndarray
    phi: np.ndarray
    alpha: float = DEFAULT_SHAPE_SCALE
    beta: float = DEFAULT_SHAPE_SCALE
    eta: float = DEFAULT_SHAPE_SCALE
    zeta: float = DEFAULT_SHAPE_SCALE
    chi: float = DEFAULT_SHAPE_SCALE
    epsilon: float = DEFAULT_SHAPE_SCALE
    tau: float = DEFAULT_TAU

    def __post_init__(self):
        object.__setattr__(self, "a", np.asarray(self.a, dtype=float))
        object.__setattr__(self, "phi", np.asarray(self.phi, dtype=float))
        for name in ("alpha", "beta", "eta", "zeta", "chi", "epsilon", "tau"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if np.any(self.a <= 0):
            raise ValueError("concentrations must be positive")
        if self.phi.ndim != 2 or self.phi.shape[0] != self.a.size:
            raise ValueError("phi must be an l x n matrix matching len(a)")

    @property
    def l(self) -> int:
        return self.a.size

    def with_classes(self, l: int, phi: np.ndarray) -> "Hyperparams":
        """Rebuild for a different class count, broadcasting the concentration."""
        return replace(self, a=np.full(l, float(self.a.flat[0])), phi=phi)


@dataclass(frozen=True)
class GmmFit:
    """Result of a diagonal-covariance Gaussian mixture EM fit."""

    means: np.ndarray
    covariances: np.ndarray
    weights: np.ndarray
    log_likelihood_trace: np.ndarray
    variance_clamped: bool = False


def _gmm_log_resp(X, means, variances, weights):
    """Per-sample log densities (N, l) under each diagonal Gaussian + log w."""
    # log N(x | m, diag(v)) summed over coordinates
    diff = X[:, None, :] - means[None, :, :]  # (N, l, n)
    ll = -0.5 * np.sum(diff * diff / variances[None], axis=2)
    ll -= 0.5 * np.sum(np.log(2.0 * np.pi * variances), axis=1)[None, :]
    return ll + np.log(weights)[None, :]


def _kmeans_pp_centers(X, l, gen):
    """k-means++ style seeding: spread initial centers over the data."""
    N = X.shape[0]
    centers = [X[gen.integers(N)]]
    for _ in range(1, l):
        d2 = np.min(
            np.sum((X[:, None, :] - np.asarray(centers)[None]) ** 2, axis=2), axis=1
        )
        total = d2.sum()
        if total <= 0:
            centers.append(X[gen.integers(N)])
            continue
        centers.append(X[gen.choice(N, p=d2 / total)])
    return np.asarray(centers)


def _gmm_em_once(X, l, tol, max_iter, gen, floor):
    N, n = X.shape
    means = _kmeans_pp_centers(X, l, gen)
    variances = np.tile(np.maximum(X.var(axis=0), floor), (l, 1))
    weights = np.full(l, 1.0 / l)
    trace = []
    clamped = False
    prev = -np.inf
    for _ in range(max_iter):
        joint = _gmm_log_resp(X, means, variances, weights)  # (N, l)
        per_row = logsumexp(joint, axis=1)
        ll = float(per_row.sum())
        trace.append(ll)
        if ll - prev < tol * max(1.0, abs(ll)) and len(trace) > 1:
            break
        prev = ll
        resp = np.exp(joint - per_row[:, None])  # (N, l)
        nk = resp.sum(axis=0)
        nk = np.maximum(nk, 1e-300)
        weights = nk / N
        means = (resp.T @ X) / nk[:, None]
        diff = X[:, None, :] - means[None]
        variances = np.einsum("nl,nli->li", resp, diff * diff) / nk[:, None]
        if np.any(variances < floor):
            variances = np.maximum(variances, floor)
            clamped = True
    return GmmFit(
        means=means,
        covariances=variances,
        weights=weights,
        log_likelihood_trace=np.asarray(trace),
        variance_clamped=clamped,
    )


def gmm_em(
    D: Dataset,
    l: int,
    rng: RngStream,
    tol: float = 1e-6,
    max_iter: int = 500,
    restarts: int = 5,
) -> GmmFit:
    """Fit a diagonal-covariance Gaussian mixture by EM.

    Runs ``restarts`` independently seeded fits and keeps the one with the
    highest final log-likelihood. Component variances are clamped to a
    floor of 1e-6 times the per-column variance; a fit that hit the floor
    is flagged via ``variance_clamped``.
    """
    if l < 1:
        raise ValueError("class count must be >= 1")
    X = D.values
    if X.shape[0] < l:
        raise ValueError(f"need at least {l} samples to fit {l} components")
    if not tol > 0 or max_iter < 1:
        raise ValueError("tol must be positive and max_iter >= 1")

    if l == 1:
        # Closed form: single-component MLE.
        means = X.mean(axis=0, keepdims=True)
        variances = np.atleast_2d(X.var(axis=0))
        floor = np.maximum(1e-6 * X.var(axis=0), 1e-12)
        clamped = bool(np.any(variances < floor))
        variances = np.maximum(variances, floor)
        joint = _gmm_log_resp(X, means, variances, np.ones(1))
        ll = float(logsumexp(joint, axis=1).sum())
        return GmmFit(means, variances, np.ones(1), np.asarray([ll]), clamped)

    floor = np.maximum(1e-6 * X.var(axis=0), 1e-12)
    best = None
    for r in range(restarts):
        fit = _gmm_em_once(X, l, tol, max_iter, rng.substream("gmm", r).generator, floor)
        if best is None or fit.log_likelihood_trace[-1] > best.log_likelihood_trace[-1]:
            best = fit
    return best


def fit_phi(D: Dataset, l: int, rng: RngStream) -> np.ndarray:
    """Mean-prior centers: GMM component means in canonical row order.

    Rows are sorted ascending by first coordinate (ties broken by the
    following coordinates) so the result is deterministic given the fit.
    """
    fit = gmm_em(D, l, rng)
    order = np.lexsort(fit.means.T[::-1])
    return fit.means[order]


def sample_parameters(
    hyper: Hyperparams, dag: DagHypothesis, l: int, rng: RngStream
) -> MixtureParams:
    """One joint draw of mixture parameters from the prior.

    Draw order: coefficient-prior variance v^2 (shared by all
    coefficients of the draw), class weights, then per class the means,
    disturbance variances and shapes, then the coefficients.
    """
    if hyper.phi.shape[0] != l:
        raise ValueError("hyper.phi must have one row per class")
    n = hyper.phi.shape[1]
    if dag.n != n:
        raise ValueError("dag and phi disagree on the variable count")
    gen = rng.generator
    v2 = float(sample_inverse_gamma(hyper.chi, hyper.epsilon, rng))
    weights = (
        np.ones(1) if l == 1 else sample_dirichlet(hyper.a, rng)
    )
    n_edges = len(dag.edges)
    classes = []
    for c in range(l):
        mu = hyper.phi[c] + hyper.tau * gen.standard_normal(n)
        sigma = np.sqrt(sample_inverse_gamma(hyper.alpha, hyper.beta, rng, size=n))
        lam = sample_inverse_gamma(hyper.eta, hyper.zeta, rng, size=n)
        b = math.sqrt(v2) * gen.standard_normal(n_edges)
        classes.append(ClassParams(b=b, mu=mu, sigma=sigma, lam=lam))
    return MixtureParams(weights=weights, classes=tuple(classes))


def sample_parameter_block(
    hyper: Hyperparams, dag: DagHypothesis, l: int, K: int, rng: RngStream
):
    """K prior draws as stacked arrays, for vectorized likelihoods.

    Same prior as :func:`sample_parameters` but each component is drawn
    for all K draws at once, so the variate interleaving differs from K
    scalar calls. Returns (weights, b, mu, sigma, lam) with shapes
    (K, l), (K, l, E), and (K, l, n) for the per-variable blocks.
    """
    if hyper.phi.shape[0] != l:
        raise ValueError("hyper.phi must have one row per class")
    n = hyper.phi.shape[1]
    if dag.n != n:
        raise ValueError("dag and phi disagree on the variable count")
    gen = rng.generator
    n_edges = len(dag.edges)
    v2 = sample_inverse_gamma(hyper.chi, hyper.epsilon, rng, size=K)
    g = gen.gamma(np.broadcast_to(hyper.a, (K, l)), 1.0)
    weights = g / g.sum(axis=1, keepdims=True)
    mu = hyper.phi[None] + hyper.tau * gen.standard_normal((K, l, n))
    sigma = np.sqrt(sample_inverse_gamma(hyper.alpha, hyper.beta, rng, size=(K, l, n)))
    lam = sample_inverse_gamma(hyper.eta, hyper.zeta, rng, size=(K, l, n))
    b = np.sqrt(v2)[:, None, None] * gen.standard_normal((K, l, n_edges))
    return weights, b, mu, sigma, lam
