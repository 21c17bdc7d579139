"""Causal direction estimation for linear non-Gaussian acyclic mixtures.

Library surface: seeded random streams and the generalized Gaussian
density (:mod:`~lingammix.rngdist`), the mixture model and likelihoods
(:mod:`~lingammix.model`), the prior hierarchy (:mod:`~lingammix.priors`),
Bayesian model comparison (:mod:`~lingammix.inference`), synthetic data
(:mod:`~lingammix.datagen`), and the benchmark harness
(:mod:`~lingammix.harness`).
"""

from .rngdist import (
    DisturbanceKind,
    RngStream,
    ggd_log_pdf,
    sample_dirichlet,
    sample_disturbance,
    sample_gamma,
    sample_gaussian,
    sample_inverse_gamma,
)
from .model import (
    ClassParams,
    DagHypothesis,
    Dataset,
    MixtureParams,
    class_log_density,
    dataset_log_likelihood,
    enumerate_pairwise_hypotheses,
    mixture_log_density,
    residuals,
)
from .priors import GmmFit, Hyperparams, fit_phi, gmm_em, sample_parameters
from .inference import (
    MarginalEstimate,
    PosteriorReport,
    decide_direction,
    log_marginal_from_draws,
    log_marginal_likelihood,
    max_class_count,
    posterior_over_hypotheses,
    select_model,
)
from .datagen import (
    GenConfig,
    GroundTruth,
    generate_class,
    generate_mixture_dataset,
    read_dataset,
    sample_connection_strength,
    write_dataset,
)
from .harness import (
    ExperimentConfig,
    ExperimentResult,
    child_seed,
    report,
    run_experiment_grid,
)

__version__ = "0.1.0"
