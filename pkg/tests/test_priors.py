"""Prior hierarchy: hyperparameters, the EM mean-centers, prior draws."""

import numpy as np
import pytest

from lingammix.model import Dataset, enumerate_pairwise_hypotheses
from lingammix.priors import (
    Hyperparams,
    fit_phi,
    gmm_em,
    sample_parameter_block,
    sample_parameters,
)
from lingammix.rngdist import RngStream

G1, _ = enumerate_pairwise_hypotheses()


def make_hyper(l=2, n=2, tau=0.5, phi=None, **kwargs):
    if phi is None:
        phi = np.zeros((l, n))
    return Hyperparams(a=np.full(l, 3.0), phi=np.asarray(phi, dtype=float), tau=tau, **kwargs)


def blobs(centers, per, seed=0, spread=1.0):
    gen = np.random.default_rng(seed)
    parts = [gen.normal(c, spread, size=(per, len(c))) for c in centers]
    return Dataset(np.vstack(parts))


class TestHyperparams:
    def test_positivity_enforced(self):
        with pytest.raises(ValueError):
            make_hyper(tau=0.0)

    def test_phi_shape_enforced(self):
        with pytest.raises(ValueError):
            Hyperparams(a=np.ones(2), phi=np.zeros((3, 2)))

    def test_with_classes_broadcasts_concentration(self):
        h = make_hyper(l=1).with_classes(4, np.zeros((4, 2)))
        np.testing.assert_array_equal(h.a, [3.0, 3.0, 3.0, 3.0])


class TestGmmEm:
    def test_single_component_closed_form(self):
        D = blobs([(0.0, 0.0)], per=200, seed=1)
        fit = gmm_em(D, 1, RngStream(0))
        np.testing.assert_allclose(fit.means[0], D.values.mean(axis=0), atol=1e-12)
        np.testing.assert_allclose(fit.covariances[0], D.values.var(axis=0), atol=1e-12)

    def test_separated_blobs_recovered(self):
        D = blobs([(-5.0, -5.0), (5.0, 5.0)], per=250, seed=2)
        fit = gmm_em(D, 2, RngStream(1))
        means = fit.means[np.argsort(fit.means[:, 0])]
        np.testing.assert_allclose(means, [[-5, -5], [5, 5]], atol=0.2)

    def test_trace_non_decreasing(self):
        rng = RngStream(3)
        for trial in range(100):
            gen = rng.substream(trial).generator
            N = int(gen.integers(20, 80))
            X = gen.normal(size=(N, 2)) * gen.uniform(0.5, 2.0) + gen.normal(size=2)
            fit = gmm_em(Dataset(X), int(gen.integers(1, 4)), rng.substream("fit", trial))
            diffs = np.diff(fit.log_likelihood_trace)
            assert np.all(diffs >= -1e-9)

    def test_no_nans_on_degenerate_column(self):
        X = np.column_stack([np.zeros(30), np.linspace(0, 1, 30)])
        fit = gmm_em(Dataset(X), 2, RngStream(5))
        assert np.all(np.isfinite(fit.means))
        assert np.all(np.isfinite(fit.covariances))
        assert np.all(fit.covariances > 0)

    def test_too_few_samples_rejected(self):
        D = blobs([(0.0, 0.0)], per=2, seed=4)
        with pytest.raises(ValueError):
            gmm_em(D, 3, RngStream(0))


class TestFitPhi:
    def test_single_class_column_means(self):
        D = blobs([(1.0, -2.0)], per=100, seed=6)
        phi = fit_phi(D, 1, RngStream(0))
        np.testing.assert_allclose(phi, D.values.mean(axis=0, keepdims=True), atol=1e-12)

    def test_rows_ordered_by_first_coordinate(self):
        D = blobs([(4.0, 0.0), (-4.0, 1.0)], per=200, seed=7)
        phi = fit_phi(D, 2, RngStream(2))
        assert phi[0, 0] < phi[1, 0]

    def test_shape_contract(self):
        D = blobs([(0.0, 0.0)], per=60, seed=8)
        for l in (1, 2, 3):
            assert fit_phi(D, l, RngStream(3)).shape == (l, 2)

    def test_deterministic_given_seed(self):
        D = blobs([(-3.0, 0.0), (3.0, 0.0)], per=100, seed=9)
        a = fit_phi(D, 2, RngStream(11))
        b = fit_phi(D, 2, RngStream(11))
        np.testing.assert_array_equal(a, b)


class TestSampleParameters:
    def test_single_class_weight_exact(self):
        params = sample_parameters(make_hyper(l=1), G1, 1, RngStream(0))
        np.testing.assert_array_equal(params.weights, [1.0])

    def test_tau_limit_pins_means(self):
        phi = np.array([[1.0, -1.0]])
        hyper = make_hyper(l=1, tau=1e-9, phi=phi)
        rng = RngStream(1)
        draws = np.array(
            [sample_parameters(hyper, G1, 1, rng).classes[0].mu for _ in range(10_000)]
        )
        assert np.max(np.abs(draws - phi[0])) < 1e-5

    def test_sigma_squared_mean(self):
        hyper = make_hyper(l=1)
        rng = RngStream(2)
        draws = np.array(
            [sample_parameters(hyper, G1, 1, rng).classes[0].sigma ** 2 for _ in range(100_000)]
        )
        assert abs(draws.mean() - 1.5) < 0.05

    def test_type_invariants_hold(self):
        hyper = make_hyper(l=3, phi=np.zeros((3, 2)))
        rng = RngStream(3)
        for _ in range(200):
            p = sample_parameters(hyper, G1, 3, rng)
            assert abs(p.weights.sum() - 1.0) <= 1e-12
            for cp in p.classes:
                assert np.all(cp.sigma > 0) and np.all(cp.lam > 0)

    def test_class_exchangeability(self):
        hyper = make_hyper(l=2)
        rng = RngStream(4)
        sig1, sig2 = [], []
        for _ in range(100_000):
            p = sample_parameters(hyper, G1, 2, rng)
            sig1.append(p.classes[0].sigma[0])
            sig2.append(p.classes[1].sigma[0])
        # equal hyperparameters make class marginals exchangeable
        assert abs(np.mean(sig1) - np.mean(sig2)) < 0.01

    def test_phi_row_mismatch_rejected(self):
        with pytest.raises(ValueError):
            sample_parameters(make_hyper(l=2), G1, 3, RngStream(0))


class TestSampleParameterBlock:
    def test_shapes(self):
        hyper = make_hyper(l=3, phi=np.zeros((3, 2)))
        w, b, mu, sigma, lam = sample_parameter_block(hyper, G1, 3, 64, RngStream(5))
        assert w.shape == (64, 3)
        assert b.shape == (64, 3, 1)
        assert mu.shape == sigma.shape == lam.shape == (64, 3, 2)

    def test_simplex_and_positivity(self):
        hyper = make_hyper(l=2)
        w, b, mu, sigma, lam = sample_parameter_block(hyper, G1, 2, 1000, RngStream(6))
        np.testing.assert_allclose(w.sum(axis=1), 1.0, atol=1e-12)
        assert np.all(sigma > 0) and np.all(lam > 0)

    def test_matches_scalar_marginals(self):
        # Same prior as the scalar path: compare moments at matched sizes.
        hyper = make_hyper(l=2)
        w, b, mu, sigma, lam = sample_parameter_block(hyper, G1, 2, 50_000, RngStream(7))
        rng = RngStream(8)
        scalar = [sample_parameters(hyper, G1, 2, rng) for _ in range(20_000)]
        s_sig2 = np.array([p.classes[0].sigma[0] ** 2 for p in scalar])
        assert abs((sigma[:, 0, 0] ** 2).mean() - s_sig2.mean()) < 0.05
        s_lam = np.array([p.classes[0].lam[0] for p in scalar])
        assert abs(np.median(lam[:, 0, 0]) - np.median(s_lam)) < 0.03
