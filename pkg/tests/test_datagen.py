"""Synthetic mixture datasets and their serialization."""

import numpy as np
import pytest

from lingammix.datagen import (
    GenConfig,
    GroundTruth,
    generate_class,
    generate_mixture_dataset,
    read_dataset,
    sample_connection_strength,
    write_dataset,
)
from lingammix.model import enumerate_pairwise_hypotheses
from lingammix.priors import gmm_em
from lingammix.rngdist import DisturbanceKind, RngStream


class TestConnectionStrength:
    def test_magnitude_band(self):
        rng = RngStream(1)
        draws = np.array([sample_connection_strength(rng) for _ in range(1_000_000)])
        mags = np.abs(draws)
        assert np.all(mags >= 0.5) and np.all(mags <= 1.5)

    def test_sign_balance(self):
        rng = RngStream(2)
        draws = np.array([sample_connection_strength(rng) for _ in range(1_000_000)])
        assert abs(np.mean(draws > 0) - 0.5) < 0.002

    def test_mean_magnitude(self):
        rng = RngStream(3)
        draws = np.array([sample_connection_strength(rng) for _ in range(1_000_000)])
        assert abs(np.abs(draws).mean() - 1.0) < 0.002


class TestGenerateClass:
    UNIF = (DisturbanceKind.UNIFORM, DisturbanceKind.UNIFORM)

    def test_effect_variance(self):
        X = generate_class(100_000, "x1->x2", 1.0, (0.0, 0.0), self.UNIF, RngStream(4))
        assert abs(X[:, 1].var(ddof=1) - 2.0) < 0.05

    def test_covariance(self):
        b = 0.8
        X = generate_class(100_000, "x1->x2", b, (0.0, 0.0), self.UNIF, RngStream(5))
        cov = np.cov(X.T)[0, 1]
        assert abs(cov - b) < 0.02

    def test_mean_shift(self):
        X = generate_class(100_000, "x1->x2", 1.0, (10.0, -10.0), self.UNIF, RngStream(6))
        np.testing.assert_allclose(X.mean(axis=0), [10.0, -10.0], atol=0.05)

    def test_mirrored_direction(self):
        X = generate_class(100_000, "x2->x1", 1.0, (0.0, 0.0), self.UNIF, RngStream(7))
        assert abs(X[:, 0].var(ddof=1) - 2.0) < 0.05
        assert abs(X[:, 1].var(ddof=1) - 1.0) < 0.03

    def test_invalid_coefficient_rejected(self):
        with pytest.raises(ValueError):
            generate_class(10, "x1->x2", 0.2, (0.0, 0.0), self.UNIF, RngStream(0))


class TestGenerateMixtureDataset:
    def test_single_class_labels(self):
        ds = generate_mixture_dataset(GenConfig(N=50, l=1, seed=1))
        assert np.all(ds.truth.labels == 0)
        assert ds.values.shape == (50, 2)

    def test_equal_split_counts(self):
        ds = generate_mixture_dataset(GenConfig(N=100, l=2, seed=2))
        counts = np.bincount(ds.truth.labels)
        np.testing.assert_array_equal(counts, [50, 50])

    def test_largest_remainder_rounding(self):
        ds = generate_mixture_dataset(GenConfig(N=10, l=3, seed=3))
        counts = np.bincount(ds.truth.labels)
        assert counts.sum() == 10
        assert counts.max() - counts.min() <= 1

    def test_byte_identical_regeneration(self):
        cfg = GenConfig(N=200, l=4, seed=99)
        a = generate_mixture_dataset(cfg)
        b = generate_mixture_dataset(cfg)
        np.testing.assert_array_equal(a.values, b.values)
        np.testing.assert_array_equal(a.truth.labels, b.truth.labels)

    def test_separated_classes_recoverable(self):
        ds = generate_mixture_dataset(
            GenConfig(N=10_000, l=4, class_mean_separation=10.0, seed=4)
        )
        fit = gmm_em(ds, 4, RngStream(5))
        got = fit.means[np.argsort(fit.means[:, 0])]
        want = np.array(ds.truth.mu)[np.argsort([m[0] for m in ds.truth.mu])]
        np.testing.assert_allclose(got, want, atol=0.5)

    def test_residual_variance_unit(self):
        g1, _ = enumerate_pairwise_hypotheses()
        ds = generate_mixture_dataset(
            GenConfig(N=40_000, l=2, class_mean_separation=5.0, seed=6)
        )
        t = ds.truth
        for c in range(2):
            rows = ds.values[t.labels == c]
            centered = rows - np.asarray(t.mu[c])
            e2 = centered[:, 1] - t.b[c] * centered[:, 0]
            assert abs(centered[:, 0].var(ddof=1) - 1.0) < 0.1
            assert abs(e2.var(ddof=1) - 1.0) < 0.1

    def test_ground_truth_band_enforced(self):
        with pytest.raises(ValueError):
            GroundTruth(
                direction="x1->x2",
                b=(0.1,),
                mu=((0.0, 0.0),),
                families=(("uniform", "uniform"),),
                labels=np.zeros(5, dtype=int),
            )

    def test_invalid_config_rejected(self):
        with pytest.raises(ValueError):
            GenConfig(N=2, l=3)
        with pytest.raises(ValueError):
            GenConfig(N=10, l=2, direction="sideways")
        with pytest.raises(ValueError):
            GenConfig(N=10, l=2, mixing=(0.5, 0.4))


class TestSerialization:
    def test_round_trip_exact(self, tmp_path):
        ds = generate_mixture_dataset(GenConfig(N=120, l=3, seed=7))
        write_dataset(ds, tmp_path)
        back = read_dataset(tmp_path)
        np.testing.assert_array_equal(back.values, ds.values)
        assert back.truth.direction == ds.truth.direction
        assert back.truth.b == ds.truth.b
        np.testing.assert_array_equal(back.truth.labels, ds.truth.labels)
        assert back.truth.config == ds.truth.config

    def test_rewrite_identical_bytes(self, tmp_path):
        ds = generate_mixture_dataset(GenConfig(N=30, l=1, seed=8))
        p1, m1 = write_dataset(ds, tmp_path / "a")
        p2, m2 = write_dataset(ds, tmp_path / "b")
        assert p1.read_bytes() == p2.read_bytes()
        assert m1.read_bytes() == m2.read_bytes()

    def test_missing_file_reported(self, tmp_path):
        with pytest.raises(FileNotFoundError) as exc:
            read_dataset(tmp_path / "nope.csv")
        assert "nope.csv" in str(exc.value)

    def test_malformed_csv_names_line(self, tmp_path):
        bad = tmp_path / "dataset.csv"
        bad.write_text("x1,x2\n1.0,2.0\n3.0,oops\n")
        with pytest.raises(ValueError) as exc:
            read_dataset(bad)
        assert ":3" in str(exc.value)

    def test_csv_without_manifest(self, tmp_path):
        csv = tmp_path / "dataset.csv"
        csv.write_text("x1,x2\n1.0,2.0\n3.0,4.0\n")
        ds = read_dataset(csv)
        assert ds.truth is None
        assert ds.values.shape == (2, 2)
