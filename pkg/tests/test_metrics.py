from dataclasses import replace

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from symterp._validation import DimensionError, DomainError, InsufficientDataError
from symterp.imaging import Symmetrizer
from symterp.metrics import (
    DownsampleFeatures,
    GaussianStats,
    RandomProjFeatures,
    fit_gaussian,
    frechet_distance,
    make_features,
    symmetry_score,
)
from symterp.synthdata import WheelParams, generate_wheel, sample_params


def stats(mean, cov):
    return GaussianStats(np.atleast_1d(np.asarray(mean, float)), np.atleast_2d(np.asarray(cov, float)))


def scipy_frechet(a, b):
    covmean = scipy.linalg.sqrtm(a.cov @ b.cov).real
    diff = a.mean - b.mean
    return float(diff @ diff + np.trace(a.cov + b.cov - 2 * covmean))


def random_psd(rng, dim, rank=None):
    m = rng.standard_normal((dim, rank or dim))
    return m @ m.T / dim


class ShiftedSymmetrizer:
    """Stand-in operator whose output is the input plus a constant."""

    def __init__(self, c):
        self.c = c

    def __call__(self, img):
        return img + self.c

    def mask(self, shape):
        return np.ones(shape[:2])


class TestSymmetryScore:
    def test_fixed_point_is_one(self):
        img = np.full((16, 16, 1), 0.5)
        assert symmetry_score(img, Symmetrizer("none")) == 1.0

    @pytest.mark.parametrize("c", [0.0, 0.1, 0.25, 0.5])
    def test_constant_residual(self, c):
        img = np.random.default_rng(0).random((16, 16, 3))
        assert symmetry_score(img, ShiftedSymmetrizer(c)) == pytest.approx(1 - c, abs=1e-12)

    @pytest.mark.parametrize("kind", ["ra", "ss"])
    def test_asymmetry_ladder(self, kind):
        base = sample_params(20, {"n_spokes": [6]}, seed=4)
        sym = Symmetrizer(kind, 6)
        means = []
        for a in (0.0, 0.1, 0.2, 0.3):
            means.append(np.mean([symmetry_score(generate_wheel(replace(p, asymmetry=a)), sym) for p in base]))
        assert all(x > y for x, y in zip(means, means[1:]))

    @pytest.mark.parametrize("kind", ["ra", "ss"])
    def test_perturbed_wheel_scores_lower(self, kind):
        sym = Symmetrizer(kind, 5)
        for seed in range(10):
            clean = generate_wheel(WheelParams(n_spokes=5, seed=seed))
            bent = generate_wheel(WheelParams(n_spokes=5, asymmetry=0.3, seed=seed))
            assert symmetry_score(bent, sym) < symmetry_score(clean, sym)

    def test_non_square(self):
        with pytest.raises(DimensionError):
            symmetry_score(np.zeros((8, 6)), Symmetrizer("ra", 4))


class TestFitGaussian:
    def test_two_antipodal(self):
        v = np.array([1.0, -2.0, 0.5])
        g = fit_gaussian([v, -v])
        assert np.allclose(g.mean, 0.0, atol=1e-15)
        assert np.allclose(g.cov, 2 * np.outer(v, v), atol=1e-14)

    def test_copies(self):
        v = np.array([0.3, 0.7])
        g = fit_gaussian([v] * 5)
        assert np.allclose(g.mean, v) and np.allclose(g.cov, 0.0, atol=1e-15)

    def test_monte_carlo(self):
        x = np.random.default_rng(0).standard_normal((10_000, 4))
        g = fit_gaussian(x)
        assert np.abs(g.mean).max() <= 0.05
        assert np.abs(g.cov - np.eye(4)).max() <= 0.1

    def test_matches_numpy(self, rng):
        x = rng.standard_normal((30, 5))
        g = fit_gaussian(x)
        assert np.allclose(g.cov, np.cov(x, rowvar=False), atol=1e-13)

    def test_too_few(self):
        with pytest.raises(InsufficientDataError):
            fit_gaussian([[1.0, 2.0]])

    def test_non_finite(self):
        with pytest.raises(DomainError):
            fit_gaussian([[1.0, np.nan], [0.0, 0.0]])


class TestFrechet:
    def test_identical(self, rng):
        a = stats(rng.standard_normal(6), random_psd(rng, 6))
        assert frechet_distance(a, a) <= 1e-8

    @given(
        st.floats(-5, 5), st.floats(0.01, 4), st.floats(-5, 5), st.floats(0.01, 4),
    )
    @settings(max_examples=100)
    def test_scalar_closed_form(self, m1, s1, m2, s2):
        got = frechet_distance(stats([m1], [[s1**2]]), stats([m2], [[s2**2]]))
        assert got == pytest.approx((m1 - m2) ** 2 + (s1 - s2) ** 2, abs=1e-9)

    def test_equal_covariance(self, rng):
        cov = random_psd(rng, 8)
        m = rng.standard_normal(8)
        delta = rng.standard_normal(8)
        got = frechet_distance(stats(m, cov), stats(m + delta, cov))
        assert got == pytest.approx(float(delta @ delta), abs=1e-8)

    @given(st.integers(0, 2**32 - 1), st.integers(1, 12))
    @settings(max_examples=40, deadline=None)
    def test_symmetric_and_matches_scipy(self, seed, dim):
        r = np.random.default_rng(seed)
        a = stats(r.standard_normal(dim), random_psd(r, dim) + 0.1 * np.eye(dim))
        b = stats(r.standard_normal(dim), random_psd(r, dim) + 0.1 * np.eye(dim))
        ab, ba = frechet_distance(a, b), frechet_distance(b, a)
        assert abs(ab - ba) <= 1e-8 * max(1.0, ab)
        assert ab == pytest.approx(scipy_frechet(a, b), rel=1e-7, abs=1e-8)

    def test_rank_deficient(self, rng):
        a = stats(np.zeros(6), random_psd(rng, 6, rank=2))
        b = stats(np.ones(6), random_psd(rng, 6, rank=3))
        assert frechet_distance(a, b) >= 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            frechet_distance(stats([0, 0], np.eye(2)), stats([0], [[1]]))

    def test_non_finite(self):
        with pytest.raises(DomainError):
            frechet_distance(stats([np.inf], [[1]]), stats([0], [[1]]))

    def test_indefinite(self):
        with pytest.raises(DomainError):
            frechet_distance(stats([0, 0], [[1, 0], [0, -1]]), stats([0, 0], np.eye(2)))


class TestFeatures:
    def test_downsample_dim(self, wheel6):
        f = DownsampleFeatures()
        assert f.extract(wheel6).shape == (64,)
        assert f.transform([wheel6, wheel6]).shape == (2, 64)

    def test_downsample_constant(self):
        assert np.allclose(DownsampleFeatures().extract(np.full((64, 64, 3), 0.25)), 0.25, atol=1e-6)

    def test_randproj_seeded(self, wheel6):
        a = RandomProjFeatures(random_state=3).extract(wheel6)
        b = RandomProjFeatures(random_state=3).extract(wheel6)
        c = RandomProjFeatures(random_state=4).extract(wheel6)
        assert a.shape == (64,) and np.array_equal(a, b) and not np.array_equal(a, c)

    def test_randproj_size_check(self, wheel6):
        f = RandomProjFeatures().fit([wheel6])
        with pytest.raises(DimensionError):
            f.extract(np.zeros((32, 32, 1)))

    def test_factory(self):
        assert isinstance(make_features("randproj"), RandomProjFeatures)
        with pytest.raises(ValueError):
            make_features("inception")
