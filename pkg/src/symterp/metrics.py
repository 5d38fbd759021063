"""Symmetry score and Fréchet distance between feature distributions."""

from dataclasses import dataclass
import math

import numpy as np
from PIL import Image
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import DimensionError, DomainError, InsufficientDataError, check_image, check_image_batch

NEG_EIG_TOL = 1e-6


def symmetry_score(img, sym):
    """``1 - ||R(x) - x|| / sqrt(H * W * C)`` with both operands zeroed outside the disk."""
    x = check_image(img, square=True)
    mask = sym.mask(x.shape)[:, :, None]
    residual = sym(x) * mask - x * mask
    return 1.0 - float(np.linalg.norm(residual)) / math.sqrt(x.size)


@dataclass(frozen=True)
class GaussianStats:
    mean: np.ndarray
    cov: np.ndarray

    @property
    def dim(self):
        return self.mean.shape[0]

    def to_dict(self):
        return {"mean": self.mean.tolist(), "cov": self.cov.tolist()}


def fit_gaussian(features):
    """Sample mean and unbiased covariance of a stack of feature vectors."""
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionError(f"features must be a 2-D (n, F) array, got shape {X.shape}")
    if X.shape[0] < 2:
        raise InsufficientDataError(f"need at least 2 feature vectors, got {X.shape[0]}")
    if not np.all(np.isfinite(X)):
        raise DomainError("features contain non-finite values")
    mean = X.mean(axis=0)
    centered = X - mean
    cov = centered.T @ centered / (X.shape[0] - 1)
    return GaussianStats(mean, 0.5 * (cov + cov.T))


def _psd_sqrt(mat, what):
    vals, vecs = np.linalg.eigh(0.5 * (mat + mat.T))
    if vals.min() < -NEG_EIG_TOL:
        raise DomainError(f"{what} has eigenvalue {vals.min():.3g}, not positive semidefinite")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T, vals


def frechet_distance(a, b):
    """Fréchet distance between two Gaussians.

    The trace of ``(S_a S_b)^{1/2}`` is taken as the sum of square-rooted
    eigenvalues of the symmetric matrix ``S_a^{1/2} S_b S_a^{1/2}``, which
    shares its spectrum.
    """
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch: {a.dim} vs {b.dim}")
    for s in (a, b):
        if not (np.all(np.isfinite(s.mean)) and np.all(np.isfinite(s.cov))):
            raise DomainError("Gaussian statistics contain non-finite values")
    root_a, _ = _psd_sqrt(a.cov, "first covariance")
    _psd_sqrt(b.cov, "second covariance")
    _, cross = _psd_sqrt(root_a @ b.cov @ root_a, "covariance product")
    diff = a.mean - b.mean
    d = float(diff @ diff + np.trace(a.cov) + np.trace(b.cov) - 2.0 * np.sqrt(cross).sum())
    return max(d, 0.0)


class DownsampleFeatures(TransformerMixin, BaseEstimator):
    """Grayscale, bilinear-resize to ``side x side`` and flatten."""

    def __init__(self, side=8):
        self.side = side

    def fit(self, X=None, y=None):
        self.n_features_out_ = self.side * self.side
        return self

    def extract(self, img):
        x = check_image(img)
        gray = x.mean(axis=2).astype(np.float32)
        small = Image.fromarray(gray, mode="F").resize((self.side, self.side), Image.BILINEAR)
        return np.asarray(small, dtype=np.float64).ravel()

    def transform(self, X):
        return np.stack([self.extract(x) for x in check_image_batch(X)])

    def config(self):
        return {"name": "downsample", "side": self.side, "dim": self.side * self.side}


class RandomProjFeatures(TransformerMixin, BaseEstimator):
    """Fixed Gaussian projection of raw pixels, seeded by ``random_state``."""

    def __init__(self, n_features=64, random_state=0):
        self.n_features = n_features
        self.random_state = random_state

    def fit(self, X, y=None):
        first = check_image_batch(X)[0]
        self._build(first.size)
        return self

    def _build(self, n_pixels):
        rng = np.random.Generator(np.random.PCG64(self.random_state))
        self.projection_ = rng.standard_normal((n_pixels, self.n_features)) / math.sqrt(n_pixels)
        self.n_pixels_ = n_pixels

    def extract(self, img):
        x = check_image(img)
        if not hasattr(self, "projection_"):
            self._build(x.size)
        check_is_fitted(self, "projection_")
        if x.size != self.n_pixels_:
            raise DimensionError(f"projection was built for {self.n_pixels_} pixels, got {x.size}")
        return x.ravel() @ self.projection_

    def transform(self, X):
        return np.stack([self.extract(x) for x in check_image_batch(X)])

    def config(self):
        return {"name": "randproj", "dim": self.n_features, "seed": self.random_state}


FEATURES = {"downsample": DownsampleFeatures, "randproj": RandomProjFeatures}


def make_features(name="downsample"):
    try:
        return FEATURES[name]()
    except KeyError:
        raise ValueError(f"unknown feature extractor {name!r}; choose from {sorted(FEATURES)}") from None


def corpus_stats(images, features):
    return fit_gaussian(features.transform(images))
