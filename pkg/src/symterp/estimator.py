"""Estimator front end: fit on a reference corpus, predict interpolations of pairs."""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_image, check_image_batch
from .diffusion import EmpiricalDenoiser, GuidanceConfig, NoiseSchedule, interpolate_pair
from .imaging import Symmetrizer
from .latent import make_codec
from .metrics import symmetry_score


class SymmetricInterpolator(BaseEstimator):
    """Symmetry-constrained interpolation between two images.

    ``fit`` encodes a reference corpus into the support set of an empirical
    posterior denoiser. ``predict`` takes ``(img_a, img_b)`` pairs and returns
    one interpolated image per pair; pair ``i`` uses noise seed
    ``random_state + i``.

    Parameters
    ----------
    symmetrizer : {'ra', 'ss', 'none'}
    n_fold : int
    w : float
        Pooling weight; 0 disables pooling.
    d : float
        Decay exponent on the iteration counter.
    use_similarity, use_decay : bool
        Ablation switches for the similarity and decay factors.
    mode : {'interleaved', 'end_only', 'off'}
    pool_order : {'before', 'after'}
        Pool before or after each DDIM update.
    codec : {'identity', 'pool'}
    steps, t_start : int
        DDIM iterations and the timestep the parents are noised to.
    T, beta_start, beta_end : noise schedule
    alpha : float
        Default slerp coefficient.
    ref_sector : int
    resampling : {'bilinear', 'nearest'}
    random_state : int
    """

    def __init__(
        self,
        symmetrizer="ra",
        n_fold=6,
        w=0.25,
        d=1.0,
        use_similarity=True,
        use_decay=True,
        mode="interleaved",
        pool_order="before",
        codec="identity",
        steps=50,
        t_start=300,
        T=1000,
        beta_start=1e-4,
        beta_end=0.02,
        alpha=0.5,
        ref_sector=0,
        resampling="bilinear",
        random_state=0,
    ):
        self.symmetrizer = symmetrizer
        self.n_fold = n_fold
        self.w = w
        self.d = d
        self.use_similarity = use_similarity
        self.use_decay = use_decay
        self.mode = mode
        self.pool_order = pool_order
        self.codec = codec
        self.steps = steps
        self.t_start = t_start
        self.T = T
        self.beta_start = beta_start
        self.beta_end = beta_end
        self.alpha = alpha
        self.ref_sector = ref_sector
        self.resampling = resampling
        self.random_state = random_state

    def fit(self, X, y=None):
        images = check_image_batch(X)
        if not images:
            raise ValueError("need at least one reference image")
        self.codec_ = make_codec(self.codec)
        self.schedule_ = NoiseSchedule(self.T, self.beta_start, self.beta_end)
        self.symmetrizer_ = Symmetrizer(self.symmetrizer, self.n_fold, self.resampling, ref_sector=self.ref_sector)
        self.guidance_ = GuidanceConfig(
            w=self.w,
            d=self.d,
            use_similarity=self.use_similarity,
            use_decay=self.use_decay,
            symmetrizer=self.symmetrizer_,
            mode=self.mode,
            pool_order=self.pool_order,
        )
        self.denoiser_ = EmpiricalDenoiser([self.codec_.encode(x) for x in images], self.schedule_)
        self.image_shape_ = images[0].shape
        return self

    def interpolate(self, img_a, img_b, alpha=None, seed=None, return_trace=False):
        check_is_fitted(self, "denoiser_")
        return interpolate_pair(
            check_image(img_a),
            check_image(img_b),
            self.alpha if alpha is None else alpha,
            self.guidance_,
            self.codec_,
            self.denoiser_,
            self.schedule_,
            self.t_start,
            self.steps,
            self.random_state if seed is None else seed,
            return_trace=return_trace,
        )

    def predict(self, X):
        return np.stack([self.interpolate(a, b, seed=self.random_state + i) for i, (a, b) in enumerate(X)])

    def score(self, X, y=None):
        """Mean symmetry score of the interpolations of ``X`` under the fitted symmetrizer."""
        check_is_fitted(self, "denoiser_")
        return float(np.mean([symmetry_score(img, self.symmetrizer_) for img in self.predict(X)]))
