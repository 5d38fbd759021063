"""Symmetry-constrained interpolation of images with a diffusion sampler."""

from .diffusion import (
    EmpiricalDenoiser,
    GuidanceConfig,
    NoiseSchedule,
    ddim_step,
    guided_sample,
    interpolate_pair,
    pool_weight,
    regularize_pool,
)
from .estimator import SymmetricInterpolator
from .imaging import Symmetrizer, SymmetrySpec, rotate, sector_mask, symmetrize_ra, symmetrize_ss
from .latent import IdentityCodec, PoolCodec, add_shared_noise, cosine_similarity_norm, slerp
from .metrics import (
    DownsampleFeatures,
    GaussianStats,
    RandomProjFeatures,
    fit_gaussian,
    frechet_distance,
    symmetry_score,
)
from .synthdata import WheelParams, generate_dataset, generate_wheel

__version__ = "0.1.0"
