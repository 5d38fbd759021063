"""Noise schedule, empirical posterior denoiser, DDIM stepping and the
symmetry-pooled sampler.

The sampler blends each intermediate latent with the encoding of its
symmetrized decode. The blend weight is

    lam = clamp(s * w / i**d, 0, 1)

where ``s`` is the normalized cosine similarity between the latent and its
symmetrized encoding and ``i`` is the 1-based iteration counter, so the pull
toward symmetry fades as sampling proceeds.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from ._validation import DomainError, check_image, check_latent, check_same_shape
from .imaging import Symmetrizer
from .latent import add_shared_noise, cosine_similarity_norm, slerp

MODES = ("interleaved", "end_only", "off")
POOL_ORDERS = ("before", "after")


@dataclass(frozen=True)
class NoiseSchedule:
    """Linear-beta DDPM schedule; ``alpha_bar[t-1]`` is the value at timestep ``t``."""

    T: int = 1000
    beta_start: float = 1e-4
    beta_end: float = 0.02
    alpha_bar: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.T < 1:
            raise ValueError(f"T must be >= 1, got {self.T}")
        if not 0.0 < self.beta_start <= self.beta_end < 1.0:
            raise ValueError("need 0 < beta_start <= beta_end < 1")
        betas = np.linspace(self.beta_start, self.beta_end, self.T)
        ab = np.cumprod(1.0 - betas)
        ab.setflags(write=False)
        object.__setattr__(self, "alpha_bar", ab)

    def alpha_bar_at(self, t):
        """``alpha_bar`` at integer timestep ``t``; ``t = 0`` gives exactly 1."""
        if int(t) != t or not 0 <= t <= self.T:
            raise ValueError(f"timestep {t} outside [0, {self.T}]")
        return 1.0 if t == 0 else float(self.alpha_bar[int(t) - 1])


def timestep_ladder(t_start, steps):
    """``steps + 1`` evenly spaced integer timesteps from ``t_start`` down to 0."""
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    if steps > t_start:
        raise ValueError(f"cannot take {steps} distinct steps from t_start={t_start}")
    ladder = np.rint(np.linspace(t_start, 0, steps + 1)).astype(int)
    return [int(t) for t in ladder]


class EmpiricalDenoiser:
    """Exact posterior mean ``E[x0 | z_t]`` for a uniform mixture of clean latents.

    With ``z_t = sqrt(ab) x0 + sqrt(1 - ab) eps`` and ``x0`` drawn uniformly from
    ``points``, the posterior over points is a softmax of
    ``-||z_t - sqrt(ab) x_i||^2 / (2 (1 - ab))``.
    """

    def __init__(self, points, schedule):
        pts = [check_latent(p, "point") for p in points]
        if not pts:
            raise ValueError("EmpiricalDenoiser needs at least one point")
        shape = pts[0].shape
        for p in pts:
            check_same_shape(p, pts[0], ("point", "points[0]"))
        self.shape = shape
        self.points = np.stack([p.ravel() for p in pts])
        self.schedule = schedule

    def __len__(self):
        return len(self.points)

    def weights(self, z_t, t):
        z = check_latent(z_t, "z_t")
        if z.shape != self.shape:
            raise DomainError(f"latent shape {z.shape} does not match denoiser points {self.shape}")
        if t < 1:
            raise ValueError("predict_x0 needs t >= 1")
        ab = self.schedule.alpha_bar_at(t)
        diff = math.sqrt(ab) * self.points - z.ravel()
        # direct differences; the expanded ||x||^2 - 2<x, z> form cancels badly when ab -> 1
        d2 = np.einsum("ij,ij->i", diff, diff)
        logits = -d2 / (2.0 * (1.0 - ab))
        logits -= logits.max()
        w = np.exp(logits)
        return w / w.sum()

    def predict_x0(self, z_t, t):
        w = self.weights(z_t, t)
        return (w @ self.points).reshape(self.shape)


@dataclass(frozen=True)
class GuidanceConfig:
    """Knobs for symmetry pooling.

    ``mode='end_only'`` runs plain DDIM and symmetrizes the final image once;
    ``pool_order`` chooses whether pooling happens before or after each
    DDIM update.
    """

    w: float = 0.25
    d: float = 1.0
    use_similarity: bool = True
    use_decay: bool = True
    symmetrizer: Symmetrizer = None
    mode: str = "interleaved"
    pool_order: str = "before"

    def __post_init__(self):
        if self.w < 0 or self.d < 0:
            raise ValueError("w and d must be non-negative")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.pool_order not in POOL_ORDERS:
            raise ValueError(f"pool_order must be one of {POOL_ORDERS}, got {self.pool_order!r}")

    @property
    def active(self):
        return self.mode != "off" and self.symmetrizer is not None and self.symmetrizer.kind != "none"


def ddim_step(z_t, t, t_prev, denoiser, schedule):
    """Deterministic (eta = 0) DDIM update from ``t`` to ``t_prev``."""
    if not t > t_prev >= 0:
        raise ValueError(f"need t > t_prev >= 0, got t={t}, t_prev={t_prev}")
    z = check_latent(z_t, "z_t")
    x0 = denoiser.predict_x0(z, t)
    ab, ab_prev = schedule.alpha_bar_at(t), schedule.alpha_bar_at(t_prev)
    eps = (z - math.sqrt(ab) * x0) / math.sqrt(1.0 - ab)
    if t_prev == 0:
        return x0
    return math.sqrt(ab_prev) * x0 + math.sqrt(1.0 - ab_prev) * eps


def pool_weight(similarity, w, d, step_index, use_decay=True):
    """Blend weight ``clamp(similarity * w / step_index**d, 0, 1)``."""
    if step_index < 1:
        raise ValueError(f"step_index must be >= 1, got {step_index}")
    decay = step_index**d if use_decay else 1.0
    return min(1.0, max(0.0, similarity * w / decay))


def regularize_pool(z_t, step_index, cfg, codec, return_info=False):
    """Pool ``z_t`` with the encoding of its symmetrized decode.

    Returns ``(z_pooled, lam, s)`` when ``return_info`` is set.
    """
    z = check_latent(z_t, "z_t")
    if cfg.w == 0 or not cfg.active:
        out = z.copy()
        return (out, 0.0, 1.0) if return_info else out
    x_t = codec.decode(z)
    z_r = codec.encode(cfg.symmetrizer(x_t))
    s = cosine_similarity_norm(z, z_r) if cfg.use_similarity else 1.0
    lam = pool_weight(s, cfg.w, cfg.d, step_index, cfg.use_decay)
    out = (1.0 - lam) * z + lam * z_r
    return (out, lam, s) if return_info else out


def guided_sample(z_start, t_start, steps, denoiser, schedule, cfg, codec, return_trace=False):
    """Denoise ``z_start`` from ``t_start`` to 0 with symmetry pooling.

    Returns the decoded image, or ``(image, trace)`` where ``trace`` is a list
    of per-iteration dicts with the timesteps, ``lam`` and ``s``.
    """
    if t_start > schedule.T:
        raise ValueError(f"t_start={t_start} exceeds schedule length {schedule.T}")
    z = check_latent(z_start, "z_start")
    ladder = timestep_ladder(t_start, steps)
    interleaved = cfg.mode == "interleaved"
    trace = []
    for i in range(1, steps + 1):
        t, t_prev = ladder[i - 1], ladder[i]
        lam, s = 0.0, 1.0
        if interleaved and cfg.pool_order == "before":
            z, lam, s = regularize_pool(z, i, cfg, codec, return_info=True)
        z = ddim_step(z, t, t_prev, denoiser, schedule)
        if interleaved and cfg.pool_order == "after":
            z, lam, s = regularize_pool(z, i, cfg, codec, return_info=True)
        trace.append({"step": i, "t": t, "t_prev": t_prev, "lam": lam, "s": s})
    img = codec.decode(z)
    if cfg.mode == "end_only" and cfg.active:
        img = cfg.symmetrizer(img)
    img = np.clip(img, 0.0, 1.0)
    return (img, trace) if return_trace else img


def interpolate_pair(img_a, img_b, alpha, cfg, codec, denoiser, schedule, t_start, steps, seed, return_trace=False):
    """Encode two images, noise them with shared noise, slerp, then sample."""
    a = check_image(img_a, name="img_a")
    b = check_image(img_b, name="img_b")
    check_same_shape(a, b, ("img_a", "img_b"))
    za, zb = add_shared_noise(codec.encode(a), codec.encode(b), t_start, schedule, seed)
    z = slerp(za, zb, alpha)
    return guided_sample(z, t_start, steps, denoiser, schedule, cfg, codec, return_trace=return_trace)
