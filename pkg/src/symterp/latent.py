"""Image/latent codecs, spherical interpolation and shared-noise forward diffusion.

Latents are float arrays shaped ``(h, w, c)``. Both codecs map pixel
intensities ``x`` to ``2x - 1`` so latents are zero-centred.

Random draws use numpy's ``PCG64`` bit generator seeded with an explicit
integer, which is portable across platforms.
"""

import math

import numpy as np

from ._validation import DimensionError, DomainError, check_image, check_latent, check_same_shape

SLERP_EPS = 1e-5


class IdentityCodec:
    """Latent is the image itself rescaled to ``[-1, 1]``."""

    name = "identity"

    def encode(self, img):
        return 2.0 * check_image(img) - 1.0

    def decode(self, z):
        z = check_latent(z)
        return np.clip((z + 1.0) / 2.0, 0.0, 1.0)

    def latent_shape(self, image_shape):
        return tuple(image_shape)


class PoolCodec:
    """2x2 average-pool encoder with a bilinear 2x upsampling decoder.

    The decoder uses half-pixel sample positions with edge replication, so
    ``decode(encode(x))`` keeps the mean of ``x``.
    """

    name = "pool"

    def encode(self, img):
        arr = check_image(img)
        h, w, c = arr.shape
        if h % 2 or w % 2:
            raise DimensionError(f"PoolCodec needs even image sides, got {h}x{w}")
        pooled = arr.reshape(h // 2, 2, w // 2, 2, c).mean(axis=(1, 3))
        return 2.0 * pooled - 1.0

    def decode(self, z):
        z = check_latent(z)
        up = _upsample2(_upsample2(z, axis=0), axis=1)
        return np.clip((up + 1.0) / 2.0, 0.0, 1.0)

    def latent_shape(self, image_shape):
        h, w, c = image_shape
        return (h // 2, w // 2, c)


def _upsample2(a, axis):
    a = np.moveaxis(a, axis, 0)
    prev = np.concatenate([a[:1], a[:-1]])
    nxt = np.concatenate([a[1:], a[-1:]])
    out = np.empty((2 * a.shape[0],) + a.shape[1:], dtype=a.dtype)
    out[0::2] = 0.75 * a + 0.25 * prev
    out[1::2] = 0.75 * a + 0.25 * nxt
    return np.moveaxis(out, 0, axis)


CODECS = {"identity": IdentityCodec, "pool": PoolCodec}


def make_codec(name):
    try:
        return CODECS[name]()
    except KeyError:
        raise ValueError(f"unknown codec {name!r}; choose from {sorted(CODECS)}") from None


def _norm(v, name):
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise DomainError(f"{name} is the zero vector")
    return n


def slerp(a, b, alpha):
    """Spherical linear interpolation from ``a`` (alpha=0) to ``b`` (alpha=1).

    Falls back to linear interpolation when the angle between the inputs is
    within ``1e-5`` rad of 0 or pi.
    """
    a = check_latent(a, "a")
    b = check_latent(b, "b")
    check_same_shape(a, b)
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    if alpha == 0.0:
        return a.copy()
    if alpha == 1.0:
        return b.copy()
    na, nb = _norm(a, "a"), _norm(b, "b")
    cos = float(np.dot(a.ravel(), b.ravel())) / (na * nb)
    theta = math.acos(min(1.0, max(-1.0, cos)))
    if theta < SLERP_EPS or abs(math.pi - theta) < SLERP_EPS:
        return (1.0 - alpha) * a + alpha * b
    s = math.sin(theta)
    return (math.sin((1.0 - alpha) * theta) / s) * a + (math.sin(alpha * theta) / s) * b


def add_shared_noise(z0a, z0b, t, schedule, seed):
    """Noise two latents to timestep ``t`` with one common Gaussian draw."""
    z0a = check_latent(z0a, "z0a")
    z0b = check_latent(z0b, "z0b")
    check_same_shape(z0a, z0b, ("z0a", "z0b"))
    ab = schedule.alpha_bar_at(t)
    eps = np.random.Generator(np.random.PCG64(seed)).standard_normal(z0a.shape)
    sa, sn = math.sqrt(ab), math.sqrt(1.0 - ab)
    return sa * z0a + sn * eps, sa * z0b + sn * eps


def cosine_similarity_norm(a, b):
    """Cosine similarity mapped from ``[-1, 1]`` to ``[0, 1]``."""
    a = check_latent(a, "a")
    b = check_latent(b, "b")
    check_same_shape(a, b)
    cos = float(np.dot(a.ravel(), b.ravel())) / (_norm(a, "a") * _norm(b, "b"))
    return min(1.0, max(0.0, (1.0 + cos) / 2.0))
