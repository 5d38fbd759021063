"""Input validation helpers shared across the package."""

import numpy as np


class DimensionError(ValueError):
    """Array shapes are incompatible with the requested operation."""


class DomainError(ValueError):
    """A value lies outside the domain where an operation is defined."""


class InsufficientDataError(ValueError):
    """Too few samples to estimate a statistic."""


def check_image(img, *, square=False, name="img"):
    """Return ``img`` as a float64 ``(H, W, C)`` array.

    Two-dimensional input is promoted to a single channel. Intensities must be
    finite; they are not clipped here.
    """
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3 or arr.shape[2] not in (1, 3):
        raise DimensionError(f"{name} must have shape (H, W) or (H, W, C) with C in {{1, 3}}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite values")
    if square and arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"{name} must be square, got {arr.shape[0]}x{arr.shape[1]}")
    return arr


def check_image_batch(X, *, square=False):
    """Return a list of validated images from a 4-D array or a sequence."""
    if isinstance(X, np.ndarray) and X.ndim != 4:
        raise DimensionError(f"an image batch array must be 4-D (N, H, W, C), got ndim={X.ndim}")
    return [check_image(x, square=square, name="X[i]") for x in X]


def check_latent(z, name="z"):
    arr = np.asarray(z, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite values")
    return arr


def check_same_shape(a, b, names=("a", "b")):
    if a.shape != b.shape:
        raise DimensionError(f"{names[0]} and {names[1]} differ in shape: {a.shape} vs {b.shape}")
