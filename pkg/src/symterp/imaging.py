"""Rotation resampling, radial sector masks and n-fold rotational symmetrizers.

Images are float arrays of shape ``(H, W, C)`` with intensities in ``[0, 1]``.
Angles are measured with ``atan2(row - center_row, col - center_col)`` and a
rotation by ``theta`` maps the content at angle ``phi`` to ``phi + theta``.
"""

from dataclasses import dataclass
from functools import lru_cache
import math
from pathlib import Path

import numpy as np
from PIL import Image
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import DimensionError, check_image, check_image_batch

RESAMPLING = ("bilinear", "nearest")
KINDS = ("ra", "ss", "none")


@dataclass(frozen=True)
class SymmetrySpec:
    """Geometry of an n-fold rotational symmetry on a square grid."""

    n_fold: int
    center: tuple
    disk_radius: float
    resampling: str = "bilinear"

    def __post_init__(self):
        if int(self.n_fold) != self.n_fold or self.n_fold < 2:
            raise ValueError(f"n_fold must be an integer >= 2, got {self.n_fold}")
        if not self.disk_radius > 0:
            raise ValueError(f"disk_radius must be positive, got {self.disk_radius}")
        if self.resampling not in RESAMPLING:
            raise ValueError(f"resampling must be one of {RESAMPLING}, got {self.resampling!r}")
        object.__setattr__(self, "n_fold", int(self.n_fold))
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        object.__setattr__(self, "disk_radius", float(self.disk_radius))

    @classmethod
    def for_shape(cls, shape, n_fold, resampling="bilinear", center=None, disk_radius=None):
        """Build a spec for an ``(H, W, ...)`` grid, filling in default geometry.

        The default center is the pixel-grid center ``((H-1)/2, (W-1)/2)`` and
        the default radius is ``min(H, W)/2 - 1``.
        """
        h, w = shape[0], shape[1]
        if center is None:
            center = ((h - 1) / 2.0, (w - 1) / 2.0)
        if disk_radius is None:
            disk_radius = min(h, w) / 2.0 - 1.0
        spec = cls(n_fold, tuple(center), disk_radius, resampling)
        spec.check_shape(shape)
        return spec

    def check_shape(self, shape):
        h, w = shape[0], shape[1]
        if h != w:
            raise DimensionError(f"symmetry operations need a square image, got {h}x{w}")
        cr, cc = self.center
        r = self.disk_radius
        if cr - r < 0 or cc - r < 0 or cr + r > h - 1 or cc + r > w - 1:
            raise ValueError(f"disk of radius {r} about {self.center} does not fit a {h}x{w} grid")


def _offsets(h, w, center):
    rows, cols = np.mgrid[0:h, 0:w].astype(np.float64)
    return rows - center[0], cols - center[1]


@lru_cache(maxsize=64)
def _disk(h, w, center, radius):
    dy, dx = _offsets(h, w, center)
    mask = dy * dy + dx * dx <= radius * radius
    mask.setflags(write=False)
    return mask


def disk_mask(shape, spec):
    """Boolean ``(H, W)`` indicator of the symmetry disk."""
    return _disk(shape[0], shape[1], spec.center, spec.disk_radius)


@lru_cache(maxsize=256)
def _sampling_plan(h, w, angle, spec):
    """Flat gather indices ``(taps, H*W)`` and weights for one rotation."""
    dy, dx = _offsets(h, w, spec.center)
    c, s = math.cos(angle), math.sin(angle)
    # inverse map: rotate each output offset by -angle to find its source
    sx = c * dx + s * dy
    sy = -s * dx + c * dy
    outside = (sx * sx + sy * sy > spec.disk_radius * spec.disk_radius).ravel()
    sx = sx + spec.center[1]
    sy = sy + spec.center[0]
    if spec.resampling == "nearest":
        ix = np.clip(np.rint(sx).astype(np.intp), 0, w - 1)
        iy = np.clip(np.rint(sy).astype(np.intp), 0, h - 1)
        idx = (iy * w + ix).ravel()[None, :]
        wts = np.ones_like(idx, dtype=np.float64)
    else:
        x0 = np.floor(sx)
        y0 = np.floor(sy)
        fx = sx - x0
        fy = sy - y0
        x0 = x0.astype(np.intp)
        y0 = y0.astype(np.intp)
        idx, wts = [], []
        for oy, ox, wt in ((0, 0, (1 - fy) * (1 - fx)), (0, 1, (1 - fy) * fx), (1, 0, fy * (1 - fx)), (1, 1, fy * fx)):
            ty, tx = y0 + oy, x0 + ox
            valid = (ty >= 0) & (ty < h) & (tx >= 0) & (tx < w)
            idx.append((np.clip(ty, 0, h - 1) * w + np.clip(tx, 0, w - 1)).ravel())
            wts.append(np.where(valid, wt, 0.0).ravel())
        idx, wts = np.stack(idx), np.stack(wts)
    wts[:, outside] = 0.0
    for a in (idx, wts):
        a.setflags(write=False)
    return idx, wts


def _rotate_raw(arr, angle, spec):
    h, w, ch = arr.shape
    idx, wts = _sampling_plan(h, w, float(angle), spec)
    flat = arr.reshape(h * w, ch)
    if idx.shape[0] == 1:
        out = flat[idx[0]] * wts[0][:, None]
    else:
        out = np.einsum("kp,kpc->pc", wts, flat[idx])
    return out.reshape(h, w, ch)


def rotate(img, angle, spec):
    """Rotate ``img`` by ``angle`` radians about ``spec.center``.

    Inverse mapping: each output pixel reads the source point obtained by
    rotating it back by ``angle``. Source points farther than
    ``spec.disk_radius`` from the center read as 0.
    """
    arr = check_image(img, square=True)
    spec.check_shape(arr.shape)
    return np.clip(_rotate_raw(arr, angle, spec), 0.0, 1.0)


def sector_angles(shape, spec):
    """Polar angle in ``[0, 2*pi)`` of every pixel about ``spec.center``."""
    dy, dx = _offsets(shape[0], shape[1], spec.center)
    return np.mod(np.arctan2(dy, dx), 2 * math.pi)


@lru_cache(maxsize=64)
def _sector_index(h, w, spec):
    theta = sector_angles((h, w), spec)
    k = np.floor(theta * spec.n_fold / (2 * math.pi)).astype(np.intp)
    k = np.minimum(k, spec.n_fold - 1)
    k[~_disk(h, w, spec.center, spec.disk_radius)] = -1
    k.setflags(write=False)
    return k


def sector_mask(spec, k, shape):
    """Single-channel ``{0, 1}`` mask of radial sector ``k`` inside the disk.

    Sector ``k`` covers polar angles in ``[2*pi*k/n, 2*pi*(k+1)/n)``.
    """
    if not 0 <= k < spec.n_fold:
        raise IndexError(f"sector index {k} out of range for n_fold={spec.n_fold}")
    spec.check_shape(shape)
    idx = _sector_index(shape[0], shape[1], spec)
    return (idx == k).astype(np.float64)[:, :, None]


def symmetrize_ra(img, spec):
    """Rotate-and-average projection onto n-fold symmetric images."""
    arr = check_image(img, square=True)
    spec.check_shape(arr.shape)
    acc = np.zeros_like(arr)
    for k in range(spec.n_fold):
        acc += _rotate_raw(arr, 2 * math.pi * k / spec.n_fold, spec)
    acc /= spec.n_fold
    acc[~disk_mask(arr.shape, spec)] = 0.0
    return np.clip(acc, 0.0, 1.0)


def symmetrize_ss(img, spec, ref=0):
    """Select-sector-and-stitch: copy sector ``ref`` into every other sector."""
    if not 0 <= ref < spec.n_fold:
        raise IndexError(f"reference sector {ref} out of range for n_fold={spec.n_fold}")
    arr = check_image(img, square=True)
    spec.check_shape(arr.shape)
    idx = _sector_index(arr.shape[0], arr.shape[1], spec)
    out = np.zeros_like(arr)
    for k in range(spec.n_fold):
        sel = idx == k
        if k == ref:
            out[sel] = arr[sel]
        else:
            rotated = _rotate_raw(arr, 2 * math.pi * (k - ref) / spec.n_fold, spec)
            out[sel] = rotated[sel]
    return np.clip(out, 0.0, 1.0)


class Symmetrizer(TransformerMixin, BaseEstimator):
    """Project images toward n-fold rotational symmetry.

    Parameters
    ----------
    kind : {'ra', 'ss', 'none'}
        ``'ra'`` averages the n rotated copies, ``'ss'`` replicates one radial
        sector, ``'none'`` returns the input unchanged.
    n_fold : int
        Order of the symmetry.
    resampling : {'bilinear', 'nearest'}
    center, disk_radius : optional
        Geometry overrides; defaults follow :meth:`SymmetrySpec.for_shape`.
    ref_sector : int
        Reference sector for ``'ss'``.
    """

    def __init__(self, kind="ra", n_fold=6, resampling="bilinear", center=None, disk_radius=None, ref_sector=0):
        self.kind = kind
        self.n_fold = n_fold
        self.resampling = resampling
        self.center = center
        self.disk_radius = disk_radius
        self.ref_sector = ref_sector

    def spec_for(self, shape):
        return SymmetrySpec.for_shape(shape, self.n_fold, self.resampling, self.center, self.disk_radius)

    def _check_params(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind == "ss" and not 0 <= self.ref_sector < self.n_fold:
            raise IndexError(f"ref_sector {self.ref_sector} out of range for n_fold={self.n_fold}")

    def fit(self, X, y=None):
        self._check_params()
        images = check_image_batch(X, square=True)
        if images:
            self.spec_ = self.spec_for(images[0].shape)
        return self

    def __call__(self, img):
        """Symmetrize a single image."""
        self._check_params()
        arr = check_image(img, square=self.kind != "none")
        if self.kind == "none":
            return arr.copy()
        spec = self.spec_for(arr.shape)
        if self.kind == "ra":
            return symmetrize_ra(arr, spec)
        return symmetrize_ss(arr, spec, self.ref_sector)

    def transform(self, X):
        return np.stack([self(x) for x in check_image_batch(X, square=self.kind != "none")])

    def mask(self, shape):
        """Disk indicator this symmetrizer zeroes outside of (all ones for ``'none'``)."""
        if self.kind == "none":
            return np.ones(shape[:2], dtype=bool)
        return disk_mask(shape, self.spec_for(shape))


def read_png(path):
    """Load an 8-bit PNG as an ``(H, W, C)`` float image in ``[0, 1]``."""
    with Image.open(path) as im:
        if im.mode not in ("L", "RGB"):
            im = im.convert("RGB" if "A" in im.mode or im.mode in ("P", "CMYK") else "L")
        arr = np.asarray(im, dtype=np.float64) / 255.0
    return check_image(arr)


def write_png(path, img):
    """Save an image as 8-bit grayscale or RGB PNG, rounding to nearest."""
    arr = check_image(img)
    q = np.rint(np.clip(arr, 0.0, 1.0) * 255.0).astype(np.uint8)
    if q.shape[2] == 1:
        q = q[:, :, 0]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(q).save(path, format="PNG", optimize=False)
    return path
