"""Procedural wheel images with controllable n-fold symmetry."""

from dataclasses import asdict, dataclass, fields
import json
import math
from pathlib import Path

import numpy as np

from .imaging import read_png, write_png

MANIFEST_VERSION = 1

DEFAULT_RANGES = {
    "n_spokes": [4, 5, 6, 8],
    "spoke_width": (0.15, 0.45),
    "rim_outer": (0.85, 0.95),
    "rim_inner": (0.65, 0.78),
    "hub_radius": (0.12, 0.25),
    "rim": (0.65, 0.95),
    "spoke": (0.45, 0.85),
    "background": (0.0, 0.0),
    "asymmetry": (0.0, 0.0),
    "edge_width": (3.0, 3.0),
}


@dataclass(frozen=True)
class WheelParams:
    """Polar description of a wheel.

    Radii are fractions of half the image side. ``asymmetry`` scales a seeded
    per-spoke jitter of angle (in units of half the spoke spacing) and width.
    Region boundaries are linear ramps ``edge_width`` pixels wide.
    """

    n_spokes: int = 6
    spoke_width: float = 0.3
    rim_outer: float = 0.9
    rim_inner: float = 0.72
    hub_radius: float = 0.18
    rim: float = 0.85
    spoke: float = 0.7
    background: float = 0.0
    asymmetry: float = 0.0
    seed: int = 0
    edge_width: float = 3.0

    def validate(self):
        if int(self.n_spokes) != self.n_spokes or self.n_spokes < 2:
            raise ValueError(f"n_spokes must be an integer >= 2, got {self.n_spokes}")
        if self.spoke_width < 0:
            raise ValueError("spoke_width must be non-negative")
        radii = (self.hub_radius, self.rim_inner, self.rim_outer)
        degenerate = all(r == 0 for r in radii)
        if not degenerate and not 0 <= self.hub_radius < self.rim_inner < self.rim_outer <= 1:
            raise ValueError(f"need 0 <= hub_radius < rim_inner < rim_outer <= 1, got {radii}")
        for name in ("rim", "spoke", "background"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name} intensity must lie in [0, 1], got {v}")
        if self.asymmetry < 0:
            raise ValueError("asymmetry must be non-negative")
        if self.edge_width < 0:
            raise ValueError("edge_width must be non-negative")

    def spoke_layout(self):
        """Per-spoke (center angle, half width) after jitter."""
        n = int(self.n_spokes)
        rng = np.random.Generator(np.random.PCG64(self.seed))
        u = rng.uniform(-1.0, 1.0, n)
        v = rng.uniform(-1.0, 1.0, n)
        centers = 2 * math.pi * np.arange(n) / n + self.asymmetry * u * (math.pi / n)
        half = 0.5 * self.spoke_width * np.maximum(0.0, 1.0 + self.asymmetry * v)
        return centers, half


def _ramp(signed_px, width):
    if width <= 0:
        return (signed_px >= 0).astype(np.float64)
    return np.clip(0.5 + signed_px / width, 0.0, 1.0)


def _render(p, rows, cols, half_size):
    r_px = np.hypot(rows, cols)
    theta = np.arctan2(rows, cols)
    if p.hub_radius == p.rim_inner == p.rim_outer == 0:
        return np.full(r_px.shape, float(p.background))
    hub, inner, outer = (half_size * v for v in (p.hub_radius, p.rim_inner, p.rim_outer))
    e = p.edge_width
    spokes = np.zeros(r_px.shape)
    for c, h in zip(*p.spoke_layout()):
        delta = np.abs(np.angle(np.exp(1j * (theta - c))))
        # arc-length distance to the spoke edge at this radius
        spokes = np.maximum(spokes, _ramp((h - delta) * r_px, e))
    spokes *= _ramp(r_px - hub, e) * _ramp(inner - r_px, e)
    rim = _ramp(r_px - inner, e) * _ramp(outer - r_px, e)
    hub_cover = _ramp(hub - r_px, e)
    out = np.full(r_px.shape, p.background)
    out += spokes * (p.spoke - out)
    out += rim * (p.rim - out)
    out += hub_cover * (p.rim - out)
    return out


def generate_wheel(p, size=64):
    """Render ``p`` on a ``size x size`` grayscale grid, 2x2 supersampled."""
    p.validate()
    if size < 16 or size % 2:
        raise ValueError(f"size must be an even integer >= 16, got {size}")
    c = (size - 1) / 2.0
    base = np.arange(size, dtype=np.float64) - c
    acc = np.zeros((size, size))
    for oy in (-0.25, 0.25):
        for ox in (-0.25, 0.25):
            rows, cols = np.meshgrid(base + oy, base + ox, indexing="ij")
            acc += _render(p, rows, cols, size / 2.0)
    return np.clip(acc / 4.0, 0.0, 1.0)[:, :, None]


def sample_params(count, ranges=None, seed=0):
    """Draw ``count`` parameter sets; ``n_spokes`` is assigned round-robin."""
    spec = dict(DEFAULT_RANGES)
    if ranges:
        spec.update(ranges)
    rng = np.random.Generator(np.random.PCG64(seed))
    choices = list(spec["n_spokes"])
    strata = np.resize(np.arange(len(choices)), count)
    rng.shuffle(strata)
    out = []
    for i in range(count):
        draw = {k: float(rng.uniform(*spec[k])) for k in _float_fields()}
        out.append(
            WheelParams(
                n_spokes=int(choices[strata[i]]),
                seed=int(rng.integers(0, 2**31 - 1)),
                **draw,
            )
        )
    return out


def _float_fields():
    return [f.name for f in fields(WheelParams) if f.name not in ("n_spokes", "seed")]


def generate_dataset(count, ranges=None, seed=0, size=64, out_dir="."):
    """Write ``count`` wheel PNGs plus ``manifest.json`` into ``out_dir``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, p in enumerate(sample_params(count, ranges, seed)):
        name = f"wheel_{i:05d}.png"
        write_png(out_dir / name, generate_wheel(p, size))
        entries.append({"id": i, **asdict(p), "file": name})
    manifest = {"version": MANIFEST_VERSION, "size": size, "seed": seed, "entries": entries}
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def params_from_entry(entry):
    names = {f.name for f in fields(WheelParams)}
    return WheelParams(**{k: v for k, v in entry.items() if k in names})


def load_dataset(path):
    """Load every PNG listed in ``path/manifest.json`` (or every PNG in ``path``)."""
    path = Path(path)
    manifest = path / "manifest.json"
    if manifest.exists():
        files = [path / e["file"] for e in json.loads(manifest.read_text())["entries"]]
    else:
        files = sorted(path.glob("*.png"))
    return [read_png(f) for f in files], [f.stem for f in files]
