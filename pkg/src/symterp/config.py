"""Run configuration: JSON file plus command-line overrides."""

from dataclasses import asdict, dataclass, field, fields
import json
from pathlib import Path

from .diffusion import GuidanceConfig, NoiseSchedule
from .imaging import Symmetrizer
from .latent import make_codec


@dataclass
class RunConfig:
    seed: int = 0
    # guidance
    w: float = 0.25
    d: float = 1.0
    use_similarity: bool = True
    use_decay: bool = True
    symmetrizer: str = "ra"
    mode: str = "interleaved"
    pool_order: str = "before"
    n_fold: int = 6
    ref_sector: int = 0
    resampling: str = "bilinear"
    # sampler
    steps: int = 50
    t_start: int = 300
    T: int = 1000
    beta_start: float = 1e-4
    beta_end: float = 0.02
    alpha: float = 0.5
    codec: str = "identity"
    # procedural corpus backing the denoiser when no data_dir is given
    size: int = 64
    data_dir: str = None
    data_count: int = 60
    data_seed: int = 0
    n_spokes: list = None
    asymmetry: list = field(default_factory=lambda: [0.0, 0.4])
    background: list = field(default_factory=lambda: [0.0, 0.0])
    # harness
    pairs: int = 50
    depth: int = 4
    features: str = "downsample"
    val_fraction: float = 0.5

    @classmethod
    def load(cls, path=None, **overrides):
        values = {}
        if path is not None:
            values.update(json.loads(Path(path).read_text()))
        values.update({k: v for k, v in overrides.items() if v is not None})
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**values)

    def to_dict(self):
        return asdict(self)

    def data_ranges(self):
        return {
            "n_spokes": list(self.n_spokes or [self.n_fold]),
            "asymmetry": tuple(self.asymmetry),
            "background": tuple(self.background),
        }

    def make_symmetrizer(self, kind=None):
        return Symmetrizer(kind or self.symmetrizer, self.n_fold, self.resampling, ref_sector=self.ref_sector)

    def guidance(self, **changes):
        values = dict(
            w=self.w,
            d=self.d,
            use_similarity=self.use_similarity,
            use_decay=self.use_decay,
            symmetrizer=self.make_symmetrizer(),
            mode=self.mode,
            pool_order=self.pool_order,
        )
        values.update(changes)
        return GuidanceConfig(**values)

    def schedule(self):
        return NoiseSchedule(self.T, self.beta_start, self.beta_end)

    def make_codec(self):
        return make_codec(self.codec)
