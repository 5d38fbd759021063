"""Command-line driver.

    symterp dataset     --count 100 --seed 7 --out data/
    symterp interpolate a.png b.png --symmetrizer ra --w 0.25 --out run/
    symterp branch      --pairs 4 --out branch/
    symterp sweep       --w-values 0 0.1 0.25 0.35 0.5 --out sweep/
    symterp ablate      --out ablation/
    symterp eval        generated/ reference/ --out metrics/
"""

import argparse
import json
import sys
from pathlib import Path

from . import harness
from .config import RunConfig
from .synthdata import generate_dataset


def _common(p):
    p.add_argument("--config", type=Path, help="JSON run config; flags override it")
    p.add_argument("--out", type=Path, default=Path("out"))
    p.add_argument("--seed", type=int)
    p.add_argument("--w", type=float)
    p.add_argument("--d", type=float)
    p.add_argument("--symmetrizer", choices=["ra", "ss", "none"])
    p.add_argument("--mode", choices=["interleaved", "end-only", "off"])
    p.add_argument("--pool-order", choices=["before", "after"])
    p.add_argument("--n-fold", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--t-start", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--size", type=int)
    p.add_argument("--codec", choices=["identity", "pool"])
    p.add_argument("--data-dir", type=str, help="PNG corpus backing the denoiser")
    p.add_argument("--data-count", type=int)
    p.add_argument("--data-seed", type=int)
    p.add_argument("--asymmetry", type=float, nargs=2, metavar=("LO", "HI"), help="wheel asymmetry range")
    p.add_argument("--features", choices=["downsample", "randproj"])
    p.add_argument("--no-similarity", action="store_true")
    p.add_argument("--no-decay", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(prog="symterp", description="Symmetry-constrained image interpolation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dataset", help="write procedural wheel PNGs and a manifest")
    _common(p)
    p.add_argument("--count", type=int, default=100)

    p = sub.add_parser("interpolate", help="interpolate two PNGs")
    _common(p)
    p.add_argument("image_a", type=Path)
    p.add_argument("image_b", type=Path)

    p = sub.add_parser("branch", help="branching generation from parent pairs")
    _common(p)
    p.add_argument("--pairs", type=int)
    p.add_argument("--depth", type=int)
    p.add_argument("--pair-file", type=Path, help="JSON list of [a.png, b.png] pairs")

    p = sub.add_parser("sweep", help="pooling-weight sweep")
    _common(p)
    p.add_argument("--pairs", type=int)
    p.add_argument("--w-values", type=float, nargs="+", default=[0.1, 0.25, 0.35, 0.5])

    p = sub.add_parser("ablate", help="similarity/decay and end-only ablations")
    _common(p)
    p.add_argument("--pairs", type=int)

    p = sub.add_parser("eval", help="symmetry scores and Fréchet distance of a PNG directory")
    _common(p)
    p.add_argument("generated", type=Path)
    p.add_argument("reference", type=Path)
    return parser


def config_from_args(args):
    overrides = {
        "seed": args.seed,
        "w": args.w,
        "d": args.d,
        "symmetrizer": args.symmetrizer,
        "mode": args.mode.replace("-", "_") if args.mode else None,
        "pool_order": args.pool_order,
        "n_fold": args.n_fold,
        "steps": args.steps,
        "t_start": args.t_start,
        "alpha": args.alpha,
        "size": args.size,
        "codec": args.codec,
        "data_dir": args.data_dir,
        "data_count": args.data_count,
        "data_seed": args.data_seed,
        "features": args.features,
        "pairs": getattr(args, "pairs", None),
        "depth": getattr(args, "depth", None),
        "asymmetry": args.asymmetry,
    }
    if args.no_similarity:
        overrides["use_similarity"] = False
    if args.no_decay:
        overrides["use_decay"] = False
    return RunConfig.load(args.config, **overrides)


def _dataset(cfg, args):
    manifest = generate_dataset(args.count, cfg.data_ranges(), cfg.seed, cfg.size, args.out)
    return f"wrote {len(manifest['entries'])} images to {args.out}"


def _interpolate(cfg, args):
    for path in (args.image_a, args.image_b):
        if not path.is_file():
            raise FileNotFoundError(f"no such image: {path}")
    m = harness.run_interpolate(cfg, args.image_a, args.image_b, args.out)
    return f"wrote {args.out / 'result.png'} (Sym RA {m['sym_ra']:.4f}, SS {m['sym_ss']:.4f})"


def _branch(cfg, args):
    pair_images = None
    if args.pair_file:
        from .imaging import read_png

        entries = json.loads(args.pair_file.read_text())
        if not entries:
            raise ValueError("pair file lists no pairs")
        pair_images = [(read_png(a), read_png(b)) for a, b in entries]
    m = harness.run_branch(cfg, args.out, pair_images=pair_images)
    return f"wrote {m['n_images']} images and lineage.json to {args.out}"


def _sweep(cfg, args):
    m = harness.run_sweep(cfg, args.w_values, args.out)
    return f"wrote {len(m['rows'])} sweep rows to {args.out / 'sweep.csv'}"


def _ablate(cfg, args):
    harness.run_ablation(cfg, args.out)
    return f"wrote {args.out / 'ablation.csv'}"


def _eval(cfg, args):
    s = harness.run_eval(cfg, args.generated, args.reference, args.out)
    return f"Fréchet distance {s['frechet_distance']:.6g}; mean Sym RA {s['mean_sym_ra']:.4f}, SS {s['mean_sym_ss']:.4f}"


COMMANDS = {
    "dataset": _dataset,
    "interpolate": _interpolate,
    "branch": _branch,
    "sweep": _sweep,
    "ablate": _ablate,
    "eval": _eval,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        message = COMMANDS[args.command](cfg, args)
    except Exception as exc:  # one-line diagnostic, nonzero exit
        print(f"symterp {args.command}: error: {exc}", file=sys.stderr)
        return 1
    print(message)
    return 0


if __name__ == "__main__":
    sys.exit(main())
