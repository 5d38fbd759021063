"""Batch experiments: branching generation, weight sweeps, ablations and evaluation.

Every runner writes its outputs together with a JSON manifest that embeds the
full :class:`RunConfig`, so rerunning from the manifest reproduces the files
byte for byte.
"""

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .diffusion import pool_weight
from .estimator import SymmetricInterpolator
from .imaging import read_png, write_png
from .metrics import corpus_stats, frechet_distance, make_features, symmetry_score
from .synthdata import generate_wheel, load_dataset, sample_params


def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    return path


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def sha256_file(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def load_corpus(cfg):
    """Images backing the denoiser: ``cfg.data_dir`` or a procedural corpus."""
    if cfg.data_dir:
        images, names = load_dataset(cfg.data_dir)
        if not images:
            raise ValueError(f"no PNG images found in {cfg.data_dir}")
        return images, names
    params = sample_params(cfg.data_count, cfg.data_ranges(), cfg.data_seed)
    images = [generate_wheel(p, cfg.size) for p in params]
    return images, [f"wheel_{i:05d}" for i in range(len(images))]


def make_interpolator(cfg, **overrides):
    params = dict(
        symmetrizer=cfg.symmetrizer,
        n_fold=cfg.n_fold,
        w=cfg.w,
        d=cfg.d,
        use_similarity=cfg.use_similarity,
        use_decay=cfg.use_decay,
        mode=cfg.mode,
        pool_order=cfg.pool_order,
        codec=cfg.codec,
        steps=cfg.steps,
        t_start=cfg.t_start,
        T=cfg.T,
        beta_start=cfg.beta_start,
        beta_end=cfg.beta_end,
        alpha=cfg.alpha,
        ref_sector=cfg.ref_sector,
        resampling=cfg.resampling,
        random_state=cfg.seed,
    )
    params.update(overrides)
    return SymmetricInterpolator(**params)


def sample_pairs(n_items, n_pairs, seed):
    """Distinct unordered index pairs, drawn without replacement where possible."""
    if n_items < 2:
        raise ValueError("need at least two images to form pairs")
    rng = np.random.Generator(np.random.PCG64(seed))
    total = n_items * (n_items - 1) // 2
    all_pairs = [(i, j) for i in range(n_items) for j in range(i + 1, n_items)]
    if n_pairs <= total:
        picks = rng.choice(total, size=n_pairs, replace=False)
    else:
        picks = rng.choice(total, size=n_pairs, replace=True)
    return [all_pairs[k] for k in picks]


def branch_plan(n_pairs, depth):
    """Lineage of a binary branching run.

    Each parent pair ``(a, b)`` yields one child; every node is then paired
    with each of its own two parents to produce the next level, giving
    ``2**depth - 1`` descendants per pair.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    nodes = []
    for p in range(n_pairs):
        frontier = [(f"pair{p:04d}_a", f"pair{p:04d}_b")]
        counter = 0
        for level in range(1, depth + 1):
            nxt = []
            for pa, pb in frontier:
                name = f"pair{p:04d}_n{counter:03d}"
                counter += 1
                nodes.append({"id": name, "pair": p, "level": level, "parents": [pa, pb]})
                nxt.extend([(name, pa), (name, pb)])
            frontier = nxt
    return nodes


def split_pairs(n_pairs, fraction, seed):
    """Seeded assignment of each parent pair to 'val' or 'test'."""
    rng = np.random.Generator(np.random.PCG64(seed))
    order = rng.permutation(n_pairs)
    n_val = int(round(fraction * n_pairs))
    split = ["test"] * n_pairs
    for k in order[:n_val]:
        split[k] = "val"
    return split


def run_branch(cfg, out_dir, pairs=None, pair_images=None):
    """Generate the branching corpus.

    Either ``pairs`` (index pairs into the corpus) or ``pair_images`` (explicit
    image pairs) may be given; otherwise ``cfg.pairs`` pairs are sampled from
    the corpus.
    """
    out_dir = Path(out_dir)
    images, names = load_corpus(cfg)
    est = make_interpolator(cfg).fit(images)
    if pair_images is None:
        if pairs is None:
            pairs = sample_pairs(len(images), cfg.pairs, cfg.seed)
        pair_images = [(images[a], images[b]) for a, b in pairs]
        pair_names = [(names[a], names[b]) for a, b in pairs]
    else:
        pair_names = [(f"input{2 * i}", f"input{2 * i + 1}") for i in range(len(pair_images))]
    plan = branch_plan(len(pair_images), cfg.depth)
    split = split_pairs(len(pair_images), cfg.val_fraction, cfg.seed)
    store = {}
    for p, (a, b) in enumerate(pair_images):
        store[f"pair{p:04d}_a"] = a
        store[f"pair{p:04d}_b"] = b
    for k, node in enumerate(plan):
        pa, pb = node["parents"]
        seed = cfg.seed + k
        img = est.interpolate(store[pa], store[pb], seed=seed)
        store[node["id"]] = img
        node["seed"] = seed
        node["file"] = f"{node['id']}.png"
        node["split"] = split[node["pair"]]
        write_png(out_dir / node["file"], img)
        # parents are only needed while their descendants are pending
        if node["level"] == cfg.depth:
            store.pop(node["id"])
    manifest = {
        "command": "branch",
        "config": cfg.to_dict(),
        "pairs": [{"pair": p, "a": na, "b": nb, "split": split[p]} for p, (na, nb) in enumerate(pair_names)],
        "nodes": plan,
        "n_images": len(plan),
    }
    write_json(out_dir / "lineage.json", manifest)
    return manifest


def batch_outputs(est, images, pairs, seed):
    return [est.interpolate(images[a], images[b], seed=seed + j) for j, (a, b) in enumerate(pairs)]


def _sym_pair(cfg):
    return cfg.make_symmetrizer("ra"), cfg.make_symmetrizer("ss")


def summarize(outputs, cfg, ref_stats, features):
    ra, ss = _sym_pair(cfg)
    sym_ra = [symmetry_score(x, ra) for x in outputs]
    sym_ss = [symmetry_score(x, ss) for x in outputs]
    fd = frechet_distance(corpus_stats(outputs, features), ref_stats) if len(outputs) >= 2 else float("nan")
    return {
        "sym_ra": float(np.mean(sym_ra)),
        "sym_ss": float(np.mean(sym_ss)),
        "frechet_distance": fd,
        "per_pair_sym_ra": sym_ra,
        "per_pair_sym_ss": sym_ss,
    }


def run_sweep(cfg, w_values, out_dir):
    """Matched-seed batch at each pooling weight; writes ``sweep.csv`` and ``sweep.json``."""
    if len(w_values) < 2:
        raise ValueError("a sweep needs at least two w values")
    out_dir = Path(out_dir)
    images, _ = load_corpus(cfg)
    features = make_features(cfg.features)
    ref_stats = corpus_stats(images, features)
    pairs = sample_pairs(len(images), cfg.pairs, cfg.seed)
    baseline_est = make_interpolator(cfg, mode="off").fit(images)
    baseline = summarize(batch_outputs(baseline_est, images, pairs, cfg.seed), cfg, ref_stats, features)
    rows, results = [], []
    for w in w_values:
        est = make_interpolator(cfg, w=float(w)).fit(images)
        res = summarize(batch_outputs(est, images, pairs, cfg.seed), cfg, ref_stats, features)
        res["w"] = float(w)
        results.append(res)
        rows.append([repr(float(w)), repr(res["sym_ra"]), repr(res["sym_ss"]), repr(res["frechet_distance"])])
    write_csv(out_dir / "sweep.csv", ["w", "sym_ra", "sym_ss", "frechet_distance"], rows)
    manifest = {
        "command": "sweep",
        "config": cfg.to_dict(),
        "pairs": [list(map(int, p)) for p in pairs],
        "baseline_off": baseline,
        "rows": results,
        "features": features.config(),
    }
    write_json(out_dir / "sweep.json", manifest)
    return manifest


ABLATIONS = {
    "similarity_decay": {},
    "no_similarity": {"use_similarity": False},
    "no_decay": {"use_decay": False},
    "end_only": {"mode": "end_only"},
    "off": {"mode": "off"},
}


def run_ablation(cfg, out_dir, variants=None):
    """Similarity/decay and interleaved/end-only comparisons at matched seeds."""
    out_dir = Path(out_dir)
    images, _ = load_corpus(cfg)
    features = make_features(cfg.features)
    ref_stats = corpus_stats(images, features)
    pairs = sample_pairs(len(images), cfg.pairs, cfg.seed)
    results = {}
    for name in variants or ABLATIONS:
        est = make_interpolator(cfg, **ABLATIONS[name]).fit(images)
        outputs, finals = [], []
        for j, (a, b) in enumerate(pairs):
            img, trace = est.interpolate(images[a], images[b], seed=cfg.seed + j, return_trace=True)
            outputs.append(img)
            finals.append(trace[-1]["lam"])
        res = summarize(outputs, cfg, ref_stats, features)
        res["final_lam_mean"] = float(np.mean(finals))
        results[name] = res
    rows = [
        [name, repr(r["sym_ra"]), repr(r["sym_ss"]), repr(r["frechet_distance"]), repr(r["final_lam_mean"])]
        for name, r in results.items()
    ]
    write_csv(out_dir / "ablation.csv", ["variant", "sym_ra", "sym_ss", "frechet_distance", "final_lam_mean"], rows)
    manifest = {
        "command": "ablate",
        "config": cfg.to_dict(),
        "pairs": [list(map(int, p)) for p in pairs],
        "variants": results,
        "decay_ratio_at_last_step": decay_ratio(cfg),
        "features": features.config(),
    }
    write_json(out_dir / "ablation.json", manifest)
    return manifest


def decay_ratio(cfg, similarity=1.0):
    """Final-iteration weight without decay divided by the decayed one."""
    off = pool_weight(similarity, cfg.w, cfg.d, cfg.steps, use_decay=False)
    on = pool_weight(similarity, cfg.w, cfg.d, cfg.steps, use_decay=True)
    return off / on if on else float("inf")


def _load_dir(path):
    path = Path(path)
    files = sorted(path.glob("*.png"))
    if not files:
        raise ValueError(f"no PNG images in {path}")
    return [read_png(f) for f in files], [f.stem for f in files]


def run_eval(cfg, generated_dir, reference_dir, out_dir):
    """Per-image symmetry scores and corpus Fréchet distance."""
    out_dir = Path(out_dir)
    gen, gen_ids = _load_dir(generated_dir)
    ref, _ = _load_dir(reference_dir)
    ra, ss = _sym_pair(cfg)
    rows = [[i, repr(symmetry_score(x, ra)), repr(symmetry_score(x, ss))] for i, x in zip(gen_ids, gen)]
    write_csv(out_dir / "metrics.csv", ["image_id", "sym_ra", "sym_ss"], rows)
    features = make_features(cfg.features)
    fd = frechet_distance(corpus_stats(gen, features), corpus_stats(ref, features))
    summary = {
        "command": "eval",
        "config": cfg.to_dict(),
        "generated": str(generated_dir),
        "reference": str(reference_dir),
        "n_generated": len(gen),
        "n_reference": len(ref),
        "frechet_distance": fd,
        "mean_sym_ra": float(np.mean([float(r[1]) for r in rows])),
        "mean_sym_ss": float(np.mean([float(r[2]) for r in rows])),
        "features": features.config(),
    }
    write_json(out_dir / "metrics.json", summary)
    return summary


def triptych(a, result, b, gap=2):
    """Side-by-side ``a | result | b`` with a white gutter."""
    h = a.shape[0]
    c = max(a.shape[2], result.shape[2], b.shape[2])
    parts = []
    for k, img in enumerate((a, result, b)):
        if img.shape[2] != c:
            img = np.repeat(img, c, axis=2)
        parts.append(img)
        if k < 2:
            parts.append(np.ones((h, gap, c)))
    return np.concatenate(parts, axis=1)


def run_interpolate(cfg, path_a, path_b, out_dir):
    out_dir = Path(out_dir)
    a, b = read_png(path_a), read_png(path_b)
    if a.shape != b.shape:
        raise ValueError(f"input images differ in size: {a.shape} vs {b.shape}")
    images, _ = load_corpus(cfg)
    # the parents are part of what the denoiser knows
    est = make_interpolator(cfg).fit(list(images) + [a, b])
    img, trace = est.interpolate(a, b, seed=cfg.seed, return_trace=True)
    write_png(out_dir / "result.png", img)
    write_png(out_dir / "triptych.png", triptych(a, img, b))
    manifest = {
        "command": "interpolate",
        "config": cfg.to_dict(),
        "inputs": {
            "a": {"path": str(path_a), "sha256": sha256_file(path_a)},
            "b": {"path": str(path_b), "sha256": sha256_file(path_b)},
        },
        "outputs": {"result": "result.png", "triptych": "triptych.png"},
        "sym_ra": symmetry_score(img, cfg.make_symmetrizer("ra")),
        "sym_ss": symmetry_score(img, cfg.make_symmetrizer("ss")),
        "trace": trace,
    }
    write_json(out_dir / "manifest.json", manifest)
    return manifest

