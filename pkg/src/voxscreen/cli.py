"""Batch command surface: extract, cv, synth, gamma-sweep, report.

Every command writes a fingerprint.json sufficient to re-run it exactly;
outputs are deterministic per (config, seed), so re-runs are comparable
byte for byte. VOXSCREEN_SEED provides the default seed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

from .datasets import CohortFilter, apply_cohort, generate_synthetic_corpus, parse_manifest
from .dsp import FrameParams, MelParams
from .errors import VoxscreenError
from .evaluation import METRIC_NAMES, config_fingerprint, cross_validate
from .features_io import read_feature, write_feature
from .pipeline import (
    FEATURE_KINDS,
    MODEL_KINDS,
    extract_matrix,
    feature_from_matrix,
    load_clip,
    validate_recipe,
)


def _default_seed() -> int:
    return int(os.environ.get("VOXSCREEN_SEED", "0"))


def _cohort_from_flag(flag: str) -> CohortFilter:
    if flag == "all":
        return CohortFilter("all")
    if flag.startswith("positives_within_days"):
        _, _, arg = flag.partition(":")
        return CohortFilter("positives_within_days", days=int(arg or 14))
    if flag == "covid_vs_cold_symptomatic":
        return CohortFilter("covid_vs_cold_symptomatic")
    raise VoxscreenError(f"unknown cohort {flag!r}")


def _load_examples(manifest_path: str, cohort: str):
    text = Path(manifest_path).read_text()
    examples = parse_manifest(text)
    return apply_cohort(examples, _cohort_from_flag(cohort)), text


def _write_fingerprint(out_dir: Path, payload: dict) -> str:
    fp = config_fingerprint(payload)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "fingerprint.json").write_text(
        json.dumps({"fingerprint": fp, "config": payload},
                   indent=2, sort_keys=True, default=str))
    return fp


def _sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def cmd_extract(args) -> int:
    examples, _ = _load_examples(args.manifest, args.cohort)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    frame = FrameParams(frame_length=args.frame_length, hop_length=args.hop_length)
    mel = MelParams(n_mels=args.n_mels, n_mfcc=args.n_mfcc)
    params_key = f"{args.feature}:{args.frame_length}:{args.hop_length}:{args.n_mels}:{args.n_mfcc}"

    index_path = out_dir / "index.csv"
    previous = {}
    if index_path.exists():
        for line in index_path.read_text().splitlines()[1:]:
            path, sha, key, feat = line.split(",")
            previous[path] = (sha, key, feat)

    manifest_dir = Path(args.manifest).parent

    def extract_one(ex):
        """Returns (row, skipped) or raises; safe to run concurrently."""
        clip_path = manifest_dir / ex.clip_path
        data = clip_path.read_bytes()
        sha = _sha256_bytes(data)
        feat_name = Path(ex.clip_path).stem + ".vxf"
        prev = previous.get(ex.clip_path)
        if prev and prev[0] == sha and prev[1] == params_key \
                and (out_dir / feat_name).exists():
            return (ex.clip_path, sha, params_key, feat_name), True
        clip = load_clip(clip_path)
        matrix, tag = extract_matrix(clip, args.feature, frame=frame, mel=mel)
        write_feature(str(out_dir / feat_name), matrix, tag)
        return (ex.clip_path, sha, params_key, feat_name), False

    rows, failures, skipped = [], [], 0
    jobs = max(1, args.jobs)
    if jobs == 1:
        outcomes = []
        for ex in examples:
            try:
                outcomes.append(extract_one(ex))
            except (VoxscreenError, OSError) as exc:
                outcomes.append((ex.clip_path, str(exc)))
    else:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(extract_one, ex) for ex in examples]
            outcomes = []
            for ex, fut in zip(examples, futures):
                try:
                    outcomes.append(fut.result())
                except (VoxscreenError, OSError) as exc:
                    outcomes.append((ex.clip_path, str(exc)))
    for outcome in outcomes:
        if isinstance(outcome[1], bool):
            row, was_skipped = outcome
            rows.append(row)
            skipped += was_skipped
        else:
            failures.append(outcome)

    index_path.write_text("path,sha256,params,feature_path\n" + "".join(
        f"{p},{s},{k},{f}\n" for p, s, k, f in rows))
    _write_fingerprint(out_dir, {
        "command": "extract", "manifest": args.manifest, "cohort": args.cohort,
        "feature": args.feature, "params": params_key})
    print(f"extracted {len(rows) - skipped} features, {skipped} up to date, "
          f"{len(failures)} failures")
    for path, msg in failures:
        print(f"  FAILED {path}: {msg}", file=sys.stderr)
    return 1 if failures else 0


_KIND_TO_TAG = {"mfcc_vector": "vector", "mfcc_image": "mfcc",
                "melspec_image": "melspec", "encoder": "encoder"}


def _collect_features(args, examples):
    """Features for cv/gamma-sweep; reuses extracted files when present."""
    frame = FrameParams(frame_length=args.frame_length, hop_length=args.hop_length)
    mel = MelParams(n_mels=args.n_mels, n_mfcc=args.n_mfcc)
    manifest_dir = Path(args.manifest).parent
    features = []
    feature_dir = Path(args.features) if args.features else None
    for ex in examples:
        vxf = feature_dir / (Path(ex.clip_path).stem + ".vxf") if feature_dir else None
        if vxf is not None and vxf.exists():
            matrix, tag = read_feature(str(vxf))
            if tag != _KIND_TO_TAG[args.feature]:
                raise VoxscreenError(
                    f"{vxf} holds {tag!r} features but the run asks for "
                    f"{args.feature!r}; re-extract or point elsewhere")
        else:
            clip = load_clip(manifest_dir / ex.clip_path)
            matrix, _ = extract_matrix(clip, args.feature, frame=frame, mel=mel)
        features.append(feature_from_matrix(matrix, args.feature))
    return features


def _hyper_from_args(args) -> dict:
    hyper = {}
    for name in ("epochs", "batch", "max_passes"):
        v = getattr(args, name, None)
        if v is not None:
            hyper[name] = int(v)
    for name in ("lr", "gamma", "C", "tol", "dropout"):
        v = getattr(args, name, None)
        if v is not None:
            hyper[name] = float(v)
    return hyper


def _run_cv(args, examples, hyper: dict, out_dir: Path, label: str = "report"):
    recipe = {"model": args.model, "feature": args.feature, "hyper": hyper,
              "force": args.force}
    validate_recipe(recipe)
    features = _collect_features(args, examples)
    labels = [ex.label for ex in examples]
    report = cross_validate(features, labels, recipe, k=args.k, seed=args.seed)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / f"{label}.json").write_text(report.to_json())
    (out_dir / f"{label}.txt").write_text(report.to_table() + "\n")
    (out_dir / f"{label}_roc.csv").write_text(report.roc_csv())
    return report


def cmd_cv(args) -> int:
    examples, _ = _load_examples(args.manifest, args.cohort)
    out_dir = Path(args.out)
    report = _run_cv(args, examples, _hyper_from_args(args), out_dir)
    _write_fingerprint(out_dir, {
        "command": "cv", "manifest": args.manifest, "cohort": args.cohort,
        "feature": args.feature, "model": args.model,
        "hyper": _hyper_from_args(args), "k": args.k, "seed": args.seed})
    if args.cohort != "all":
        print(f"cohort: {args.cohort}")
    cells = report.cells()
    for name in METRIC_NAMES:
        print(f"{name}: {cells[name]}")
    print(f"pooled AUC: {report.pooled_roc.auc:.4f}")
    return 0


def cmd_synth(args) -> int:
    if args.n_pos < 1 or args.n_neg < 1:
        print("synth: need at least one example per class", file=sys.stderr)
        return 2
    generate_synthetic_corpus(args.n_pos, args.n_neg, args.seed, args.out,
                              duration_s=args.duration)
    _write_fingerprint(Path(args.out), {
        "command": "synth", "n_pos": args.n_pos, "n_neg": args.n_neg,
        "seed": args.seed, "duration": args.duration})
    print(f"wrote {args.n_pos + args.n_neg} clips and manifest.csv to {args.out}")
    return 0


def cmd_gamma_sweep(args) -> int:
    if args.model != "svm":
        print("gamma-sweep: only the svm recipe has a gamma", file=sys.stderr)
        return 2
    gammas = [float(g) for g in args.gammas.split(",")]
    deduped = sorted(set(gammas))
    if len(deduped) != len(gammas):
        print("warning: duplicate gammas removed", file=sys.stderr)
    examples, _ = _load_examples(args.manifest, args.cohort)
    out_dir = Path(args.out)
    results = []
    for gamma in deduped:
        hyper = dict(_hyper_from_args(args), gamma=gamma)
        report = _run_cv(args, examples, hyper, out_dir, label=f"gamma_{gamma:g}")
        results.append((gamma, report.pooled_roc.auc))
    _write_fingerprint(out_dir, {
        "command": "gamma-sweep", "manifest": args.manifest,
        "cohort": args.cohort, "gammas": deduped, "k": args.k, "seed": args.seed})
    best = max(results, key=lambda r: r[1])
    print("gamma      pooled_auc")
    for gamma, auc in results:
        flag = "  <- best" if gamma == best[0] else ""
        print(f"{gamma:<10g} {auc:.4f}{flag}")
    return 0


def cmd_report(args) -> int:
    doc = json.loads(Path(args.report).read_text())
    print(f"fingerprint: {doc['fingerprint']}")
    print(f"recipe: {json.dumps(doc['recipe'], sort_keys=True)}")
    print(f"k={doc['k']} seed={doc['seed']}")
    for name in METRIC_NAMES:
        print(f"{name}: {doc['cells'][name]}")
    print(f"pooled AUC: {doc['pooled_auc']:.4f}")
    print(f"mean fold AUC: {doc['mean_fold_auc']:.4f}")
    return 0


def _add_common_feature_flags(p):
    p.add_argument("--frame-length", type=int, default=2048, dest="frame_length")
    p.add_argument("--hop-length", type=int, default=512, dest="hop_length")
    p.add_argument("--n-mels", type=int, default=64, dest="n_mels")
    p.add_argument("--n-mfcc", type=int, default=40, dest="n_mfcc")


def _add_cv_flags(p):
    p.add_argument("--manifest", required=True)
    p.add_argument("--cohort", default="all",
                   help="all | positives_within_days[:N] | covid_vs_cold_symptomatic")
    p.add_argument("--feature", required=True, choices=FEATURE_KINDS)
    p.add_argument("--features", default=None,
                   help="directory of extracted .vxf files to reuse")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true",
                   help="allow (model, feature) pairs outside the supported set")
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--C", type=float, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--dropout", type=float, default=None)
    p.add_argument("--max-passes", type=int, default=None, dest="max_passes")
    _add_common_feature_flags(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="voxscreen",
        description="Vocal-biomarker screening experiments, batch style.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="decode clips and dump VXF1 features")
    p.add_argument("--manifest", required=True)
    p.add_argument("--cohort", default="all")
    p.add_argument("--feature", required=True, choices=FEATURE_KINDS)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1,
                   help="reserved worker cap; extraction is sequential")
    _add_common_feature_flags(p)
    p.set_defaults(fn=cmd_extract)

    p = sub.add_parser("cv", help="stratified cross-validated evaluation")
    p.add_argument("--model", required=True, choices=MODEL_KINDS)
    p.add_argument("--gamma", type=float, default=None)
    _add_cv_flags(p)
    p.set_defaults(fn=cmd_cv)

    p = sub.add_parser("synth", help="generate a synthetic labelled corpus")
    p.add_argument("n_pos", type=int)
    p.add_argument("n_neg", type=int)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--duration", type=float, default=2.0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("gamma-sweep", help="cross-validate over a gamma grid")
    p.add_argument("--model", default="svm")
    p.add_argument("--gammas", required=True, help="comma-separated values")
    _add_cv_flags(p)
    p.set_defaults(fn=cmd_gamma_sweep)

    p = sub.add_parser("report", help="pretty-print a report.json")
    p.add_argument("report")
    p.set_defaults(fn=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except VoxscreenError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
