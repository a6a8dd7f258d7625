"""Command-line interface.

Exit codes: 0 on success, 2 on configuration errors, 3 on data errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .alignment import (
    align,
    ea_align,
    ea_reference,
    match_labels,
    select_and_estimate_target_means,
)
from .dataio import (
    load_manifest,
    read_labels,
    read_trials,
    with_labels,
    write_labels,
    write_manifest,
    write_trials,
)
from .errors import ConfigError, DataError
from .experiment import emit_report, fit_predict, load_scenario, run_scenario
from .features import trial_covariance
from .rng import derive_key
from .selection import k_medoids, pairwise_distances
from .synth import SynthConfig, generate_synthetic


def _cmd_synth(args) -> int:
    try:
        doc = json.loads(Path(args.config).read_text())
        cfg = SynthConfig(**doc)
    except (OSError, json.JSONDecodeError, TypeError) as exc:
        raise ConfigError(f"cannot load synth config {args.config}: {exc}") from exc
    data = generate_synthetic(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, trials in enumerate(data.subjects):
        name = f"s{i}"
        write_trials(out / f"{name}.trials", trials)
        write_labels(out / f"{name}.labels", [t.label for t in trials])
        entries.append((name, f"{name}.trials", f"{name}.labels"))
    write_manifest(out / "manifest.json", 100.0, range(cfg.classes), entries)
    prototypes = {
        "prototypes": [p.tolist() for p in data.prototypes],
        "shifts": [w.tolist() for w in data.shifts],
    }
    (out / "generator.json").write_text(json.dumps(prototypes, sort_keys=True) + "\n")
    print(f"wrote {len(data.subjects)} subjects to {out}")
    return 0


def _cmd_experiment(args) -> int:
    spec = load_scenario(args.spec, seed_override=args.seed)
    report = run_scenario(spec, jobs=args.jobs)
    fmt = "json" if args.out.endswith(".json") else "csv"
    emit_report(report, args.out, format=fmt)
    print(f"wrote {args.out} ({len(report.accuracies)} accuracy rows)")
    return 0


def _cmd_align(args) -> int:
    manifest = load_manifest(args.manifest)
    subjects = manifest.load_all()
    names = [e.name for e in manifest.subjects]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    if args.strategy == "raw":
        aligned = subjects
    elif args.strategy == "ea":
        aligned = [ea_align(ea_reference(trials), trials) for trials in subjects]
    else:
        if args.target_subject is None or not args.source_labels or not args.target_labels:
            raise ConfigError(
                "la alignment needs --target-subject, --source-labels and --target-labels"
            )
        if args.target_subject not in names:
            raise ConfigError(f"unknown target subject {args.target_subject!r}")
        source_set = [int(l) for l in args.source_labels.split(",")]
        target_set = [int(l) for l in args.target_labels.split(",")]
        mapping = match_labels(source_set, target_set, derive_key(args.seed, "mapping"))
        tgt_index = names.index(args.target_subject)
        target_pool = [t for t in subjects[tgt_index] if t.label in set(target_set)]
        means, _ = select_and_estimate_target_means(
            target_pool,
            args.k,
            oracle=lambda i: target_pool[i].label,
            n_classes=len(target_set),
        )
        if means is None:
            raise DataError(
                f"the {args.k} medoids cover fewer than {len(target_set)} classes; "
                "label more trials or use --strategy ea"
            )
        aligned = []
        for i, trials in enumerate(subjects):
            if i == tgt_index:
                aligned.append(trials)
                continue
            source = [t for t in trials if t.label in set(source_set)]
            result = align("la", [source], target_pool, mapping=mapping, target_means=means)
            aligned.append(result.source_subjects[0])

    entries = []
    for name, trials in zip(names, aligned):
        write_trials(out / f"{name}.trials", trials)
        write_labels(out / f"{name}.labels", [t.label for t in trials])
        entries.append((name, f"{name}.trials", f"{name}.labels"))
    label_set = sorted({t.label for trials in aligned for t in trials})
    write_manifest(out / "manifest.json", manifest.sample_rate, label_set, entries)
    print(f"wrote aligned dataset to {out}")
    return 0


def _cmd_kmedoids(args) -> int:
    trials = read_trials(args.trials)
    covs = [trial_covariance(t, args.shrinkage) for t in trials]
    medoids = k_medoids(pairwise_distances(covs), args.k)
    for idx in medoids:
        print(idx)
    return 0


def _cmd_classify(args) -> int:
    train = with_labels(read_trials(args.train_trials), read_labels(args.train_labels))
    test_trials = read_trials(args.test_trials)
    preds = fit_predict(
        args.pipeline,
        train,
        test_trials,
        csp_pairs=args.csp_pairs,
        shrinkage=args.shrinkage,
        svm_seed=derive_key(args.seed, "svm"),
    )
    if args.test_labels is not None:
        truth = read_labels(args.test_labels)
        if len(truth) != len(preds):
            raise DataError(f"{len(preds)} test trials but {len(truth)} labels")
        correct = sum(p == t for p, t in zip(preds, truth))
        print(f"accuracy {correct / len(truth)!r} ({correct}/{len(truth)})")
    else:
        for p in preds:
            print(p)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="labelalign",
        description="SPD-manifold alignment pipelines and experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--config", required=True, help="JSON generator config")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("experiment", help="run a scenario and write the report")
    p.add_argument("--spec", required=True, help="JSON scenario spec")
    p.add_argument("--out", required=True, help="report path (.csv or .json)")
    p.add_argument("--seed", type=int, default=None, help="override the spec seed")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("align", help="align a dataset and write the result")
    p.add_argument("--strategy", required=True, choices=("raw", "ea", "la"))
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--target-subject", default=None)
    p.add_argument("--source-labels", default=None, help="comma-separated ints")
    p.add_argument("--target-labels", default=None, help="comma-separated ints")
    p.add_argument("-k", type=int, default=2, help="target trials to label (la)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_align)

    p = sub.add_parser("kmedoids", help="print the medoid indices of a trial file")
    p.add_argument("--trials", required=True)
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--shrinkage", type=float, default=0.0)
    p.set_defaults(func=_cmd_kmedoids)

    p = sub.add_parser("classify", help="train a pipeline and score or predict")
    p.add_argument("--pipeline", required=True, choices=("csp-lda", "ts-svm", "ts-lda", "mdm"))
    p.add_argument("--train-trials", required=True)
    p.add_argument("--train-labels", required=True)
    p.add_argument("--test-trials", required=True)
    p.add_argument("--test-labels", default=None)
    p.add_argument("--csp-pairs", type=int, default=3)
    p.add_argument("--shrinkage", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_classify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
