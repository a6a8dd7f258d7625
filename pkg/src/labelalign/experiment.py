"""Scenario runner: leave-one-subject-out transfer experiments with a
label budget, plus the report metrics (accuracy, AUC over k, paired t-tests).

Protocol per target subject and per budget ``k``: the k medoid trials of
the target pool are labeled and join the training set, every remaining
target trial forms the test set, and the same train/test split is reused
for every alignment strategy so that accuracy differences isolate the
alignment step. Labeled target trials never appear in the test set.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import classifiers
from .alignment import align, estimate_means_from_medoids, match_labels
from .selection import k_medoids, pairwise_distances
from .dataio import load_manifest
from .errors import ConfigError, TooFewPointsError, ZeroVarianceError
from .features import csp_features, csp_fit, trial_covariance, ts_features
from .rng import derive_key
from .signal import Trial
from .spd import log_euclidean_mean
from .stats import student_t_two_sided_p
from .synth import SynthConfig, generate_synthetic

STRATEGIES = ("raw", "ea", "la")
PIPELINES = ("csp-lda", "ts-svm", "ts-lda", "mdm")


@dataclass(frozen=True)
class ScenarioSpec:
    source_labels: tuple[int, ...]
    target_labels: tuple[int, ...]
    strategies: tuple[str, ...]
    pipelines: tuple[str, ...]
    k_grid: tuple[int, ...]
    seed: int = 0
    synth: SynthConfig | None = None
    manifest: str | None = None
    csp_pairs: int = 3
    shrinkage: float = 0.0
    svm_lambda: float = classifiers.SVM_LAMBDA
    svm_epochs: int = classifiers.SVM_EPOCHS

    def __post_init__(self):
        if len(set(self.source_labels)) != len(self.source_labels):
            raise ConfigError(f"duplicate source labels: {self.source_labels}")
        if len(set(self.target_labels)) != len(self.target_labels):
            raise ConfigError(f"duplicate target labels: {self.target_labels}")
        if len(self.source_labels) != len(self.target_labels):
            raise ConfigError(
                f"label sets must have equal size, got {len(self.source_labels)} "
                f"and {len(self.target_labels)}"
            )
        for s in self.strategies:
            if s not in STRATEGIES:
                raise ConfigError(f"unknown strategy {s!r}, expected one of {STRATEGIES}")
        for p in self.pipelines:
            if p not in PIPELINES:
                raise ConfigError(f"unknown pipeline {p!r}, expected one of {PIPELINES}")
        if not self.strategies or not self.pipelines:
            raise ConfigError("need at least one strategy and one pipeline")
        if not self.k_grid or any(k < 1 for k in self.k_grid) or any(
            a >= b for a, b in zip(self.k_grid, self.k_grid[1:])
        ):
            raise ConfigError(f"k grid must be ascending and positive: {self.k_grid}")
        if (self.synth is None) == (self.manifest is None):
            raise ConfigError("exactly one of synth/manifest must be given")

    @property
    def algorithms(self) -> list[tuple[str, str]]:
        return [(s, p) for s in self.strategies for p in self.pipelines]

    def canonical_dict(self) -> dict:
        doc = {
            "source_labels": list(self.source_labels),
            "target_labels": list(self.target_labels),
            "strategies": list(self.strategies),
            "pipelines": list(self.pipelines),
            "k_grid": list(self.k_grid),
            "seed": self.seed,
            "csp_pairs": self.csp_pairs,
            "shrinkage": self.shrinkage,
            "svm_lambda": self.svm_lambda,
            "svm_epochs": self.svm_epochs,
            "manifest": self.manifest,
            "synth": None
            if self.synth is None
            else {k: getattr(self.synth, k) for k in (
                "channels", "samples", "classes", "trials_per_class", "subjects",
                "class_separation", "subject_shift", "seed", "noise_df",
            )},
        }
        return doc

    def config_hash(self) -> str:
        blob = json.dumps(self.canonical_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def scenario_from_dict(doc: dict, seed_override: int | None = None) -> ScenarioSpec:
    """Build a spec from a parsed JSON document (the CLI's --spec file)."""
    if not isinstance(doc, dict):
        raise ConfigError("scenario spec must be a JSON object")
    known = {
        "source_labels", "target_labels", "strategies", "pipelines", "k_grid",
        "seed", "synth", "manifest", "csp_pairs", "shrinkage", "svm_lambda",
        "svm_epochs",
    }
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown scenario fields: {sorted(unknown)}")
    seed = int(seed_override if seed_override is not None else doc.get("seed", 0))
    synth = None
    if doc.get("synth") is not None:
        block = dict(doc["synth"])
        # The generator seed flows from the experiment seed unless pinned.
        block.setdefault("seed", derive_key(seed, "synth"))
        try:
            synth = SynthConfig(**block)
        except TypeError as exc:
            raise ConfigError(f"bad synth block: {exc}") from exc
    try:
        return ScenarioSpec(
            source_labels=tuple(int(l) for l in doc["source_labels"]),
            target_labels=tuple(int(l) for l in doc["target_labels"]),
            strategies=tuple(doc.get("strategies", ["raw", "ea", "la"])),
            pipelines=tuple(doc.get("pipelines", ["ts-lda"])),
            k_grid=tuple(int(k) for k in doc["k_grid"]),
            seed=seed,
            synth=synth,
            manifest=doc.get("manifest"),
            csp_pairs=int(doc.get("csp_pairs", 3)),
            shrinkage=float(doc.get("shrinkage", 0.0)),
            svm_lambda=float(doc.get("svm_lambda", classifiers.SVM_LAMBDA)),
            svm_epochs=int(doc.get("svm_epochs", classifiers.SVM_EPOCHS)),
        )
    except KeyError as exc:
        raise ConfigError(f"scenario spec is missing field {exc}") from exc


def load_scenario(path, seed_override: int | None = None) -> ScenarioSpec:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return scenario_from_dict(doc, seed_override)


@dataclass(eq=True)
class ExperimentReport:
    """Keyed result tables; assembled order-independently and sorted at emit."""

    accuracies: dict = field(default_factory=dict)  # (subject, k, strategy, pipeline) -> float
    aucs: dict = field(default_factory=dict)  # (subject, strategy, pipeline) -> float
    ttests: dict = field(default_factory=dict)  # (sa, pa, sb, pb) -> (t, p)
    metadata: dict = field(default_factory=dict)


def auc_over_k(curve: Sequence[tuple[float, float]]) -> float:
    """Trapezoidal area under an accuracy-versus-k curve."""
    if len(curve) < 2:
        raise TooFewPointsError(f"need >= 2 points, got {len(curve)}")
    ks = [k for k, _ in curve]
    if any(a >= b for a, b in zip(ks, ks[1:])):
        raise ConfigError(f"k values must be strictly increasing: {ks}")
    area = 0.0
    for (k0, a0), (k1, a1) in zip(curve, curve[1:]):
        area += (k1 - k0) * (a0 + a1) / 2.0
    return area


def paired_t_test(a: Sequence[float], b: Sequence[float]) -> tuple[float, float]:
    """Two-sided paired t-test; returns (t, p) with n-1 degrees of freedom."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.shape[0] < 2:
        raise ConfigError(f"need two equal-length samples of size >= 2, got {a.shape} and {b.shape}")
    d = a - b
    sd = float(np.std(d, ddof=1))
    if sd == 0.0:
        raise ZeroVarianceError("all paired differences are equal; t is undefined")
    n = d.shape[0]
    t = float(np.mean(d)) / (sd / math.sqrt(n))
    return t, student_t_two_sided_p(t, n - 1)


def fit_predict(
    pipeline: str,
    train: Sequence[Trial],
    test: Sequence[Trial],
    *,
    csp_pairs: int = 3,
    shrinkage: float = 0.0,
    svm_lambda: float = classifiers.SVM_LAMBDA,
    svm_epochs: int = classifiers.SVM_EPOCHS,
    svm_seed: int = 0,
) -> list:
    """Train one feature/classifier pipeline and predict the test labels."""
    labels = [t.label for t in train]
    if pipeline == "csp-lda":
        covs_by_class: dict = {}
        for t in train:
            covs_by_class.setdefault(t.label, []).append(trial_covariance(t, shrinkage))
        model = csp_fit(covs_by_class, csp_pairs)
        feats = np.vstack([csp_features(model, t).values for t in train])
        clf = classifiers.lda_fit(feats, labels)
        test_feats = np.vstack([csp_features(model, t).values for t in test])
        return classifiers.lda_predict_many(clf, test_feats)

    train_covs = [trial_covariance(t, shrinkage) for t in train]
    test_covs = [trial_covariance(t, shrinkage) for t in test]
    if pipeline == "mdm":
        model = classifiers.mdm_fit(train_covs, labels)
        return [classifiers.mdm_predict(model, c) for c in test_covs]
    if pipeline in ("ts-svm", "ts-lda"):
        ref = log_euclidean_mean(train_covs)
        feats = np.vstack([v.values for v in ts_features(ref, train_covs)])
        test_feats = np.vstack([v.values for v in ts_features(ref, test_covs)])
        if pipeline == "ts-lda":
            clf = classifiers.lda_fit(feats, labels)
            return classifiers.lda_predict_many(clf, test_feats)
        svm = classifiers.svm_fit(feats, labels, svm_lambda, svm_epochs, svm_seed)
        return classifiers.svm_predict_many(svm, test_feats)
    raise ConfigError(f"unknown pipeline {pipeline!r}")


def _load_subjects(spec: ScenarioSpec) -> tuple[list[str], list[list[Trial]]]:
    if spec.synth is not None:
        data = generate_synthetic(spec.synth)
        names = [f"s{i}" for i in range(len(data.subjects))]
        return names, [list(trials) for trials in data.subjects]
    manifest = load_manifest(spec.manifest)
    names = [e.name for e in manifest.subjects]
    return names, manifest.load_all()


def _filter_labels(trials: Sequence[Trial], labels: Sequence[int]) -> list[Trial]:
    keep = set(labels)
    return [t for t in trials if t.label in keep]


def _subject_unit(args) -> tuple[str, list, list]:
    """Evaluate one target subject over the whole k grid.

    Pure function of its arguments so results are identical no matter how
    the units are scheduled across processes. Returns (subject_name,
    accuracy rows, fallback events).
    """
    spec, name, target_pool, source_subjects = args
    n_classes = len(spec.target_labels)
    mapping = match_labels(
        spec.source_labels, spec.target_labels, derive_key(spec.seed, "mapping")
    )
    target_covs = [trial_covariance(t, spec.shrinkage) for t in target_pool]
    distances = pairwise_distances(target_covs)
    rows = []
    fallbacks = []
    for k in spec.k_grid:
        medoids = k_medoids(distances, k)
        means = estimate_means_from_medoids(
            target_covs, medoids, lambda i: target_pool[i].label, n_classes
        )
        selected = set(medoids)
        test_idx = [i for i in range(len(target_pool)) if i not in selected]
        for strategy in spec.strategies:
            effective = strategy
            if strategy == "la" and means is None:
                effective = "ea"
                fallbacks.append([name, k])
            result = align(
                effective,
                source_subjects,
                target_pool,
                mapping=mapping,
                target_means=means if effective == "la" else None,
                shrinkage=spec.shrinkage,
            )
            train = [t for subj in result.source_subjects for t in subj]
            train += [result.target_trials[i] for i in medoids]
            test = [result.target_trials[i] for i in test_idx]
            truth = [target_pool[i].label for i in test_idx]
            for pipeline in spec.pipelines:
                preds = fit_predict(
                    pipeline,
                    train,
                    test,
                    csp_pairs=spec.csp_pairs,
                    shrinkage=spec.shrinkage,
                    svm_lambda=spec.svm_lambda,
                    svm_epochs=spec.svm_epochs,
                    svm_seed=derive_key(spec.seed, "svm", name, k, strategy, pipeline),
                )
                accuracy = float(np.mean([p == t for p, t in zip(preds, truth)]))
                rows.append((name, k, strategy, pipeline, accuracy))
    return name, rows, fallbacks


def run_scenario(spec: ScenarioSpec, jobs: int = 1) -> ExperimentReport:
    """Leave-one-subject-out evaluation of every (strategy, pipeline, k).

    ``jobs`` > 1 evaluates target subjects in parallel processes; the
    report is identical regardless of the schedule.
    """
    names, subjects = _load_subjects(spec)
    source_views = [_filter_labels(trials, spec.source_labels) for trials in subjects]
    target_views = [_filter_labels(trials, spec.target_labels) for trials in subjects]
    if len(subjects) < 2:
        raise ConfigError("need at least two subjects for leave-one-subject-out")
    max_k = max(spec.k_grid)
    for name, pool in zip(names, target_views):
        if len(pool) <= max_k:
            raise ConfigError(
                f"target subject {name} has {len(pool)} trials in the target label "
                f"set; the k grid needs more than {max_k}"
            )
    for name, view in zip(names, source_views):
        missing = set(spec.source_labels) - {t.label for t in view}
        if missing:
            raise ConfigError(f"subject {name} has no trials for source labels {sorted(missing)}")

    units = []
    for i, name in enumerate(names):
        sources = [source_views[j] for j in range(len(names)) if j != i]
        units.append((spec, name, target_views[i], sources))

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_subject_unit, units))
    else:
        results = [_subject_unit(u) for u in units]

    report = ExperimentReport()
    fallbacks = []
    for _, rows, unit_fallbacks in results:
        fallbacks.extend(unit_fallbacks)
        for name, k, strategy, pipeline, accuracy in rows:
            report.accuracies[(name, k, strategy, pipeline)] = accuracy

    if len(spec.k_grid) >= 2:
        for name in names:
            for strategy, pipeline in spec.algorithms:
                curve = [
                    (k, report.accuracies[(name, k, strategy, pipeline)])
                    for k in spec.k_grid
                ]
                report.aucs[(name, strategy, pipeline)] = auc_over_k(curve)
        for alg_a, alg_b in itertools.combinations(spec.algorithms, 2):
            a = [report.aucs[(n, *alg_a)] for n in names]
            b = [report.aucs[(n, *alg_b)] for n in names]
            try:
                t, p = paired_t_test(a, b)
            except (ZeroVarianceError, ConfigError):
                t, p = float("nan"), float("nan")
            report.ttests[(*alg_a, *alg_b)] = (t, p)

    mapping = match_labels(
        spec.source_labels, spec.target_labels, derive_key(spec.seed, "mapping")
    )
    report.metadata = {
        "seed": spec.seed,
        "config_hash": spec.config_hash(),
        "mapping": [list(p) for p in mapping.pairs],
        "ea_fallbacks": sorted(fallbacks),
        "data_source": "synth" if spec.synth is not None else "manifest",
    }
    return report


_ACC_HEADER = "subject,k,strategy,pipeline,accuracy"
_AUC_HEADER = "subject,strategy,pipeline,auc"
_TTEST_HEADER = "strategy_a,pipeline_a,strategy_b,pipeline_b,t,p"
_META_HEADER = "key,value"


def _fmt(x: float) -> str:
    return repr(float(x))


def emit_report(report: ExperimentReport, path, format: str = "csv") -> None:
    """Write the report; identical reports produce identical bytes."""
    if format == "csv":
        text = render_report_csv(report)
    elif format in ("json", "structured-text"):
        text = render_report_json(report)
    else:
        raise ConfigError(f"unknown report format {format!r}")
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise ConfigError(f"cannot write report to {path}: {exc}") from exc


def render_report_csv(report: ExperimentReport) -> str:
    lines = [_ACC_HEADER]
    for key in sorted(report.accuracies):
        subject, k, strategy, pipeline = key
        lines.append(f"{subject},{k},{strategy},{pipeline},{_fmt(report.accuracies[key])}")
    lines.append("")
    lines.append(_AUC_HEADER)
    for key in sorted(report.aucs):
        subject, strategy, pipeline = key
        lines.append(f"{subject},{strategy},{pipeline},{_fmt(report.aucs[key])}")
    lines.append("")
    lines.append(_TTEST_HEADER)
    for key in sorted(report.ttests):
        t, p = report.ttests[key]
        lines.append(",".join(key) + f",{_fmt(t)},{_fmt(p)}")
    lines.append("")
    lines.append(_META_HEADER)
    for key in sorted(report.metadata):
        value = json.dumps(report.metadata[key], sort_keys=True)
        lines.append(f"{key},{_quote_csv(value)}")
    return "\n".join(lines) + "\n"


def _quote_csv(value: str) -> str:
    if any(ch in value for ch in ',"\n'):
        return '"' + value.replace('"', '""') + '"'
    return value


def _unquote_csv(cell: str) -> str:
    if cell.startswith('"') and cell.endswith('"'):
        return cell[1:-1].replace('""', '"')
    return cell


def render_report_json(report: ExperimentReport) -> str:
    doc = {
        "accuracy": [
            [*key, report.accuracies[key]] for key in sorted(report.accuracies)
        ],
        "auc": [[*key, report.aucs[key]] for key in sorted(report.aucs)],
        "ttest": [[*key, *report.ttests[key]] for key in sorted(report.ttests)],
        "metadata": report.metadata,
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def read_report(path) -> ExperimentReport:
    """Parse a report written by :func:`emit_report` (either format)."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        report = ExperimentReport(metadata=doc["metadata"])
        for subject, k, strategy, pipeline, acc in doc["accuracy"]:
            report.accuracies[(subject, int(k), strategy, pipeline)] = float(acc)
        for subject, strategy, pipeline, auc in doc["auc"]:
            report.aucs[(subject, strategy, pipeline)] = float(auc)
        for sa, pa, sb, pb, t, p in doc["ttest"]:
            report.ttests[(sa, pa, sb, pb)] = (float(t), float(p))
        return report

    sections = text.split("\n\n")
    if len(sections) != 4:
        raise ConfigError(f"expected 4 report sections, found {len(sections)}")
    report = ExperimentReport()
    acc_lines, auc_lines, tt_lines, meta_lines = [s.strip("\n").split("\n") for s in sections]
    for header, lines in (
        (_ACC_HEADER, acc_lines),
        (_AUC_HEADER, auc_lines),
        (_TTEST_HEADER, tt_lines),
        (_META_HEADER, meta_lines),
    ):
        if lines[0] != header:
            raise ConfigError(f"bad section header {lines[0]!r}, expected {header!r}")
    for line in acc_lines[1:]:
        subject, k, strategy, pipeline, acc = line.split(",")
        report.accuracies[(subject, int(k), strategy, pipeline)] = float(acc)
    for line in auc_lines[1:]:
        subject, strategy, pipeline, auc = line.split(",")
        report.aucs[(subject, strategy, pipeline)] = float(auc)
    for line in tt_lines[1:]:
        sa, pa, sb, pb, t, p = line.split(",")
        report.ttests[(sa, pa, sb, pb)] = (float(t), float(p))
    for line in meta_lines[1:]:
        key, value = line.split(",", 1)
        report.metadata[key] = json.loads(_unquote_csv(value))
    return report
