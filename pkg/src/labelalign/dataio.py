"""On-disk formats: binary trial files, label files, and dataset manifests.

Trial file layout (all integers little-endian):

======  ====  =======================================================
offset  size  contents
======  ====  =======================================================
0       4     magic ``b"EEGT"``
4       1     format version, currently 1
5       4     u32 channel count
9       4     u32 samples per trial
13      4     u32 trial count
17      ...   float64 payload, trial-major then channel then sample
======  ====  =======================================================

Label files are newline-separated integers, one per trial. A manifest is
a JSON document (``{"version": 1, "sample_rate": ..., "label_set": [...],
"subjects": [{"name": ..., "trials": ..., "labels": ...}, ...]}``) whose
paths are resolved relative to the manifest file.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    BadMagicError,
    DataError,
    DimMismatchError,
    NonFinitePayloadError,
    TruncatedPayloadError,
)
from .signal import Trial

MAGIC = b"EEGT"
VERSION = 1
HEADER_SIZE = 17
MANIFEST_VERSION = 1


def write_trials(path, trials: Sequence[Trial]) -> None:
    """Write homogeneous trials; the file round-trips bit-exactly."""
    if not trials:
        raise DataError("cannot write an empty trial list")
    shape = trials[0].data.shape
    for i, t in enumerate(trials):
        if t.data.shape != shape:
            raise DimMismatchError(
                f"trial {i} has shape {t.data.shape}, expected {shape}"
            )
    stack = np.stack([t.data for t in trials]).astype("<f8")
    if not np.isfinite(stack).all():
        flat = stack.reshape(-1)
        bad = int(np.flatnonzero(~np.isfinite(flat))[0])
        raise NonFinitePayloadError(
            f"non-finite value at byte offset {HEADER_SIZE + 8 * bad}",
            HEADER_SIZE + 8 * bad,
        )
    header = MAGIC + bytes([VERSION]) + struct.pack(
        "<III", shape[0], shape[1], len(trials)
    )
    Path(path).write_bytes(header + stack.tobytes())


def read_trials(path) -> list[Trial]:
    """Read a trial file; labels come back as None (label files are separate)."""
    blob = Path(path).read_bytes()
    if len(blob) < HEADER_SIZE:
        raise TruncatedPayloadError(
            f"file ends at byte {len(blob)}, header needs {HEADER_SIZE}",
            len(blob),
            HEADER_SIZE,
        )
    if blob[:4] != MAGIC:
        raise BadMagicError(f"bad magic {blob[:4]!r} at byte offset 0", 0)
    if blob[4] != VERSION:
        raise BadMagicError(
            f"unsupported version {blob[4]} at byte offset 4", 4
        )
    channels, samples, count = struct.unpack("<III", blob[5:HEADER_SIZE])
    expected = HEADER_SIZE + 8 * count * channels * samples
    if len(blob) < expected:
        raise TruncatedPayloadError(
            f"payload ends at byte {len(blob)}, expected {expected}",
            len(blob),
            expected,
        )
    flat = np.frombuffer(blob, dtype="<f8", count=count * channels * samples, offset=HEADER_SIZE)
    if not np.isfinite(flat).all():
        bad = int(np.flatnonzero(~np.isfinite(flat))[0])
        raise NonFinitePayloadError(
            f"non-finite value at byte offset {HEADER_SIZE + 8 * bad}",
            HEADER_SIZE + 8 * bad,
        )
    data = flat.reshape(count, channels, samples)
    return [Trial(data[i].copy()) for i in range(count)]


def write_labels(path, labels: Sequence[int]) -> None:
    Path(path).write_text("".join(f"{int(l)}\n" for l in labels))


def read_labels(path) -> list[int]:
    out = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            out.append(int(line))
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: not an integer label: {line!r}") from exc
    return out


def with_labels(trials: Sequence[Trial], labels: Sequence[int]) -> list[Trial]:
    if len(trials) != len(labels):
        raise DimMismatchError(f"{len(trials)} trials but {len(labels)} labels")
    return [Trial(t.data, label=int(l)) for t, l in zip(trials, labels)]


@dataclass(frozen=True)
class SubjectEntry:
    name: str
    trials_path: Path
    labels_path: Path


@dataclass(frozen=True)
class DatasetManifest:
    sample_rate: float
    label_set: tuple[int, ...]
    subjects: tuple[SubjectEntry, ...]

    def load_subject(self, entry: SubjectEntry) -> list[Trial]:
        trials = read_trials(entry.trials_path)
        labels = read_labels(entry.labels_path)
        if len(labels) != len(trials):
            raise DataError(
                f"{entry.name}: {len(trials)} trials but {len(labels)} labels"
            )
        bad = sorted(set(labels) - set(self.label_set))
        if bad:
            raise DataError(f"{entry.name}: labels {bad} not in declared set")
        return with_labels(trials, labels)

    def load_all(self) -> list[list[Trial]]:
        return [self.load_subject(e) for e in self.subjects]


def load_manifest(path) -> DatasetManifest:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("version") != MANIFEST_VERSION:
        raise DataError(f"{path}: expected a manifest with version {MANIFEST_VERSION}")
    try:
        sample_rate = float(doc["sample_rate"])
        label_set = tuple(int(l) for l in doc["label_set"])
        subjects = tuple(
            SubjectEntry(
                name=str(s["name"]),
                trials_path=path.parent / s["trials"],
                labels_path=path.parent / s["labels"],
            )
            for s in doc["subjects"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: malformed manifest: {exc}") from exc
    for entry in subjects:
        if "," in entry.name or "\n" in entry.name:
            raise DataError(
                f"{path}: subject name {entry.name!r} may not contain commas or newlines"
            )
        for p in (entry.trials_path, entry.labels_path):
            if not p.exists():
                raise DataError(f"{path}: referenced file does not exist: {p}")
    return DatasetManifest(sample_rate, label_set, subjects)


def write_manifest(path, sample_rate: float, label_set: Sequence[int],
                   subjects: Sequence[tuple[str, str, str]]) -> None:
    """Write a manifest; ``subjects`` holds (name, trials_relpath, labels_relpath)."""
    doc = {
        "version": MANIFEST_VERSION,
        "sample_rate": sample_rate,
        "label_set": [int(l) for l in label_set],
        "subjects": [
            {"name": name, "trials": trials, "labels": labels}
            for name, trials, labels in subjects
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
