"""Dataset ingestion, label remapping and synthetic shifted-Gaussian data.

Feature files are CSV (header row, one sample per line, label column
last) or packed little-endian float64 binaries with a JSON sidecar
header.  A manifest lists per-clip entries for the LBP-TOP path.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .classifier import LabeledDataset
from .errors import (DimensionError, EmptyDatasetError, IngestionError,
                     LabelMapError, SpecError)
from .kernels import FeatureMatrix
from .lbptop import LbpTopParams, VideoClip, extract


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    label: str
    subject: str = ""


@dataclass(frozen=True)
class DatasetManifest:
    name: str
    entries: tuple[ManifestEntry, ...]
    expected_counts: dict | None = None   # class name -> expected sample count

    def class_counts(self, label_map: dict[str, str | None] | None = None) -> dict[str, int]:
        labels = [e.label for e in self.entries]
        if label_map is not None:
            labels, _ = apply_label_map(labels, label_map)
        counts: dict[str, int] = {}
        for lab in labels:
            counts[lab] = counts.get(lab, 0) + 1
        return counts

    def validate_counts(self, label_map: dict[str, str | None] | None = None) -> None:
        if self.expected_counts is None:
            return
        actual = self.class_counts(label_map)
        for name, expected in self.expected_counts.items():
            got = actual.get(name, 0)
            if got != expected:
                raise IngestionError(
                    f"manifest {self.name!r}: class {name!r} has {got} samples, "
                    f"expected {expected}"
                )


def load_manifest(path: str | Path) -> DatasetManifest:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as err:
        raise IngestionError(f"cannot read manifest {path}: {err}") from err
    entries = tuple(
        ManifestEntry(path=e["path"], label=e["label"], subject=str(e.get("subject", "")))
        for e in raw.get("entries", [])
    )
    return DatasetManifest(
        name=raw.get("name", path.stem),
        entries=entries,
        expected_counts=raw.get("expected_counts"),
    )


def apply_label_map(labels: list[str], mapping: dict[str, str | None],
                    drop_unmapped: bool = False) -> tuple[list[str], list[int]]:
    """Remap label strings; a None target (or an unmapped label when
    drop_unmapped is set) drops the sample.

    Returns the new labels and the indices of the kept samples.
    """
    out, kept = [], []
    for i, lab in enumerate(labels):
        if lab in mapping:
            target = mapping[lab]
            if target is None:
                continue
            out.append(target)
            kept.append(i)
        elif drop_unmapped:
            continue
        else:
            raise LabelMapError(f"label {lab!r} has no mapping and no drop policy")
    return out, kept


def _read_feature_csv(path: Path) -> tuple[np.ndarray, list[str]]:
    """CSV with header, one sample per row, label in the last column."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise EmptyDatasetError(f"{path}: no data rows")
    features, labels = [], []
    width = len(rows[0])
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise IngestionError(f"{path}:{lineno}: expected {width} columns, got {len(row)}")
        try:
            features.append([float(v) for v in row[:-1]])
        except ValueError as err:
            raise IngestionError(f"{path}:{lineno}: {err}") from err
        labels.append(row[-1])
    return np.asarray(features, dtype=np.float64).T, labels


def _read_packed(path: Path) -> np.ndarray:
    """Little-endian float64 vector with a JSON sidecar giving its length."""
    sidecar = path.with_suffix(path.suffix + ".json")
    try:
        header = json.loads(sidecar.read_text())
        dim = int(header["dim"])
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as err:
        raise IngestionError(f"cannot read sidecar for {path}: {err}") from err
    vec = np.fromfile(path, dtype="<f8")
    if vec.size != dim:
        raise IngestionError(f"{path}: expected {dim} values, found {vec.size}")
    return vec


def _read_clip(path: Path) -> VideoClip:
    """Clip directory of numbered images, or a packed raw volume with header."""
    if path.is_dir():
        try:
            from PIL import Image
        except ImportError as err:  # pragma: no cover
            raise IngestionError("Pillow required to read image directories") from err
        frames = []
        files = sorted(p for p in path.iterdir() if p.is_file())
        if not files:
            raise IngestionError(f"{path}: empty clip directory")
        for f in files:
            frames.append(np.asarray(Image.open(f).convert("L"), dtype=np.float64))
        return VideoClip(np.stack(frames))
    # packed raw file: json header line, then <f8 voxels in t,y,x order
    try:
        with open(path, "rb") as fh:
            header = json.loads(fh.readline().decode())
            t, h, w = int(header["t"]), int(header["h"]), int(header["w"])
            vol = np.fromfile(fh, dtype="<f8", count=t * h * w)
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as err:
        raise IngestionError(f"cannot read clip {path}: {err}") from err
    if vol.size != t * h * w:
        raise IngestionError(f"{path}: truncated clip volume")
    return VideoClip(vol.reshape(t, h, w))


def write_clip(path: str | Path, volume: np.ndarray) -> None:
    """Write a packed raw clip readable by the ingestion path."""
    volume = np.asarray(volume, dtype="<f8")
    t, h, w = volume.shape
    with open(path, "wb") as fh:
        fh.write((json.dumps({"t": t, "h": h, "w": w}) + "\n").encode())
        volume.tofile(fh)


def dataset_from_arrays(features: np.ndarray, labels: list[str],
                        class_names: tuple[str, ...] | None = None) -> LabeledDataset:
    """Build a LabeledDataset, deriving class ids from sorted label names."""
    if class_names is None:
        class_names = tuple(sorted(set(labels)))
    index = {name: i for i, name in enumerate(class_names)}
    try:
        ids = np.array([index[lab] for lab in labels], dtype=np.int64)
    except KeyError as err:
        raise IngestionError(f"unknown label {err.args[0]!r}") from err
    return LabeledDataset(FeatureMatrix(features), ids, class_names)


def ingest_csv(path: str | Path, label_map: dict[str, str | None] | None = None,
               class_names: tuple[str, ...] | None = None) -> LabeledDataset:
    """Load a whole dataset from one feature CSV."""
    features, labels = _read_feature_csv(Path(path))
    if label_map is not None:
        labels, kept = apply_label_map(labels, label_map)
        features = features[:, kept]
    if not labels:
        raise EmptyDatasetError(f"{path}: no samples after label mapping")
    return dataset_from_arrays(features, labels, class_names)


def ingest_manifest(manifest: DatasetManifest, feature_mode: str = "precomputed",
                    lbp_params: LbpTopParams | None = None,
                    label_map: dict[str, str | None] | None = None,
                    class_names: tuple[str, ...] | None = None) -> LabeledDataset:
    """Load per-entry feature files or extract LBP-TOP features from clips.

    Entry order in the manifest is preserved.
    """
    if not manifest.entries:
        raise EmptyDatasetError(f"manifest {manifest.name!r} has no entries")
    labels = [e.label for e in manifest.entries]
    kept = list(range(len(labels)))
    if label_map is not None:
        labels, kept = apply_label_map(labels, label_map)
        if not labels:
            raise EmptyDatasetError(f"manifest {manifest.name!r}: no samples after mapping")
    vectors = []
    for i in kept:
        entry = manifest.entries[i]
        path = Path(entry.path)
        if not path.exists():
            raise IngestionError(f"manifest {manifest.name!r}: missing file {path}")
        if feature_mode == "precomputed":
            if path.suffix == ".csv":
                feats, row_labels = _read_feature_csv(path)
                if feats.shape[1] != 1:
                    raise IngestionError(f"{path}: expected a single feature row")
                vectors.append(feats[:, 0])
            else:
                vectors.append(_read_packed(path))
        elif feature_mode == "lbptop":
            params = lbp_params if lbp_params is not None else LbpTopParams()
            vectors.append(extract(_read_clip(path), params))
        else:
            raise ValueError(f"unknown feature mode {feature_mode!r}")
    dims = {v.shape[0] for v in vectors}
    if len(dims) > 1:
        raise DimensionError(f"manifest {manifest.name!r}: mixed feature dimensions {sorted(dims)}")
    return dataset_from_arrays(np.stack(vectors, axis=1), labels, class_names)


def write_dataset_csv(path: str | Path, dataset: LabeledDataset) -> None:
    """Emit a dataset in the feature-CSV format (label column last)."""
    d = dataset.features.d
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"f{i}" for i in range(d)] + ["label"])
        for j in range(dataset.features.n):
            row = [repr(float(v)) for v in dataset.features.data[:, j]]
            writer.writerow(row + [dataset.class_names[dataset.labels[j]]])


@dataclass(frozen=True)
class SynthSpec:
    """Shifted-Gaussian class mixture for desk-scale benchmarking."""

    classes: int = 3
    dim: int = 20
    n_source_per_class: int = 20
    n_target_per_class: int = 20
    centers: np.ndarray | None = None       # classes x dim; default: scaled simplex axes
    cov_scale: float = 1.0
    shift_matrix: np.ndarray | None = None  # default identity
    shift_offset: np.ndarray | None = None  # default zero
    center_spread: float = 5.0
    seed: int = 0

    def __post_init__(self):
        if self.classes < 2 or self.dim < 1:
            raise SpecError("need classes >= 2 and dim >= 1")
        if self.n_source_per_class < 2 or self.n_target_per_class < 2:
            raise SpecError("need at least 2 samples per class per domain")
        if self.cov_scale <= 0:
            raise SpecError("cov_scale must be > 0")
        if self.centers is not None:
            centers = np.asarray(self.centers, dtype=np.float64)
            if centers.shape != (self.classes, self.dim):
                raise SpecError(f"centers must be {self.classes} x {self.dim}")
            object.__setattr__(self, "centers", centers)
        if self.shift_matrix is not None:
            a = np.asarray(self.shift_matrix, dtype=np.float64)
            if a.shape != (self.dim, self.dim):
                raise SpecError(f"shift matrix must be {self.dim} x {self.dim}")
            if np.linalg.matrix_rank(a) < self.dim:
                raise SpecError("shift matrix is singular")
            object.__setattr__(self, "shift_matrix", a)
        if self.shift_offset is not None:
            b = np.asarray(self.shift_offset, dtype=np.float64)
            if b.shape != (self.dim,):
                raise SpecError(f"shift offset must have length {self.dim}")
            object.__setattr__(self, "shift_offset", b)

    def resolved_centers(self) -> np.ndarray:
        if self.centers is not None:
            return self.centers
        centers = np.zeros((self.classes, self.dim))
        for c in range(self.classes):
            centers[c, c % self.dim] = self.center_spread
        return centers


def synth_generate(spec: SynthSpec) -> tuple[LabeledDataset, LabeledDataset]:
    """Draw source/target datasets; target samples pass through x -> A x + b."""
    rng = np.random.default_rng(spec.seed)
    centers = spec.resolved_centers()
    a = spec.shift_matrix if spec.shift_matrix is not None else np.eye(spec.dim)
    b = spec.shift_offset if spec.shift_offset is not None else np.zeros(spec.dim)
    class_names = tuple(f"c{c}" for c in range(spec.classes))

    def draw(n_per_class: int) -> tuple[np.ndarray, list[str]]:
        cols, labels = [], []
        for c in range(spec.classes):
            pts = centers[c][:, None] + spec.cov_scale * rng.standard_normal((spec.dim, n_per_class))
            cols.append(pts)
            labels.extend([class_names[c]] * n_per_class)
        return np.concatenate(cols, axis=1), labels

    src_x, src_labels = draw(spec.n_source_per_class)
    tgt_x, tgt_labels = draw(spec.n_target_per_class)
    tgt_x = a @ tgt_x + b[:, None]
    return (
        dataset_from_arrays(src_x, src_labels, class_names),
        dataset_from_arrays(tgt_x, tgt_labels, class_names),
    )
