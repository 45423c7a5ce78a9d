import json

import numpy as np
import pytest

from tsrg.data import (DatasetManifest, ManifestEntry, SynthSpec,
                       apply_label_map, ingest_csv, ingest_manifest,
                       load_manifest, synth_generate, write_clip,
                       write_dataset_csv)
from tsrg.errors import (DimensionError, EmptyDatasetError, IngestionError,
                         LabelMapError, SpecError)
from tsrg.kernels import FeatureMatrix, KernelSpec, mmd

CASME_STYLE_MAP = {
    "Happiness": "Positive",
    "Disgust": "Negative",
    "Repression": "Negative",
    "Surprise": "Surprise",
    "Others": None,
}


class TestLabelMap:
    def test_casme_style_remap(self):
        labels = ["Happiness", "Disgust", "Repression", "Surprise", "Others"]
        mapped, kept = apply_label_map(labels, CASME_STYLE_MAP)
        assert mapped == ["Positive", "Negative", "Negative", "Surprise"]
        assert kept == [0, 1, 2, 3]

    def test_unmapped_without_drop_policy(self):
        with pytest.raises(LabelMapError):
            apply_label_map(["Mystery"], CASME_STYLE_MAP)

    def test_unmapped_with_drop_policy(self):
        mapped, kept = apply_label_map(["Mystery", "Happiness"], CASME_STYLE_MAP,
                                       drop_unmapped=True)
        assert mapped == ["Positive"]
        assert kept == [1]


class TestCsvIngestion:
    def test_round_trip(self, tmp_path):
        from tsrg.classifier import LabeledDataset
        rng = np.random.default_rng(0)
        data = LabeledDataset(FeatureMatrix(rng.standard_normal((4, 6))),
                              np.array([0, 1, 2, 0, 1, 2]), ("a", "b", "c"))
        path = tmp_path / "data.csv"
        write_dataset_csv(path, data)
        loaded = ingest_csv(path)
        np.testing.assert_array_equal(loaded.features.data, data.features.data)
        np.testing.assert_array_equal(loaded.labels, data.labels)
        assert loaded.class_names == data.class_names

    def test_small_csv(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("f0,f1,f2,f3,label\n1,2,3,4,x\n5,6,7,8,y\n0,0,0,0,x\n")
        data = ingest_csv(path)
        assert data.features.d == 4 and data.features.n == 3

    def test_empty_csv(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("f0,label\n")
        with pytest.raises(EmptyDatasetError):
            ingest_csv(path)

    def test_ragged_row(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("f0,f1,label\n1,2,x\n3,y\n")
        with pytest.raises(IngestionError, match="bad.csv:3"):
            ingest_csv(path)


def make_manifest(tmp_path, label_counts, expected=None, write_files=True):
    entries = []
    i = 0
    for label, count in label_counts.items():
        for _ in range(count):
            path = tmp_path / f"s{i:04d}.csv"
            if write_files:
                path.write_text(f"f0,f1,label\n{i}.0,1.0,{label}\n")
            entries.append(ManifestEntry(path=str(path), label=label, subject=f"subj{i % 5}"))
            i += 1
    return DatasetManifest(name="synthetic", entries=tuple(entries),
                           expected_counts=expected)


class TestManifest:
    def test_ingest_precomputed(self, tmp_path):
        manifest = make_manifest(tmp_path, {"a": 2, "b": 3})
        data = ingest_manifest(manifest)
        assert data.features.n == 5 and data.features.d == 2
        # entry order preserved
        np.testing.assert_array_equal(data.features.data[0], [0, 1, 2, 3, 4])

    def test_empty_manifest(self):
        manifest = DatasetManifest(name="empty", entries=())
        with pytest.raises(EmptyDatasetError):
            ingest_manifest(manifest)

    def test_missing_file_named(self, tmp_path):
        manifest = make_manifest(tmp_path, {"a": 2}, write_files=False)
        with pytest.raises(IngestionError, match="missing file"):
            ingest_manifest(manifest)

    def test_count_validation_passes_after_remap(self, tmp_path):
        counts = {"Happiness": 32, "Disgust": 60, "Repression": 31, "Surprise": 25}
        manifest = make_manifest(
            tmp_path, counts,
            expected={"Negative": 91, "Positive": 32, "Surprise": 25},
            write_files=False,
        )
        manifest.validate_counts(CASME_STYLE_MAP)

    def test_count_validation_failure(self, tmp_path):
        manifest = make_manifest(tmp_path, {"Happiness": 3},
                                 expected={"Positive": 4}, write_files=False)
        with pytest.raises(IngestionError, match="Positive"):
            manifest.validate_counts(CASME_STYLE_MAP)

    def test_load_manifest_json(self, tmp_path):
        raw = {"name": "demo",
               "entries": [{"path": "x.csv", "label": "a", "subject": "s1"}],
               "expected_counts": {"a": 1}}
        path = tmp_path / "m.json"
        path.write_text(json.dumps(raw))
        manifest = load_manifest(path)
        assert manifest.name == "demo"
        assert manifest.entries[0].label == "a"
        manifest.validate_counts()

    def test_lbptop_mode(self, tmp_path):
        from tsrg.lbptop import LbpTopParams
        rng = np.random.default_rng(1)
        entries = []
        for i, label in enumerate(["a", "a", "b"]):
            path = tmp_path / f"clip{i}.raw"
            write_clip(path, rng.integers(0, 256, size=(8, 16, 16)).astype(float))
            entries.append(ManifestEntry(path=str(path), label=label))
        manifest = DatasetManifest(name="clips", entries=tuple(entries))
        params = LbpTopParams(grids=(1, 2))
        data = ingest_manifest(manifest, feature_mode="lbptop", lbp_params=params)
        assert data.features.d == params.feature_length
        assert data.features.n == 3


class TestSynth:
    def test_deterministic_from_seed(self):
        spec = SynthSpec(seed=42)
        s1, t1 = synth_generate(spec)
        s2, t2 = synth_generate(spec)
        np.testing.assert_array_equal(s1.features.data, s2.features.data)
        np.testing.assert_array_equal(t1.features.data, t2.features.data)
        np.testing.assert_array_equal(s1.labels, s2.labels)

    def test_identity_shift_mmd_shrinks_with_count(self):
        linear = KernelSpec("linear")
        small, large = [], []
        for seed in range(10):
            s, t = synth_generate(SynthSpec(n_source_per_class=17, n_target_per_class=17,
                                            seed=seed))
            small.append(mmd(s.features, t.features, linear))
            s, t = synth_generate(SynthSpec(n_source_per_class=134, n_target_per_class=134,
                                            seed=seed))
            large.append(mmd(s.features, t.features, linear))
        assert np.mean(large) < np.mean(small)

    def test_offset_increases_mmd(self):
        linear = KernelSpec("linear")
        b = np.zeros(20)
        b[3] = 8.0
        s0, t0 = synth_generate(SynthSpec(seed=5))
        s1, t1 = synth_generate(SynthSpec(shift_offset=b, seed=5))
        assert mmd(s1.features, t1.features, linear) > mmd(s0.features, t0.features, linear)

    def test_singular_shift_matrix_rejected(self):
        a = np.eye(20)
        a[0, 0] = 0.0
        with pytest.raises(SpecError):
            SynthSpec(shift_matrix=a)

    def test_too_few_samples_rejected(self):
        with pytest.raises(SpecError):
            SynthSpec(n_source_per_class=1)

    def test_shift_applied_to_target_only(self):
        b = np.full(20, 100.0)
        s, t = synth_generate(SynthSpec(shift_offset=b, seed=1))
        assert t.features.data.mean() > 50
        assert abs(s.features.data.mean()) < 5


def test_mixed_feature_dimensions_rejected(tmp_path):
    p1 = tmp_path / "a.csv"
    p1.write_text("f0,f1,label\n1,2,a\n")
    p2 = tmp_path / "b.csv"
    p2.write_text("f0,f1,f2,label\n1,2,3,b\n")
    manifest = DatasetManifest(name="mixed", entries=(
        ManifestEntry(path=str(p1), label="a"),
        ManifestEntry(path=str(p2), label="b"),
    ))
    with pytest.raises(DimensionError):
        ingest_manifest(manifest)
