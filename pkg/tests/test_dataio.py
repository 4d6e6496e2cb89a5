"""Dataset round-trips, CSV validation, synthetic fixtures, splits."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hdeeg import (
    DatasetManifest,
    DataValidationError,
    EegRecording,
    Label,
    PatientEntry,
    SyntheticSpec,
    generate_synthetic,
    load_dataset,
    load_manifest,
    split,
    write_dataset,
)


def tiny_manifest(n_per_class=2, channels=("F4", "Cz")):
    patients = []
    for prefix, label in (("a", Label.ADHD), ("c", Label.CONTROL)):
        for i in range(n_per_class):
            pid = f"{prefix}{i}"
            patients.append(PatientEntry(id=pid, label=label, path=f"patients/{pid}.csv"))
    return DatasetManifest(
        name="tiny", sample_rate_hz=256.0, channels=channels, patients=tuple(patients)
    )


def tiny_recordings(manifest, samples=16, seed=0):
    rng = np.random.default_rng(seed)
    return [
        EegRecording(
            patient_id=p.id,
            label=p.label,
            channels=manifest.channels,
            samples=rng.normal(0, 30, size=(samples, len(manifest.channels))),
            sample_rate_hz=manifest.sample_rate_hz,
        )
        for p in manifest.patients
    ]


# --------------------------------------------------------------- manifest


def test_manifest_validation():
    with pytest.raises(DataValidationError):
        DatasetManifest("x", 256.0, (), (PatientEntry("a", Label.ADHD, "a.csv"),))
    with pytest.raises(DataValidationError):
        DatasetManifest("x", 256.0, ("F4", "F4"), (PatientEntry("a", Label.ADHD, "a.csv"),))
    with pytest.raises(DataValidationError):
        DatasetManifest("x", 256.0, ("F4",), ())
    dup = (PatientEntry("a", Label.ADHD, "a.csv"), PatientEntry("a", Label.CONTROL, "b.csv"))
    with pytest.raises(DataValidationError):
        DatasetManifest("x", 256.0, ("F4",), dup)
    with pytest.raises(DataValidationError):
        DatasetManifest("x", 0.0, ("F4",), (PatientEntry("a", Label.ADHD, "a.csv"),))


def test_manifest_lookups():
    m = tiny_manifest()
    assert m.ids_for(Label.ADHD) == ["a0", "a1"]
    assert m.ids_for(Label.CONTROL) == ["c0", "c1"]
    assert m.labels()["a1"] is Label.ADHD


def test_load_manifest_accepts_dir_or_file(tmp_path):
    m = tiny_manifest()
    write_dataset(tmp_path, m, tiny_recordings(m))
    assert load_manifest(tmp_path).name == "tiny"
    assert load_manifest(tmp_path / "manifest.json").channels == ("F4", "Cz")


def test_load_manifest_bad_json(tmp_path):
    (tmp_path / "manifest.json").write_text("{not json")
    with pytest.raises(DataValidationError, match="JSON"):
        load_manifest(tmp_path)


def test_load_manifest_missing_field(tmp_path):
    (tmp_path / "manifest.json").write_text(json.dumps({"channels": ["F4"]}))
    with pytest.raises(DataValidationError):
        load_manifest(tmp_path)


def test_load_manifest_unknown_label(tmp_path):
    doc = {
        "sample_rate_hz": 256.0,
        "channels": ["F4"],
        "patients": [{"id": "a", "label": "MAYBE", "path": "a.csv"}],
    }
    (tmp_path / "manifest.json").write_text(json.dumps(doc))
    with pytest.raises(DataValidationError):
        load_manifest(tmp_path)


def test_load_manifest_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_manifest(tmp_path / "nowhere")


# ------------------------------------------------------------ round trip


def test_write_then_load_round_trips_exactly(tmp_path):
    m = tiny_manifest()
    recs = tiny_recordings(m)
    write_dataset(tmp_path, m, recs)
    loaded_manifest, loaded = load_dataset(tmp_path)
    assert loaded_manifest == m
    assert [r.patient_id for r in loaded] == [r.patient_id for r in recs]
    for a, b in zip(loaded, recs):
        assert a.label is b.label
        assert a.channels == b.channels
        assert a.sample_rate_hz == b.sample_rate_hz
        # repr serialization is lossless for float64
        assert np.array_equal(a.samples, b.samples)


def test_write_dataset_requires_all_recordings(tmp_path):
    m = tiny_manifest()
    with pytest.raises(DataValidationError, match="a1"):
        write_dataset(tmp_path, m, tiny_recordings(m)[:1])


# ------------------------------------------------------------- csv errors


def write_patient_csv(tmp_path, text, pid="a0"):
    m = tiny_manifest()
    write_dataset(tmp_path, m, tiny_recordings(m))
    (tmp_path / f"patients/{pid}.csv").write_text(text)
    return tmp_path


def test_load_dataset_missing_csv(tmp_path):
    m = tiny_manifest()
    write_dataset(tmp_path, m, tiny_recordings(m))
    (tmp_path / "patients/a0.csv").unlink()
    with pytest.raises(OSError):
        load_dataset(tmp_path)


def test_load_dataset_header_mismatch(tmp_path):
    root = write_patient_csv(tmp_path, "F4,Pz\n1.0,2.0\n")
    with pytest.raises(DataValidationError, match="header"):
        load_dataset(root)


def test_load_dataset_short_row_names_channel(tmp_path):
    root = write_patient_csv(tmp_path, "F4,Cz\n1.0,2.0\n3.0\n")
    with pytest.raises(DataValidationError, match="Cz"):
        load_dataset(root)


def test_load_dataset_long_row(tmp_path):
    root = write_patient_csv(tmp_path, "F4,Cz\n1.0,2.0,3.0\n")
    with pytest.raises(DataValidationError, match="row 2"):
        load_dataset(root)


def test_load_dataset_non_numeric(tmp_path):
    root = write_patient_csv(tmp_path, "F4,Cz\n1.0,oops\n")
    with pytest.raises(DataValidationError, match="non-numeric"):
        load_dataset(root)


def test_load_dataset_non_finite_names_position(tmp_path):
    root = write_patient_csv(tmp_path, "F4,Cz\n1.0,2.0\n3.0,nan\n")
    with pytest.raises(DataValidationError, match="sample 1, channel Cz"):
        load_dataset(root)


def test_load_dataset_empty_csv(tmp_path):
    root = write_patient_csv(tmp_path, "")
    with pytest.raises(DataValidationError, match="empty"):
        load_dataset(root)


def test_load_dataset_header_only(tmp_path):
    root = write_patient_csv(tmp_path, "F4,Cz\n")
    with pytest.raises(DataValidationError, match="no samples"):
        load_dataset(root)


def test_load_dataset_unequal_lengths(tmp_path):
    m = tiny_manifest()
    recs = tiny_recordings(m)
    write_dataset(tmp_path, m, recs)
    short = "F4,Cz\n" + "\n".join("1.0,2.0" for _ in range(3)) + "\n"
    (tmp_path / "patients/c1.csv").write_text(short)
    with pytest.raises(DataValidationError, match="sample count"):
        load_dataset(tmp_path)


# -------------------------------------------------------------- synthetic


def test_generate_synthetic_shapes_and_ids():
    spec = SyntheticSpec(patients_per_class=3, samples=512, seed=4)
    manifest, recs = generate_synthetic(spec)
    assert [p.id for p in manifest.patients] == [
        "adhd-001", "adhd-002", "adhd-003",
        "control-001", "control-002", "control-003",
    ]
    assert all(r.samples.shape == (512, 2) for r in recs)
    labels = manifest.labels()
    assert labels["adhd-002"] is Label.ADHD
    assert labels["control-003"] is Label.CONTROL


def test_generate_synthetic_deterministic():
    spec = SyntheticSpec(patients_per_class=2, samples=256, seed=11)
    _, a = generate_synthetic(spec)
    _, b = generate_synthetic(spec)
    for ra, rb in zip(a, b):
        assert np.array_equal(ra.samples, rb.samples)


def test_generate_synthetic_patients_differ():
    spec = SyntheticSpec(patients_per_class=2, samples=256, seed=11)
    _, recs = generate_synthetic(spec)
    assert not np.array_equal(recs[0].samples, recs[1].samples)


def test_generate_synthetic_class_frequencies():
    # The dominant FFT bin of each noisy recording sits at its class
    # frequency: 6 Hz for ADHD, 12 Hz for control.
    spec = SyntheticSpec(patients_per_class=1, samples=2560, seed=2)
    _, recs = generate_synthetic(spec)
    freqs = np.fft.rfftfreq(2560, d=1.0 / 256.0)
    for rec, expected in zip(recs, (6.0, 12.0)):
        spectrum = np.abs(np.fft.rfft(rec.samples[:, 0]))
        spectrum[0] = 0.0
        assert freqs[int(np.argmax(spectrum))] == pytest.approx(expected)


def test_generate_synthetic_validates_frequency():
    with pytest.raises(ValueError, match="frequency"):
        generate_synthetic(SyntheticSpec(freq_control_hz=17.0))
    with pytest.raises(ValueError, match="frequency"):
        generate_synthetic(SyntheticSpec(freq_adhd_hz=0.0))
    # 16 Hz is exactly the post-downsample Nyquist and is allowed.
    generate_synthetic(SyntheticSpec(patients_per_class=1, samples=64, freq_control_hz=16.0))


def test_generate_synthetic_validates_counts():
    with pytest.raises(ValueError):
        generate_synthetic(SyntheticSpec(patients_per_class=0))
    with pytest.raises(ValueError):
        generate_synthetic(SyntheticSpec(noise_std_uv=-1.0))
    with pytest.raises(ValueError):
        generate_synthetic(SyntheticSpec(channels=("F4", "F4")))


def test_generate_synthetic_noise_free_is_pure_tone():
    spec = SyntheticSpec(patients_per_class=1, samples=256, noise_std_uv=0.0)
    _, recs = generate_synthetic(spec)
    t = np.arange(256) / 256.0
    expected = 50.0 * np.sin(2 * np.pi * 6.0 * t)
    assert np.allclose(recs[0].samples[:, 0], expected)


# ------------------------------------------------------------------ split


def test_split_counts_and_disjointness():
    m = tiny_manifest(n_per_class=5)
    train, test = split(
        m,
        {Label.ADHD: 3, Label.CONTROL: 2},
        {Label.ADHD: 1, Label.CONTROL: 2},
        seed=7,
    )
    assert len(train) == 5 and len(test) == 3
    assert not set(train) & set(test)
    labels = m.labels()
    assert sum(labels[i] is Label.ADHD for i in train) == 3
    assert sum(labels[i] is Label.ADHD for i in test) == 1


def test_split_deterministic_and_seed_sensitive():
    m = tiny_manifest(n_per_class=6)
    counts = ({Label.ADHD: 4, Label.CONTROL: 4}, {Label.ADHD: 2, Label.CONTROL: 2})
    a = split(m, *counts, seed=1)
    b = split(m, *counts, seed=1)
    assert a == b
    seen = {tuple(split(m, *counts, seed=s)[0]) for s in range(8)}
    assert len(seen) > 1


def test_split_mixes_classes_in_train_order():
    m = tiny_manifest(n_per_class=8)
    counts = ({Label.ADHD: 8, Label.CONTROL: 8}, {})
    labels = m.labels()
    orders = set()
    for s in range(6):
        train, _ = split(m, counts[0], counts[1], seed=s)
        orders.add(tuple(str(labels[i]) for i in train))
    # At least one seed interleaves rather than listing one class first.
    assert any("ADHD" in o[1:] and "CONTROL" in o[:-1] for o in orders)
    assert len(orders) > 1


def test_split_insufficient_patients():
    m = tiny_manifest(n_per_class=2)
    with pytest.raises(DataValidationError, match="ADHD"):
        split(m, {Label.ADHD: 2}, {Label.ADHD: 1}, seed=0)


def test_split_negative_count():
    m = tiny_manifest()
    with pytest.raises(ValueError, match="negative"):
        split(m, {Label.ADHD: -1}, {}, seed=0)


@settings(max_examples=40, deadline=None)
@given(
    n_class=st.integers(min_value=1, max_value=8),
    n_train=st.integers(min_value=0, max_value=8),
    n_test=st.integers(min_value=0, max_value=8),
    seed=st.integers(min_value=0, max_value=2**32),
)
def test_split_properties(n_class, n_train, n_test, seed):
    m = tiny_manifest(n_per_class=n_class)
    counts = (
        {Label.ADHD: n_train, Label.CONTROL: n_train},
        {Label.ADHD: n_test, Label.CONTROL: n_test},
    )
    if n_train + n_test > n_class:
        with pytest.raises(DataValidationError):
            split(m, *counts, seed=seed)
        return
    train, test = split(m, *counts, seed=seed)
    assert len(train) == 2 * n_train and len(test) == 2 * n_test
    assert len(set(train) | set(test)) == len(train) + len(test)
    labels = m.labels()
    for chosen, want in ((train, n_train), (test, n_test)):
        assert sum(labels[i] is Label.ADHD for i in chosen) == want
