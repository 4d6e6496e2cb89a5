"""Training, per-window classification, patient voting, and evaluation.

A model is trained by gated accumulation: every encoded window of every
training patient is offered to the associative memory in deterministic
order (patients as given, windows in temporal order).  A patient is
classified by querying all of its windows and taking the majority label;
a patient counts as correctly classified only when strictly more than
half of its windows got the true label.
"""

import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .common import Label, check_seed, derive_seed, make_rng
from .dataio import DatasetManifest, DataValidationError, split
from .encoder import EncodedNGram, encode_patient
from .memories import AssociativeMemory, ContinuousItemMemory, ItemMemory, QueryResult
from .preprocess import (
    ChannelStats,
    EegRecording,
    QuantizedRecording,
    compute_channel_stats,
    drop_initial,
    preprocess_recording,
)

__all__ = [
    "PipelineParams",
    "TrainedModel",
    "PatientPrediction",
    "EvalReport",
    "SweepRow",
    "SweepRun",
    "SweepResult",
    "build_memories",
    "train",
    "classify_window",
    "classify_patient",
    "summarize",
    "evaluate",
    "run_trial",
    "incremental_sweep",
]

IM_SEED_PURPOSE = "item-memory"
CIM_SEED_PURPOSE = "level-memory"
SPLIT_SEED_PURPOSE = "split"


@dataclass(frozen=True)
class PipelineParams:
    """Everything that fixes the pipeline apart from the data itself."""

    dimension: int = 10000
    level_count: int = 250
    ngram_size: int = 32
    drop_samples: int = 512
    downsample_factor: int = 8
    gate_threshold: float = 0.5
    clip_low_pct: float = 0.5
    clip_high_pct: float = 99.5
    seed: int = 0

    def validate(self) -> None:
        if self.dimension < 2 or self.dimension % 2 != 0:
            raise ValueError(f"dimension must be even and at least 2, got {self.dimension}")
        if self.level_count < 2:
            raise ValueError(f"need at least 2 levels, got {self.level_count}")
        if self.ngram_size < 1:
            raise ValueError(f"ngram size must be at least 1, got {self.ngram_size}")
        if self.drop_samples < 0:
            raise ValueError(f"drop count must be nonnegative, got {self.drop_samples}")
        if self.downsample_factor < 1:
            raise ValueError(f"downsample factor must be at least 1, got {self.downsample_factor}")
        if not 0.0 <= self.clip_low_pct < self.clip_high_pct <= 100.0:
            raise ValueError(
                "percentiles must satisfy 0 <= low < high <= 100, got "
                f"({self.clip_low_pct}, {self.clip_high_pct})"
            )
        check_seed(self.seed)

    def to_dict(self) -> dict:
        return {
            "dimension": int(self.dimension),
            "level_count": int(self.level_count),
            "ngram_size": int(self.ngram_size),
            "drop_samples": int(self.drop_samples),
            "downsample_factor": int(self.downsample_factor),
            "gate_threshold": float(self.gate_threshold),
            "clip_low_pct": float(self.clip_low_pct),
            "clip_high_pct": float(self.clip_high_pct),
            "seed": int(self.seed),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "PipelineParams":
        return cls(**{k: doc[k] for k in cls().to_dict()})


@dataclass(frozen=True, eq=False)
class TrainedModel:
    """Memories plus the statistics and parameters that produced them."""

    params: PipelineParams
    item_memory: ItemMemory
    level_memory: ContinuousItemMemory
    memory: AssociativeMemory
    channel_stats: tuple
    train_ids: tuple = ()
    test_ids: tuple = ()

    @property
    def channels(self) -> tuple:
        return self.item_memory.names


@dataclass(frozen=True)
class PatientPrediction:
    """Window votes and the derived patient-level outcome."""

    patient_id: str
    true_label: Label
    predicted_label: Label
    correct_windows: int
    total_windows: int
    window_results: tuple = field(repr=False, default=())

    @property
    def correct(self) -> bool:
        """Strict majority: more than half the windows got the true label."""
        return 2 * self.correct_windows > self.total_windows


@dataclass(frozen=True)
class EvalReport:
    """Patient-level metrics with ADHD as the positive class.

    ``accuracy_pct`` counts patients by the strict-majority rule, which on
    an exactly even window split differs from the predicted label (a tied
    control patient is predicted CONTROL yet counted as not correct), so
    accuracy is recomputed from the per-patient ``correct`` flags rather
    than from tp + tn.  Metrics with a zero denominator are None.
    """

    accuracy_pct: float
    precision: float | None
    recall: float | None
    f1: float | None
    tp: int
    fp: int
    tn: int
    fn: int
    patients: tuple

    def to_dict(self) -> dict:
        return {
            "accuracy_pct": float(self.accuracy_pct),
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "confusion": {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn},
            "patients": [
                {
                    "id": p.patient_id,
                    "true_label": str(p.true_label),
                    "predicted_label": str(p.predicted_label),
                    "correct_windows": p.correct_windows,
                    "total_windows": p.total_windows,
                    "correct": p.correct,
                }
                for p in self.patients
            ],
        }


def build_memories(params: PipelineParams, channel_names):
    """Item and level memories for the given parameters and channel set.

    Seeds are derived from params.seed per purpose, so a root seed pins
    both memories.
    """
    im = ItemMemory.build(
        channel_names, derive_seed(params.seed, IM_SEED_PURPOSE), params.dimension
    )
    cim = ContinuousItemMemory.build(
        params.level_count, derive_seed(params.seed, CIM_SEED_PURPOSE), params.dimension
    )
    return im, cim


def train(
    train_set,
    params: PipelineParams,
    channel_stats,
    *,
    train_ids=(),
    test_ids=(),
) -> TrainedModel:
    """Gated accumulation over every window of every training patient.

    ``train_set`` holds QuantizedRecordings in training order; both classes
    must be present.  ``channel_stats`` is stored on the model so raw
    recordings can be preprocessed consistently later.
    """
    params.validate()
    train_set = list(train_set)
    if not train_set:
        raise ValueError("training set is empty")
    labels = {rec.label for rec in train_set}
    if labels != {Label.ADHD, Label.CONTROL}:
        raise ValueError(
            f"training set must contain both classes, got {sorted(str(l) for l in labels)}"
        )
    channels = train_set[0].channels
    for rec in train_set:
        if rec.channels != channels:
            raise ValueError(f"{rec.patient_id}: channels differ from {channels}")
        if rec.level_count != params.level_count:
            raise ValueError(
                f"{rec.patient_id}: quantized with {rec.level_count} levels, "
                f"params say {params.level_count}"
            )
    im, cim = build_memories(params, channels)
    am = AssociativeMemory(params.dimension, params.gate_threshold)
    for rec in train_set:
        for enc in encode_patient(rec, im, cim, params.ngram_size):
            am.update(enc.vector, enc.label)
    return TrainedModel(
        params=params,
        item_memory=im,
        level_memory=cim,
        memory=am,
        channel_stats=tuple(channel_stats),
        train_ids=tuple(train_ids),
        test_ids=tuple(test_ids),
    )


def classify_window(model: TrainedModel, encoded) -> QueryResult:
    """Nearest class for one encoded window."""
    vector = encoded.vector if isinstance(encoded, EncodedNGram) else encoded
    return model.memory.query(vector)


def classify_patient(model: TrainedModel, rec: QuantizedRecording) -> PatientPrediction:
    """Query every window of a recording and take the majority label.

    Ties on the majority go to CONTROL; correctness is the stricter
    more-than-half rule against the true label.
    """
    encs = encode_patient(rec, model.item_memory, model.level_memory, model.params.ngram_size)
    results = tuple(model.memory.query(e.vector) for e in encs)
    return _prediction_from_results(rec.patient_id, rec.label, results)


def _prediction_from_results(patient_id, true_label, results) -> PatientPrediction:
    total = len(results)
    adhd_votes = sum(1 for r in results if r.label is Label.ADHD)
    predicted = Label.ADHD if adhd_votes > total - adhd_votes else Label.CONTROL
    correct = sum(1 for r in results if r.label is true_label)
    return PatientPrediction(
        patient_id=patient_id,
        true_label=true_label,
        predicted_label=predicted,
        correct_windows=correct,
        total_windows=total,
        window_results=tuple(results),
    )


def summarize(predictions) -> EvalReport:
    """Metrics over per-patient predictions (ADHD positive)."""
    predictions = tuple(predictions)
    if not predictions:
        raise ValueError("nothing to summarize: no patient predictions")
    tp = sum(1 for p in predictions if p.true_label is Label.ADHD and p.predicted_label is Label.ADHD)
    fn = sum(1 for p in predictions if p.true_label is Label.ADHD and p.predicted_label is Label.CONTROL)
    fp = sum(1 for p in predictions if p.true_label is Label.CONTROL and p.predicted_label is Label.ADHD)
    tn = sum(1 for p in predictions if p.true_label is Label.CONTROL and p.predicted_label is Label.CONTROL)
    precision = tp / (tp + fp) if (tp + fp) > 0 else None
    recall = tp / (tp + fn) if (tp + fn) > 0 else None
    if precision is None or recall is None or (precision + recall) == 0:
        f1 = None
    else:
        f1 = 2.0 * precision * recall / (precision + recall)
    accuracy = 100.0 * sum(1 for p in predictions if p.correct) / len(predictions)
    return EvalReport(
        accuracy_pct=float(accuracy),
        precision=precision,
        recall=recall,
        f1=f1,
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
        patients=predictions,
    )


def evaluate(model: TrainedModel, test_set, max_workers: int = 1) -> EvalReport:
    """Classify every test patient and summarize.

    With max_workers > 1 patients are classified in a thread pool; results
    are reduced in input order, so the report does not depend on timing.
    """
    test_set = list(test_set)
    if not test_set:
        raise ValueError("test set is empty")
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            predictions = list(pool.map(lambda r: classify_patient(model, r), test_set))
    else:
        predictions = [classify_patient(model, rec) for rec in test_set]
    return summarize(predictions)


def _prepare(recordings, stats_pool, params: PipelineParams):
    """Channel stats from the pool, then the full chain on ``recordings``."""
    dropped = [drop_initial(rec, params.drop_samples) for rec in stats_pool]
    stats = compute_channel_stats(dropped, params.clip_low_pct, params.clip_high_pct)
    quantized = [
        preprocess_recording(
            rec,
            stats,
            drop_samples=params.drop_samples,
            downsample_factor=params.downsample_factor,
            level_count=params.level_count,
        )
        for rec in recordings
    ]
    return stats, quantized


def run_trial(
    manifest: DatasetManifest,
    recordings,
    params: PipelineParams,
    train_counts,
    test_counts,
    *,
    stats_scope: str = "train",
    max_workers: int = 1,
):
    """Split, preprocess, train, evaluate; returns (model, report).

    The split seed derives from params.seed.  With stats_scope "train"
    (default) clip and quantization statistics come from the training
    split only; "all" pools every recording.
    """
    params.validate()
    if stats_scope not in ("train", "all"):
        raise ValueError(f"stats scope must be 'train' or 'all', got {stats_scope!r}")
    train_ids, test_ids = split(
        manifest, train_counts, test_counts, derive_seed(params.seed, SPLIT_SEED_PURPOSE)
    )
    by_id = {rec.patient_id: rec for rec in recordings}
    missing = [i for i in (*train_ids, *test_ids) if i not in by_id]
    if missing:
        raise ValueError(f"recordings missing for patient(s) {missing}")
    train_raw = [by_id[i] for i in train_ids]
    test_raw = [by_id[i] for i in test_ids]
    stats_pool = train_raw if stats_scope == "train" else list(recordings)
    stats, quantized = _prepare([*train_raw, *test_raw], stats_pool, params)
    q_train = quantized[: len(train_raw)]
    q_test = quantized[len(train_raw):]
    model = train(q_train, params, stats, train_ids=train_ids, test_ids=test_ids)
    report = evaluate(model, q_test, max_workers=max_workers) if q_test else None
    return model, report


@dataclass(frozen=True)
class SweepRow:
    k: int
    mean_acc: float
    std: float


@dataclass(frozen=True)
class SweepRun:
    """One run of the sweep: its seed, fixed split, and per-k accuracies."""

    run_seed: int
    test_ids: tuple
    train_order: tuple
    accuracies: tuple


@dataclass(frozen=True)
class SweepResult:
    rows: tuple
    runs: tuple


def _lenient_accuracy(am: AssociativeMemory, patient_windows, labels) -> float:
    """Patient accuracy that tolerates a single-class memory.

    While only one class prototype is populated, every window is deemed
    classified as that class (an empty prototype loses every comparison),
    which keeps sweep rows for tiny training prefixes well defined.
    """
    have = [l for l in (Label.ADHD, Label.CONTROL) if am.bundle_count(l) > 0]
    correct_patients = 0
    for encs, true_label in zip(patient_windows, labels):
        if len(have) == 2:
            correct = sum(1 for e in encs if am.query(e.vector).label is true_label)
        else:
            correct = len(encs) if have[0] is true_label else 0
        if 2 * correct > len(encs):
            correct_patients += 1
    return 100.0 * correct_patients / len(patient_windows)


def incremental_sweep(
    manifest: DatasetManifest,
    recordings,
    *,
    test_size: int,
    max_train: int,
    runs: int,
    seed: int,
    params: PipelineParams,
    stratified: bool = True,
    stats_scope: str = "train",
    max_workers: int = 1,
) -> SweepResult:
    """Accuracy as a function of training-set size.

    Each run fixes a test set and a random training order, then reports
    patient accuracy after training on the first k patients for k = 1 ..
    max_train.  Runs use seeds derived from ``seed``, and within a run the
    item and level memories come from the run seed exactly as train()
    would derive them, so the k = max_train point of a run reproduces a
    plain train/evaluate with params.seed set to that run seed.

    Stratified test selection (default) takes test_size // 2 ADHD patients
    and the remainder from CONTROL; stratified=False samples the test set
    uniformly.  Statistics come from the run's training pool ("train",
    default) or the whole dataset ("all").  Returns per-k mean and
    population standard deviation across runs plus the raw per-run data.
    """
    params.validate()
    check_seed(seed)
    if runs < 1:
        raise ValueError(f"need at least one run, got {runs}")
    if test_size < 1 or max_train < 1:
        raise ValueError("test size and max train must be at least 1")
    if stats_scope not in ("train", "all"):
        raise ValueError(f"stats scope must be 'train' or 'all', got {stats_scope!r}")
    n_patients = len(manifest.patients)
    if test_size + max_train > n_patients:
        raise DataValidationError(
            f"test size {test_size} plus max train {max_train} exceeds {n_patients} patients"
        )
    by_id = {rec.patient_id: rec for rec in recordings}
    missing = [p.id for p in manifest.patients if p.id not in by_id]
    if missing:
        raise ValueError(f"recordings missing for patient(s) {missing}")

    def one_run(r: int) -> SweepRun:
        run_seed = derive_seed(seed, f"sweep-run-{r}")
        rng = make_rng(derive_seed(run_seed, SPLIT_SEED_PURPOSE))
        all_ids = [p.id for p in manifest.patients]
        if stratified:
            n_adhd = test_size // 2
            counts = {Label.ADHD: n_adhd, Label.CONTROL: test_size - n_adhd}
            test_ids = []
            for label in (Label.ADHD, Label.CONTROL):
                ids = manifest.ids_for(label)
                if counts[label] > len(ids):
                    raise DataValidationError(
                        f"test set needs {counts[label]} of class {label}, dataset has {len(ids)}"
                    )
                order = rng.permutation(len(ids))
                test_ids.extend(ids[i] for i in order[: counts[label]])
            test_ids = [test_ids[i] for i in rng.permutation(len(test_ids))]
        else:
            order = rng.permutation(n_patients)
            test_ids = [all_ids[i] for i in order[:test_size]]
        held_out = set(test_ids)
        pool = [i for i in all_ids if i not in held_out]
        order = rng.permutation(len(pool))
        train_order = [pool[i] for i in order][:max_train]

        params_r = replace(params, seed=run_seed)
        stats_ids = train_order if stats_scope == "train" else all_ids
        stats, quantized = _prepare(
            [by_id[i] for i in (*train_order, *test_ids)],
            [by_id[i] for i in stats_ids],
            params_r,
        )
        q_train = quantized[: len(train_order)]
        q_test = quantized[len(train_order):]
        im, cim = build_memories(params_r, manifest.channels)
        test_encodings = [encode_patient(q, im, cim, params_r.ngram_size) for q in q_test]
        test_labels = [q.label for q in q_test]
        am = AssociativeMemory(params_r.dimension, params_r.gate_threshold)
        accuracies = []
        for q in q_train:
            for enc in encode_patient(q, im, cim, params_r.ngram_size):
                am.update(enc.vector, enc.label)
            accuracies.append(_lenient_accuracy(am, test_encodings, test_labels))
        return SweepRun(
            run_seed=run_seed,
            test_ids=tuple(test_ids),
            train_order=tuple(train_order),
            accuracies=tuple(accuracies),
        )

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            run_results = list(pool.map(one_run, range(runs)))
    else:
        run_results = [one_run(r) for r in range(runs)]
    rows = []
    for k in range(1, max_train + 1):
        samples = [run.accuracies[k - 1] for run in run_results]
        mean = statistics.fmean(samples)
        std = float(np.std(samples))
        rows.append(SweepRow(k=k, mean_acc=float(mean), std=std))
    return SweepResult(rows=tuple(rows), runs=tuple(run_results))
