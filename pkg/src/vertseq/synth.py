"""Seeded synthetic spines and classifier outputs for end-to-end verification.

Ground-truth spines are drawn with configurable anomaly prevalence; the
classifier stand-in then emits score vectors whose peaks follow the truth,
with controllable degradation.  The emitted transition scores use the same
fulfillment rules as the cost model, so generator and solver share one
definition of what each transition kind means.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .costs import fulfilled_transitions
from .errors import ContractError, ValidationError
from .io import SubjectRecord, VertebraScores
from .labels import (
    N_RAW_LABELS,
    RawPath,
    decode_anomalies,
    encode_anomalies,
    region_of,
)


@dataclass(frozen=True)
class SynthConfig:
    """Ground-truth generation knobs.

    Default anomaly rates (5.8% thoracic, 9.7% lumbar) match large-cohort
    prevalence estimates.  The per-type split within each anomaly category
    defaults to even.
    """

    tea_rate: float = 0.058
    lea_rate: float = 0.097
    t11_vs_t13_split: float = 0.5
    l4_vs_l6_split: float = 0.5
    fov_mode: str = "full"  # full | random_window | all_windows
    fov_min_len: int = 1
    fov_max_len: int | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("tea_rate", "lea_rate", "t11_vs_t13_split", "l4_vs_l6_split"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"{name} must be in [0, 1], got {v}")
        if self.fov_mode not in ("full", "random_window", "all_windows"):
            raise ValidationError(f"unknown fov_mode {self.fov_mode!r}")
        if self.fov_min_len < 1:
            raise ValidationError("fov_min_len must be >= 1")


@dataclass(frozen=True)
class NoiseConfig:
    """Classifier degradation knobs; the defaults are noiseless.

    ``label_confusion`` leaks that much probability mass from the true label
    onto its neighbors; ``head_dropout`` replaces a head's output with an
    uninformative one at that probability; ``transition_strength`` is the
    share of transition mass placed on the fulfilled kinds (1 = one-hot,
    0 = uniform); ``visibility_boundary_decay`` multiplies the visibility of
    the first and last vertebra (1 = no decay).
    """

    label_confusion: float = 0.0
    head_dropout: float = 0.0
    transition_strength: float = 1.0
    visibility_boundary_decay: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        for name in (
            "label_confusion",
            "head_dropout",
            "transition_strength",
            "visibility_boundary_decay",
        ):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"{name} must be in [0, 1], got {v}")


def generate_spine(cfg: SynthConfig, rng: np.random.Generator | None = None) -> tuple[str, ...]:
    """Draw one full ground-truth spine (C1 through the last lumbar vertebra).

    Thoracic count is 11/12/13 and lumbar count 4/5/6 according to the
    configured anomaly rates and splits.  Deterministic per seed.
    """
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    thoracic = 12
    if rng.random() < cfg.tea_rate:
        thoracic = 11 if rng.random() < cfg.t11_vs_t13_split else 13
    lumbar = 5
    if rng.random() < cfg.lea_rate:
        lumbar = 4 if rng.random() < cfg.l4_vs_l6_split else 6
    return tuple(
        [f"C{i}" for i in range(1, 8)]
        + [f"T{i}" for i in range(1, thoracic + 1)]
        + [f"L{i}" for i in range(1, lumbar + 1)]
    )


def _label_head(raw: int, confusion: float) -> np.ndarray:
    scores = np.zeros(N_RAW_LABELS)
    scores[raw] = 1.0 - confusion
    neighbors = [k for k in (raw - 1, raw + 1) if 0 <= k < N_RAW_LABELS]
    for k in neighbors:
        scores[k] = confusion / len(neighbors)
    return scores


def emit_classifier_outputs(
    truth: Sequence[str],
    noise: NoiseConfig | None = None,
    rng: np.random.Generator | None = None,
    subject_id: str = "synthetic",
) -> SubjectRecord:
    """Synthesize the four classifier head outputs for a truth sequence.

    The reference labels attached to the record are the truth itself.  Head
    dropout is drawn per (vertebra, head) in a fixed order (label, region,
    transition, visibility) so results are reproducible for a given stream.
    """
    noise = noise or NoiseConfig()
    rng = rng if rng is not None else np.random.default_rng(noise.seed)
    path = encode_anomalies(truth)
    n = len(path.labels)
    vertebrae = []
    for i, raw in enumerate(path.labels):
        if rng.random() < noise.head_dropout:
            label_scores = np.full(N_RAW_LABELS, 1.0 / N_RAW_LABELS)
        else:
            label_scores = _label_head(raw, noise.label_confusion)

        if rng.random() < noise.head_dropout:
            region_scores = np.full(3, 1.0 / 3.0)
        else:
            region_scores = np.zeros(3)
            region_scores[int(region_of(raw))] = 1.0

        if rng.random() < noise.head_dropout:
            transition_scores = np.full(6, 1.0 / 6.0)
        else:
            kinds = fulfilled_transitions(path.labels, i)
            transition_scores = np.full(6, (1.0 - noise.transition_strength) / 6.0)
            for kind in kinds:
                transition_scores[kind] += noise.transition_strength / len(kinds)

        visibility = 1.0
        if i == 0 or i == n - 1:
            visibility *= noise.visibility_boundary_decay
        if rng.random() < noise.head_dropout:
            visibility = 0.5

        vertebrae.append(
            VertebraScores(
                label_scores=label_scores,
                region_scores=region_scores,
                transition_scores=transition_scores,
                visibility=visibility,
            )
        )
    return SubjectRecord(subject_id, tuple(vertebrae), tuple(truth))


def crop_fov(subject: SubjectRecord, start: int, length: int) -> SubjectRecord:
    """Restrict a subject to a contiguous window of vertebrae.

    Reference labels are re-derived from the window: the full reference is
    encoded to raw labels, sliced, and decoded again, so an anomaly is only a
    reference anomaly when it is detectable inside the window (a T13 whose
    first T12 falls outside the crop becomes a plain T12).
    """
    if length < 1 or start < 0 or start + length > subject.n:
        raise ContractError(
            f"window [{start}, {start + length}) out of range for n={subject.n}"
        )
    vertebrae = subject.vertebrae[start : start + length]
    reference = None
    if subject.reference_labels is not None:
        raw = encode_anomalies(subject.reference_labels)
        window = raw.labels[start : start + length]
        reference = decode_anomalies(RawPath.from_labels(window))
    return SubjectRecord(
        f"{subject.subject_id}[{start}:{start + length}]",
        vertebrae,
        reference,
    )


def all_fov_windows(subject: SubjectRecord, min_len: int = 1) -> list[SubjectRecord]:
    """Every contiguous window of the subject with length >= min_len."""
    out = []
    for length in range(min_len, subject.n + 1):
        for start in range(subject.n - length + 1):
            out.append(crop_fov(subject, start, length))
    return out


def inject_gap(subject: SubjectRecord, seed: int | Sequence[int]) -> SubjectRecord:
    """Remove one uniformly chosen vertebra, simulating a missed detection.

    Reference labels keep the removed label absent, so the reference now
    contains a gap.  The removed index is recorded in the subject id.
    """
    if subject.n < 2:
        raise ContractError("cannot inject a gap into a single-vertebra subject")
    rng = np.random.default_rng(seed)
    index = int(rng.integers(subject.n))
    vertebrae = subject.vertebrae[:index] + subject.vertebrae[index + 1 :]
    reference = None
    if subject.reference_labels is not None:
        reference = subject.reference_labels[:index] + subject.reference_labels[index + 1 :]
    return SubjectRecord(f"{subject.subject_id}_gap{index}", vertebrae, reference)


def relabel_without_anomalies(truth: Sequence[str]) -> tuple[str, ...]:
    """Rewrite a truth sequence as if the spine had twelve thoracic vertebrae.

    A T13 becomes L1 and the following lumbar labels shift up by one; in an
    eleven-thoracic spine the L1 after the T11 becomes T12 and the following
    lumbar labels shift down by one.  Spines that are not thoracic anomalies
    pass through unchanged.  A combined T13+L6 spine would need a seventh
    lumbar label and is rejected.
    """
    labels = list(truth)
    if "T13" in labels:
        if "L6" in labels:
            raise ContractError(
                "cannot relabel a combined T13+L6 spine to twelve thoracic vertebrae"
            )
        k = labels.index("T13")
        labels[k] = "L1"
        for m in range(k + 1, len(labels)):
            labels[m] = f"L{int(labels[m][1:]) + 1}"
        return tuple(labels)
    for k in range(len(labels) - 1):
        if labels[k] == "T11" and labels[k + 1] == "L1":
            labels[k + 1] = "T12"
            for m in range(k + 2, len(labels)):
                labels[m] = f"L{int(labels[m][1:]) - 1}"
            return tuple(labels)
    return tuple(labels)


def generate_corpus(
    cfg: SynthConfig,
    noise: NoiseConfig | None = None,
    n_subjects: int = 1,
    id_prefix: str = "synth",
    anomaly_free_heads: bool = False,
) -> list[SubjectRecord]:
    """Generate a reproducible corpus of subjects.

    Each subject owns an independent RNG stream derived from (seed, index).
    With ``anomaly_free_heads`` the classifier outputs are emitted from the
    twelve-thoracic relabeling of the truth while the attached references
    keep the true labels, mimicking a classifier fit without anomaly labels.
    """
    noise = noise or NoiseConfig()
    subjects: list[SubjectRecord] = []
    for k in range(n_subjects):
        rng = np.random.default_rng([cfg.seed, k])
        truth = generate_spine(cfg, rng=rng)
        emitted_from = relabel_without_anomalies(truth) if anomaly_free_heads else truth
        subject = emit_classifier_outputs(
            emitted_from, noise, rng=rng, subject_id=f"{id_prefix}-{k:05d}"
        )
        if anomaly_free_heads:
            subject = SubjectRecord(subject.subject_id, subject.vertebrae, tuple(truth))
        if cfg.fov_mode == "full":
            subjects.append(subject)
        elif cfg.fov_mode == "random_window":
            max_len = min(cfg.fov_max_len or subject.n, subject.n)
            min_len = min(cfg.fov_min_len, max_len)
            length = int(rng.integers(min_len, max_len + 1))
            start = int(rng.integers(subject.n - length + 1))
            subjects.append(crop_fov(subject, start, length))
        else:  # all_windows
            subjects.extend(all_fov_windows(subject, min_len=cfg.fov_min_len))
    return subjects


def corpus_manifest(
    cfg: SynthConfig, noise: NoiseConfig, n_subjects: int, anomaly_free_heads: bool = False
) -> dict:
    """A reproducibility record for a generated corpus."""
    return {
        "generator": "vertseq.synth",
        "n_subjects": n_subjects,
        "anomaly_free_heads": anomaly_free_heads,
        "synth_config": {
            "tea_rate": cfg.tea_rate,
            "lea_rate": cfg.lea_rate,
            "t11_vs_t13_split": cfg.t11_vs_t13_split,
            "l4_vs_l6_split": cfg.l4_vs_l6_split,
            "fov_mode": cfg.fov_mode,
            "fov_min_len": cfg.fov_min_len,
            "fov_max_len": cfg.fov_max_len,
            "seed": cfg.seed,
        },
        "noise_config": {
            "label_confusion": noise.label_confusion,
            "head_dropout": noise.head_dropout,
            "transition_strength": noise.transition_strength,
            "visibility_boundary_decay": noise.visibility_boundary_decay,
            "seed": noise.seed,
        },
    }
