"""Data model and JSON-lines ingestion for per-vertebra classifier outputs.

One subject per JSON document; batch files are newline-delimited documents.
Score vectors follow the canonical orders defined in :mod:`vertseq.labels`:
24 label scores (C1..L5), 3 region scores (cervical, thoracic, lumbar),
6 transition scores (none, last cervical, first thoracic, last thoracic,
first lumbar, last lumbar), and one visibility value in [0, 1].
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .errors import ParseError, SchemaError, ValidationError
from .labels import FINAL_LABELS

_FINAL_ORDER = {name: k for k, name in enumerate(FINAL_LABELS)}


def _as_vector(values, length: int, name: str, subject: str) -> np.ndarray:
    try:
        arr = np.asarray(values, dtype=float)
    except (TypeError, ValueError):
        raise ParseError(f"subject {subject!r}: field {name!r} is not numeric") from None
    if arr.shape != (length,):
        raise SchemaError(
            f"subject {subject!r}: field {name!r} has shape {arr.shape}, expected ({length},)"
        )
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"subject {subject!r}: field {name!r} contains non-finite values")
    if np.any(arr < 0):
        raise ValidationError(f"subject {subject!r}: field {name!r} contains negative scores")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class VertebraScores:
    """The four classifier head outputs for one vertebra instance.

    The vectors are usually softmax outputs (each summing to 1), but only
    non-negativity is enforced so that pre-combined or sparse score files
    remain readable.
    """

    label_scores: np.ndarray  # (24,)
    region_scores: np.ndarray  # (3,)
    transition_scores: np.ndarray  # (6,)
    visibility: float

    @classmethod
    def from_mapping(cls, doc: dict, subject: str = "?") -> "VertebraScores":
        if not isinstance(doc, dict):
            raise ParseError(f"subject {subject!r}: vertebra entry is not an object")
        for key in ("label_scores", "region_scores", "transition_scores", "visibility"):
            if key not in doc:
                raise ParseError(f"subject {subject!r}: vertebra is missing field {key!r}")
        vis = doc["visibility"]
        if not isinstance(vis, (int, float)):
            raise ParseError(f"subject {subject!r}: field 'visibility' is not a number")
        if not 0.0 <= float(vis) <= 1.0:
            raise ValidationError(
                f"subject {subject!r}: visibility {vis} outside [0, 1]"
            )
        return cls(
            label_scores=_as_vector(doc["label_scores"], 24, "label_scores", subject),
            region_scores=_as_vector(doc["region_scores"], 3, "region_scores", subject),
            transition_scores=_as_vector(doc["transition_scores"], 6, "transition_scores", subject),
            visibility=float(vis),
        )

    def to_mapping(self) -> dict:
        return {
            "label_scores": self.label_scores.tolist(),
            "region_scores": self.region_scores.tolist(),
            "transition_scores": self.transition_scores.tolist(),
            "visibility": self.visibility,
        }


@dataclass(frozen=True)
class SubjectRecord:
    """One subject's ordered vertebra chain, cranio-caudal, n >= 1."""

    subject_id: str
    vertebrae: tuple[VertebraScores, ...]
    reference_labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertebrae", tuple(self.vertebrae))
        if self.reference_labels is not None:
            object.__setattr__(self, "reference_labels", tuple(self.reference_labels))
        if len(self.vertebrae) < 1:
            raise ValidationError(f"subject {self.subject_id!r} has no vertebrae")
        if self.reference_labels is not None:
            self._check_reference()

    def _check_reference(self) -> None:
        # Decoded reference chains must be strictly increasing in anatomical
        # order; jumps are allowed (cropped fields of view, detection gaps).
        ref = self.reference_labels
        if len(ref) != len(self.vertebrae):
            raise SchemaError(
                f"subject {self.subject_id!r}: {len(ref)} reference labels "
                f"for {len(self.vertebrae)} vertebrae"
            )
        bad = [x for x in ref if x not in _FINAL_ORDER]
        if bad:
            raise ValidationError(
                f"subject {self.subject_id!r}: unknown reference labels {bad}"
            )
        order = [_FINAL_ORDER[x] for x in ref]
        if any(b <= a for a, b in zip(order, order[1:])):
            raise ValidationError(
                f"subject {self.subject_id!r}: reference labels are not in "
                "strict cranio-caudal order"
            )

    @property
    def n(self) -> int:
        return len(self.vertebrae)


def parse_subject(doc: dict | str) -> SubjectRecord:
    """Parse one subject document (a mapping or its JSON text)."""
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError("subject document is not a JSON object")
    sid = doc.get("subject_id")
    if not isinstance(sid, str) or not sid:
        raise ParseError("missing or invalid field 'subject_id'")
    verts = doc.get("vertebrae")
    if not isinstance(verts, list) or not verts:
        raise ParseError(f"subject {sid!r}: missing or empty field 'vertebrae'")
    scores = tuple(VertebraScores.from_mapping(v, sid) for v in verts)
    ref = doc.get("reference_labels")
    if ref is not None and (
        not isinstance(ref, list) or not all(isinstance(x, str) for x in ref)
    ):
        raise ParseError(f"subject {sid!r}: field 'reference_labels' must be a list of strings")
    return SubjectRecord(sid, scores, tuple(ref) if ref is not None else None)


def subject_to_mapping(subject: SubjectRecord) -> dict:
    doc = {
        "subject_id": subject.subject_id,
        "vertebrae": [v.to_mapping() for v in subject.vertebrae],
    }
    if subject.reference_labels is not None:
        doc["reference_labels"] = list(subject.reference_labels)
    return doc


def read_subjects(path: str | Path) -> Iterator[SubjectRecord]:
    """Iterate subjects from a newline-delimited JSON batch file."""
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield parse_subject(line)
            except ParseError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from None


def write_subjects(path: str | Path, subjects: Iterable[SubjectRecord]) -> int:
    """Write subjects as newline-delimited JSON; returns the number written."""
    count = 0
    with open(path, "w", encoding="utf-8") as handle:
        for subject in subjects:
            handle.write(json.dumps(subject_to_mapping(subject)) + "\n")
            count += 1
    return count


def read_label_sequences(path: str | Path) -> dict[str, tuple[str, ...]]:
    """Read decoded label sequences keyed by subject id.

    Accepts prediction documents ({"subject_id", "labels", ...}) and subject
    documents carrying ``reference_labels``.  Records with an ``error`` field
    and no labels are skipped.
    """
    out: dict[str, tuple[str, ...]] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: invalid JSON: {exc}") from None
            if not isinstance(doc, dict) or "subject_id" not in doc:
                raise ParseError(f"{path}:{lineno}: missing field 'subject_id'")
            sid = doc["subject_id"]
            labels = doc.get("labels") or doc.get("reference_labels")
            if labels is None:
                if doc.get("error"):
                    continue
                raise ParseError(
                    f"{path}:{lineno}: subject {sid!r} carries neither "
                    "'labels' nor 'reference_labels'"
                )
            out[sid] = tuple(labels)
    return out
