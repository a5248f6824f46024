"""Evaluation metrics over predicted vs. reference decoded label sequences.

All metrics operate on decoded sequences (the 26-label space including T13
and L6), never on raw paths.  An anomaly case is located positionally, so
labeling errors elsewhere in a sequence do not affect the recall metrics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import ContractError

LabelSeq = Sequence[str]
Pair = tuple[LabelSeq, LabelSeq]  # (predicted, reference)

CSV_HEADER = "param,plp,subj_corr_mean,subj_corr_std,tea_recall,lea_recall,n"


def _check_pairs(pairs: Sequence[Pair]) -> None:
    if not pairs:
        raise ContractError("metrics are undefined for an empty subject list")
    for k, (pred, ref) in enumerate(pairs):
        if len(pred) != len(ref):
            raise ContractError(
                f"pair {k}: predicted length {len(pred)} != reference length {len(ref)}"
            )


def perfect_label_percentage(pairs: Sequence[Pair]) -> float:
    """Percentage of subjects whose whole sequence matches the reference."""
    _check_pairs(pairs)
    exact = sum(1 for pred, ref in pairs if tuple(pred) == tuple(ref))
    return 100.0 * exact / len(pairs)


def subject_correctness(pairs: Sequence[Pair]) -> tuple[float, float]:
    """Mean and population standard deviation of per-subject correct-label %."""
    _check_pairs(pairs)
    per_subject = [
        100.0 * sum(p == r for p, r in zip(pred, ref)) / len(ref)
        for pred, ref in pairs
    ]
    mean = sum(per_subject) / len(per_subject)
    var = sum((x - mean) ** 2 for x in per_subject) / len(per_subject)
    return mean, math.sqrt(var)


def _tea_case(ref: LabelSeq) -> tuple[str, int] | None:
    """Locate a thoracic anomaly in a reference: ('t13', pos) or ('t11', pos of T11)."""
    for k, name in enumerate(ref):
        if name == "T13":
            return ("t13", k)
    for k in range(len(ref) - 1):
        if ref[k] == "T11" and ref[k + 1] == "L1":
            return ("t11", k)
    return None


def _lea_case(ref: LabelSeq) -> tuple[str, int] | None:
    """Locate a lumbar anomaly in a reference: ('l6', pos) or ('l4', last index)."""
    for k, name in enumerate(ref):
        if name == "L6":
            return ("l6", k)
    if ref and ref[-1] == "L4":
        return ("l4", len(ref) - 1)
    return None


def tea_recall(pairs: Sequence[Pair]) -> float | None:
    """Percentage of reference thoracic anomalies found at matching positions.

    Returns None when the references contain no thoracic anomaly case.
    """
    _check_pairs(pairs)
    cases = hits = 0
    for pred, ref in pairs:
        case = _tea_case(ref)
        if case is None:
            continue
        cases += 1
        kind, k = case
        if kind == "t13":
            hits += pred[k] == "T13"
        else:
            hits += pred[k] == "T11" and pred[k + 1] == "L1"
    if cases == 0:
        return None
    return 100.0 * hits / cases


def lea_recall(pairs: Sequence[Pair]) -> float | None:
    """Percentage of reference lumbar anomalies found at matching positions.

    An L4 case requires both sequences to end on L4; an L6 case requires the
    prediction to carry L6 at the reference's L6 position.  Returns None when
    the references contain no lumbar anomaly case.
    """
    _check_pairs(pairs)
    cases = hits = 0
    for pred, ref in pairs:
        case = _lea_case(ref)
        if case is None:
            continue
        cases += 1
        kind, k = case
        if kind == "l6":
            hits += pred[k] == "L6"
        else:
            hits += pred[-1] == "L4"
    if cases == 0:
        return None
    return 100.0 * hits / cases


@dataclass(frozen=True)
class EvalReport:
    """Aggregate metrics for one prediction run."""

    plp: float
    subject_correctness_mean: float
    subject_correctness_std: float
    tea_recall: float | None
    lea_recall: float | None
    n_subjects: int
    n_tea_cases: int
    n_lea_cases: int

    def to_text(self) -> str:
        def fmt(x: float | None) -> str:
            return "absent" if x is None else f"{x:.4f}"

        return "\n".join(
            [
                f"subjects:            {self.n_subjects}",
                f"perfect label %:     {self.plp:.4f}",
                "subject correctness: "
                f"{self.subject_correctness_mean:.4f} +- {self.subject_correctness_std:.4f}",
                f"TEA recall:          {fmt(self.tea_recall)} ({self.n_tea_cases} cases)",
                f"LEA recall:          {fmt(self.lea_recall)} ({self.n_lea_cases} cases)",
            ]
        )

    def to_csv_row(self, param: str = "") -> str:
        def fmt(x: float | None) -> str:
            return "" if x is None else repr(float(x))

        return ",".join(
            [
                param,
                repr(float(self.plp)),
                repr(float(self.subject_correctness_mean)),
                repr(float(self.subject_correctness_std)),
                fmt(self.tea_recall),
                fmt(self.lea_recall),
                str(self.n_subjects),
            ]
        )


def evaluate_pairs(pairs: Sequence[Pair]) -> EvalReport:
    """Compute the full report over (predicted, reference) sequence pairs."""
    _check_pairs(pairs)
    mean, std = subject_correctness(pairs)
    return EvalReport(
        plp=perfect_label_percentage(pairs),
        subject_correctness_mean=mean,
        subject_correctness_std=std,
        tea_recall=tea_recall(pairs),
        lea_recall=lea_recall(pairs),
        n_subjects=len(pairs),
        n_tea_cases=sum(1 for _, ref in pairs if _tea_case(ref) is not None),
        n_lea_cases=sum(1 for _, ref in pairs if _lea_case(ref) is not None),
    )
