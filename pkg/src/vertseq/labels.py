"""Vertebra label alphabet, anatomical regions, transition kinds, and path validity.

The 24-entry raw alphabet (C1..C7, T1..T12, L1..L5) is the canonical
serialization order for every score vector and matrix in this package.
Supernumerary vertebrae (T13, L6) are never solver states; they are encoded
as a doubled T12 / doubled L5 and only appear after decoding.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Sequence

from .errors import ContractError, ValidationError

RAW_LABELS: tuple[str, ...] = tuple(
    [f"C{i}" for i in range(1, 8)]
    + [f"T{i}" for i in range(1, 13)]
    + [f"L{i}" for i in range(1, 6)]
)
N_RAW_LABELS = len(RAW_LABELS)  # 24

# Decoded label space: raw alphabet plus T13 and L6.
FINAL_LABELS: tuple[str, ...] = tuple(
    [f"C{i}" for i in range(1, 8)]
    + [f"T{i}" for i in range(1, 14)]
    + [f"L{i}" for i in range(1, 7)]
)

_RAW_INDEX = {name: i for i, name in enumerate(RAW_LABELS)}

# Landmark indices used throughout the solver.
C7 = 6
T1 = 7
T11 = 17
T12 = 18
L1 = 19
L5 = 23


class Region(IntEnum):
    """Anatomical region; also the serialization order of region score vectors."""

    CERVICAL = 0
    THORACIC = 1
    LUMBAR = 2


class TransitionKind(IntEnum):
    """Transition-head classes; the order here is the file-format order."""

    NONE = 0
    LAST_CERVICAL = 1
    FIRST_THORACIC = 2
    LAST_THORACIC = 3
    FIRST_LUMBAR = 4
    LAST_LUMBAR = 5


def region_of(label: int) -> Region:
    """Region of a raw label index: 0-6 cervical, 7-18 thoracic, 19-23 lumbar."""
    if not 0 <= label < N_RAW_LABELS:
        raise ContractError(f"raw label index out of range: {label}")
    if label <= C7:
        return Region.CERVICAL
    if label <= T12:
        return Region.THORACIC
    return Region.LUMBAR


def label_index(name: str) -> int:
    """Raw label index for a name like 'T11'."""
    try:
        return _RAW_INDEX[name]
    except KeyError:
        raise ValidationError(f"unknown raw label {name!r}") from None


def label_name(index: int) -> str:
    if not 0 <= index < N_RAW_LABELS:
        raise ContractError(f"raw label index out of range: {index}")
    return RAW_LABELS[index]


@dataclass(frozen=True)
class RawPath:
    """A candidate labeling of a vertebra chain in raw label space.

    ``labels`` holds raw label indices, one per vertebra, cranio-caudal.
    ``gaps`` holds one entry per step (length n-1): the number of labels
    skipped on that step, 0 everywhere unless gap edges were used.  The
    anomaly flags distinguish the dedicated T11->L1 edge from a width-1 gap
    edge over the same labels.
    """

    labels: tuple[int, ...]
    used_t12_double: bool = False
    used_l5_double: bool = False
    used_t11_skip: bool = False
    gaps: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        labels = tuple(int(x) for x in self.labels)
        object.__setattr__(self, "labels", labels)
        if not self.gaps:
            object.__setattr__(self, "gaps", (0,) * max(len(labels) - 1, 0))
        else:
            object.__setattr__(self, "gaps", tuple(int(g) for g in self.gaps))

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def total_skipped(self) -> int:
        return sum(self.gaps)

    @classmethod
    def from_labels(cls, labels: Iterable[int | str], *, t11_skip_as_gap: bool = False) -> "RawPath":
        """Build a path from raw labels, inferring flags and gap markers.

        A T11->L1 step is read as the dedicated anomaly edge unless
        ``t11_skip_as_gap`` is set, in which case it becomes a width-1 gap.
        """
        idx = tuple(label_index(x) if isinstance(x, str) else int(x) for x in labels)
        if not idx:
            raise ContractError("a path needs at least one label")
        t12_double = l5_double = t11_skip = False
        gaps = []
        for a, b in zip(idx, idx[1:]):
            step = b - a
            if step == 1:
                gaps.append(0)
            elif step == 0 and a == T12:
                if t12_double:
                    raise ValidationError("T12 double used more than once")
                t12_double = True
                gaps.append(0)
            elif step == 0 and a == L5:
                if l5_double:
                    raise ValidationError("L5 double used more than once")
                l5_double = True
                gaps.append(0)
            elif step == 2 and a == T11 and not t11_skip_as_gap and not t11_skip:
                t11_skip = True
                gaps.append(0)
            elif step >= 2:
                gaps.append(step - 1)
            else:
                raise ValidationError(
                    f"invalid step {label_name(a)} -> {label_name(b)}"
                )
        return cls(idx, t12_double, l5_double, t11_skip, tuple(gaps))


def validate_sequence(path: RawPath, gaps_allowed: bool = False) -> list[str]:
    """Check a path against the anatomical constraint set.

    Returns every violated constraint as a human-readable string; an empty
    list means the path is valid.  The lumbar lower bound is deliberately not
    checked: a chain ending mid-lumbar is a legal truncated field of view.
    """
    violations: list[str] = []
    labels = path.labels
    n = len(labels)
    if n == 0:
        return ["path is empty"]
    for x in labels:
        if not 0 <= x < N_RAW_LABELS:
            return [f"label index out of range: {x}"]
    if len(path.gaps) != n - 1:
        violations.append(
            f"gap markers have length {len(path.gaps)}, expected {n - 1}"
        )
        return violations

    t12_doubles = l5_doubles = t11_skips = 0
    for k, (a, b) in enumerate(zip(labels, labels[1:])):
        step = b - a
        gap = path.gaps[k]
        if step < 0:
            violations.append(
                f"spatial order violated at step {k}: {label_name(a)} then {label_name(b)}"
            )
        elif step == 0:
            if gap != 0:
                violations.append(f"gap marker on a repeated label at step {k}")
            if a == T12:
                t12_doubles += 1
            elif a == L5:
                l5_doubles += 1
            else:
                violations.append(f"repeated label {label_name(a)} at step {k}")
        elif step == 1:
            if gap != 0:
                violations.append(f"gap marker on a consecutive step {k}")
        else:  # step >= 2
            if gap == step - 1:
                if not gaps_allowed:
                    violations.append(
                        f"gap of {step - 1} at step {k} but gaps are disabled"
                    )
            elif gap == 0 and step == 2 and a == T11:
                t11_skips += 1
            else:
                violations.append(
                    f"step {k} jumps {label_name(a)} -> {label_name(b)} "
                    f"with gap marker {gap}"
                )

    if t12_doubles > 1:
        violations.append("T12 double used more than once")
    if l5_doubles > 1:
        violations.append("L5 double used more than once")
    if t11_skips > 1:
        violations.append("T11->L1 skip used more than once")
    if t12_doubles != int(path.used_t12_double):
        violations.append("used_t12_double flag inconsistent with labels")
    if l5_doubles != int(path.used_l5_double):
        violations.append("used_l5_double flag inconsistent with labels")
    if t11_skips != int(path.used_t11_skip):
        violations.append("used_t11_skip flag inconsistent with labels")
    if path.used_t12_double and path.used_t11_skip:
        violations.append("T12 double and T11->L1 skip are mutually exclusive")

    # Region count caps.  A monotone path over this alphabet cannot exceed
    # them, but they are part of the contract and asserted explicitly.
    n_cerv = sum(1 for x in labels if x <= C7)
    n_thor = sum(1 for x in labels if T1 <= x <= T12)
    n_lumb = sum(1 for x in labels if x >= L1)
    if n_cerv > 7:
        violations.append(f"{n_cerv} cervical labels, maximum is 7")
    thor_cap = 13 if t12_doubles else (11 if t11_skips else 12)
    if n_thor > thor_cap:
        violations.append(f"{n_thor} thoracic labels, maximum is {thor_cap}")
    if n_lumb > (6 if l5_doubles else 5):
        violations.append(f"{n_lumb} lumbar labels, maximum is {6 if l5_doubles else 5}")
    return violations


def decode_anomalies(path: RawPath) -> tuple[str, ...]:
    """Rewrite doubled T12/L5 path elements as T13/L6.

    The output has the same length as the path; the second element of a T12
    double becomes T13, the second element of an L5 double becomes L6, and
    everything else passes through.  Invalid paths are rejected.
    """
    violations = validate_sequence(path, gaps_allowed=True)
    if violations:
        raise ValidationError("invalid path: " + "; ".join(violations))
    out = []
    for k, x in enumerate(path.labels):
        if k > 0 and path.labels[k - 1] == x:
            out.append("T13" if x == T12 else "L6")
        else:
            out.append(label_name(x))
    return tuple(out)


def encode_anomalies(final_labels: Sequence[str], *, t11_skip_as_gap: bool = False) -> RawPath:
    """Inverse of :func:`decode_anomalies`: map T13/L6 back onto doubled raw labels."""
    raw = []
    for k, name in enumerate(final_labels):
        if name == "T13":
            if k == 0 or final_labels[k - 1] != "T12":
                raise ValidationError("T13 must follow a T12")
            raw.append(T12)
        elif name == "L6":
            if k == 0 or final_labels[k - 1] != "L5":
                raise ValidationError("L6 must follow an L5")
            raw.append(L5)
        else:
            raw.append(label_index(name))
    return RawPath.from_labels(raw, t11_skip_as_gap=t11_skip_as_gap)
