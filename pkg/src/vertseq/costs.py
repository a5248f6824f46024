"""Cost model for candidate label paths.

The per-vertebra label cost combines the label head and the region head:

    label_cost[i, j] = label_scores[i, j] * label_weight
                     + region_expanded[i, j] * region_weight

Transition scores are path-dependent: a transition kind contributes at
position i only when the path actually fulfills it there.  The fulfillment
rules are structural so they stay correct under enumeration anomalies:

* last cervical   <=> the label is C7
* first thoracic  <=> the label is T1
* first lumbar    <=> the label is L1
* last thoracic   <=> the label is thoracic and the successor is lumbar
                      (never at a thoracic path end)
* last lumbar     <=> the label is lumbar and the position is terminal
* none            <=> none of the other five hold

The total path cost is the negative visibility-weighted sum of label and
transition contributions, plus an optional anomaly cost per anomaly category
used (positive values penalize anomalies) and a linear penalty per skipped
label when gap edges are enabled.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, ValidationError
from .labels import C7, L1, T1, RawPath, Region, TransitionKind, region_of
from .normalize import NormalizedOutputs

_LABEL_REGION_VEC = np.array([int(region_of(j)) for j in range(24)])


@dataclass(frozen=True)
class SolverConfig:
    """Weights and switches for cost computation and path search.

    ``anomaly_cost`` is added to a path's cost once per anomaly category
    present (thoracic-type: T12 double or T11->L1 skip; lumbar-type: L5
    double), so positive values make anomalous sequences rarer.
    ``include_none_transition`` controls whether the "none" transition head
    participates in the transition sum.
    """

    label_weight: float = 0.9
    region_weight: float = 1.1
    transition_weight: float = 0.6
    anomaly_cost: float = 0.0
    gaps_enabled: bool = False
    gap_penalty: float = 0.0
    include_none_transition: bool = True

    def __post_init__(self) -> None:
        if self.label_weight < 0 or self.region_weight < 0 or self.transition_weight < 0:
            raise ValidationError("head weights must be >= 0")
        if self.gap_penalty < 0:
            raise ValidationError("gap_penalty must be >= 0")


def build_label_cost(norm: NormalizedOutputs, cfg: SolverConfig | None = None) -> np.ndarray:
    """The (n, 24) label cost matrix combining label and region heads."""
    cfg = cfg or SolverConfig()
    out = norm.label_scores * cfg.label_weight + norm.region_expanded * cfg.region_weight
    out.setflags(write=False)
    return out


def fulfilled_transitions(labels: tuple[int, ...] | list[int], i: int) -> tuple[TransitionKind, ...]:
    """Transition kinds fulfilled at position ``i`` of a raw label path."""
    j = labels[i]
    fulfilled = []
    if j == C7:
        fulfilled.append(TransitionKind.LAST_CERVICAL)
    if j == T1:
        fulfilled.append(TransitionKind.FIRST_THORACIC)
    if j == L1:
        fulfilled.append(TransitionKind.FIRST_LUMBAR)
    terminal = i == len(labels) - 1
    if (
        not terminal
        and region_of(j) == Region.THORACIC
        and region_of(labels[i + 1]) == Region.LUMBAR
    ):
        fulfilled.append(TransitionKind.LAST_THORACIC)
    if terminal and region_of(j) == Region.LUMBAR:
        fulfilled.append(TransitionKind.LAST_LUMBAR)
    if not fulfilled:
        fulfilled.append(TransitionKind.NONE)
    return tuple(fulfilled)


def transcondition(path: RawPath, i: int, kind: TransitionKind, norm: NormalizedOutputs) -> float:
    """The transition score t[i, kind] if the kind is fulfilled at i, else 0."""
    if not 0 <= i < len(path):
        raise ContractError(f"position {i} out of range for a path of length {len(path)}")
    if kind in fulfilled_transitions(path.labels, i):
        if kind == TransitionKind.NONE:
            return float(norm.transition_scores[i, TransitionKind.NONE])
        return float(norm.transition_scores[i, kind])
    return 0.0


def transcost(path: RawPath, i: int, norm: NormalizedOutputs, cfg: SolverConfig | None = None) -> float:
    """Weighted sum of fulfilled transition scores at position ``i``."""
    cfg = cfg or SolverConfig()
    total = 0.0
    for kind in fulfilled_transitions(path.labels, i):
        if kind == TransitionKind.NONE and not cfg.include_none_transition:
            continue
        total += float(norm.transition_scores[i, kind])
    return cfg.transition_weight * total


def anomaly_category_count(path: RawPath) -> int:
    """Number of anomaly categories (thoracic, lumbar) used by a path."""
    thoracic = path.used_t12_double or path.used_t11_skip
    lumbar = path.used_l5_double
    return int(thoracic) + int(lumbar)


def pathcost(
    path: RawPath,
    norm: NormalizedOutputs,
    label_cost: np.ndarray,
    cfg: SolverConfig | None = None,
) -> float:
    """Total cost of a path; lower is better.

    Raises if the path length does not match the subject.
    """
    cfg = cfg or SolverConfig()
    n = norm.n
    if len(path) != n:
        raise ContractError(f"path length {len(path)} does not match {n} vertebrae")
    total = 0.0
    for i, j in enumerate(path.labels):
        total += norm.visibility[i] * (transcost(path, i, norm, cfg) + label_cost[i, j])
    cost = -total
    cost += cfg.anomaly_cost * anomaly_category_count(path)
    if cfg.gaps_enabled:
        cost += cfg.gap_penalty * path.total_skipped
    return cost


def pathcost_batch(
    labels: np.ndarray,
    thoracic_anomaly: np.ndarray,
    lumbar_anomaly: np.ndarray,
    skipped_total: np.ndarray,
    norm: NormalizedOutputs,
    label_cost: np.ndarray,
    cfg: SolverConfig | None = None,
) -> np.ndarray:
    """Vectorized :func:`pathcost` over a (paths, n) matrix of label indices.

    ``thoracic_anomaly`` / ``lumbar_anomaly`` are per-path anomaly category
    flags and ``skipped_total`` the per-path sum of gap widths.
    """
    cfg = cfg or SolverConfig()
    n = norm.n
    if labels.ndim != 2 or labels.shape[1] != n:
        raise ContractError(f"label matrix shape {labels.shape} does not match {n} vertebrae")
    t = norm.transition_scores
    regions = _LABEL_REGION_VEC[labels]  # (P, n)
    reward = np.zeros(labels.shape[0], dtype=float)
    for i in range(n):
        col = labels[:, i]
        tsum = np.zeros(labels.shape[0], dtype=float)
        any_kind = np.zeros(labels.shape[0], dtype=bool)
        for idx, kind in ((C7, TransitionKind.LAST_CERVICAL), (T1, TransitionKind.FIRST_THORACIC), (L1, TransitionKind.FIRST_LUMBAR)):
            mask = col == idx
            tsum += mask * t[i, kind]
            any_kind |= mask
        if i < n - 1:
            mask = (regions[:, i] == int(Region.THORACIC)) & (regions[:, i + 1] == int(Region.LUMBAR))
            tsum += mask * t[i, TransitionKind.LAST_THORACIC]
            any_kind |= mask
        else:
            mask = regions[:, i] == int(Region.LUMBAR)
            tsum += mask * t[i, TransitionKind.LAST_LUMBAR]
            any_kind |= mask
        if cfg.include_none_transition:
            tsum += (~any_kind) * t[i, TransitionKind.NONE]
        reward += norm.visibility[i] * (cfg.transition_weight * tsum + label_cost[i, col])
    cost = -reward
    categories = thoracic_anomaly.astype(int) + lumbar_anomaly.astype(int)
    cost += cfg.anomaly_cost * categories
    if cfg.gaps_enabled:
        cost += cfg.gap_penalty * skipped_total
    return cost
