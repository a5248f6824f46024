"""Exact minimum-cost path search over the anatomical constraint set.

The search space is a layered DAG: one layer per vertebra instance, one node
per (raw label, anomaly budget) pair.  The anomaly budget is a bitmask over
the three one-shot path events (T12 double, L5 double, T11->L1 skip); the
T12 double and the skip are mutually exclusive, leaving six valid masks.
Edges are: consecutive label (+1), the three anomaly edges, and, when
enabled, gap edges (+k, k >= 2) penalized per skipped label.

Successor-dependent transition rewards ("last thoracic") are accumulated on
edges; terminal-dependent rewards ("last lumbar") at the final layer.  The
backward pass stores, per (instance, budget, label), the exact minimum
suffix cost; the forward reconstruction then walks cost-preserving edges,
choosing the smallest label at every step, which yields the lexicographically
smallest raw sequence among minimum-cost paths, and finally prefers fewer
anomaly flags.  ``solve_bruteforce`` enumerates every valid path explicitly
and is the reference oracle for all of this.

Unreachable states carry +inf as a sentinel; infinities are only ever added
to finite values or compared, never multiplied or subtracted, so no NaN can
propagate.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .costs import SolverConfig, build_label_cost, pathcost, pathcost_batch
from .errors import ContractError, VertseqError
from .labels import (
    C7,
    L1,
    T1,
    T11,
    T12,
    L5,
    N_RAW_LABELS,
    RawPath,
    TransitionKind,
    decode_anomalies,
)
from .normalize import NormalizedOutputs

# Budget bits for the three one-shot path events.
_T12B, _L5B, _SKIPB = 1, 2, 4
_VALID_MASKS = (0, _T12B, _L5B, _T12B | _L5B, _SKIPB, _L5B | _SKIPB)
_MASK_ROW = {mask: row for row, mask in enumerate(_VALID_MASKS)}
# Anomaly categories per mask: thoracic-type (T12 double or skip) and lumbar-type.
_MASK_CATEGORIES = np.array(
    [int(bool(m & (_T12B | _SKIPB))) + int(bool(m & _L5B)) for m in _VALID_MASKS]
)

_INF = np.inf

_LABELS = np.arange(N_RAW_LABELS)
_IS_C7 = _LABELS == C7
_IS_T1 = _LABELS == T1
_IS_L1 = _LABELS == L1
_IS_THORACIC = (_LABELS >= T1) & (_LABELS <= T12)
_IS_LUMBAR = _LABELS >= L1
_HAS_STATIC_KIND = _IS_C7 | _IS_T1 | _IS_L1


@dataclass(frozen=True)
class PathResult:
    """A solved labeling: the raw path, its decoded labels, and anomaly flags."""

    raw_path: RawPath
    final_labels: tuple[str, ...]
    total_cost: float
    tea_flag: bool  # thoracic enumeration anomaly used (T12 double or T11->L1 skip)
    lea_flag: bool  # lumbar enumeration anomaly used (L5 double)


def _node_cost_tables(norm: NormalizedOutputs, label_cost: np.ndarray, cfg: SolverConfig):
    """Per-(instance, label) negated node costs for the three successor contexts.

    Returns (nc_nonlumbar_succ, nc_lumbar_succ, nc_terminal), each (n, 24):
    the cost contribution of labeling instance i with label j given that the
    path successor is non-lumbar, lumbar, or absent (terminal).
    """
    t = norm.transition_scores
    s = norm.visibility
    w_t = cfg.transition_weight

    static = (
        np.outer(t[:, TransitionKind.LAST_CERVICAL], _IS_C7)
        + np.outer(t[:, TransitionKind.FIRST_THORACIC], _IS_T1)
        + np.outer(t[:, TransitionKind.FIRST_LUMBAR], _IS_L1)
    )
    ts_nonlumbar = static.copy()
    ts_lumbar = static + np.outer(t[:, TransitionKind.LAST_THORACIC], _IS_THORACIC)
    ts_terminal = static + np.outer(t[:, TransitionKind.LAST_LUMBAR], _IS_LUMBAR)
    if cfg.include_none_transition:
        none_col = t[:, TransitionKind.NONE]
        ts_nonlumbar += np.outer(none_col, ~_HAS_STATIC_KIND)
        ts_lumbar += np.outer(none_col, ~_HAS_STATIC_KIND & ~_IS_THORACIC)
        ts_terminal += np.outer(none_col, ~_HAS_STATIC_KIND & ~_IS_LUMBAR)

    def negate(ts):
        return -(s[:, None] * (label_cost + w_t * ts))

    return negate(ts_nonlumbar), negate(ts_lumbar), negate(ts_terminal)


def _gap_penalty_matrix(gap_penalty: float) -> np.ndarray:
    """pen[j, j'] = gap_penalty * (j' - j - 1) for j' >= j + 2, else +inf."""
    widths = _LABELS[None, :] - _LABELS[:, None] - 1
    pen = np.where(widths >= 1, gap_penalty * widths.astype(float), _INF)
    return pen


def solve(norm: NormalizedOutputs, cfg: SolverConfig | None = None) -> PathResult:
    """Minimum-cost valid path for one subject.

    Ties are broken toward the lexicographically smallest raw label sequence,
    then toward fewer anomaly flags; the result is identical to
    :func:`solve_bruteforce` on the same inputs.
    """
    cfg = cfg or SolverConfig()
    n = norm.n
    if n < 1:
        raise ContractError("cannot solve an empty subject")

    label_cost = build_label_cost(norm, cfg)
    nc_n, nc_l, nc_t = _node_cost_tables(norm, label_cost, cfg)
    n_masks = len(_VALID_MASKS)

    # nc for a consecutive step out of label j (successor j+1).
    consec_nc = np.where(_LABELS >= T12, nc_l, nc_n)  # (n, 24); col 23 unused
    consec_nc = consec_nc.copy()
    consec_nc[:, N_RAW_LABELS - 1] = 0.0  # paired with an inf, kept finite

    gap_pen = _gap_penalty_matrix(cfg.gap_penalty) if cfg.gaps_enabled else None

    # value[i, row, j]: exact minimum cost of positions i..n-1 given label j at
    # position i, where the suffix's edges consume exactly the budget bits of
    # _VALID_MASKS[row]; +inf where unreachable.
    value = np.full((n, n_masks, N_RAW_LABELS), _INF)
    value[n - 1, _MASK_ROW[0]] = nc_t[n - 1]

    for i in range(n - 2, -1, -1):
        nxt = value[i + 1]  # (masks, 24)
        shifted = np.full((n_masks, N_RAW_LABELS), _INF)
        shifted[:, :-1] = nxt[:, 1:]
        cur = consec_nc[i][None, :] + shifted

        for mask in _VALID_MASKS:
            row = _MASK_ROW[mask]
            if mask & _T12B:
                cand = nc_n[i, T12] + nxt[_MASK_ROW[mask & ~_T12B], T12]
                if cand < cur[row, T12]:
                    cur[row, T12] = cand
            if mask & _L5B:
                cand = nc_l[i, L5] + nxt[_MASK_ROW[mask & ~_L5B], L5]
                if cand < cur[row, L5]:
                    cur[row, L5] = cand
            if mask & _SKIPB:
                cand = nc_l[i, T11] + nxt[_MASK_ROW[mask & ~_SKIPB], L1]
                if cand < cur[row, T11]:
                    cur[row, T11] = cand

        if gap_pen is not None:
            nc_by_target = np.where(_IS_LUMBAR[None, :], nc_l[i][:, None], nc_n[i][:, None])
            gap_cand = (nc_by_target + gap_pen)[None, :, :] + nxt[:, None, :]
            cur = np.minimum(cur, gap_cand.min(axis=2))

        value[i] = cur

    totals = value[0] + cfg.anomaly_cost * _MASK_CATEGORIES[:, None].astype(float)
    best = totals.min()
    if not np.isfinite(best):
        raise VertseqError("internal error: no feasible path found")

    labels, used_mask = _reconstruct(value, totals, best, nc_n, nc_l, cfg)
    raw_path = _assemble_path(labels, used_mask)
    cost = pathcost(raw_path, norm, label_cost, cfg)
    if abs(cost - best) > 1e-9 + 1e-9 * abs(cost):
        raise VertseqError(
            f"internal error: reconstructed path cost {cost} does not match optimum {best}"
        )
    return PathResult(
        raw_path=raw_path,
        final_labels=decode_anomalies(raw_path),
        total_cost=cost,
        tea_flag=raw_path.used_t12_double or raw_path.used_t11_skip,
        lea_flag=raw_path.used_l5_double,
    )


def _reconstruct(value, totals, best, nc_n, nc_l, cfg: SolverConfig):
    """Walk cost-preserving edges front to back, smallest label first.

    Tracks every surviving (remaining-budget, total-budget) pair so that exact
    cost ties between edge interpretations (the T11->L1 skip vs a width-1 gap)
    stay open until the final fewer-flags tie-break.
    """
    n = value.shape[0]
    start_cols = np.flatnonzero((totals == best).any(axis=0))
    j = int(start_cols[0])
    states = {
        (mask, mask)
        for mask in _VALID_MASKS
        if totals[_MASK_ROW[mask], j] == best
    }
    labels = [j]

    for i in range(n - 1):
        options: dict[int, set[tuple[int, int]]] = {}

        def offer(next_label: int, state: tuple[int, int]) -> None:
            options.setdefault(next_label, set()).add(state)

        for mask, used in states:
            here = value[i, _MASK_ROW[mask], j]
            if j < N_RAW_LABELS - 1:
                nc = nc_l[i, j] if j >= T12 else nc_n[i, j]
                if nc + value[i + 1, _MASK_ROW[mask], j + 1] == here:
                    offer(j + 1, (mask, used))
            if j == T12 and mask & _T12B:
                rest = mask & ~_T12B
                if nc_n[i, T12] + value[i + 1, _MASK_ROW[rest], T12] == here:
                    offer(T12, (rest, used))
            if j == L5 and mask & _L5B:
                rest = mask & ~_L5B
                if nc_l[i, L5] + value[i + 1, _MASK_ROW[rest], L5] == here:
                    offer(L5, (rest, used))
            if j == T11 and mask & _SKIPB:
                rest = mask & ~_SKIPB
                if nc_l[i, T11] + value[i + 1, _MASK_ROW[rest], L1] == here:
                    offer(L1, (rest, used))
            if cfg.gaps_enabled:
                for target in range(j + 2, N_RAW_LABELS):
                    nc = nc_l[i, j] if target >= L1 else nc_n[i, j]
                    pen = cfg.gap_penalty * float(target - j - 1)
                    if (nc + pen) + value[i + 1, _MASK_ROW[mask], target] == here:
                        offer(target, (mask, used))

        if not options:
            raise VertseqError("internal error: reconstruction dead end")
        j = min(options)
        states = options[j]
        labels.append(j)

    final = sorted(
        (used for mask, used in states if mask == 0),
        key=lambda used: (bin(used).count("1"), used),
    )
    if not final:
        raise VertseqError("internal error: leftover budget after reconstruction")
    return labels, final[0]


def _assemble_path(labels: list[int], used_mask: int) -> RawPath:
    skip_used = bool(used_mask & _SKIPB)
    gaps = []
    for a, b in zip(labels, labels[1:]):
        step = b - a
        if step <= 1:
            gaps.append(0)
        elif step == 2 and a == T11 and skip_used:
            gaps.append(0)
        else:
            gaps.append(step - 1)
    return RawPath(
        labels=tuple(labels),
        used_t12_double=bool(used_mask & _T12B),
        used_l5_double=bool(used_mask & _L5B),
        used_t11_skip=skip_used,
        gaps=tuple(gaps),
    )


# ---------------------------------------------------------------------------
# Exhaustive oracle


_ENUM_CACHE: dict[tuple[int, bool], tuple[np.ndarray, ...]] = {}


def enumerate_valid_paths(n: int, gaps_enabled: bool) -> tuple[np.ndarray, ...]:
    """All valid raw paths of length n, in lexicographic label order.

    Returns read-only arrays (labels (P, n), t12_double (P,), l5_double (P,),
    t11_skip (P,), skipped_total (P,)).  Paths with identical labels but
    different edge interpretations appear with the gap interpretation first.
    """
    if n < 1:
        raise ContractError("paths have length >= 1")
    key = (n, gaps_enabled)
    if key in _ENUM_CACHE:
        return _ENUM_CACHE[key]

    rows: list[list[int]] = []
    flags: list[tuple[bool, bool, bool, int]] = []
    seq: list[int] = []

    def record(mask: int, skipped: int) -> None:
        rows.append(list(seq))
        flags.append((bool(mask & _T12B), bool(mask & _L5B), bool(mask & _SKIPB), skipped))

    def extend(mask: int, skipped: int) -> None:
        if len(seq) == n:
            record(mask, skipped)
            return
        j = seq[-1]
        if j == T12 and not mask & (_T12B | _SKIPB):
            seq.append(T12)
            extend(mask | _T12B, skipped)
            seq.pop()
        if j == L5 and not mask & _L5B:
            seq.append(L5)
            extend(mask | _L5B, skipped)
            seq.pop()
        if j < N_RAW_LABELS - 1:
            seq.append(j + 1)
            extend(mask, skipped)
            seq.pop()
        for target in range(j + 2, N_RAW_LABELS):
            if gaps_enabled:
                seq.append(target)
                extend(mask, skipped + target - j - 1)
                seq.pop()
            if target == L1 and j == T11 and not mask & (_SKIPB | _T12B):
                seq.append(target)
                extend(mask | _SKIPB, skipped)
                seq.pop()

    for start in range(N_RAW_LABELS):
        seq = [start]
        extend(0, 0)

    labels = np.array(rows, dtype=np.int8)
    t12 = np.array([f[0] for f in flags], dtype=bool)
    l5 = np.array([f[1] for f in flags], dtype=bool)
    skip = np.array([f[2] for f in flags], dtype=bool)
    skipped = np.array([f[3] for f in flags], dtype=np.int32)
    for arr in (labels, t12, l5, skip, skipped):
        arr.setflags(write=False)
    _ENUM_CACHE[key] = (labels, t12, l5, skip, skipped)
    return _ENUM_CACHE[key]


def solve_bruteforce(
    norm: NormalizedOutputs,
    cfg: SolverConfig | None = None,
    max_vertebrae: int = 10,
) -> PathResult:
    """Reference oracle: evaluate every valid path explicitly and take the best.

    Refuses subjects longer than ``max_vertebrae`` (default 10) because the
    enumeration grows combinatorially, especially with gaps enabled.
    """
    cfg = cfg or SolverConfig()
    n = norm.n
    if n > max_vertebrae:
        raise ContractError(
            f"brute force is capped at {max_vertebrae} vertebrae, got {n}"
        )
    labels, t12, l5, skip, skipped = enumerate_valid_paths(n, cfg.gaps_enabled)
    label_cost = build_label_cost(norm, cfg)
    costs = pathcost_batch(labels, t12 | skip, l5, skipped, norm, label_cost, cfg)
    # Enumeration order is lexicographic with gap-interpretation twins first,
    # so the first index attaining the minimum realizes the full tie-break
    # (cost, lexicographic labels, fewer anomaly flags).
    winner = int(np.flatnonzero(costs == costs.min())[0])
    path_labels = [int(x) for x in labels[winner]]
    mask = (
        (_T12B if t12[winner] else 0)
        | (_L5B if l5[winner] else 0)
        | (_SKIPB if skip[winner] else 0)
    )
    raw_path = _assemble_path(path_labels, mask)
    cost = pathcost(raw_path, norm, label_cost, cfg)
    return PathResult(
        raw_path=raw_path,
        final_labels=decode_anomalies(raw_path),
        total_cost=cost,
        tea_flag=bool(t12[winner] or skip[winner]),
        lea_flag=bool(l5[winner]),
    )


def count_valid_paths(n: int, cfg: SolverConfig | None = None) -> int:
    """Number of distinct valid raw paths of length n under the config.

    Paths that share labels but differ in edge interpretation (T11->L1 skip
    vs a width-1 gap) count separately, matching the enumerator.
    """
    cfg = cfg or SolverConfig()
    if n < 1:
        raise ContractError("paths have length >= 1")
    # ways[mask_row][label] = number of length-m prefixes ending there.
    ways = [[0] * N_RAW_LABELS for _ in _VALID_MASKS]
    for j in range(N_RAW_LABELS):
        ways[_MASK_ROW[0]][j] = 1
    for _ in range(n - 1):
        nxt = [[0] * N_RAW_LABELS for _ in _VALID_MASKS]
        for mask in _VALID_MASKS:
            row = _MASK_ROW[mask]
            for j in range(N_RAW_LABELS):
                count = ways[row][j]
                if not count:
                    continue
                if j < N_RAW_LABELS - 1:
                    nxt[row][j + 1] += count
                if j == T12 and not mask & (_T12B | _SKIPB):
                    nxt[_MASK_ROW[mask | _T12B]][T12] += count
                if j == L5 and not mask & _L5B:
                    nxt[_MASK_ROW[mask | _L5B]][L5] += count
                if j == T11 and not mask & (_SKIPB | _T12B):
                    nxt[_MASK_ROW[mask | _SKIPB]][L1] += count
                if cfg.gaps_enabled:
                    for target in range(j + 2, N_RAW_LABELS):
                        nxt[row][target] += count
        ways = nxt
    return sum(sum(row) for row in ways)
