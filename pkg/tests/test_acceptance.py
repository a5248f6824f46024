"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines as they complete.  Every tolerance and runtime budget is asserted here.
"""
import math
import time

import numpy as np
import pytest

from vertseq import (
    NoiseConfig,
    RawPath,
    SolverConfig,
    SubjectRecord,
    SynthConfig,
    all_fov_windows,
    build_label_cost,
    crop_fov,
    emit_classifier_outputs,
    evaluate_pairs,
    generate_corpus,
    generate_spine,
    inject_gap,
    normalize_outputs,
    pathcost,
    solve,
    solve_bruteforce,
    validate_sequence,
)

from conftest import fig3_outputs, random_outputs

UNIT = SolverConfig(label_weight=1.0, region_weight=1.0, transition_weight=1.0)
LABEL_ONLY = SolverConfig(label_weight=1.0, region_weight=1.0, transition_weight=0.0)


def report(criterion, ok, detail=""):
    line = f"[acceptance] {criterion}: {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f"  ({detail})"
    print(line, flush=True)
    assert ok, line


def random_solver_config(rng, gaps):
    return SolverConfig(
        label_weight=float(rng.uniform(0.1, 2.0)),
        region_weight=float(rng.uniform(0.1, 2.0)),
        transition_weight=float(rng.uniform(0.0, 2.0)),
        anomaly_cost=float(rng.uniform(-1.0, 1.0)),
        gaps_enabled=gaps,
        gap_penalty=float(rng.uniform(0.0, 1.0)),
        include_none_transition=bool(rng.integers(2)),
    )


def test_criterion_1_worked_example_exact():
    started = time.perf_counter()
    norm = fig3_outputs()
    weighted = fig3_outputs(visibility=(1.0, 1.0, 0.9, 0.1))
    label_cost = build_label_cost(norm, UNIT)
    red = RawPath.from_labels(["T11", "T12", "L1", "L2"])
    blue = RawPath.from_labels(["T11", "T12", "T12", "L1"])
    quoted = [
        (pathcost(red, norm, label_cost, LABEL_ONLY), -2.8),
        (pathcost(blue, norm, label_cost, LABEL_ONLY), -2.6),
        (pathcost(red, norm, label_cost, UNIT), -3.3),
        (pathcost(blue, norm, label_cost, UNIT), -4.1),
        (pathcost(red, weighted, label_cost, UNIT), -2.87),
        (pathcost(blue, weighted, label_cost, UNIT), -2.58),
    ]
    costs_ok = all(abs(got - want) < 1e-12 for got, want in quoted)
    outcomes_ok = (
        solve(norm, LABEL_ONLY).final_labels == ("T11", "T12", "L1", "L2")
        and solve(norm, UNIT).final_labels == ("T11", "T12", "T13", "L1")
        and solve(weighted, UNIT).final_labels == ("T11", "T12", "L1", "L2")
    )
    elapsed = time.perf_counter() - started
    report(
        "1 worked-example reproduction",
        costs_ok and outcomes_ok and elapsed < 1.0,
        f"max cost error {max(abs(g - w) for g, w in quoted):.2e}, {elapsed:.2f}s",
    )


def test_criterion_2_oracle_equivalence():
    started = time.perf_counter()
    rng = np.random.default_rng(2024)
    configs = [random_solver_config(rng, gaps=(k % 2 == 0)) for k in range(10)]
    lengths_gapless = [2, 3, 4, 5, 6, 7, 8]
    lengths_gaps = [2, 3, 4, 5, 6, 2, 3, 4, 5, 6, 7, 8]
    checked = 0
    for k in range(1000):
        cfg = configs[k % 10]
        pool = lengths_gaps if cfg.gaps_enabled else lengths_gapless
        n = pool[k % len(pool)]
        norm = random_outputs(rng, n)
        a = solve(norm, cfg)
        b = solve_bruteforce(norm, cfg)
        assert a.final_labels == b.final_labels, (k, cfg, a, b)
        assert abs(a.total_cost - b.total_cost) < 1e-9
        checked += 1
    elapsed = time.perf_counter() - started
    report(
        "2 oracle equivalence",
        checked == 1000 and elapsed < 60.0,
        f"{checked} subjects, 10 configs, {elapsed:.1f}s",
    )


def test_criterion_3_constraint_fuzzing():
    started = time.perf_counter()
    rng = np.random.default_rng(3033)
    kinds = ["random"] * 7 + ["uniform", "zero", "random"]
    violations = 0
    for k in range(10_000):
        n = int(rng.integers(1, 11))
        cfg = random_solver_config(rng, gaps=bool(rng.integers(2)))
        norm = random_outputs(rng, n, kind=kinds[k % len(kinds)])
        result = solve(norm, cfg)
        if validate_sequence(result.raw_path, cfg.gaps_enabled):
            violations += 1
    elapsed = time.perf_counter() - started
    report(
        "3 constraint fuzzing",
        violations == 0 and elapsed < 60.0,
        f"10000 subjects, {violations} violations, {elapsed:.1f}s",
    )


def test_criterion_4_noiseless_fov_recovery():
    started = time.perf_counter()
    branch_configs = {
        "eleven-thoracic": SynthConfig(tea_rate=1, lea_rate=0, t11_vs_t13_split=1),
        "thirteen-thoracic": SynthConfig(tea_rate=1, lea_rate=0, t11_vs_t13_split=0),
        "four-lumbar": SynthConfig(tea_rate=0, lea_rate=1, l4_vs_l6_split=1),
        "six-lumbar": SynthConfig(tea_rate=0, lea_rate=1, l4_vs_l6_split=0),
    }
    pairs = []
    for branch, cfg in branch_configs.items():
        for seed in range(50):
            rng = np.random.default_rng([4044, seed])
            truth = generate_spine(cfg, rng=rng)
            subject = emit_classifier_outputs(truth, NoiseConfig(), rng=rng, subject_id=branch)
            for window in all_fov_windows(subject, min_len=2):
                pairs.append(
                    (solve(normalize_outputs(window)).final_labels, window.reference_labels)
                )
    result = evaluate_pairs(pairs)
    elapsed = time.perf_counter() - started
    ok = (
        result.plp == 100.0
        and result.tea_recall == 100.0
        and result.lea_recall == 100.0
        and result.n_tea_cases > 0
        and result.n_lea_cases > 0
        and elapsed < 120.0
    )
    report(
        "4 noiseless synthetic recovery",
        ok,
        f"{result.n_subjects} windows, PLP {result.plp}, "
        f"TEA {result.tea_recall} ({result.n_tea_cases}), "
        f"LEA {result.lea_recall} ({result.n_lea_cases}), {elapsed:.1f}s",
    )


def _junction_window_corpus():
    """Frozen noisy corpus of short windows around the thoracolumbar junction."""
    noise = NoiseConfig(
        label_confusion=0.5,
        transition_strength=0.4,
        head_dropout=0.15,
        visibility_boundary_decay=0.7,
    )
    branch_configs = [
        SynthConfig(tea_rate=1, lea_rate=0, t11_vs_t13_split=1),
        SynthConfig(tea_rate=1, lea_rate=0, t11_vs_t13_split=0),
        SynthConfig(tea_rate=0, lea_rate=1, l4_vs_l6_split=1),
        SynthConfig(tea_rate=0, lea_rate=1, l4_vs_l6_split=0),
        SynthConfig(tea_rate=0, lea_rate=0),
    ]
    width = 4
    subjects = []
    k = 0
    for cfg in branch_configs:
        for _ in range(20):
            rng = np.random.default_rng([5055, k])
            k += 1
            truth = generate_spine(cfg, rng=rng)
            subject = emit_classifier_outputs(truth, noise, rng=rng, subject_id=f"jw{k}")
            first_lumbar = next(i for i, x in enumerate(truth) if x.startswith("L"))
            start = max(0, first_lumbar - 1 - int(rng.integers(1, width - 1)))
            start = min(start, len(truth) - width)
            subjects.append(crop_fov(subject, start, width))
    return subjects


def test_criterion_5_gamma_extremes():
    started = time.perf_counter()
    subjects = _junction_window_corpus()
    norms = [normalize_outputs(s) for s in subjects]
    grid = [k * 0.25 for k in range(-8, 9)]
    counts = []
    for gamma in grid:
        cfg = SolverConfig(anomaly_cost=gamma)
        anomalous = sum(
            1 for norm in norms if (lambda r: r.tea_flag or r.lea_flag)(solve(norm, cfg))
        )
        counts.append(anomalous)
    monotone = all(a >= b for a, b in zip(counts, counts[1:]))
    ok = monotone and counts[0] == len(subjects) and counts[-1] == 0
    elapsed = time.perf_counter() - started
    report(
        "5 anomaly-cost extremes",
        ok,
        f"counts over [-2,2]/0.25: {counts}, {elapsed:.1f}s",
    )


def test_criterion_6_gap_two_regime():
    started = time.perf_counter()
    cfg = SynthConfig(tea_rate=0, lea_rate=0, seed=6066)
    subjects = []
    for k in range(50):
        rng = np.random.default_rng([cfg.seed, k])
        truth = generate_spine(cfg, rng=rng)
        subject = emit_classifier_outputs(truth, NoiseConfig(), rng=rng, subject_id=f"gap{k}")
        subjects.append(inject_gap(subject, seed=[6067, k]))
    norms = [normalize_outputs(s) for s in subjects]

    zero_penalty = SolverConfig(gaps_enabled=True, gap_penalty=0.0)
    exact = sum(
        solve(norm, zero_penalty).final_labels == subject.reference_labels
        for norm, subject in zip(norms, subjects)
    )
    gapless = [solve(norm).final_labels for norm in norms]
    threshold = None
    for penalty in (0.5, 1.0, 2.0, 4.0, 8.0):
        cfg_p = SolverConfig(gaps_enabled=True, gap_penalty=penalty)
        if all(
            solve(norm, cfg_p).final_labels == base for norm, base in zip(norms, gapless)
        ):
            threshold = penalty
            break
    elapsed = time.perf_counter() - started
    ok = exact == len(subjects) and threshold is not None and elapsed < 60.0
    report(
        "6 gap handling two-regime",
        ok,
        f"zero-penalty exact {exact}/{len(subjects)}, "
        f"gap-free regime from penalty {threshold}, {elapsed:.1f}s",
    )


def test_criterion_7_no_anomaly_label_transform():
    started = time.perf_counter()
    cfg = SynthConfig(tea_rate=0.5, lea_rate=0.3, l4_vs_l6_split=1.0, seed=7077)
    normal = generate_corpus(cfg, NoiseConfig(), 120)
    blinded = generate_corpus(cfg, NoiseConfig(), 120, anomaly_free_heads=True)

    def run(corpus):
        return evaluate_pairs(
            [(solve(normalize_outputs(s)).final_labels, s.reference_labels) for s in corpus]
        )

    baseline, transformed = run(normal), run(blinded)
    ok = (
        baseline.n_tea_cases > 0
        and transformed.n_tea_cases == baseline.n_tea_cases
        and transformed.tea_recall is not None
        and baseline.tea_recall is not None
        and transformed.tea_recall < baseline.tea_recall
    )
    elapsed = time.perf_counter() - started
    report(
        "7 anomaly-free relabeling degrades TEA recall",
        ok,
        f"TEA recall {baseline.tea_recall} -> {transformed.tea_recall} "
        f"on {baseline.n_tea_cases} cases, {elapsed:.1f}s",
    )


def test_criterion_8_metrics_unit_suite():
    pairs = [
        (("T11", "T12", "T13", "L1", "L2"), ("T11", "T12", "T13", "L1", "L2")),
        (("T10", "T11", "T12", "L1"), ("T10", "T11", "L1", "L2")),
        (("L2", "L3", "L4"), ("L2", "L3", "L4")),
    ]
    got = evaluate_pairs(pairs)
    hand = {
        "plp": 200.0 / 3.0,
        "mean": 250.0 / 3.0,
        "std": math.sqrt(5000.0 / 9.0),
        "tea": 50.0,
        "lea": 100.0,
    }
    hand_ok = (
        abs(got.plp - hand["plp"]) < 1e-9
        and abs(got.subject_correctness_mean - hand["mean"]) < 1e-9
        and abs(got.subject_correctness_std - hand["std"]) < 1e-9
        and abs(got.tea_recall - hand["tea"]) < 1e-9
        and abs(got.lea_recall - hand["lea"]) < 1e-9
    )
    refs = [
        ("T11", "T12", "T13", "L1"),
        ("C1", "C2", "C3"),
        ("L3", "L4", "L5", "L6"),
    ]
    self_cmp = evaluate_pairs([(r, r) for r in refs])
    no_anomaly = evaluate_pairs([(("C1", "C2"), ("C1", "C2"))])
    self_ok = (
        self_cmp.plp == 100.0
        and self_cmp.subject_correctness_mean == 100.0
        and self_cmp.tea_recall == 100.0
        and self_cmp.lea_recall == 100.0
        and no_anomaly.tea_recall is None
        and no_anomaly.lea_recall is None
    )
    report("8 metrics unit suite", hand_ok and self_ok)


def test_criterion_9_performance():
    corpus_cfg = SynthConfig(tea_rate=1, t11_vs_t13_split=0, lea_rate=1, l4_vs_l6_split=0, seed=9099)
    noise = NoiseConfig(label_confusion=0.2)
    corpus = generate_corpus(corpus_cfg, noise, 1000)
    assert all(s.n == 26 for s in corpus)

    started = time.perf_counter()
    labeled = [solve(normalize_outputs(subject)) for subject in corpus]
    batch_elapsed = time.perf_counter() - started
    assert len(labeled) == 1000

    spine = emit_classifier_outputs(
        generate_spine(SynthConfig(tea_rate=0, lea_rate=0, seed=1)), NoiseConfig()
    )
    started = time.perf_counter()
    windows = all_fov_windows(spine)
    for window in windows:
        solve(normalize_outputs(window))
    fov_elapsed = time.perf_counter() - started

    ok = batch_elapsed < 5.0 and len(windows) == 300 and fov_elapsed < 2.0
    report(
        "9 performance",
        ok,
        f"1000x26 labeling {batch_elapsed:.2f}s, 300-window sweep {fov_elapsed:.2f}s",
    )
