"""Batch command-line front end.

Subcommands: ``label`` (solve subjects), ``eval`` (score predictions against
references), ``synth`` (generate a synthetic corpus), and ``sweep`` (ablation
sweeps over the anomaly cost, the gap penalty, or the field-of-view length,
emitting CSV).  Exit codes: 0 success, 1 usage, 2 data error, 3 internal.
"""
from __future__ import annotations

import argparse
import json
import sys
from functools import partial
from multiprocessing import Pool
from pathlib import Path

from .costs import SolverConfig
from .errors import ContractError, ParseError, UsageError, ValidationError, VertseqError
from .io import SubjectRecord, parse_subject, read_label_sequences, read_subjects, write_subjects
from .metrics import CSV_HEADER, EvalReport, evaluate_pairs
from .normalize import NormalizationConfig, normalize_outputs
from .solver import solve
from .synth import (
    NoiseConfig,
    SynthConfig,
    corpus_manifest,
    crop_fov,
    generate_corpus,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        raise UsageError(message)


def _add_solver_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("solver")
    group.add_argument("--label-weight", type=float, default=0.9)
    group.add_argument("--region-weight", type=float, default=1.1)
    group.add_argument("--transition-weight", type=float, default=0.6)
    group.add_argument("--anomaly-cost", type=float, default=0.0,
                       help="cost added per anomaly category in a path (positive penalizes)")
    group.add_argument("--gaps", action="store_true", help="allow penalized label gaps")
    group.add_argument("--gap-penalty", type=float, default=0.0)
    group.add_argument("--exclude-none-transition", action="store_true",
                       help="drop the 'none' head from the transition sum")


def _add_norm_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("normalization")
    group.add_argument("--gaussian-sigma", type=float, default=1.0)
    group.add_argument("--no-smoothing", action="store_true")
    group.add_argument("--no-transition-norm", action="store_true")


def _solver_config(args: argparse.Namespace) -> SolverConfig:
    return SolverConfig(
        label_weight=args.label_weight,
        region_weight=args.region_weight,
        transition_weight=args.transition_weight,
        anomaly_cost=args.anomaly_cost,
        gaps_enabled=args.gaps,
        gap_penalty=args.gap_penalty,
        include_none_transition=not args.exclude_none_transition,
    )


def _norm_config(args: argparse.Namespace) -> NormalizationConfig:
    return NormalizationConfig(
        gaussian_sigma=args.gaussian_sigma,
        enable_smoothing=not args.no_smoothing,
        transition_column_norm=not args.no_transition_norm,
    )


def _label_one(subject: SubjectRecord, solver_cfg: SolverConfig, norm_cfg: NormalizationConfig) -> dict:
    try:
        result = solve(normalize_outputs(subject, norm_cfg), solver_cfg)
    except VertseqError as exc:
        return {"subject_id": subject.subject_id, "error": str(exc)}
    return {
        "subject_id": subject.subject_id,
        "labels": list(result.final_labels),
        "cost": result.total_cost,
        "tea_flag": result.tea_flag,
        "lea_flag": result.lea_flag,
        "gaps": list(result.raw_path.gaps),
    }


def _label_batch(subjects, solver_cfg, norm_cfg, workers: int) -> list[dict]:
    task = partial(_label_one, solver_cfg=solver_cfg, norm_cfg=norm_cfg)
    if workers > 1 and len(subjects) > 1:
        with Pool(workers) as pool:
            return pool.map(task, subjects)
    return [task(s) for s in subjects]


def _read_batch_lenient(path) -> list[SubjectRecord | dict]:
    """Parse a subject batch, isolating per-record failures.

    Returns subjects interleaved with error documents so that one corrupt
    record never aborts the batch.
    """
    items: list[SubjectRecord | dict] = []
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                items.append(parse_subject(line))
            except VertseqError as exc:
                try:
                    sid = json.loads(line).get("subject_id", f"line-{lineno}")
                except (json.JSONDecodeError, AttributeError):
                    sid = f"line-{lineno}"
                items.append({"subject_id": sid, "error": str(exc)})
    return items


def cmd_label(args: argparse.Namespace) -> int:
    items = _read_batch_lenient(args.input)
    if not items:
        print("warning: empty batch, nothing to label", file=sys.stderr)
        Path(args.output).write_text("")
        return 0
    subjects = [x for x in items if isinstance(x, SubjectRecord)]
    labeled = _label_batch(subjects, _solver_config(args), _norm_config(args), args.workers)
    by_subject = iter(labeled)
    results = [x if isinstance(x, dict) else next(by_subject) for x in items]
    with open(args.output, "w", encoding="utf-8") as handle:
        for doc in results:
            handle.write(json.dumps(doc) + "\n")
    failures = sum(1 for doc in results if "error" in doc)
    if failures:
        print(f"warning: {failures} of {len(results)} records failed", file=sys.stderr)
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    predictions = read_label_sequences(args.predictions)
    references = read_label_sequences(args.references)
    missing_refs = sorted(set(predictions) - set(references))
    missing_preds = sorted(set(references) - set(predictions))
    if missing_refs or missing_preds:
        raise ValidationError(
            "unmatched subject ids; "
            f"predictions without reference: {missing_refs}; "
            f"references without prediction: {missing_preds}"
        )
    pairs = [(predictions[sid], references[sid]) for sid in predictions]
    report = evaluate_pairs(pairs)
    print(report.to_text())
    if args.csv:
        Path(args.csv).write_text(CSV_HEADER + "\n" + report.to_csv_row() + "\n")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    synth_cfg = SynthConfig(
        tea_rate=args.tea_rate,
        lea_rate=args.lea_rate,
        t11_vs_t13_split=args.t11_split,
        l4_vs_l6_split=args.l4_split,
        fov_mode=args.fov_mode,
        fov_min_len=args.fov_min_len,
        fov_max_len=args.fov_max_len,
        seed=args.seed,
    )
    noise_cfg = NoiseConfig(
        label_confusion=args.label_confusion,
        head_dropout=args.head_dropout,
        transition_strength=args.transition_strength,
        visibility_boundary_decay=args.visibility_decay,
        seed=args.seed,
    )
    corpus = generate_corpus(
        synth_cfg,
        noise_cfg,
        n_subjects=args.subjects,
        anomaly_free_heads=args.anomaly_free_heads,
    )
    write_subjects(args.output, corpus)
    if args.manifest:
        manifest = corpus_manifest(synth_cfg, noise_cfg, args.subjects, args.anomaly_free_heads)
        Path(args.manifest).write_text(json.dumps(manifest, indent=2) + "\n")
    return 0


def _sweep_values(args: argparse.Namespace, kind: str) -> list[float]:
    defaults = {"gamma": (-2.0, 2.0, 0.25), "skip_cost": (0.0, 2.0, 0.25)}
    lo, hi, step = defaults[kind]
    lo = args.lo if args.lo is not None else lo
    hi = args.hi if args.hi is not None else hi
    step = args.step if args.step is not None else step
    if step <= 0:
        raise UsageError("sweep step must be > 0")
    if lo > hi:
        raise UsageError("sweep range requires lo <= hi")
    values = []
    k = 0
    while True:
        v = lo + k * step
        if v > hi + 1e-12:
            break
        values.append(v)
        k += 1
    return values


def _pairs_from_results(results: list[dict], subjects: list[SubjectRecord]):
    pairs = []
    for doc, subject in zip(results, subjects):
        if "error" in doc:
            continue
        pairs.append((tuple(doc["labels"]), subject.reference_labels))
    return pairs


def cmd_sweep(args: argparse.Namespace) -> int:
    subjects = list(read_subjects(args.input))
    if not subjects:
        raise ValidationError("sweep input corpus is empty")
    unreferenced = [s.subject_id for s in subjects if s.reference_labels is None]
    if unreferenced:
        raise ValidationError(f"subjects without reference labels: {unreferenced[:5]}")
    norm_cfg = _norm_config(args)
    base = _solver_config(args)
    rows: list[tuple[str, EvalReport]] = []

    if args.kind == "gamma":
        for value in _sweep_values(args, "gamma"):
            cfg = SolverConfig(
                label_weight=base.label_weight,
                region_weight=base.region_weight,
                transition_weight=base.transition_weight,
                anomaly_cost=value,
                gaps_enabled=base.gaps_enabled,
                gap_penalty=base.gap_penalty,
                include_none_transition=base.include_none_transition,
            )
            results = _label_batch(subjects, cfg, norm_cfg, args.workers)
            rows.append((f"{value:g}", evaluate_pairs(_pairs_from_results(results, subjects))))
    elif args.kind == "skip":
        for value in _sweep_values(args, "skip_cost"):
            cfg = SolverConfig(
                label_weight=base.label_weight,
                region_weight=base.region_weight,
                transition_weight=base.transition_weight,
                anomaly_cost=base.anomaly_cost,
                gaps_enabled=True,
                gap_penalty=value,
                include_none_transition=base.include_none_transition,
            )
            results = _label_batch(subjects, cfg, norm_cfg, args.workers)
            rows.append((f"{value:g}", evaluate_pairs(_pairs_from_results(results, subjects))))
    else:  # fov
        max_n = max(s.n for s in subjects)
        lo = int(args.lo) if args.lo is not None else 1
        hi = int(args.hi) if args.hi is not None else max_n
        if lo < 1 or lo > hi:
            raise UsageError("fov sweep requires 1 <= lo <= hi")
        for length in range(lo, hi + 1):
            windows: list[SubjectRecord] = []
            for subject in subjects:
                if subject.n < length:
                    continue
                windows.extend(
                    crop_fov(subject, start, length)
                    for start in range(subject.n - length + 1)
                )
            if not windows:
                continue
            results = _label_batch(windows, base, norm_cfg, args.workers)
            rows.append((str(length), evaluate_pairs(_pairs_from_results(results, windows))))

    lines = [CSV_HEADER] + [report.to_csv_row(param) for param, report in rows]
    Path(args.output).write_text("\n".join(lines) + "\n")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="vertseq", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_label = sub.add_parser("label", help="solve the label sequence for each subject")
    p_label.add_argument("--input", required=True, help="subject batch (JSON lines)")
    p_label.add_argument("--output", required=True, help="per-subject results (JSON lines)")
    p_label.add_argument("--workers", type=int, default=1)
    _add_solver_flags(p_label)
    _add_norm_flags(p_label)
    p_label.set_defaults(func=cmd_label)

    p_eval = sub.add_parser("eval", help="compare predictions against references")
    p_eval.add_argument("--predictions", required=True)
    p_eval.add_argument("--references", required=True,
                        help="subject batch with reference_labels, or a labels file")
    p_eval.add_argument("--csv", help="also write the report as a one-line CSV")
    p_eval.set_defaults(func=cmd_eval)

    p_synth = sub.add_parser("synth", help="generate a synthetic corpus")
    p_synth.add_argument("--output", required=True)
    p_synth.add_argument("--manifest", help="write generation parameters alongside")
    p_synth.add_argument("--subjects", type=int, default=100)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--tea-rate", type=float, default=0.058)
    p_synth.add_argument("--lea-rate", type=float, default=0.097)
    p_synth.add_argument("--t11-split", type=float, default=0.5,
                         help="probability a thoracic anomaly is the 11-vertebra kind")
    p_synth.add_argument("--l4-split", type=float, default=0.5,
                         help="probability a lumbar anomaly is the 4-vertebra kind")
    p_synth.add_argument("--fov-mode", choices=("full", "random_window", "all_windows"),
                         default="full")
    p_synth.add_argument("--fov-min-len", type=int, default=1)
    p_synth.add_argument("--fov-max-len", type=int, default=None)
    p_synth.add_argument("--label-confusion", type=float, default=0.0)
    p_synth.add_argument("--head-dropout", type=float, default=0.0)
    p_synth.add_argument("--transition-strength", type=float, default=1.0)
    p_synth.add_argument("--visibility-decay", type=float, default=1.0)
    p_synth.add_argument("--anomaly-free-heads", action="store_true",
                         help="emit classifier outputs from the twelve-thoracic relabeling")
    p_synth.set_defaults(func=cmd_synth)

    p_sweep = sub.add_parser("sweep", help="run an ablation sweep, writing CSV")
    p_sweep.add_argument("--kind", choices=("gamma", "skip", "fov"), required=True)
    p_sweep.add_argument("--input", required=True, help="corpus with reference labels")
    p_sweep.add_argument("--output", required=True, help="CSV output path")
    p_sweep.add_argument("--lo", type=float, default=None)
    p_sweep.add_argument("--hi", type=float, default=None)
    p_sweep.add_argument("--step", type=float, default=None)
    p_sweep.add_argument("--workers", type=int, default=1)
    _add_solver_flags(p_sweep)
    _add_norm_flags(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ParseError, ValidationError, ContractError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except VertseqError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
