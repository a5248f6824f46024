"""Scikit-learn style wrappers so the labeler composes with pipelines.

``ScoreNormalizer`` is a stateless transformer from subject records to
normalized score arrays; ``VertebraSequenceLabeler`` predicts decoded label
sequences.  Both follow the usual conventions: constructor arguments are
stored verbatim, ``fit`` only validates and returns ``self``, and
``get_params``/``set_params``/``clone`` work out of the box.
"""
from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin

from .costs import SolverConfig
from .errors import ContractError
from .io import SubjectRecord
from .normalize import NormalizationConfig, NormalizedOutputs, normalize_outputs
from .solver import PathResult, solve


def as_subject_records(X) -> list[SubjectRecord]:
    """Input validation helper: accept one record or an iterable of them."""
    if isinstance(X, SubjectRecord):
        return [X]
    records = list(X)
    bad = [type(x).__name__ for x in records if not isinstance(x, SubjectRecord)]
    if bad:
        raise ContractError(f"expected SubjectRecord inputs, got {sorted(set(bad))}")
    return records


def as_normalized(X, cfg: NormalizationConfig) -> list[NormalizedOutputs]:
    """Normalize subject records; pass pre-normalized outputs through."""
    if isinstance(X, NormalizedOutputs):
        return [X]
    if isinstance(X, SubjectRecord):
        return [normalize_outputs(X, cfg)]
    items = list(X)
    if items and all(isinstance(x, NormalizedOutputs) for x in items):
        return items
    return [normalize_outputs(r, cfg) for r in as_subject_records(items)]


class ScoreNormalizer(BaseEstimator, TransformerMixin):
    """Transformer applying the score normalization pipeline per subject."""

    def __init__(self, gaussian_sigma=1.0, enable_smoothing=True, transition_column_norm=True):
        self.gaussian_sigma = gaussian_sigma
        self.enable_smoothing = enable_smoothing
        self.transition_column_norm = transition_column_norm

    def _config(self) -> NormalizationConfig:
        return NormalizationConfig(
            gaussian_sigma=self.gaussian_sigma,
            enable_smoothing=self.enable_smoothing,
            transition_column_norm=self.transition_column_norm,
        )

    def fit(self, X=None, y=None):
        self._config()  # validates parameters
        return self

    def __sklearn_is_fitted__(self) -> bool:
        return True  # stateless

    def transform(self, X) -> list[NormalizedOutputs]:
        cfg = self._config()
        return [normalize_outputs(r, cfg) for r in as_subject_records(X)]


class VertebraSequenceLabeler(BaseEstimator):
    """Predicts the anatomically valid label sequence for each subject.

    ``predict`` returns decoded label sequences (lists of strings, one list
    per subject); ``label`` returns the full path results including costs and
    anomaly flags.  Accepts subject records or pre-normalized outputs, e.g.
    from a pipelined :class:`ScoreNormalizer`.
    """

    def __init__(
        self,
        label_weight=0.9,
        region_weight=1.1,
        transition_weight=0.6,
        anomaly_cost=0.0,
        gaps_enabled=False,
        gap_penalty=0.0,
        include_none_transition=True,
        gaussian_sigma=1.0,
        enable_smoothing=True,
        transition_column_norm=True,
    ):
        self.label_weight = label_weight
        self.region_weight = region_weight
        self.transition_weight = transition_weight
        self.anomaly_cost = anomaly_cost
        self.gaps_enabled = gaps_enabled
        self.gap_penalty = gap_penalty
        self.include_none_transition = include_none_transition
        self.gaussian_sigma = gaussian_sigma
        self.enable_smoothing = enable_smoothing
        self.transition_column_norm = transition_column_norm

    def _configs(self) -> tuple[SolverConfig, NormalizationConfig]:
        return (
            SolverConfig(
                label_weight=self.label_weight,
                region_weight=self.region_weight,
                transition_weight=self.transition_weight,
                anomaly_cost=self.anomaly_cost,
                gaps_enabled=self.gaps_enabled,
                gap_penalty=self.gap_penalty,
                include_none_transition=self.include_none_transition,
            ),
            NormalizationConfig(
                gaussian_sigma=self.gaussian_sigma,
                enable_smoothing=self.enable_smoothing,
                transition_column_norm=self.transition_column_norm,
            ),
        )

    def fit(self, X=None, y=None):
        """Stateless: validates parameters and returns self."""
        self._configs()
        return self

    def __sklearn_is_fitted__(self) -> bool:
        return True  # stateless

    def label(self, X) -> list[PathResult]:
        solver_cfg, norm_cfg = self._configs()
        return [solve(norm, solver_cfg) for norm in as_normalized(X, norm_cfg)]

    def predict(self, X) -> list[list[str]]:
        return [list(result.final_labels) for result in self.label(X)]

    def score(self, X, y) -> float:
        """Mean per-subject fraction of correctly labeled vertebrae."""
        predictions = self.predict(X)
        references = [list(r) for r in y]
        if len(predictions) != len(references):
            raise ContractError(
                f"{len(predictions)} predictions for {len(references)} references"
            )
        fractions = []
        for pred, ref in zip(predictions, references):
            if len(pred) != len(ref):
                raise ContractError("prediction/reference length mismatch")
            fractions.append(sum(p == r for p, r in zip(pred, ref)) / len(ref))
        return sum(fractions) / len(fractions)
