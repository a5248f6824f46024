"""Score normalization applied between classifier output and cost computation.

Three steps, in order:

1. Label and region score columns are smoothed along the vertebra-instance
   axis with a zero-padded discrete Gaussian (kernel truncated at 3 sigma and
   renormalized over the in-window taps).  Zero padding means boundary
   vertebrae lose kernel mass and are attenuated, which is intentional: the
   upstream classifier is least reliable at the ends of the chain.
2. Each vertebra's label vector and region vector is capped at unit Euclidean
   norm (divided by its norm only when the norm exceeds 1), so the boundary
   attenuation from step 1 survives.
3. Each transition column is capped at unit sum across vertebrae: the more
   vertebrae claim e.g. "last thoracic", the smaller each claim becomes.
   A lone weak claim is left alone rather than inflated.

Visibility passes through untouched.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter1d

from .errors import ValidationError
from .io import SubjectRecord
from .labels import N_RAW_LABELS, region_of

# Region index for each raw label, used to expand region scores to 24 columns.
_LABEL_REGION = np.array([int(region_of(j)) for j in range(N_RAW_LABELS)])


@dataclass(frozen=True)
class NormalizationConfig:
    """Knobs for the normalization pipeline.

    ``gaussian_sigma`` is in units of vertebra instances; 0 disables the
    smoothing step just like ``enable_smoothing=False``.
    """

    gaussian_sigma: float = 1.0
    enable_smoothing: bool = True
    transition_column_norm: bool = True

    def __post_init__(self) -> None:
        if self.gaussian_sigma < 0:
            raise ValidationError("gaussian_sigma must be >= 0")


@dataclass(frozen=True)
class NormalizedOutputs:
    """Normalized per-subject score arrays ready for cost computation.

    ``region_expanded`` copies each region score to every label of that
    region, so it is directly addable to the label score matrix.
    """

    label_scores: np.ndarray  # (n, 24)
    region_expanded: np.ndarray  # (n, 24)
    transition_scores: np.ndarray  # (n, 6)
    visibility: np.ndarray  # (n,)

    def __post_init__(self) -> None:
        n = self.visibility.shape[0]
        if (
            self.label_scores.shape != (n, N_RAW_LABELS)
            or self.region_expanded.shape != (n, N_RAW_LABELS)
            or self.transition_scores.shape != (n, 6)
        ):
            raise ValidationError("inconsistent NormalizedOutputs array shapes")
        for arr in (self.label_scores, self.region_expanded, self.transition_scores, self.visibility):
            if not np.all(np.isfinite(arr)) or np.any(arr < 0):
                raise ValidationError("NormalizedOutputs entries must be finite and >= 0")
            arr.setflags(write=False)

    @property
    def n(self) -> int:
        return self.visibility.shape[0]

    @classmethod
    def from_arrays(cls, label_scores, region_scores, transition_scores, visibility) -> "NormalizedOutputs":
        """Assemble outputs from raw arrays; region scores may be (n, 3) or (n, 24)."""
        c = np.ascontiguousarray(label_scores, dtype=float)
        r = np.ascontiguousarray(region_scores, dtype=float)
        if r.shape[1] == 3:
            r = r[:, _LABEL_REGION]
        t = np.ascontiguousarray(transition_scores, dtype=float)
        s = np.ascontiguousarray(visibility, dtype=float)
        return cls(c, r, t, s)


def smooth_columns(values: np.ndarray, sigma: float) -> np.ndarray:
    """Zero-padded Gaussian smoothing along the instance axis (axis 0).

    Kernel radius is int(3 * sigma + 0.5); taps are renormalized to unit sum
    within that window, so interior rows are a weighted average while rows
    near the ends lose the mass that falls outside the sequence.
    """
    if sigma == 0:
        return values.copy()
    return gaussian_filter1d(values, sigma=sigma, axis=0, mode="constant", cval=0.0, truncate=3.0)


def normalize_outputs(subject: SubjectRecord, cfg: NormalizationConfig | None = None) -> NormalizedOutputs:
    """Run the full normalization pipeline on one subject."""
    cfg = cfg or NormalizationConfig()
    c = np.stack([v.label_scores for v in subject.vertebrae]).astype(float)
    r = np.stack([v.region_scores for v in subject.vertebrae]).astype(float)
    t = np.stack([v.transition_scores for v in subject.vertebrae]).astype(float)
    s = np.array([v.visibility for v in subject.vertebrae], dtype=float)

    if cfg.enable_smoothing and cfg.gaussian_sigma > 0:
        c = smooth_columns(c, cfg.gaussian_sigma)
        r = smooth_columns(r, cfg.gaussian_sigma)

    # Cap at unit Euclidean norm per vertebra; never scale up.
    c = c / np.maximum(1.0, np.linalg.norm(c, axis=1))[:, None]
    r = r / np.maximum(1.0, np.linalg.norm(r, axis=1))[:, None]

    if cfg.transition_column_norm:
        t = t / np.maximum(1.0, t.sum(axis=0))[None, :]

    return NormalizedOutputs(c, r[:, _LABEL_REGION], t, s)
