import numpy as np
import pytest
from sklearn.base import clone
from sklearn.pipeline import Pipeline

from vertseq import (
    ContractError,
    NoiseConfig,
    ScoreNormalizer,
    SolverConfig,
    SynthConfig,
    ValidationError,
    VertebraSequenceLabeler,
    generate_corpus,
    normalize_outputs,
    solve,
)


@pytest.fixture(scope="module")
def corpus():
    cfg = SynthConfig(tea_rate=0.4, lea_rate=0.3, l4_vs_l6_split=1.0, seed=31)
    return generate_corpus(cfg, NoiseConfig(label_confusion=0.15), 8)


def test_get_set_params_round_trip():
    est = VertebraSequenceLabeler(anomaly_cost=0.5, gaps_enabled=True)
    params = est.get_params()
    assert params["anomaly_cost"] == 0.5
    assert params["gaps_enabled"] is True
    rebuilt = VertebraSequenceLabeler(**params)
    assert rebuilt.get_params() == params
    est.set_params(gap_penalty=1.25)
    assert est.get_params()["gap_penalty"] == 1.25


def test_clone_compatible():
    est = VertebraSequenceLabeler(label_weight=1.3)
    twin = clone(est)
    assert twin.get_params() == est.get_params()
    norm = clone(ScoreNormalizer(gaussian_sigma=2.0))
    assert norm.get_params()["gaussian_sigma"] == 2.0


def test_fit_returns_self_and_validates():
    est = VertebraSequenceLabeler()
    assert est.fit() is est
    with pytest.raises(ValidationError):
        VertebraSequenceLabeler(label_weight=-1.0).fit()
    with pytest.raises(ValidationError):
        ScoreNormalizer(gaussian_sigma=-1.0).fit()


def test_predict_matches_functional_core(corpus):
    est = VertebraSequenceLabeler()
    predictions = est.fit().predict(corpus)
    expected = [list(solve(normalize_outputs(s)).final_labels) for s in corpus]
    assert predictions == expected


def test_predict_accepts_single_record(corpus):
    est = VertebraSequenceLabeler()
    assert est.predict(corpus[0]) == est.predict([corpus[0]])


def test_label_returns_path_results(corpus):
    results = VertebraSequenceLabeler().label(corpus[:2])
    assert all(hasattr(r, "raw_path") and hasattr(r, "total_cost") for r in results)


def test_pipeline_composition(corpus):
    pipeline = Pipeline(
        [
            ("normalize", ScoreNormalizer()),
            ("label", VertebraSequenceLabeler()),
        ]
    )
    got = pipeline.fit(corpus).predict(corpus)
    assert got == VertebraSequenceLabeler().predict(corpus)


def test_normalizer_config_flows_through(corpus):
    # a pipeline with smoothing off must differ from the labeler's default
    # smoothing only through the normalization stage
    raw = ScoreNormalizer(enable_smoothing=False).fit_transform(corpus)
    direct = VertebraSequenceLabeler(enable_smoothing=False).predict(corpus)
    via_norm = VertebraSequenceLabeler().predict(raw)
    assert direct == via_norm


def test_score_is_mean_fraction_correct():
    cfg = SynthConfig(tea_rate=0, lea_rate=0, seed=77)
    clean = generate_corpus(cfg, NoiseConfig(), 4)
    est = VertebraSequenceLabeler()
    refs = [s.reference_labels for s in clean]
    assert est.score(clean, refs) == 1.0


def test_input_validation_helper_rejects_junk():
    with pytest.raises(ContractError):
        VertebraSequenceLabeler().predict([object()])


def test_solver_params_forwarded(corpus):
    # an extreme negative anomaly cost must flip predictions to anomalous ones
    est = VertebraSequenceLabeler(anomaly_cost=-5.0)
    results = est.label(corpus[:3])
    assert all(r.tea_flag or r.lea_flag for r in results)
    solver_cfg, _ = est._configs()
    assert solver_cfg == SolverConfig(anomaly_cost=-5.0)
