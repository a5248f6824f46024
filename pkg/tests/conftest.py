import numpy as np
import pytest

from vertseq import NormalizedOutputs
from vertseq.labels import TransitionKind, label_index


def fig3_outputs(visibility=(1.0, 1.0, 1.0, 1.0)) -> NormalizedOutputs:
    """The four-vertebra worked example: sparse label scores, two transition
    claims ("last thoracic" on instances 2 and 3, "first lumbar" on 4), and
    all other classifier outputs zero."""
    c = np.zeros((4, 24))
    c[0, label_index("T11")] = 0.9
    c[1, label_index("T12")] = 0.8
    c[2, label_index("L1")] = 0.7
    c[2, label_index("T12")] = 0.3
    c[3, label_index("L2")] = 0.4
    c[3, label_index("L1")] = 0.6
    t = np.zeros((4, 6))
    t[1, TransitionKind.LAST_THORACIC] = 0.5
    t[2, TransitionKind.LAST_THORACIC] = 0.5
    t[3, TransitionKind.FIRST_LUMBAR] = 1.0
    return NormalizedOutputs.from_arrays(
        c, np.zeros((4, 3)), t, np.asarray(visibility, dtype=float)
    )


def random_outputs(rng: np.random.Generator, n: int, kind: str = "random") -> NormalizedOutputs:
    if kind == "uniform":
        c = np.full((n, 24), 1 / 24)
        r = np.full((n, 3), 1 / 3)
        t = np.full((n, 6), 1 / 6)
        s = np.ones(n)
    elif kind == "zero":
        c = np.zeros((n, 24))
        r = np.zeros((n, 3))
        t = np.zeros((n, 6))
        s = np.ones(n)
    else:
        c = rng.random((n, 24))
        r = rng.random((n, 3))
        t = rng.random((n, 6))
        s = rng.random(n)
    return NormalizedOutputs.from_arrays(c, r, t, s)


@pytest.fixture
def fig3():
    return fig3_outputs
