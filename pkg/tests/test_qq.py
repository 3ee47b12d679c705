import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvqss.cluster import ClusterGraph
from cvqss.cq import DecodingSequence, extract_DA
from cvqss.errors import InvalidParameterError, NoEntanglementError
from cvqss.gaussian import (
    apply_symplectic,
    compose,
    log_negativity,
    make_fourier,
    make_squeeze,
    omega,
    partial_transpose,
    tensor,
)
from cvqss.qq import extracted_negativity, required_copies

SIGMAS = np.linspace(0.05, 3.0, 60)


@pytest.fixture(scope="module")
def qq23(presets):
    return presets["qq-23"].build()


@pytest.fixture(scope="module")
def qq35(presets):
    return presets["qq-35"].build()


def dense_negativity(cov):
    """Oracle: moduli of the eigenvalues of i Omega V^T_A from a general dense eigensolver."""
    pt = partial_transpose(cov, [0])
    ev = np.abs(np.linalg.eigvals(1j * omega(2) @ pt))
    return float(sum(-math.log2(2 * v) for v in ev if v < 0.5) / 2)


def test_one_two_equals_one_three(qq23):
    for s in SIGMAS:
        a = extracted_negativity(qq23.graph, qq23.sequence("1-2"), s).negativity
        b = extracted_negativity(qq23.graph, qq23.sequence("1-3"), s).negativity
        assert a == pytest.approx(b, abs=1e-10)


@pytest.mark.parametrize("preset,collab", [("qq-23", "1-2"), ("qq-23", "2-3"), ("qq-35", "1-2-3"), ("qq-35", "1-3-4")])
def test_negativity_vanishes_with_weak_squeezing(presets, preset, collab):
    P = presets[preset].build()
    E = np.array([extracted_negativity(P.graph, P.sequence(collab), s).negativity for s in SIGMAS])
    assert E[0] > 0
    assert np.all(np.diff(E) <= 1e-12)
    positive = E > 0
    assert np.all(np.diff(E[positive]) < 0)
    if collab != "2-3":
        assert E[-1] == 0.0


def test_pure_collaboration_stays_entangled(qq23):
    for s in SIGMAS:
        assert extracted_negativity(qq23.graph, qq23.sequence("2-3"), s).negativity > 0


def test_edgeless_control():
    g = ClusterGraph.uniform(2, [], 1.0)
    r = extracted_negativity(g, DecodingSequence((1,), (), 1), 0.5)
    assert r.negativity == 0.0


@pytest.mark.parametrize("preset,collab", [("qq-23", "1-2"), ("qq-35", "1-2-3"), ("qq-35", "1-3-4")])
@pytest.mark.parametrize("s", [0.2, 0.6, 1.0])
def test_negativity_matches_dense_oracle(presets, preset, collab, s):
    P = presets[preset].build()
    state = extract_DA(P.graph, P.sequence(collab), s, s)
    assert log_negativity(state, [0]) == pytest.approx(dense_negativity(state.cov), abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.3, 3.0), st.floats(0.3, 3.0), st.floats(0, 6.3), st.floats(0, 6.3), st.floats(0.1, 1.5))
def test_negativity_local_invariance(g1, g2, t1, t2, s):
    from cvqss.config import load_preset

    P = load_preset("qq-23").build()
    state = extract_DA(P.graph, P.sequence("1-2"), s, s)
    local = compose([make_squeeze(2, 0, g1), make_squeeze(2, 1, g2), make_fourier(2, 0, t1), make_fourier(2, 1, t2)], 2)
    moved = apply_symplectic(state, local)
    assert log_negativity(moved, [0]) == pytest.approx(log_negativity(state, [0]), abs=1e-9)


def test_required_copies_arithmetic():
    assert required_copies(0.7, 0.7) == 1
    assert required_copies(1.0, 0.3) == 4
    assert required_copies(0.9, 0.3) == 3
    with pytest.raises(NoEntanglementError):
        required_copies(1.0, 0.0)
    with pytest.raises(InvalidParameterError):
        required_copies(0.0, 1.0)


def test_required_copies_against_tensor_power(qq35):
    r = extracted_negativity(qq35.graph, qq35.sequence("1-2-3"), 1.0)
    k = required_copies(2.0, r.negativity)
    state = extract_DA(qq35.graph, qq35.sequence("1-2-3"), 1.0, 1.0)
    power = state
    for _ in range(k - 1):
        power = tensor(power, state)
    # dealer halves are the even modes
    E_k = log_negativity(power, list(range(0, 2 * k, 2)))
    assert E_k == pytest.approx(k * r.negativity, abs=1e-9)
    assert E_k >= 2.0
    assert (k - 1) * r.negativity < 2.0
