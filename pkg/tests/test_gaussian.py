import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import sqrtm

from cvqss.errors import InvalidArgumentError, InvalidParameterError, UnphysicalStateError
from cvqss.gaussian import (
    GaussianState,
    SymplecticTransform,
    apply_symplectic,
    check_physical,
    compose,
    condition_homodyne,
    entropy_g,
    log_negativity,
    make_beamsplitter_5050,
    make_cphase,
    make_displacement,
    make_fourier,
    make_quadratic,
    make_squeeze,
    omega,
    partial_trace,
    partial_transpose,
    quad_index,
    squeezed_vacuum,
    symplectic_spectrum,
    tensor,
    von_neumann_entropy,
)


def williamson_oracle(cov):
    """Symplectic eigenvalues from the Hermitian matrix i V^1/2 Omega V^1/2."""
    root = np.real(sqrtm(cov))
    ev = np.linalg.eigvalsh(1j * root @ omega(cov.shape[0] // 2) @ root)
    return np.sort(ev[ev > 0])


def random_symplectic(rng, n, depth=6):
    gates = []
    for _ in range(depth):
        i, j = rng.choice(n, 2, replace=False) if n > 1 else (0, 0)
        kind = rng.integers(3 if n > 1 else 2)
        if kind == 0:
            gates.append(make_squeeze(n, int(i), float(rng.uniform(0.5, 2.0))))
        elif kind == 1:
            gates.append(make_fourier(n, int(i), float(rng.uniform(0, 2 * np.pi))))
        else:
            gates.append(make_cphase(n, int(i), int(j), float(rng.normal())))
    return compose(gates, n)


def test_vacuum_and_squeezed_vacuum():
    vac = GaussianState.vacuum(2)
    assert np.allclose(vac.cov, np.eye(4) / 2)
    sq = squeezed_vacuum(0.5)
    assert np.allclose(sq.cov, np.diag([2.0, 0.125]))
    assert np.allclose(symplectic_spectrum(sq.cov), [0.5])


def test_state_rejects_uncertainty_violation():
    with pytest.raises(UnphysicalStateError):
        GaussianState(np.zeros(2), np.diag([0.1, 0.1]))
    with pytest.raises(InvalidArgumentError):
        GaussianState(np.zeros(3), np.eye(3))
    with pytest.raises(InvalidParameterError):
        squeezed_vacuum(0.0)


def test_state_arrays_are_read_only():
    s = GaussianState.vacuum()
    with pytest.raises(ValueError):
        s.cov[0, 0] = 3.0


def test_transform_rejects_non_symplectic():
    with pytest.raises(InvalidArgumentError):
        SymplecticTransform(np.diag([2.0, 2.0]))


def test_thermal_spectrum_and_entropy():
    nu = 1.7
    cov = nu * np.eye(2)
    assert symplectic_spectrum(cov) == pytest.approx([nu], abs=1e-12)
    expected = (nu + 0.5) * math.log2(nu + 0.5) - (nu - 0.5) * math.log2(nu - 0.5)
    assert von_neumann_entropy(cov) == pytest.approx(expected, abs=1e-12)


def test_entropy_g_limits():
    assert entropy_g(0.5) == 0.0
    assert entropy_g(0.5 + 1e-14) == 0.0
    with pytest.raises(UnphysicalStateError):
        entropy_g(0.4)


def test_spectrum_rejects_asymmetric_input():
    with pytest.raises(InvalidArgumentError):
        symplectic_spectrum(np.array([[1.0, 0.2], [0.0, 1.0]]))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(0, 10_000))
def test_spectrum_matches_williamson_oracle(n, seed):
    rng = np.random.default_rng(seed)
    nus = rng.uniform(0.5, 3.0, n)
    base = np.diag(np.repeat(nus, 2))
    S = random_symplectic(rng, n).matrix
    cov = S @ base @ S.T
    assert np.allclose(symplectic_spectrum(cov), np.sort(nus), rtol=1e-9, atol=1e-9)
    assert np.allclose(symplectic_spectrum(cov), williamson_oracle(cov), rtol=1e-9, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(0, 10_000))
def test_composition_and_inverse(n, seed):
    rng = np.random.default_rng(seed)
    t = random_symplectic(rng, n)
    w = omega(n)
    assert np.allclose(t.matrix @ w @ t.matrix.T, w, atol=1e-9)
    ident = t.then(t.inverse())
    assert np.allclose(ident.matrix, np.eye(2 * n), atol=1e-9)


def test_then_applies_self_first():
    a = make_squeeze(1, 0, 2.0)
    b = make_fourier(1, 0, np.pi / 2)
    assert np.allclose(a.then(b).matrix, b.matrix @ a.matrix)


def test_displacement_moves_mean_only():
    s = apply_symplectic(GaussianState.vacuum(2), make_displacement(2, 1, 0.3, -0.4))
    assert np.allclose(s.mean, [0, 0, 0.3, -0.4])
    assert np.allclose(s.cov, np.eye(4) / 2)


def test_fourier_pi_is_minus_identity():
    assert np.allclose(make_fourier(1, 0, np.pi).matrix, -np.eye(2))
    # a quarter turn sends q to p
    F = make_fourier(1, 0, np.pi / 2).matrix
    assert np.allclose(F @ [1.0, 0.0], [0.0, -1.0])


def test_cphase_matches_quadratic_hamiltonian():
    direct = make_cphase(3, 0, 2, 0.7).matrix
    via_h = make_quadratic(3, [(quad_index(0, "q"), quad_index(2, "q"), 0.7)]).matrix
    assert np.allclose(direct, via_h, atol=1e-12)


def test_quadratic_single_mode_shear():
    # U = exp(i p^2): U^dag q U = q - 2p, p unchanged
    S = make_quadratic(1, [(1, 1, 1.0)]).matrix
    assert np.allclose(S, [[1.0, -2.0], [0.0, 1.0]])


def test_beamsplitter_conjugation_map():
    # phase-space map is the transpose of the printed a-mode substitution
    S = make_beamsplitter_5050(2, 0, 1).matrix
    r = 1 / math.sqrt(2)
    T = np.array([[-r, -r], [r, -r]])
    assert np.allclose(S[np.ix_([0, 2], [0, 2])], T.T)
    assert np.allclose(S[np.ix_([1, 3], [1, 3])], T.T)


def test_two_mode_gates_need_distinct_modes():
    with pytest.raises(InvalidArgumentError):
        make_cphase(2, 1, 1, 1.0)
    with pytest.raises(InvalidArgumentError):
        make_beamsplitter_5050(2, 0, 0)
    with pytest.raises(InvalidArgumentError):
        make_fourier(2, 5, 0.1)


def test_partial_trace_reorders():
    a, b = squeezed_vacuum(0.5), squeezed_vacuum(2.0)
    s = tensor(a, b)
    r = partial_trace(s, [1, 0])
    assert np.allclose(r.cov, tensor(b, a).cov)
    with pytest.raises(InvalidArgumentError):
        partial_trace(s, [])
    with pytest.raises(InvalidArgumentError):
        partial_trace(s, [0, 0])


def test_condition_homodyne_two_mode_standard_form():
    V, Vp, c = 2.0, 1.5, 1.2
    cov = np.array([[V, 0, c, 0], [0, V, 0, -c], [c, 0, Vp, 0], [0, -c, 0, Vp]])
    post, var = condition_homodyne(GaussianState(np.zeros(4), cov), 0, "q", 0.0)
    assert var == pytest.approx(V)
    assert np.allclose(post.cov, np.diag([Vp - c**2 / V, Vp]))


def test_condition_homodyne_mean_shift():
    cov = np.array([[1.0, 0, 0.8, 0], [0, 1.0, 0, -0.8], [0.8, 0, 1.0, 0], [0, -0.8, 0, 1.0]])
    post, _ = condition_homodyne(GaussianState(np.zeros(4), cov), 0, "q", 2.0)
    assert np.allclose(post.mean, [1.6, 0.0])


def test_log_negativity_two_mode_squeezed_vacuum():
    r = 0.6
    ch, sh = math.cosh(2 * r) / 2, math.sinh(2 * r) / 2
    cov = np.array([[ch, 0, sh, 0], [0, ch, 0, -sh], [sh, 0, ch, 0], [0, -sh, 0, ch]])
    E = log_negativity(GaussianState(np.zeros(4), cov), [0])
    assert E == pytest.approx(2 * r / math.log(2), abs=1e-12)


def test_log_negativity_product_state_is_zero():
    s = tensor(squeezed_vacuum(0.3), squeezed_vacuum(3.0))
    assert log_negativity(s, [0]) == 0.0
    with pytest.raises(InvalidArgumentError):
        log_negativity(s, [0, 1])


def test_partial_transpose_flips_momentum():
    cov = np.arange(16.0).reshape(4, 4)
    out = partial_transpose(cov, [1])
    assert out[3, 0] == -cov[3, 0] and out[3, 3] == cov[3, 3]


def test_check_physical():
    assert check_physical(np.eye(2) / 2)
    assert not check_physical(np.eye(2) / 4)
