"""Gaussian-state arithmetic in the quadrature picture.

Conventions used throughout the package:

* quadratures are ordered ``(q1, p1, ..., qn, pn)``;
* hbar = 1, so the vacuum covariance is ``I / 2`` and ``[q, p] = i``;
* ``cov[i, j] = <{dx_i, dx_j}> / 2``;
* a :class:`SymplecticTransform` is the *phase-space* map ``x -> S x + d``
  acting on Wigner-function samples (the Heisenberg map ``U^dag x U``).
  Nullifiers, being linear forms, transform with ``S^{-T}``;
* entropies and negativities are in bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidArgumentError, InvalidParameterError, UnphysicalStateError

PHYSICAL_TOL = 1e-9
_LIMIT_TOL = 1e-12


def omega(n_modes: int) -> np.ndarray:
    """Symplectic form: block diagonal with blocks ``[[0, 1], [-1, 0]]``."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def quad_index(mode: int, quadrature: str) -> int:
    if quadrature not in ("q", "p"):
        raise InvalidArgumentError(f"quadrature must be 'q' or 'p', got {quadrature!r}")
    return 2 * mode + (quadrature == "p")


def _mode_indices(modes: Sequence[int]) -> list[int]:
    return [k for m in modes for k in (2 * m, 2 * m + 1)]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GaussianState:
    """Mean vector and covariance matrix of an ``n``-mode Gaussian state.

    The covariance is symmetrised on construction and must satisfy the
    uncertainty relation (smallest symplectic eigenvalue >= 1/2 - 1e-9).
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        cov = np.asarray(self.cov, dtype=float)
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] % 2 or cov.shape[0] == 0:
            raise InvalidArgumentError(f"covariance must be a non-empty 2n x 2n matrix, got shape {cov.shape}")
        if mean.shape[0] != cov.shape[0]:
            raise InvalidArgumentError(f"mean has length {mean.shape[0]}, covariance is {cov.shape[0]}-dimensional")
        if not (np.all(np.isfinite(cov)) and np.all(np.isfinite(mean))):
            raise InvalidArgumentError("mean and covariance must be finite")
        cov = 0.5 * (cov + cov.T)
        if not check_physical(cov):
            raise UnphysicalStateError(
                f"covariance violates the uncertainty principle (min symplectic eigenvalue "
                f"{symplectic_spectrum(cov)[0]:.6g} < 1/2)"
            )
        object.__setattr__(self, "cov", _frozen(cov))
        object.__setattr__(self, "mean", _frozen(mean))

    @property
    def n_modes(self) -> int:
        return self.cov.shape[0] // 2

    @classmethod
    def vacuum(cls, n_modes: int = 1) -> "GaussianState":
        return cls(np.zeros(2 * n_modes), 0.5 * np.eye(2 * n_modes))


@dataclass(frozen=True)
class SymplecticTransform:
    """Affine phase-space map ``x -> matrix @ x + shift``."""

    matrix: np.ndarray
    shift: np.ndarray = field(default=None)

    def __post_init__(self):
        S = np.asarray(self.matrix, dtype=float)
        if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] % 2:
            raise InvalidArgumentError(f"symplectic matrix must be 2n x 2n, got shape {S.shape}")
        d = np.zeros(S.shape[0]) if self.shift is None else np.asarray(self.shift, dtype=float).reshape(-1)
        if d.shape[0] != S.shape[0]:
            raise InvalidArgumentError("shift length does not match matrix size")
        w = omega(S.shape[0] // 2)
        scale = max(1.0, float(np.max(np.abs(S))) ** 2)
        if np.max(np.abs(S @ w @ S.T - w)) > 1e-10 * scale:
            raise InvalidArgumentError("matrix is not symplectic (S Omega S^T != Omega)")
        object.__setattr__(self, "matrix", _frozen(S))
        object.__setattr__(self, "shift", _frozen(d))

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0] // 2

    @classmethod
    def identity(cls, n_modes: int) -> "SymplecticTransform":
        return cls(np.eye(2 * n_modes))

    def then(self, other: "SymplecticTransform") -> "SymplecticTransform":
        """Apply ``self`` first, then ``other``."""
        if other.n_modes != self.n_modes:
            raise InvalidArgumentError("cannot compose transforms on different numbers of modes")
        return SymplecticTransform(other.matrix @ self.matrix, other.matrix @ self.shift + other.shift)

    def inverse(self) -> "SymplecticTransform":
        w = omega(self.n_modes)
        inv = -w @ self.matrix.T @ w
        return SymplecticTransform(inv, -inv @ self.shift)


def compose(transforms: Sequence[SymplecticTransform], n_modes: int) -> SymplecticTransform:
    """Compose transforms in application order."""
    total = SymplecticTransform.identity(n_modes)
    for t in transforms:
        total = total.then(t)
    return total


# -- state construction ------------------------------------------------------


def squeezed_vacuum(sigma: float) -> GaussianState:
    """Single-mode squeezed vacuum with Wigner function ``exp(-sigma^2 q^2) exp(-p^2 / sigma^2)``.

    ``Var(q) = 1 / (2 sigma^2)`` and ``Var(p) = sigma^2 / 2``; ``sigma -> 0`` is
    the p-eigenstate limit.
    """
    if not (sigma > 0 and math.isfinite(sigma)):
        raise InvalidParameterError(f"sigma must be a positive finite number, got {sigma!r}")
    return GaussianState(np.zeros(2), np.diag([1.0 / (2 * sigma**2), sigma**2 / 2]))


def tensor(a: GaussianState, b: GaussianState) -> GaussianState:
    n = a.cov.shape[0]
    cov = np.zeros((n + b.cov.shape[0],) * 2)
    cov[:n, :n] = a.cov
    cov[n:, n:] = b.cov
    return GaussianState(np.concatenate([a.mean, b.mean]), cov)


def apply_symplectic(state: GaussianState, t: SymplecticTransform) -> GaussianState:
    if t.n_modes != state.n_modes:
        raise InvalidArgumentError(
            f"transform acts on {t.n_modes} modes but the state has {state.n_modes}"
        )
    S = t.matrix
    return GaussianState(S @ state.mean + t.shift, S @ state.cov @ S.T)


def partial_trace(state: GaussianState, keep: Sequence[int]) -> GaussianState:
    """Reduced state on ``keep``, with modes reordered as listed."""
    keep = list(keep)
    if not keep:
        raise InvalidArgumentError("keep must list at least one mode")
    if len(set(keep)) != len(keep):
        raise InvalidArgumentError(f"duplicate modes in keep: {keep}")
    bad = [m for m in keep if not (isinstance(m, (int, np.integer)) and 0 <= m < state.n_modes)]
    if bad:
        raise InvalidArgumentError(f"mode indices {bad} out of range for {state.n_modes} modes")
    idx = _mode_indices(keep)
    return GaussianState(state.mean[idx], state.cov[np.ix_(idx, idx)])


def condition_homodyne(
    state: GaussianState, mode: int, quadrature: str, outcome: float
) -> tuple[GaussianState, float]:
    """Condition on an ideal homodyne measurement of ``quadrature`` on ``mode``.

    Returns the post-measurement state of the remaining modes (measured mode
    removed) and the marginal variance of the measured quadrature.
    """
    n = state.n_modes
    if not (0 <= mode < n):
        raise InvalidArgumentError(f"mode {mode} out of range for {n} modes")
    if n == 1:
        raise InvalidArgumentError("cannot condition a single-mode state onto zero remaining modes")
    k = quad_index(mode, quadrature)
    m_idx = [2 * mode, 2 * mode + 1]
    rest = [i for i in range(2 * n) if i not in m_idx]
    proj = np.zeros((2, 2))
    proj[k - 2 * mode, k - 2 * mode] = 1.0
    block = proj @ state.cov[np.ix_(m_idx, m_idx)] @ proj
    ginv = np.linalg.pinv(block)
    cross = state.cov[np.ix_(rest, m_idx)]
    cov = state.cov[np.ix_(rest, rest)] - cross @ ginv @ cross.T
    delta = np.zeros(2)
    delta[k - 2 * mode] = outcome - state.mean[k]
    mean = state.mean[rest] + cross @ ginv @ delta
    return GaussianState(mean, cov), float(state.cov[k, k])


# -- spectral functionals ----------------------------------------------------


def symplectic_spectrum(cov: np.ndarray) -> np.ndarray:
    """Symplectic eigenvalues, ascending, one per mode.

    Computed from the eigenvalues of ``Omega @ cov`` (purely imaginary pairs
    ``+-i nu``), whose moduli are paired off after sorting.
    """
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] % 2:
        raise InvalidArgumentError(f"covariance must be 2n x 2n, got shape {cov.shape}")
    scale = max(1.0, float(np.max(np.abs(cov))))
    if np.max(np.abs(cov - cov.T)) > 1e-12 * scale:
        raise InvalidArgumentError("covariance matrix is not symmetric")
    mods = np.sort(np.abs(np.linalg.eigvals(omega(cov.shape[0] // 2) @ cov)))
    lo, hi = mods[0::2], mods[1::2]
    if np.max(np.abs(lo - hi)) > PHYSICAL_TOL * scale:
        raise InvalidArgumentError("eigenvalues of Omega V do not come in +-i nu pairs")
    return 0.5 * (lo + hi)


def check_physical(cov: np.ndarray) -> bool:
    try:
        return bool(symplectic_spectrum(cov)[0] >= 0.5 - PHYSICAL_TOL)
    except (InvalidArgumentError, np.linalg.LinAlgError):
        return False


def entropy_g(nu: float) -> float:
    """``g(nu) = (nu + 1/2) log2(nu + 1/2) - (nu - 1/2) log2(nu - 1/2)``."""
    if nu < 0.5 - PHYSICAL_TOL:
        raise UnphysicalStateError(f"symplectic eigenvalue {nu!r} < 1/2")
    if nu - 0.5 < _LIMIT_TOL:
        return 0.0
    return (nu + 0.5) * math.log2(nu + 0.5) - (nu - 0.5) * math.log2(nu - 0.5)


def von_neumann_entropy(state: GaussianState | np.ndarray) -> float:
    cov = state.cov if isinstance(state, GaussianState) else state
    return float(sum(entropy_g(nu) for nu in symplectic_spectrum(cov)))


def partial_transpose(cov: np.ndarray, partition: Sequence[int]) -> np.ndarray:
    """Flip the sign of ``p`` on every mode in ``partition``."""
    signs = np.ones(cov.shape[0])
    for m in partition:
        signs[2 * m + 1] = -1.0
    return cov * np.outer(signs, signs)


def log_negativity(state: GaussianState, partition: Sequence[int]) -> float:
    """Logarithmic negativity (bits) across ``partition`` versus the rest."""
    part = sorted(set(partition))
    n = state.n_modes
    if not part or len(part) >= n:
        raise InvalidArgumentError("partition must be a non-empty proper subset of the modes")
    if part[0] < 0 or part[-1] >= n:
        raise InvalidArgumentError(f"partition {part} out of range for {n} modes")
    nus = symplectic_spectrum(partial_transpose(state.cov, part))
    return float(sum(-math.log2(2 * nu) for nu in nus if nu < 0.5))


# -- gate builders -------------------------------------------------------------


def _check_mode(n_modes: int, *modes: int) -> None:
    for m in modes:
        if not (isinstance(m, (int, np.integer)) and 0 <= m < n_modes):
            raise InvalidArgumentError(f"mode {m!r} out of range for {n_modes} modes")


def _check_pair(n_modes: int, i: int, j: int) -> None:
    _check_mode(n_modes, i, j)
    if i == j:
        raise InvalidArgumentError(f"two-mode gate needs distinct modes, got {i} twice")


def alpha_to_shift(alpha: complex) -> tuple[float, float]:
    """Quadrature shifts ``(dq, dp) = (sqrt2 Re alpha, sqrt2 Im alpha)`` of ``D(alpha)``."""
    return math.sqrt(2) * alpha.real, math.sqrt(2) * alpha.imag


def make_displacement(n_modes: int, mode: int, dq: float, dp: float) -> SymplecticTransform:
    _check_mode(n_modes, mode)
    d = np.zeros(2 * n_modes)
    d[2 * mode], d[2 * mode + 1] = dq, dp
    return SymplecticTransform(np.eye(2 * n_modes), d)


def make_squeeze(n_modes: int, mode: int, gamma: float) -> SymplecticTransform:
    """``q -> gamma q``, ``p -> p / gamma``."""
    _check_mode(n_modes, mode)
    if not (gamma > 0 and math.isfinite(gamma)):
        raise InvalidParameterError(f"squeezing gamma must be positive, got {gamma!r}")
    S = np.eye(2 * n_modes)
    S[2 * mode, 2 * mode] = gamma
    S[2 * mode + 1, 2 * mode + 1] = 1.0 / gamma
    return SymplecticTransform(S)


def make_fourier(n_modes: int, mode: int, theta: float) -> SymplecticTransform:
    """Phase rotation: ``q -> cos(t) q + sin(t) p``, ``p -> -sin(t) q + cos(t) p``."""
    _check_mode(n_modes, mode)
    c, s = math.cos(theta), math.sin(theta)
    S = np.eye(2 * n_modes)
    S[2 * mode : 2 * mode + 2, 2 * mode : 2 * mode + 2] = [[c, s], [-s, c]]
    return SymplecticTransform(S)


def make_quadratic(n_modes: int, terms: Sequence[tuple[int, int, float]]) -> SymplecticTransform:
    """Gate ``exp(i H)`` for a quadratic ``H = sum coeff * x_a x_b``.

    ``terms`` holds ``(a, b, coeff)`` with quadrature indices ``a, b`` (see
    :func:`quad_index`).  The induced phase-space map is ``expm(-Omega M)``
    where ``H = x^T M x / 2``.  Products of non-commuting pairs are taken in
    symmetrised order.
    """
    from scipy.linalg import expm

    M = np.zeros((2 * n_modes, 2 * n_modes))
    for a, b, coeff in terms:
        if not (0 <= a < 2 * n_modes and 0 <= b < 2 * n_modes):
            raise InvalidArgumentError(f"quadrature index out of range in term {(a, b, coeff)}")
        M[a, b] += coeff
        M[b, a] += coeff
    return SymplecticTransform(expm(-omega(n_modes) @ M))


def make_cphase(n_modes: int, i: int, j: int, weight: float) -> SymplecticTransform:
    """CPHASE ``exp(i A q_i q_j)``: ``p_i -> p_i + A q_j`` and ``p_j -> p_j + A q_i``."""
    _check_pair(n_modes, i, j)
    S = np.eye(2 * n_modes)
    S[2 * i + 1, 2 * j] = weight
    S[2 * j + 1, 2 * i] = weight
    return SymplecticTransform(S)


def make_beamsplitter_5050(n_modes: int, i: int, j: int) -> SymplecticTransform:
    """50:50 beam splitter whose operator conjugation is
    ``a_i -> -(a_i + a_j)/sqrt2``, ``a_j -> (a_i - a_j)/sqrt2``.

    On phase-space samples this is the transpose of that mode map.
    """
    _check_pair(n_modes, i, j)
    r = 1 / math.sqrt(2)
    S = np.eye(2 * n_modes)
    for k in (0, 1):
        a, b = 2 * i + k, 2 * j + k
        S[a, a], S[a, b] = -r, r
        S[b, a], S[b, b] = -r, -r
    return SymplecticTransform(S)
