"""Monte-Carlo oracle: phase-space sampling of Gaussian states.

Gaussian Wigner functions are proper densities, so drawing phase-space
points and reading off linear combinations reproduces homodyne statistics
exactly for any set of commuting quadratures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cc import CCProtocol, MeasurementRecipe, _collab
from .cluster import build_cluster
from .cq import PairedOutcomes
from .errors import (
    DegenerateRecipeError,
    IncompatibleRecipeError,
    InsufficientDataError,
    InvalidParameterError,
    UnphysicalStateError,
)
from .gaussian import GaussianState, check_physical

CHUNK = 1 << 14
JITTER = 1e-12


@dataclass(frozen=True)
class SampleBatch:
    samples: np.ndarray
    seed: int
    shots: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.samples.shape[0] < 2 or not np.all(np.isfinite(self.samples)):
            raise InsufficientDataError("sample batch needs >= 2 finite rows")


def _check_shots(shots: int) -> int:
    if int(shots) != shots or shots < 2:
        raise InvalidParameterError(f"shots must be an integer >= 2, got {shots!r}")
    return int(shots)


def _normals(seed: int, shots: int, dim: int) -> np.ndarray:
    # one substream per fixed-size chunk, so output does not depend on how chunks are scheduled
    blocks = []
    for k, start in enumerate(range(0, shots, CHUNK)):
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), k]))
        blocks.append(rng.standard_normal((min(CHUNK, shots - start), dim)))
    return np.concatenate(blocks)


def _cholesky(cov: np.ndarray) -> np.ndarray:
    scale = max(1.0, float(np.max(np.diag(cov))))
    return np.linalg.cholesky(cov + JITTER * scale * np.eye(cov.shape[0]))


def sample_state(state: GaussianState, shots: int, seed: int = 0) -> SampleBatch:
    """I.i.d. phase-space points ``(q1, p1, ..., qn, pn)`` from the state's Wigner function."""
    shots = _check_shots(shots)
    if not check_physical(state.cov):
        raise UnphysicalStateError("cannot sample an unphysical covariance")
    L = _cholesky(state.cov)
    x = state.mean + _normals(seed, shots, L.shape[0]) @ L.T
    return SampleBatch(x, int(seed), shots, {"n_modes": state.n_modes})


def simulate_homodyne(state: GaussianState, recipe: MeasurementRecipe, shots: int, seed: int = 0) -> np.ndarray:
    """Per-shot value of the recipe's combination of homodyne outcomes."""
    angles: dict[int, float] = {}
    for m, th, _ in recipe.terms:
        if m in angles and not math.isclose(math.cos(angles[m] - th) ** 2, 1.0, abs_tol=1e-12):
            raise IncompatibleRecipeError(f"recipe measures two different quadratures of mode {m} in one shot")
        angles[m] = th
    f = recipe.linear_form(state.n_modes)
    return sample_state(state, shots, seed).samples @ f


def empirical_covariance(batch: SampleBatch | np.ndarray) -> np.ndarray:
    x = batch.samples if isinstance(batch, SampleBatch) else np.asarray(batch, dtype=float)
    return np.atleast_2d(np.cov(x, rowvar=False))


def covariance_stderr(cov: np.ndarray, shots: int) -> np.ndarray:
    """Gaussian standard error of each sample-covariance entry: ``sqrt((C_ii C_jj + C_ij^2) / N)``."""
    d = np.diag(cov)
    return np.sqrt((np.outer(d, d) + cov**2) / shots)


def empirical_mutual_information(s: np.ndarray, s_prime: np.ndarray) -> float:
    """Gaussian-model ``I(s : s')`` in bits from the residual of regressing ``s'`` on ``s``."""
    s, s_prime = np.asarray(s, dtype=float), np.asarray(s_prime, dtype=float)
    if s.shape != s_prime.shape or s.ndim != 1:
        raise InsufficientDataError("s and s' must be 1-d arrays of equal length")
    if s.size < 100:
        raise InsufficientDataError(f"need >= 100 samples for mutual information, got {s.size}")
    var_s, var_sp = np.var(s), np.var(s_prime)
    if var_s <= 0 or var_sp <= 0:
        raise DegenerateRecipeError("degenerate variance in mutual-information estimate")
    slope = np.cov(s, s_prime)[0, 1] / var_s
    resid = s_prime - slope * (s - s.mean())
    return 0.5 * math.log2(var_sp / np.var(resid))


def sample_secret_and_estimate(spec: CCProtocol, collab: str, sigma: float, shots: int, seed: int = 0,
                               Sigma: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``s`` from the prior ``exp(-s^2/Sigma^2)`` and the collaboration's unbiased estimate ``s'``."""
    shots = _check_shots(shots)
    Sigma = spec.prior_width if Sigma is None else Sigma
    graph = spec.graph_at(sigma)
    f = _collab(spec, collab).recipe.linear_form(graph.n_modes)
    slope = float(f @ graph.secret_response())
    if abs(slope) < 1e-12:
        raise DegenerateRecipeError(f"recipe of {collab!r} does not respond to the secret")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 1 << 20]))
    s = rng.normal(0.0, Sigma / math.sqrt(2), shots)
    noise = sample_state(build_cluster(graph), shots, seed).samples @ f
    return s, (slope * s + noise) / slope


def sample_paired_homodyne(state: GaussianState, shots: int, seed: int = 0) -> PairedOutcomes:
    """Two-mode homodyne record with independent uniform q/p basis choices on each mode."""
    if state.n_modes != 2:
        raise InvalidParameterError("paired homodyne sampling needs a two-mode state")
    x = sample_state(state, shots, seed).samples
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 1 << 21]))
    D_is_p = rng.integers(0, 2, x.shape[0]).astype(bool)
    h_is_p = rng.integers(0, 2, x.shape[0]).astype(bool)
    return PairedOutcomes(D_is_p, np.where(D_is_p, x[:, 1], x[:, 0]), h_is_p, np.where(h_is_p, x[:, 3], x[:, 2]))
