"""Classical secrets over private channels (CC): rate ``K_cc = I(D:A) - Holevo``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .cluster import ClusterGraph, build_cluster
from .errors import DegenerateRecipeError, InvalidArgumentError, InvalidParameterError
from .gaussian import GaussianState, partial_trace, von_neumann_entropy


@dataclass(frozen=True)
class MeasurementRecipe:
    """Classical estimate ``s' = sum k * (cos(theta) q_m + sin(theta) p_m)`` over local homodyne outcomes."""

    terms: tuple[tuple[int, float, float], ...]

    def __post_init__(self):
        terms = tuple((int(m), float(th), float(k)) for m, th, k in self.terms)
        if not terms:
            raise InvalidArgumentError("measurement recipe needs at least one term")
        object.__setattr__(self, "terms", terms)

    @property
    def modes(self) -> set[int]:
        return {m for m, _, _ in self.terms}

    def linear_form(self, n_modes: int) -> np.ndarray:
        f = np.zeros(2 * n_modes)
        for m, th, k in self.terms:
            if not 0 <= m < n_modes:
                raise InvalidArgumentError(f"recipe mode {m} out of range for {n_modes} modes")
            f[2 * m] += k * math.cos(th)
            f[2 * m + 1] += k * math.sin(th)
        return f

    def scaled(self, c: float) -> "MeasurementRecipe":
        return MeasurementRecipe(tuple((m, th, c * k) for m, th, k in self.terms))


@dataclass(frozen=True)
class Collaboration:
    parties: tuple[int, ...]
    recipe: MeasurementRecipe


@dataclass(frozen=True)
class CCProtocol:
    """Cluster topology with encodings, secret prior width and access sets.

    The squeezing stored in ``graph`` is ignored: rates are evaluated at the
    uniform ``sigma`` passed to each function.
    """

    graph: ClusterGraph
    collaborations: Mapping[str, Collaboration] = field(default_factory=dict)
    prior_width: float = 1.0
    name: str = ""

    def __post_init__(self):
        if not self.prior_width > 0:
            raise InvalidParameterError(f"prior width Sigma must be positive, got {self.prior_width}")
        for cname, collab in self.collaborations.items():
            parties = set(collab.parties)
            if not parties or not parties <= set(range(self.graph.n_modes)):
                raise InvalidArgumentError(f"collaboration {cname!r} has invalid parties {collab.parties}")
            if not collab.recipe.modes <= parties:
                raise InvalidArgumentError(f"recipe of {cname!r} measures modes outside the collaboration")

    def adversary(self, collab: str) -> list[int]:
        parties = set(self.collaborations[collab].parties)
        return [m for m in range(self.graph.n_modes) if m not in parties]

    def graph_at(self, sigma) -> ClusterGraph:
        return self.graph.with_sigmas(sigma)


@dataclass(frozen=True)
class CCRateResult:
    sigma: float
    I_DA: float
    holevo: float
    K_cc: float
    conditional_width: float


def _collab(spec: CCProtocol, collab: str) -> Collaboration:
    try:
        return spec.collaborations[collab]
    except KeyError:
        raise InvalidArgumentError(f"unknown collaboration {collab!r}") from None


def access_conditional_width(spec: CCProtocol, collab: str, sigma) -> float:
    """Width ``w`` of ``P(s'|s) ~ exp(-(s - s')^2 / w^2)`` for the collaboration's recipe.

    The recipe output is rescaled by its mean response to ``s``, so that it is
    an unbiased estimate of the secret.
    """
    graph = spec.graph_at(sigma)
    f = _collab(spec, collab).recipe.linear_form(graph.n_modes)
    slope = float(f @ graph.secret_response())
    if abs(slope) < 1e-12 * max(1.0, float(np.max(np.abs(f)))):
        raise DegenerateRecipeError(f"recipe of {collab!r} does not respond to the secret")
    var = float(f @ build_cluster(graph).cov @ f)
    return math.sqrt(2 * var) / abs(slope)


def mutual_information_DA(Sigma: float, w: float) -> float:
    """``I(D:A)`` in bits for a Gaussian prior of width ``Sigma`` and Gaussian noise of width ``w``."""
    if not (Sigma >= 0 and w > 0):
        raise InvalidParameterError(f"need Sigma >= 0 and w > 0, got Sigma={Sigma}, w={w}")
    return 0.5 * math.log2((Sigma**2 + w**2) / w**2)


def adversary_states(spec: CCProtocol, collab: str, sigma, Sigma: float | None = None):
    """``(rho_E|D, rho_E)`` for the complement of ``collab``; ``None`` if it is empty.

    ``rho_E`` is the prior average of ``rho_E|D(s)``: same covariance plus
    ``(Sigma^2 / 2) d d^T`` with ``d`` the adversary's mean response per unit ``s``.
    """
    Sigma = spec.prior_width if Sigma is None else Sigma
    adv = spec.adversary(collab)
    if not adv:
        return None
    graph = spec.graph_at(sigma)
    cond = partial_trace(build_cluster(graph), adv)
    idx = [k for m in adv for k in (2 * m, 2 * m + 1)]
    d = graph.secret_response()[idx]
    avg = GaussianState(cond.mean, cond.cov + 0.5 * Sigma**2 * np.outer(d, d))
    return cond, avg


def adversary_holevo(spec: CCProtocol, collab: str, sigma, Sigma: float | None = None) -> float:
    states = adversary_states(spec, collab, sigma, Sigma)
    if states is None:
        return 0.0
    cond, avg = states
    return von_neumann_entropy(avg) - von_neumann_entropy(cond)


def cc_rate(spec: CCProtocol, collab: str, sigma, Sigma: float | None = None) -> CCRateResult:
    Sigma = spec.prior_width if Sigma is None else Sigma
    w = access_conditional_width(spec, collab, sigma)
    info = mutual_information_DA(Sigma, w)
    chi = adversary_holevo(spec, collab, sigma, Sigma)
    s = float(sigma) if np.isscalar(sigma) else float("nan")
    return CCRateResult(s, info, chi, info - chi, w)


def rate_sweep(spec: CCProtocol, collab: str, sigmas: Sequence[float], Sigma: float | None = None):
    return [cc_rate(spec, collab, s, Sigma) for s in sigmas]
