"""CV cluster states built from weighted graphs, and their nullifiers."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import InvalidArgumentError, InvalidParameterError
from .gaussian import (
    GaussianState,
    SymplecticTransform,
    apply_symplectic,
    make_cphase,
    omega,
    squeezed_vacuum,
    tensor,
)


@dataclass(frozen=True)
class ClusterGraph:
    """Weighted graph plus per-mode squeezing and linear secret encodings.

    ``encodings`` holds ``(mode, dq_per_s, dp_per_s)``: before the CPHASE
    gates, ``mode`` is displaced by ``s * (dq_per_s, dp_per_s)``.
    """

    n_modes: int
    edges: tuple[tuple[int, int, float], ...]
    sigmas: tuple[float, ...]
    encodings: tuple[tuple[int, float, float], ...] = ()

    def __post_init__(self):
        n = self.n_modes
        if not (isinstance(n, (int, np.integer)) and n >= 1):
            raise InvalidArgumentError(f"n_modes must be a positive integer, got {n!r}")
        edges = tuple((int(i), int(j), float(w)) for i, j, w in self.edges)
        seen = set()
        for i, j, w in edges:
            if not (0 <= i < n and 0 <= j < n):
                raise InvalidArgumentError(f"edge ({i}, {j}) out of range for {n} modes")
            if i == j:
                raise InvalidArgumentError(f"self-loop on mode {i}")
            key = frozenset((i, j))
            if key in seen:
                raise InvalidArgumentError(f"duplicate edge ({i}, {j})")
            seen.add(key)
            if w == 0 or not math.isfinite(w):
                raise InvalidParameterError(f"edge ({i}, {j}) has invalid weight {w!r}")
        sigmas = tuple(float(x) for x in self.sigmas)
        if len(sigmas) != n:
            raise InvalidArgumentError(f"expected {n} squeezing parameters, got {len(sigmas)}")
        if not all(x > 0 and math.isfinite(x) for x in sigmas):
            raise InvalidParameterError(f"squeezing parameters must be positive, got {sigmas}")
        encodings = tuple((int(m), float(dq), float(dp)) for m, dq, dp in self.encodings)
        for m, _, _ in encodings:
            if not 0 <= m < n:
                raise InvalidArgumentError(f"encoding mode {m} out of range for {n} modes")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "sigmas", sigmas)
        object.__setattr__(self, "encodings", encodings)

    @classmethod
    def uniform(cls, n_modes, edges, sigma=1.0, encodings=()) -> "ClusterGraph":
        return cls(n_modes, tuple(edges), (sigma,) * n_modes, tuple(encodings))

    def with_sigmas(self, sigmas) -> "ClusterGraph":
        if np.isscalar(sigmas):
            sigmas = (sigmas,) * self.n_modes
        return replace(self, sigmas=tuple(sigmas))

    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.n_modes, self.n_modes))
        for i, j, w in self.edges:
            A[i, j] = A[j, i] = w
        return A

    def neighbours(self, mode: int) -> list[int]:
        return [j for j in range(self.n_modes) if self.adjacency()[mode, j] != 0]

    def encoding_vector(self) -> np.ndarray:
        """Pre-CPHASE phase-space displacement per unit secret."""
        d = np.zeros(2 * self.n_modes)
        for m, dq, dp in self.encodings:
            d[2 * m] += dq
            d[2 * m + 1] += dp
        return d

    def cphase_network(self) -> SymplecticTransform:
        S = np.eye(2 * self.n_modes)
        for i, j, w in self.edges:
            S = make_cphase(self.n_modes, i, j, w).matrix @ S
        return SymplecticTransform(S)

    def secret_response(self) -> np.ndarray:
        """Phase-space mean of the built cluster per unit secret."""
        return self.cphase_network().matrix @ self.encoding_vector()


def build_cluster(graph: ClusterGraph, s: float = 0.0) -> GaussianState:
    state = squeezed_vacuum(graph.sigmas[0])
    for sigma in graph.sigmas[1:]:
        state = tensor(state, squeezed_vacuum(sigma))
    net = graph.cphase_network()
    encoded = GaussianState(s * graph.encoding_vector(), state.cov)
    return apply_symplectic(encoded, net)


@dataclass(frozen=True)
class Nullifier:
    """Linear form ``sum_k (q_coeffs[k] q_k + p_coeffs[k] p_k) + constant + s_coeff * s``."""

    q_coeffs: np.ndarray
    p_coeffs: np.ndarray
    constant: float = 0.0
    s_coeff: float = 0.0

    def __post_init__(self):
        q = np.asarray(self.q_coeffs, dtype=float).reshape(-1)
        p = np.asarray(self.p_coeffs, dtype=float).reshape(-1)
        if q.shape != p.shape:
            raise InvalidArgumentError("q and p coefficient vectors differ in length")
        if not (np.any(q) or np.any(p) or self.constant or self.s_coeff):
            raise InvalidArgumentError("nullifier has no nonzero coefficient")
        object.__setattr__(self, "q_coeffs", q)
        object.__setattr__(self, "p_coeffs", p)
        object.__setattr__(self, "constant", float(self.constant))
        object.__setattr__(self, "s_coeff", float(self.s_coeff))

    @property
    def n_modes(self) -> int:
        return self.q_coeffs.shape[0]

    def vector(self) -> np.ndarray:
        """Coefficients interleaved as ``(q1, p1, ..., qn, pn)``."""
        v = np.empty(2 * self.n_modes)
        v[0::2], v[1::2] = self.q_coeffs, self.p_coeffs
        return v

    @classmethod
    def from_vector(cls, v, constant=0.0, s_coeff=0.0) -> "Nullifier":
        v = np.asarray(v, dtype=float)
        return cls(v[0::2], v[1::2], constant, s_coeff)

    @classmethod
    def from_terms(cls, n_modes: int, terms: dict[str, float], constant=0.0, s_coeff=0.0) -> "Nullifier":
        """Build from labels like ``{"p0": 1, "q2": -1}``."""
        v = np.zeros(2 * n_modes)
        for label, c in terms.items():
            v[2 * int(label[1:]) + (label[0] == "p")] += c
        return cls.from_vector(v, constant, s_coeff)

    def __add__(self, other: "Nullifier") -> "Nullifier":
        return Nullifier(self.q_coeffs + other.q_coeffs, self.p_coeffs + other.p_coeffs,
                         self.constant + other.constant, self.s_coeff + other.s_coeff)

    def scaled(self, c: float) -> "Nullifier":
        return Nullifier(c * self.q_coeffs, c * self.p_coeffs, c * self.constant, c * self.s_coeff)

    def __str__(self):
        parts = []
        for k in range(self.n_modes):
            for name, c in (("q", self.q_coeffs[k]), ("p", self.p_coeffs[k])):
                if c:
                    parts.append(f"{c:+g}*{name}{k}")
        if self.s_coeff:
            parts.append(f"{self.s_coeff:+g}*s")
        if self.constant:
            parts.append(f"{self.constant:+g}")
        return " ".join(parts) or "0"


def standard_nullifiers(graph: ClusterGraph) -> list[Nullifier]:
    """``N_i = p_i - sum_j A_ij q_j - dp_i s``, the standard set of the encoded cluster."""
    A = graph.adjacency()
    d = graph.encoding_vector()
    out = []
    for i in range(graph.n_modes):
        p = np.zeros(graph.n_modes)
        p[i] = 1.0
        out.append(Nullifier(-A[i], p, 0.0, -d[2 * i + 1]))
    return out


def symplectic_product(a: Nullifier, b: Nullifier) -> float:
    """``a^T Omega b``; zero iff the operator forms commute."""
    return float(a.vector() @ omega(a.n_modes) @ b.vector())


def transform_nullifier(nf: Nullifier, t: SymplecticTransform) -> Nullifier:
    """The form that annihilates ``t(state)`` whenever ``nf`` annihilates ``state``."""
    if nf.n_modes != t.n_modes:
        raise InvalidArgumentError(f"nullifier has {nf.n_modes} modes, transform has {t.n_modes}")
    v = np.linalg.solve(t.matrix.T, nf.vector())
    return Nullifier.from_vector(v, nf.constant - float(v @ t.shift), nf.s_coeff)


def nullifier_statistics(
    state: GaussianState, combo: Sequence[float], nfs: Sequence[Nullifier], s: float = 0.0
) -> tuple[float, float]:
    """Mean and variance of ``sum_i combo[i] * nfs[i]`` on ``state`` at secret ``s``."""
    if len(combo) != len(nfs):
        raise InvalidArgumentError("combo and nullifier list differ in length")
    f = np.zeros(2 * state.n_modes)
    offset = 0.0
    for l, nf in zip(combo, nfs):
        if nf.n_modes != state.n_modes:
            raise InvalidArgumentError("nullifier and state differ in number of modes")
        f += l * nf.vector()
        offset += l * (nf.constant + nf.s_coeff * s)
    return float(f @ state.mean + offset), float(f @ state.cov @ f)
