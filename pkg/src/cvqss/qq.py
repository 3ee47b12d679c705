"""Quantum secrets (QQ): entanglement of the extracted dealer/output-mode state."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .cluster import ClusterGraph
from .cq import DecodingSequence, _scalar, extract_DA, party_sigmas
from .errors import InvalidParameterError, NoEntanglementError
from .gaussian import log_negativity


@dataclass(frozen=True)
class QQResult:
    sigma: float
    sigma_D: float
    negativity: float
    collaboration: str = ""


def extracted_negativity(graph: ClusterGraph, seq: DecodingSequence, sigma: float,
                         sigma_D: float | None = None, dealer: int = 0) -> QQResult:
    """Logarithmic negativity (bits) of ``extract_DA`` across the dealer / output-mode cut."""
    sigma_D = party_sigmas(graph, sigma, sigma_D, dealer).sigmas[dealer]
    state = extract_DA(graph, seq, sigma, sigma_D, dealer)
    return QQResult(_scalar(sigma), sigma_D, log_negativity(state, [0]), seq.name)


def required_copies(E_target: float, E_per_copy: float) -> int:
    """Copies of the extracted state whose summed negativity reaches ``E_target``."""
    if not E_per_copy > 0:
        raise NoEntanglementError(f"extracted state carries no entanglement (E = {E_per_copy})")
    if not E_target > 0:
        raise InvalidParameterError(f"target negativity must be positive, got {E_target}")
    # small slack so that exact multiples are not bumped up by roundoff
    return max(1, math.ceil(E_target / E_per_copy - 1e-12))
