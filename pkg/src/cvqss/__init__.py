"""Continuous-variable cluster-state secret sharing.

Covariance-matrix pipelines for classical secrets over private (CC) and
public (CQ) channels, entanglement of extracted states for quantum secrets
(QQ), and a phase-space Monte-Carlo oracle.
"""

from .cc import CCProtocol, CCRateResult, Collaboration, MeasurementRecipe, cc_rate, rate_sweep
from .cluster import ClusterGraph, Nullifier, build_cluster, standard_nullifiers
from .config import ProtocolConfig, load_config, load_preset, parse_config, serialize_config
from .cq import (
    CQProtocol,
    CQRateResult,
    DecodingSequence,
    Gate,
    StandardChannelParams,
    balance_squeezing,
    classical_postprocess,
    cq_pipeline,
    cq_rate,
    extract_DA,
    local_measurement_equivalence,
    mixed_state_prepare,
    standard_params,
    state_average,
)
from .errors import CVQSSError
from .gaussian import GaussianState, SymplecticTransform, log_negativity, symplectic_spectrum, von_neumann_entropy
from .qq import QQResult, extracted_negativity, required_copies

__all__ = [
    "balance_squeezing",
    "build_cluster",
    "cc_rate",
    "CCProtocol",
    "CCRateResult",
    "classical_postprocess",
    "ClusterGraph",
    "Collaboration",
    "cq_pipeline",
    "cq_rate",
    "CQProtocol",
    "CQRateResult",
    "CVQSSError",
    "DecodingSequence",
    "extract_DA",
    "extracted_negativity",
    "Gate",
    "GaussianState",
    "load_config",
    "load_preset",
    "local_measurement_equivalence",
    "log_negativity",
    "MeasurementRecipe",
    "mixed_state_prepare",
    "Nullifier",
    "parse_config",
    "ProtocolConfig",
    "QQResult",
    "rate_sweep",
    "required_copies",
    "serialize_config",
    "standard_nullifiers",
    "standard_params",
    "StandardChannelParams",
    "state_average",
    "symplectic_spectrum",
    "SymplecticTransform",
    "von_neumann_entropy",
]

__version__ = "0.1.0"
