"""Classical secrets over public channels (CQ).

Pipeline: build the ``(n+1)``-mode cluster (dealer kept), run the
collaboration's decoding sequence, reduce to modes ``(D, h)``, balance by
local squeezing, state-average, read off the standard-form channel
parameters and evaluate the direct-reconciliation key rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .cc import MeasurementRecipe
from .cluster import ClusterGraph, build_cluster
from .errors import (
    DegenerateCorrelationError,
    InconsistencyError,
    InsufficientDataError,
    InvalidArgumentError,
    InvalidSequenceError,
    StandardizationError,
    UnphysicalStateError,
)
from .gaussian import (
    PHYSICAL_TOL,
    GaussianState,
    SymplecticTransform,
    apply_symplectic,
    compose,
    entropy_g,
    make_beamsplitter_5050,
    make_cphase,
    make_displacement,
    make_fourier,
    make_quadratic,
    make_squeeze,
    partial_trace,
    quad_index,
)

GATE_KINDS = ("cphase", "quadratic", "fourier", "squeeze", "displace", "beamsplitter")


def _parse_label(label: str) -> tuple[int, str]:
    if len(label) < 2 or label[0] not in "qp" or not label[1:].isdigit():
        raise InvalidArgumentError(f"bad quadrature label {label!r}; expected e.g. 'q1' or 'p0'")
    return int(label[1:]), label[0]


@dataclass(frozen=True)
class Gate:
    """One step of a decoding sequence, stored as data.

    ``kind`` / required ``params``:

    * ``cphase``: ``modes=(i, j)``, ``weight`` -- ``exp(i w q_i q_j)``
    * ``quadratic``: ``terms=((a, b, c), ...)`` with labels like ``"p1"`` -- ``exp(i sum c x_a x_b)``
    * ``fourier``: ``modes=(m,)``, ``theta``
    * ``squeeze``: ``modes=(m,)``, ``gamma``
    * ``displace``: ``modes=(m,)``, ``dq``, ``dp``
    * ``beamsplitter``: ``modes=(i, j)`` -- 50:50
    """

    kind: str
    modes: tuple[int, ...] = ()
    params: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise InvalidArgumentError(f"unknown gate kind {self.kind!r}")
        modes = tuple(int(m) for m in self.modes)
        if self.kind == "quadratic":
            terms = tuple((str(a), str(b), float(c)) for a, b, c in self.params.get("terms", ()))
            if not terms:
                raise InvalidArgumentError("quadratic gate needs at least one term")
            modes = tuple(sorted({_parse_label(x)[0] for a, b, _ in terms for x in (a, b)}))
            object.__setattr__(self, "params", {"terms": terms})
        else:
            arity = 2 if self.kind in ("cphase", "beamsplitter") else 1
            if len(modes) != arity:
                raise InvalidArgumentError(f"{self.kind} gate needs {arity} mode(s), got {modes}")
        object.__setattr__(self, "modes", modes)

    def build(self, n_modes: int) -> SymplecticTransform:
        p = self.params
        if self.kind == "cphase":
            return make_cphase(n_modes, *self.modes, float(p["weight"]))
        if self.kind == "beamsplitter":
            return make_beamsplitter_5050(n_modes, *self.modes)
        if self.kind == "fourier":
            return make_fourier(n_modes, self.modes[0], float(p["theta"]))
        if self.kind == "squeeze":
            return make_squeeze(n_modes, self.modes[0], float(p["gamma"]))
        if self.kind == "displace":
            return make_displacement(n_modes, self.modes[0], float(p.get("dq", 0.0)), float(p.get("dp", 0.0)))
        terms = []
        for a, b, c in p["terms"]:
            (ma, qa), (mb, qb) = _parse_label(a), _parse_label(b)
            if max(ma, mb) >= n_modes:
                raise InvalidArgumentError(f"quadratic term ({a}, {b}) out of range for {n_modes} modes")
            terms.append((quad_index(ma, qa), quad_index(mb, qb), c))
        return make_quadratic(n_modes, terms)


@dataclass(frozen=True)
class DecodingSequence:
    """Gaussian circuit on the collaboration's modes that moves the dealer correlations onto ``output_mode``."""

    parties: tuple[int, ...]
    gates: tuple[Gate, ...]
    output_mode: int
    name: str = ""

    def __post_init__(self):
        parties = tuple(int(m) for m in self.parties)
        object.__setattr__(self, "parties", parties)
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.output_mode not in parties:
            raise InvalidSequenceError(f"output mode {self.output_mode} is not in the collaboration {parties}")
        for g in self.gates:
            outside = set(g.modes) - set(parties)
            if outside:
                raise InvalidSequenceError(
                    f"gate {g.kind} on modes {sorted(outside)} acts outside the collaboration {parties}"
                )

    def transform(self, n_modes: int) -> SymplecticTransform:
        return compose([g.build(n_modes) for g in self.gates], n_modes)


@dataclass(frozen=True)
class CQProtocol:
    graph: ClusterGraph
    dealer: int = 0
    collaborations: Mapping[str, DecodingSequence] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        if not 0 <= self.dealer < self.graph.n_modes:
            raise InvalidArgumentError(f"dealer mode {self.dealer} out of range")
        for cname, seq in self.collaborations.items():
            if self.dealer in seq.parties:
                raise InvalidSequenceError(f"collaboration {cname!r} includes the dealer mode")

    def sequence(self, collab: str) -> DecodingSequence:
        try:
            return self.collaborations[collab]
        except KeyError:
            raise InvalidArgumentError(f"unknown collaboration {collab!r}") from None


@dataclass(frozen=True)
class StandardChannelParams:
    V: float
    Vprime: float
    c: float
    tau: float
    chi: float
    sign: int = 1
    degenerate: bool = False

    def __post_init__(self):
        if self.c**2 > self.V * self.Vprime * (1 + 1e-12):
            raise UnphysicalStateError(f"c^2 = {self.c**2} exceeds V * V' = {self.V * self.Vprime}")


@dataclass(frozen=True)
class CQRateResult:
    sigma: float
    sigma_D: float
    I_DA: float
    holevo: float
    K_CQ: float
    params: StandardChannelParams
    gammas: tuple[float, float]


def party_sigmas(graph: ClusterGraph, sigma, sigma_D: float | None, dealer: int) -> ClusterGraph:
    """Graph squeezed at ``sigma`` (scalar or per-mode) with the dealer overridden by ``sigma_D``."""
    if np.isscalar(sigma):
        sigmas = [float(sigma)] * graph.n_modes
    else:
        sigmas = [float(x) for x in sigma]
        if len(sigmas) != graph.n_modes:
            raise InvalidArgumentError(f"expected {graph.n_modes} squeezing parameters, got {len(sigmas)}")
    if sigma_D is not None:
        sigmas[dealer] = float(sigma_D)
    return graph.with_sigmas(tuple(sigmas))


def decoded_state(graph: ClusterGraph, seq: DecodingSequence, sigma, sigma_D=None, dealer: int = 0) -> GaussianState:
    """Full register after the decoding sequence (all modes kept)."""
    if dealer in seq.parties or any(dealer in g.modes for g in seq.gates):
        raise InvalidSequenceError("decoding sequence must not touch the dealer mode")
    g = party_sigmas(graph, sigma, sigma_D, dealer)
    return apply_symplectic(build_cluster(g), seq.transform(g.n_modes))


def extract_DA(graph: ClusterGraph, seq: DecodingSequence, sigma, sigma_D=None, dealer: int = 0) -> GaussianState:
    """Two-mode state of the dealer and ``seq.output_mode``, in that order."""
    return partial_trace(decoded_state(graph, seq, sigma, sigma_D, dealer), [dealer, seq.output_mode])


def _cov(x) -> np.ndarray:
    cov = x.cov if isinstance(x, GaussianState) else np.asarray(x, dtype=float)
    if cov.shape != (4, 4):
        raise InvalidArgumentError(f"expected a two-mode (4x4) covariance, got {cov.shape}")
    return cov


def balance_squeezing(V_DA) -> tuple[float, float, np.ndarray]:
    """Local squeezing that equalises the dealer's quadratures and the two cross correlations.

    Returns ``(gamma_D, gamma_h, V')``.  ``gamma_D = (Var p_D / Var q_D)^(1/4)``;
    ``gamma_h`` makes ``|<dq_D dp_h>| = |<dp_D dq_h>|`` after both squeezers.
    """
    V = _cov(V_DA)
    a, b = V[0, 3], V[1, 2]
    scale = float(np.max(np.abs(V)))
    if abs(a) <= 1e-12 * scale or abs(b) <= 1e-12 * scale:
        raise DegenerateCorrelationError(
            f"cross correlations <dq_D dp_h> = {a:.3g}, <dp_D dq_h> = {b:.3g}; need both nonzero"
        )
    gamma_D = (V[1, 1] / V[0, 0]) ** 0.25
    gamma_h = gamma_D * math.sqrt(abs(a) / abs(b))
    S = np.diag([gamma_D, 1 / gamma_D, gamma_h, 1 / gamma_h])
    return gamma_D, gamma_h, S @ V @ S.T


def state_average(V_prime) -> np.ndarray:
    """Covariance of the equal mixture of ``F_D(-pi/2)`` and ``F_h(-pi/2)`` applied to ``V'``."""
    V = _cov(V_prime)
    RD = make_fourier(2, 0, -math.pi / 2).matrix
    Rh = make_fourier(2, 1, -math.pi / 2).matrix
    out = 0.5 * (RD @ V @ RD.T + Rh @ V @ Rh.T)
    return 0.5 * (out + out.T)


def standard_params(V_doubleprime, tol: float = 1e-8) -> StandardChannelParams:
    """Read ``(V, V', c)`` off a standard-form covariance and derive ``tau``, ``chi``."""
    M = _cov(V_doubleprime)
    atol = tol * max(1.0, float(np.max(np.abs(M))))
    problems = []
    if abs(M[0, 0] - M[1, 1]) > atol:
        problems.append("dealer quadrature variances differ")
    if abs(M[2, 2] - M[3, 3]) > atol:
        problems.append("output-mode quadrature variances differ")
    if abs(M[0, 1]) > atol or abs(M[2, 3]) > atol:
        problems.append("local q-p coherences present")
    if abs(M[0, 3]) > atol or abs(M[1, 2]) > atol:
        problems.append("cross q-p correlations present")
    if abs(M[0, 2] + M[1, 3]) > atol:
        problems.append("cross block is not of the form c * diag(1, -1)")
    if problems:
        raise StandardizationError("covariance not in standard form: " + "; ".join(problems))
    V, Vp = 0.5 * (M[0, 0] + M[1, 1]), 0.5 * (M[2, 2] + M[3, 3])
    c_signed = 0.5 * (M[0, 2] - M[1, 3])
    c = abs(c_signed)
    sign = -1 if c_signed < 0 else 1
    if c <= atol:
        return StandardChannelParams(V, Vp, 0.0, 0.0, math.inf, sign, degenerate=True)
    if V**2 - 0.25 <= 0:
        raise UnphysicalStateError(f"dealer variance V = {V} leaves no room for correlations")
    tau = c**2 / (V**2 - 0.25)
    return StandardChannelParams(V, Vp, c, tau, Vp / tau - V, sign)


def _nu(x: float) -> float:
    if x < 0.5 - PHYSICAL_TOL:
        raise UnphysicalStateError(f"symplectic eigenvalue {x!r} < 1/2")
    return max(x, 0.5)


def cq_rate(params: StandardChannelParams, sigma: float = math.nan, sigma_D: float = math.nan,
            gammas: tuple[float, float] = (math.nan, math.nan)) -> CQRateResult:
    """Direct-reconciliation rate ``K = I(D:A) - [S(E) - S(E|D)]`` from the channel parameters."""
    V, Vp, c, chi = params.V, params.Vprime, params.c, params.chi
    if params.degenerate:
        info = 0.0
    else:
        info = 0.5 * math.log2((V + chi) / (chi + 1 / (4 * V)))
    root = math.sqrt(max((V + Vp) ** 2 - 4 * c**2, 0.0))
    nu_plus = _nu(0.5 * (root + (V - Vp)))
    nu_minus = _nu(0.5 * (root - (V - Vp)))
    nu_c = _nu(math.sqrt(max(Vp * (Vp - c**2 / V), 0.0)))
    holevo = entropy_g(nu_plus) + entropy_g(nu_minus) - entropy_g(nu_c)
    return CQRateResult(sigma, sigma_D, info, holevo, info - holevo, params, gammas)


def _scalar(sigma) -> float:
    return float(sigma) if np.isscalar(sigma) else math.nan


def cq_pipeline(protocol: CQProtocol, collab: str, sigma: float, sigma_D: float | None = None) -> CQRateResult:
    sigma_D = party_sigmas(protocol.graph, sigma, sigma_D, protocol.dealer).sigmas[protocol.dealer]
    state = extract_DA(protocol.graph, protocol.sequence(collab), sigma, sigma_D, protocol.dealer)
    gamma_D, gamma_h, Vp = balance_squeezing(state)
    params = standard_params(state_average(Vp))
    return cq_rate(params, _scalar(sigma), sigma_D, (gamma_D, gamma_h))


# -- simplifications ---------------------------------------------------------


def _dealer_degree(graph: ClusterGraph, dealer: int) -> int:
    A = graph.adjacency()
    weights = A[dealer][A[dealer] != 0]
    if np.any(np.abs(np.abs(weights) - 1) > 1e-12):
        raise InvalidArgumentError("dealer edges must have unit weight (|A| = 1)")
    return len(weights)


def dealer_equivalent_two_mode(graph: ClusterGraph, sigma: float, sigma_D: float, dealer: int = 0) -> GaussianState:
    """Two-mode cluster ``(D, u)`` with ``u`` squeezed at ``sigma / sqrt(N)``.

    Its dealer marginal equals that of the full cluster with ``N`` unit-weight
    dealer edges.  An isolated dealer gives the bare squeezed vacuum.
    """
    N = _dealer_degree(graph, dealer)
    if N == 0:
        return build_cluster(ClusterGraph(1, (), (sigma_D,)))
    return build_cluster(ClusterGraph(2, ((0, 1, 1.0),), (sigma_D, sigma / math.sqrt(N))))


def dealer_outcome_variance(graph: ClusterGraph, basis: str, sigma: float, sigma_D: float, dealer: int = 0) -> float:
    """Variance of the dealer's homodyne outcome: ``1/(2 sigma_D^2)`` or ``(sigma_D^2 + N/sigma^2)/2``."""
    N = _dealer_degree(graph, dealer)
    if basis == "q":
        return 1 / (2 * sigma_D**2)
    if basis == "p":
        return (sigma_D**2 + N / sigma**2) / 2
    raise InvalidArgumentError(f"basis must be 'q' or 'p', got {basis!r}")


def wigner_precision(graph: ClusterGraph) -> np.ndarray:
    """Inverse covariance read off the cluster Wigner exponent ``sum sigma_i^2 q_i^2 + N_i^2 / sigma_i^2``."""
    n = graph.n_modes
    A = graph.adjacency()
    P = np.zeros((2 * n, 2 * n))
    for i, s in enumerate(graph.sigmas):
        e = np.zeros(2 * n)
        e[2 * i] = 1.0
        P += s**2 * np.outer(e, e)
        nf = np.zeros(2 * n)
        nf[2 * i + 1] = 1.0
        nf[0::2] -= A[i]
        P += np.outer(nf, nf) / s**2
    return 2 * P


def mixed_state_prepare(graph: ClusterGraph, basis: str, s: float, sigma: float,
                        sigma_D: float | None = None, dealer: int = 0) -> GaussianState:
    """Party-side state the dealer distributes instead of measuring mode ``D`` with outcome ``s``.

    ``q`` basis: the party cluster displaced by ``A_iD * s`` in ``p_i``.
    ``p`` basis: fix ``p_D = s`` in the cluster Wigner function and integrate out ``q_D``.
    Parties are returned in ascending mode order.
    """
    g = party_sigmas(graph, sigma, sigma_D, dealer)
    parties = [m for m in range(g.n_modes) if m != dealer]
    if basis == "q":
        A = g.adjacency()
        index = {m: k for k, m in enumerate(parties)}
        edges = tuple((index[i], index[j], w) for i, j, w in g.edges if dealer not in (i, j))
        enc = tuple((index[m], 0.0, A[m, dealer]) for m in parties if A[m, dealer] != 0)
        sub = ClusterGraph(len(parties), edges, tuple(g.sigmas[m] for m in parties), enc)
        return build_cluster(sub, s)
    if basis != "p":
        raise InvalidArgumentError(f"basis must be 'q' or 'p', got {basis!r}")
    P = wigner_precision(g)
    fixed = 2 * dealer + 1
    free = [k for k in range(2 * g.n_modes) if k != fixed]
    cov_free = np.linalg.inv(P[np.ix_(free, free)])
    mean_free = -cov_free @ P[free, fixed] * s
    keep = [free.index(k) for m in parties for k in (2 * m, 2 * m + 1)]
    return GaussianState(mean_free[keep], cov_free[np.ix_(keep, keep)])


def prepared_mixture(graph: ClusterGraph, basis: str, sigma: float, sigma_D: float | None = None,
                     dealer: int = 0) -> GaussianState:
    """Average of :func:`mixed_state_prepare` over the dealer's outcome distribution."""
    sigma_D = sigma if sigma_D is None else sigma_D
    at0 = mixed_state_prepare(graph, basis, 0.0, sigma, sigma_D, dealer)
    response = mixed_state_prepare(graph, basis, 1.0, sigma, sigma_D, dealer).mean - at0.mean
    var_s = dealer_outcome_variance(graph, basis, sigma, sigma_D, dealer)
    return GaussianState(at0.mean, at0.cov + var_s * np.outer(response, response))


@dataclass(frozen=True)
class PairedOutcomes:
    """Per-shot homodyne results of the dealer and party ``h``; ``*_is_p`` marks p-basis shots."""

    D_is_p: np.ndarray
    x_D: np.ndarray
    h_is_p: np.ndarray
    x_h: np.ndarray


@dataclass(frozen=True)
class ProcessedSamples:
    """Emulated ``(q_D, q_h)`` and ``(p_D, p_h)`` measurements of the state-averaged state."""

    qq: np.ndarray
    pp: np.ndarray

    def covariance(self) -> np.ndarray:
        """Estimate of ``V''``; cross-quadrature entries are not observable and set to 0."""
        cq, cp = np.cov(self.qq, rowvar=False), np.cov(self.pp, rowvar=False)
        M = np.zeros((4, 4))
        M[0, 0], M[2, 2], M[0, 2] = cq[0, 0], cq[1, 1], cq[0, 1]
        M[1, 1], M[3, 3], M[1, 3] = cp[0, 0], cp[1, 1], cp[0, 1]
        return M + np.triu(M, 1).T

    def standard_errors(self) -> np.ndarray:
        """Gaussian standard errors of the entries returned by :meth:`covariance` (0 where unobserved)."""
        out = np.zeros((4, 4))
        for data, (a, b) in ((self.qq, (0, 2)), (self.pp, (1, 3))):
            c = np.cov(data, rowvar=False)
            n = data.shape[0]
            for (i, j), (u, v) in {(a, a): (0, 0), (b, b): (1, 1), (a, b): (0, 1)}.items():
                out[i, j] = out[j, i] = math.sqrt((c[u, u] * c[v, v] + c[u, v] ** 2) / n)
        return out


def classical_postprocess(samples: PairedOutcomes, gamma_D: float, gamma_h: float) -> ProcessedSamples:
    """Emulate squeezing and state-averaging on measured data.

    Outcomes are rescaled like the squeezer (``q -> gamma q``, ``p -> p / gamma``);
    only cross-basis pairs are kept.  Half of each sifted set feeds the
    ``(q_D, q_h)`` emulation with the sign flips of the quarter-turn, the
    other half feeds ``(p_D, p_h)``.
    """
    D_is_p = np.asarray(samples.D_is_p, dtype=bool)
    h_is_p = np.asarray(samples.h_is_p, dtype=bool)
    xD = np.where(D_is_p, samples.x_D / gamma_D, samples.x_D * gamma_D)
    xh = np.where(h_is_p, samples.x_h / gamma_h, samples.x_h * gamma_h)
    qp = np.flatnonzero(~D_is_p & h_is_p)
    pq = np.flatnonzero(D_is_p & ~h_is_p)
    qp1, qp2 = qp[: len(qp) // 2], qp[len(qp) // 2 :]
    pq1, pq2 = pq[: len(pq) // 2], pq[len(pq) // 2 :]
    m1, m2 = min(len(qp1), len(pq1)), min(len(qp2), len(pq2))
    if m1 == 0 or m2 == 0:
        raise InsufficientDataError("no cross-basis (q_D, p_h) / (p_D, q_h) pairs after sifting")
    qp1, pq1, qp2, pq2 = qp1[:m1], pq1[:m1], qp2[:m2], pq2[:m2]
    qq = np.concatenate([np.column_stack([xD[qp1], -xh[qp1]]), np.column_stack([-xD[pq1], xh[pq1]])])
    pp = np.concatenate([np.column_stack([xD[qp2], xh[qp2]]), np.column_stack([xD[pq2], xh[pq2]])])
    return ProcessedSamples(qq, pp)


def local_measurement_equivalence(graph: ClusterGraph, seq: DecodingSequence, recipe: MeasurementRecipe,
                                  sigma: float, sigma_D: float | None = None, dealer: int = 0,
                                  quadrature: str = "q") -> tuple[np.ndarray, np.ndarray]:
    """Joint covariance of the dealer quadrature and the collaboration's estimate, computed two ways.

    ``quadrature='q'``: ``recipe`` is ``Q_A`` (paired with ``p_D``), compared with
    ``q_h`` after decoding.  ``'p'``: ``P_A`` with ``q_D`` versus ``p_h``.
    Returns ``(local, global)`` 2x2 covariances.
    """
    if not recipe.modes <= set(seq.parties):
        raise InvalidArgumentError("recipe measures modes outside the collaboration")
    if quadrature not in ("q", "p"):
        raise InvalidArgumentError(f"quadrature must be 'q' or 'p', got {quadrature!r}")
    g = party_sigmas(graph, sigma, sigma_D, dealer)
    n = g.n_modes
    state = build_cluster(g)
    f = recipe.linear_form(n)
    dealer_idx = quad_index(dealer, "p" if quadrature == "q" else "q")
    h_idx = quad_index(seq.output_mode, quadrature)
    t = seq.transform(n)
    mapped = np.linalg.solve(t.matrix.T, f)
    target = np.zeros(2 * n)
    target[h_idx] = 1.0
    if np.max(np.abs(mapped - target)) > 1e-9 * max(1.0, float(np.max(np.abs(f)))):
        raise InconsistencyError(f"decoding maps the recipe to {np.round(mapped, 6)}, not {quadrature}_h")
    e = np.zeros(2 * n)
    e[dealer_idx] = 1.0
    L = np.vstack([e, f])
    local = L @ state.cov @ L.T
    after = apply_symplectic(state, t)
    idx = [dealer_idx, h_idx]
    return local, after.cov[np.ix_(idx, idx)]
