"""The six direct fidelity estimation protocols and their exact oracles.

Each estimator draws K phase-space points (or point pairs) from the target's
importance distribution, runs N_k bounded device measurements per draw, and
averages in fixed k order.  Importance tables are materialized over the
support only, so the per-draw divisions never see a zero weight.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .device import BACKENDS, ChannelSampler, StateSampler, StreamPool
from .errors import ValidationError
from .magic import DEFAULT_ZERO_THRESHOLD, mana_channel, mana_state
from .phase_space import QuantumChannel, wigner_of_channel, wigner_of_state
from .stabilizer import is_clifford, is_stabilizer_state
from .system import DEFAULT_TOL, SystemSpec, validate_density_matrix, validate_state_vector

PROTOCOL_NAMES = (
    "state_l2",
    "state_l1",
    "state_stabilizer",
    "channel_l2",
    "channel_l1",
    "channel_clifford",
)
STATE_PROTOCOLS = PROTOCOL_NAMES[:3]
CHANNEL_PROTOCOLS = PROTOCOL_NAMES[3:]


@dataclass(frozen=True)
class ProtocolConfig:
    """Additive error epsilon, failure probability delta, master seed."""

    epsilon: float
    delta: float
    seed: int = 0
    protocol: str = ""
    backend: str = "bernoulli"

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValidationError(f"epsilon={self.epsilon} must lie strictly in (0, 1)")
        if not 0.0 < self.delta < 1.0:
            raise ValidationError(f"delta={self.delta} must lie strictly in (0, 1)")
        if self.protocol and self.protocol not in PROTOCOL_NAMES:
            raise ValidationError(f"unknown protocol {self.protocol!r}")
        if self.backend not in BACKENDS:
            raise ValidationError(f"unknown backend {self.backend!r}")


@dataclass(frozen=True)
class EstimationResult:
    """Fidelity estimate with its full shot schedule and resource accounting."""

    estimate: float
    K: int
    Nk: np.ndarray = field(repr=False)
    total_samples: int
    seed: int
    stream: int
    protocol: str
    exact: float | None = None
    wall_time: float = 0.0


def shot_ceil(x: float) -> int:
    """Ceiling with a 1e-9 guard band: a value at or barely above an integer
    rounds to the next one, so roundoff can only add a shot, never shave one."""
    if not math.isfinite(x) or x <= 0:
        raise ValidationError(f"shot count formula produced {x}")
    m = math.floor(x)
    return int(m) + 1 if (x - m) <= 1e-9 else int(math.ceil(x))


def chebyshev_K(epsilon: float, delta: float, scale: float = 1.0) -> int:
    """K = ceil(8 * scale / (epsilon^2 delta)) for the Chebyshev-stage protocols."""
    return shot_ceil(8.0 * scale / (epsilon * epsilon * delta))


def hoeffding_K(epsilon: float, delta: float) -> int:
    """K = ceil(8 ln(4/delta) / epsilon^2) for the well-conditioned protocols."""
    return shot_ceil(8.0 / (epsilon * epsilon) * math.log(4.0 / delta))


def exact_state_fidelity(psi: np.ndarray, rho: np.ndarray) -> float:
    """tr[psi rho] = <psi|rho|psi> for a pure target (simulator ground truth)."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (psi.size, psi.size):
        raise ValidationError(f"dimension mismatch: state {psi.size}, density {rho.shape}")
    val = complex(psi.conj() @ rho @ psi)
    if abs(val.imag) > DEFAULT_TOL.derived or not -DEFAULT_TOL.derived <= val.real <= 1.0 + DEFAULT_TOL.derived:
        raise ValidationError(f"fidelity {val} outside [0, 1]")
    return float(val.real)


def exact_channel_fidelity(target: QuantumChannel, actual: QuantumChannel) -> float:
    """Entanglement fidelity (1/d^2n) sum_uv W_U(v|u) W_Lambda(v|u)."""
    if target.system != actual.system:
        raise ValidationError("channels live on different systems")
    if not target.is_unitary:
        raise ValidationError("target channel must be unitary")
    spec = target.system
    wu = wigner_of_channel(spec, target).values
    wl = wigner_of_channel(spec, actual).values
    return float(np.sum(wu * wl) / spec.P)


def _support_table(weights: np.ndarray):
    """Normalized cumulative table over strictly positive weights."""
    pr = weights / weights.sum()
    cum = np.cumsum(pr)
    cum[-1] = 1.0
    return cum


def _draw(cum: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    return np.minimum(np.searchsorted(cum, rng.random(count), side="right"), len(cum) - 1)


def _state_support(spec: SystemSpec, psi: np.ndarray):
    wf = wigner_of_state(spec, psi)
    support = np.nonzero(np.abs(wf.values) > DEFAULT_ZERO_THRESHOLD)[0]
    return wf, wf.values, support


def _finish(estimate, K, Nk, cfg, stream, exact, t0) -> EstimationResult:
    return EstimationResult(
        estimate=float(estimate),
        K=int(K),
        Nk=np.asarray(Nk, dtype=np.int64),
        total_samples=int(np.sum(Nk)),
        seed=cfg.seed,
        stream=stream,
        protocol=cfg.protocol,
        exact=exact,
        wall_time=time.perf_counter() - t0,
    )


def estimate_state_fidelity_l2(
    psi: np.ndarray,
    rho_device: np.ndarray,
    cfg: ProtocolConfig,
    spec: SystemSpec,
    stream: int = 0,
    compute_exact: bool = True,
) -> EstimationResult:
    """l2 state protocol: sample points with Pr(u) = d^n W_psi(u)^2 and
    estimate X_u = W_rho(u) / W_psi(u).  K = ceil(8/(eps^2 delta))."""
    t0 = time.perf_counter()
    cfg = _named(cfg, "state_l2")
    psi = validate_state_vector(psi, spec)
    rho = validate_density_matrix(rho_device, spec)
    _, w, support = _state_support(spec, psi)
    cum = _support_table(spec.D * w[support] ** 2)
    K = chebyshev_K(cfg.epsilon, cfg.delta)
    delta_sq = (1.0 / spec.D) ** 2
    lnq = math.log(4.0 / cfg.delta)
    eps_sq = cfg.epsilon * cfg.epsilon
    pool = StreamPool(cfg.seed, stream)
    draws = support[_draw(cum, K, pool.stream(0))]
    sampler = StateSampler(spec, rho)
    Nk = np.empty(K, dtype=np.int64)
    acc = 0.0
    for k in range(K):
        ui = int(draws[k])
        wu = w[ui]
        nk = shot_ceil(8.0 * delta_sq / (K * wu * wu * eps_sq) * lnq)
        vals = sampler.values(ui, nk, pool.stream(k + 1))
        acc += vals.mean() / wu
        Nk[k] = nk
    exact = exact_state_fidelity(psi, rho) if compute_exact else None
    return _finish(acc / K, K, Nk, cfg, stream, exact, t0)


def estimate_state_fidelity_l1(
    psi: np.ndarray,
    rho_device: np.ndarray,
    cfg: ProtocolConfig,
    spec: SystemSpec,
    stream: int = 0,
    compute_exact: bool = True,
) -> EstimationResult:
    """l1 state protocol: sample points with Pr(u) = |W_psi(u)| / Delta_psi
    where Delta_psi = 2^mana; per-point estimator sgn(W_psi) d^n Delta_psi O."""
    t0 = time.perf_counter()
    cfg = _named(cfg, "state_l1")
    psi = validate_state_vector(psi, spec)
    rho = validate_density_matrix(rho_device, spec)
    wf, w, support = _state_support(spec, psi)
    delta_psi = 2.0 ** mana_state(wf)
    cum = _support_table(np.abs(w[support]))
    K = chebyshev_K(cfg.epsilon, cfg.delta, scale=delta_psi)
    lnq = math.log(4.0 / cfg.delta)
    nk = shot_ceil(8.0 * delta_psi**2 / (K * cfg.epsilon**2) * lnq)
    pool = StreamPool(cfg.seed, stream)
    draws = support[_draw(cum, K, pool.stream(0))]
    sampler = StateSampler(spec, rho)
    acc = 0.0
    for k in range(K):
        ui = int(draws[k])
        vals = sampler.values(ui, nk, pool.stream(k + 1))
        acc += math.copysign(1.0, w[ui]) * spec.D * delta_psi * vals.mean()
    exact = exact_state_fidelity(psi, rho) if compute_exact else None
    return _finish(acc / K, K, np.full(K, nk, dtype=np.int64), cfg, stream, exact, t0)


def estimate_stabilizer_fidelity(
    psi: np.ndarray,
    rho_device: np.ndarray,
    cfg: ProtocolConfig,
    spec: SystemSpec,
    stream: int = 0,
    compute_exact: bool = True,
) -> EstimationResult:
    """Well-conditioned (stabilizer) state protocol: uniform sampling over the
    stabilizer support, one raw A_u eigenvalue per point, K = ceil(8 ln(4/delta)/eps^2)."""
    t0 = time.perf_counter()
    cfg = _named(cfg, "state_stabilizer")
    psi = validate_state_vector(psi, spec)
    if not is_stabilizer_state(psi, spec):
        raise ValidationError("the stabilizer protocol requires a pure stabilizer target state")
    rho = validate_density_matrix(rho_device, spec)
    _, w, support = _state_support(spec, psi)
    cum = _support_table(w[support])
    K = hoeffding_K(cfg.epsilon, cfg.delta)
    nk = shot_ceil(8.0 / (K * cfg.epsilon**2) * math.log(4.0 / cfg.delta))
    pool = StreamPool(cfg.seed, stream)
    draws = support[_draw(cum, K, pool.stream(0))]
    sampler = StateSampler(spec, rho)
    acc = 0.0
    for k in range(K):
        vals = sampler.eigenvalues(int(draws[k]), nk, pool.stream(k + 1))
        acc += vals.mean()
    exact = exact_state_fidelity(psi, rho) if compute_exact else None
    return _finish(acc / K, K, np.full(K, nk, dtype=np.int64), cfg, stream, exact, t0)


def _channel_support(spec: SystemSpec, target: QuantumChannel):
    if not target.is_unitary:
        raise ValidationError("target channel must be unitary")
    cw = wigner_of_channel(spec, target)
    pairs = np.argwhere(np.abs(cw.values) > DEFAULT_ZERO_THRESHOLD)
    return cw, cw.values, pairs


def estimate_channel_fidelity_l2(
    target: QuantumChannel,
    lambda_device: QuantumChannel,
    cfg: ProtocolConfig,
    stream: int = 0,
    compute_exact: bool = True,
) -> EstimationResult:
    """l2 channel protocol: sample pairs with Pr(v,u) = W_U(v|u)^2 / d^2n and
    estimate X = W_Lambda(v|u) / W_U(v|u).  K = ceil(8/(eps^2 delta)), Delta = 1."""
    t0 = time.perf_counter()
    cfg = _named(cfg, "channel_l2")
    spec = target.system
    _, wu, pairs = _channel_support(spec, target)
    wvals = wu[pairs[:, 0], pairs[:, 1]]
    cum = _support_table(wvals**2)
    K = chebyshev_K(cfg.epsilon, cfg.delta)
    lnq = math.log(4.0 / cfg.delta)
    eps_sq = cfg.epsilon * cfg.epsilon
    pool = StreamPool(cfg.seed, stream)
    draws = _draw(cum, K, pool.stream(0))
    sampler = ChannelSampler(spec, lambda_device, cfg.backend)
    Nk = np.empty(K, dtype=np.int64)
    acc = 0.0
    for k in range(K):
        vi, ui = (int(x) for x in pairs[draws[k]])
        wk = wu[vi, ui]
        nk = shot_ceil(8.0 / (K * wk * wk * eps_sq) * lnq)
        vals = sampler.values(vi, ui, nk, pool.stream(k + 1))
        acc += vals.mean() / wk
        Nk[k] = nk
    exact = exact_channel_fidelity(target, lambda_device) if compute_exact else None
    return _finish(acc / K, K, Nk, cfg, stream, exact, t0)


def estimate_channel_fidelity_l1(
    target: QuantumChannel,
    lambda_device: QuantumChannel,
    cfg: ProtocolConfig,
    stream: int = 0,
    compute_exact: bool = True,
) -> EstimationResult:
    """l1 channel protocol: sample pairs with Pr(v,u) = |W_U(v|u)| / beta_U, scaling
    outcomes by sgn(W_U) beta_U / d^2n (the unbiased weight; the max-column
    mass Delta_U = 2^mana only sets K and N_k, since beta_U/d^2n <= Delta_U)."""
    t0 = time.perf_counter()
    cfg = _named(cfg, "channel_l1")
    spec = target.system
    cw, wu, pairs = _channel_support(spec, target)
    wvals = wu[pairs[:, 0], pairs[:, 1]]
    beta = float(np.abs(wu).sum())
    delta_u = 2.0 ** mana_channel(cw)
    if beta / spec.P > delta_u + DEFAULT_TOL.derived:
        raise ValidationError("beta_U/d^2n exceeds Delta_U; channel Wigner data inconsistent")
    cum = _support_table(np.abs(wvals))
    K = chebyshev_K(cfg.epsilon, cfg.delta, scale=delta_u)
    nk = shot_ceil(8.0 * delta_u**2 / (K * cfg.epsilon**2) * math.log(4.0 / cfg.delta))
    pool = StreamPool(cfg.seed, stream)
    draws = _draw(cum, K, pool.stream(0))
    sampler = ChannelSampler(spec, lambda_device, cfg.backend)
    scale = beta / spec.P
    acc = 0.0
    for k in range(K):
        vi, ui = (int(x) for x in pairs[draws[k]])
        vals = sampler.values(vi, ui, nk, pool.stream(k + 1))
        acc += math.copysign(1.0, wu[vi, ui]) * scale * vals.mean()
    exact = exact_channel_fidelity(target, lambda_device) if compute_exact else None
    return _finish(acc / K, K, np.full(K, nk, dtype=np.int64), cfg, stream, exact, t0)


def estimate_clifford_fidelity(
    target: QuantumChannel,
    lambda_device: QuantumChannel,
    cfg: ProtocolConfig,
    stream: int = 0,
    compute_exact: bool = True,
) -> EstimationResult:
    """Well-conditioned (Clifford) channel protocol: uniform sampling over the
    d^2n support pairs of the target, one raw channel sample each."""
    t0 = time.perf_counter()
    cfg = _named(cfg, "channel_clifford")
    spec = target.system
    if not target.is_unitary:
        raise ValidationError("the Clifford protocol requires a unitary target channel")
    ok, _ = is_clifford(target.kraus[0], spec)
    if not ok:
        raise ValidationError("the Clifford protocol requires a Clifford target channel")
    _, wu, pairs = _channel_support(spec, target)
    cum = _support_table(wu[pairs[:, 0], pairs[:, 1]])
    K = hoeffding_K(cfg.epsilon, cfg.delta)
    nk = shot_ceil(8.0 / (K * cfg.epsilon**2) * math.log(4.0 / cfg.delta))
    pool = StreamPool(cfg.seed, stream)
    draws = _draw(cum, K, pool.stream(0))
    sampler = ChannelSampler(spec, lambda_device, cfg.backend)
    acc = 0.0
    for k in range(K):
        vi, ui = (int(x) for x in pairs[draws[k]])
        vals = sampler.values(vi, ui, nk, pool.stream(k + 1))
        acc += vals.mean()
    exact = exact_channel_fidelity(target, lambda_device) if compute_exact else None
    return _finish(acc / K, K, np.full(K, nk, dtype=np.int64), cfg, stream, exact, t0)


def _named(cfg: ProtocolConfig, name: str) -> ProtocolConfig:
    if cfg.protocol == name:
        return cfg
    if cfg.protocol and cfg.protocol != name:
        raise ValidationError(f"config names protocol {cfg.protocol!r}, called {name!r}")
    return ProtocolConfig(cfg.epsilon, cfg.delta, cfg.seed, name, cfg.backend)


def run_protocol(
    protocol: str,
    target,
    device,
    cfg: ProtocolConfig,
    spec: SystemSpec,
    stream: int = 0,
    compute_exact: bool = True,
) -> EstimationResult:
    """Dispatch by protocol name; `target`/`device` are a state vector and a
    density matrix for state protocols, QuantumChannels for channel protocols."""
    if protocol == "state_l2":
        return estimate_state_fidelity_l2(target, device, cfg, spec, stream, compute_exact)
    if protocol == "state_l1":
        return estimate_state_fidelity_l1(target, device, cfg, spec, stream, compute_exact)
    if protocol == "state_stabilizer":
        return estimate_stabilizer_fidelity(target, device, cfg, spec, stream, compute_exact)
    if protocol == "channel_l2":
        return estimate_channel_fidelity_l2(target, device, cfg, stream, compute_exact)
    if protocol == "channel_l1":
        return estimate_channel_fidelity_l1(target, device, cfg, stream, compute_exact)
    if protocol == "channel_clifford":
        return estimate_clifford_fidelity(target, device, cfg, stream, compute_exact)
    raise ValidationError(f"unknown protocol {protocol!r}")


def expected_sample_bound(
    protocol: str, epsilon: float, delta: float, spec: SystemSpec, target
) -> float:
    """Analytic E[N] upper bound for the protocol on this target, with a +K
    term absorbing the per-k ceilings."""
    lnq = math.log(4.0 / delta)
    eps_sq = epsilon * epsilon
    if protocol in ("state_stabilizer", "channel_clifford"):
        return float(hoeffding_K(epsilon, delta))
    if protocol in ("state_l2", "state_l1"):
        wf = wigner_of_state(spec, validate_state_vector(target, spec))
        w = wf.values
        if protocol == "state_l2":
            chi = int((np.abs(w) > DEFAULT_ZERO_THRESHOLD).sum())
            two_chi_log = chi / spec.D
            K = chebyshev_K(epsilon, delta)
            return 1.0 + 8.0 / (eps_sq * delta) + 8.0 * two_chi_log * lnq / eps_sq + K
        delta_psi = 2.0 ** mana_state(wf)
        K = chebyshev_K(epsilon, delta, scale=delta_psi)
        return 1.0 + 8.0 * delta_psi / (eps_sq * delta) + 8.0 * delta_psi**2 * lnq / eps_sq + K
    cw = wigner_of_channel(target.system, target)
    wu = cw.values
    if protocol == "channel_l2":
        chi = int((np.abs(wu) > DEFAULT_ZERO_THRESHOLD).sum())
        two_chi_log = chi / spec.P
        K = chebyshev_K(epsilon, delta)
        return 1.0 + 8.0 / (eps_sq * delta) + 8.0 * two_chi_log * lnq / eps_sq + K
    if protocol == "channel_l1":
        delta_u = 2.0 ** mana_channel(cw)
        K = chebyshev_K(epsilon, delta, scale=delta_u)
        return 1.0 + 8.0 * delta_u / (eps_sq * delta) + 8.0 * delta_u**2 * lnq / eps_sq + K
    raise ValidationError(f"unknown protocol {protocol!r}")
