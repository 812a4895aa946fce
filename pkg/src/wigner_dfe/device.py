"""Simulated device under test: noisy preparations and bounded phase-space samples.

Every random draw comes from a counter-based Philox stream keyed by
(seed, stream, substream), so runs are reproducible regardless of scheduling:
protocols hand substream k to the k-th outer iteration and 0 to the point draw.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .phase_space import QuantumChannel, compose, phase_space_for, wigner_of_channel
from .serialize import pairs_to_complex
from .system import (
    DEFAULT_TOL,
    SystemSpec,
    Tolerances,
    as_point_index,
    validate_density_matrix,
    validate_state_vector,
)

_MASK32 = 0xFFFFFFFF
_MASK64 = 0xFFFFFFFFFFFFFFFF

NOISE_KINDS = ("none", "depolarizing", "dephasing", "unitary_perturbation", "mixture_with")
BACKENDS = ("physical", "bernoulli")


def rng_stream(seed: int, stream: int = 0, substream: int = 0) -> np.random.Generator:
    """Independent reproducible generator for (seed, stream, substream)."""
    if not 0 <= stream <= _MASK32 or not 0 <= substream <= _MASK32:
        raise ValidationError("stream and substream indices must fit in 32 bits")
    key = np.array(
        [seed & _MASK64, ((stream & _MASK32) << 32) | (substream & _MASK32)],
        dtype=np.uint64,
    )
    return np.random.Generator(np.random.Philox(key=key))


class StreamPool:
    """One reusable Philox generator re-keyed per substream.

    Emits bit-identical sequences to `rng_stream(seed, stream, k)` at a
    fraction of the construction cost; counter-based keying keeps the streams
    independent of evaluation order.  Not shareable across threads: each
    concurrent task owns its pool.
    """

    def __init__(self, seed: int, stream: int = 0):
        if not 0 <= stream <= _MASK32:
            raise ValidationError("stream index must fit in 32 bits")
        self._bg = np.random.Philox(key=0)
        self._template = self._bg.state
        self._gen = np.random.Generator(self._bg)
        self._hi = seed & _MASK64
        self._lo_base = (stream & _MASK32) << 32

    def stream(self, substream: int) -> np.random.Generator:
        if not 0 <= substream <= _MASK32:
            raise ValidationError("substream index must fit in 32 bits")
        state = dict(self._template)
        inner = dict(state["state"])
        inner["key"] = np.array([self._hi, self._lo_base | substream], dtype=np.uint64)
        state["state"] = inner
        self._bg.state = state
        return self._gen


@dataclass(frozen=True)
class NoiseModel:
    """Preparation noise applied by the simulated device."""

    kind: str = "none"
    p: float = 0.0
    strength: float = 0.0
    sigma: np.ndarray | None = None
    perturbation_seed: int = 2024

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValidationError(f"unknown noise kind {self.kind!r}; expected one of {NOISE_KINDS}")
        if self.kind in ("depolarizing", "dephasing", "mixture_with") and not 0.0 <= self.p <= 1.0:
            raise ValidationError(f"noise probability p={self.p} outside [0, 1]")
        if self.kind == "unitary_perturbation" and self.strength < 0.0:
            raise ValidationError(f"perturbation strength {self.strength} must be >= 0")
        if self.kind == "mixture_with" and self.sigma is None:
            raise ValidationError("mixture_with noise needs a sigma state")

    @classmethod
    def from_config(cls, cfg: dict | None, spec: SystemSpec) -> "NoiseModel":
        if not cfg:
            return cls()
        kind = cfg.get("kind", "none")
        sigma = None
        if kind == "mixture_with":
            data = cfg.get("sigma")
            if data is None:
                raise ValidationError("mixture_with noise config needs 'sigma'")
            arr = np.asarray(data, dtype=float)
            sigma = pairs_to_complex(arr)
            if sigma.ndim == 1:
                sigma = np.outer(sigma, sigma.conj())
            sigma = validate_density_matrix(sigma, spec)
        return cls(
            kind=kind,
            p=float(cfg.get("p", 0.0)),
            strength=float(cfg.get("strength", 0.0)),
            sigma=sigma,
            perturbation_seed=int(cfg.get("perturbation_seed", 2024)),
        )


def _perturbation_unitary(spec: SystemSpec, strength: float, seed: int) -> np.ndarray:
    """exp(-i * strength * H) for a fixed seeded Hermitian H with unit operator norm."""
    rng = rng_stream(seed, spec.d, spec.n)
    G = rng.normal(size=(spec.D, spec.D)) + 1j * rng.normal(size=(spec.D, spec.D))
    H = (G + G.conj().T) / 2.0
    evals, evecs = np.linalg.eigh(H)
    evals = evals / np.abs(evals).max()
    return (evecs * np.exp(-1j * strength * evals)) @ evecs.conj().T


def prepare_state(
    psi: np.ndarray, noise: NoiseModel, spec: SystemSpec, tol: Tolerances = DEFAULT_TOL
) -> np.ndarray:
    """Density matrix the device actually emits for target |psi>."""
    psi = validate_state_vector(psi, spec, tol)
    pure = np.outer(psi, psi.conj())
    if noise.kind == "none":
        rho = pure
    elif noise.kind == "depolarizing":
        rho = (1.0 - noise.p) * pure + noise.p * np.eye(spec.D) / spec.D
    elif noise.kind == "dephasing":
        rho = (1.0 - noise.p) * pure + noise.p * np.diag(np.diag(pure))
    elif noise.kind == "unitary_perturbation":
        V = _perturbation_unitary(spec, noise.strength, noise.perturbation_seed)
        rho = V @ pure @ V.conj().T
    elif noise.kind == "mixture_with":
        rho = (1.0 - noise.p) * pure + noise.p * noise.sigma
    else:  # pragma: no cover - guarded in NoiseModel
        raise ValidationError(f"unsupported noise kind {noise.kind!r}")
    return validate_density_matrix(rho, spec, tol)


def prepare_channel(
    target: QuantumChannel, noise: NoiseModel, spec: SystemSpec
) -> QuantumChannel:
    """Channel the device actually implements for a target channel."""
    if target.system != spec:
        raise ValidationError("target channel belongs to a different system")
    if noise.kind == "none":
        return target
    if noise.kind == "depolarizing":
        return compose(QuantumChannel.depolarizing(spec, noise.p), target)
    if noise.kind == "dephasing":
        return compose(QuantumChannel.dephasing(spec, noise.p), target)
    if noise.kind == "unitary_perturbation":
        V = _perturbation_unitary(spec, noise.strength, noise.perturbation_seed)
        return compose(QuantumChannel.from_unitary(spec, V), target)
    raise ValidationError(f"noise kind {noise.kind!r} does not apply to channels")


@dataclass(frozen=True)
class MeasurementSample:
    """One bounded random outcome consumed by the estimation protocols."""

    value: float
    point: tuple[int, ...]
    backend: str
    eigenvalue: float = 0.0
    out_point: tuple[int, ...] | None = None


def _born_probabilities(weights: np.ndarray, tol: Tolerances) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if w.min() < -tol.structural or w.max() > 1.0 + tol.structural:
        raise NumericalError(f"Born probabilities outside [0, 1]: min={w.min()}, max={w.max()}")
    w = np.clip(w, 0.0, None)
    total = w.sum()
    if abs(total - 1.0) > tol.derived:
        raise NumericalError(f"Born probabilities sum to {total}, not 1")
    return w / total


class StateSampler:
    """Phase-space point measurements of a fixed density matrix.

    Sampling is over the deterministic eigenbasis of each A_u; outcomes are the
    snapped eigenvalues, so |eigenvalue| = 1 exactly and |value| <= 1/D exactly.
    """

    def __init__(self, spec: SystemSpec, rho: np.ndarray, tol: Tolerances = DEFAULT_TOL):
        self.spec = spec
        self.tol = tol
        self.rho = validate_density_matrix(rho, spec, tol)
        self._ps = phase_space_for(spec)
        self._cum: dict[int, np.ndarray] = {}

    def _cumulative(self, ui: int) -> np.ndarray:
        cum = self._cum.get(ui)
        if cum is None:
            _, evecs = self._ps.eig()
            E = evecs[ui]
            p = _born_probabilities(
                np.real(np.einsum("id,ij,jd->d", E.conj(), self.rho, E)), self.tol
            )
            cum = np.cumsum(p)
            cum[-1] = 1.0
            self._cum[ui] = cum
        return cum

    def eigenvalues(self, ui: int, count: int, rng: np.random.Generator) -> np.ndarray:
        """`count` snapped A_u eigenvalue outcomes (each in {-1, +1})."""
        evals, _ = self._ps.eig()
        idx = np.searchsorted(self._cumulative(ui), rng.random(count), side="right")
        return evals[ui][np.minimum(idx, self.spec.D - 1)]

    def values(self, ui: int, count: int, rng: np.random.Generator) -> np.ndarray:
        """Outcomes scaled to eigenvalue / D, so the mean estimates W_rho(u)."""
        return self.eigenvalues(ui, count, rng) / self.spec.D


def measure_phase_point(
    spec: SystemSpec, rho: np.ndarray, u, rng: np.random.Generator
) -> MeasurementSample:
    """Single Born sample of A_u on rho; E[value] = W_rho(u), |value| <= 1/D."""
    ui = as_point_index(spec, u)
    sampler = StateSampler(spec, rho)
    lam = float(sampler.eigenvalues(ui, 1, rng)[0])
    return MeasurementSample(
        value=lam / spec.D,
        point=spec.index_to_point(ui),
        backend="physical",
        eigenvalue=lam,
    )


class ChannelSampler:
    """Bounded unbiased samples of a channel's Wigner function W_Lambda(v|u).

    physical: draw an A_u eigenvector with probability |lambda_i|/L, push it
    through the channel, Born-measure in the A_v eigenbasis and return
    sgn(lambda_i) * (L/D) * mu.  L = D because the A_u spectrum is +-1, so
    every emitted value is exactly +-1.
    bernoulli: +1 with probability (1 + W(v|u))/2, else -1.
    """

    def __init__(
        self,
        spec: SystemSpec,
        channel: QuantumChannel,
        backend: str = "bernoulli",
        tol: Tolerances = DEFAULT_TOL,
    ):
        if backend not in BACKENDS:
            raise ValidationError(f"unknown backend {backend!r}; expected one of {BACKENDS}")
        if channel.system != spec:
            raise ValidationError("channel belongs to a different system")
        self.spec = spec
        self.backend = backend
        self.channel = channel
        self.tol = tol
        self._ps = phase_space_for(spec)
        self._wigner: np.ndarray | None = None
        self._pair_cum: dict[tuple[int, int], tuple[np.ndarray, np.ndarray, np.ndarray]] = {}

    def exact_wigner(self) -> np.ndarray:
        if self._wigner is None:
            self._wigner = wigner_of_channel(self.spec, self.channel, self.tol).values
        return self._wigner

    def _pair_tables(self, vi: int, ui: int):
        tables = self._pair_cum.get((vi, ui))
        if tables is None:
            evals, evecs = self._ps.eig()
            E, F = evecs[ui], evecs[vi]
            # q[f, i] = sum_m |<f| K_m |e_i>|^2, column-stochastic transition table
            q = np.zeros((self.spec.D, self.spec.D))
            for K in self.channel.kraus:
                G = F.conj().T @ K @ E
                q += np.abs(G) ** 2
            for i in range(self.spec.D):
                q[:, i] = _born_probabilities(q[:, i], self.tol)
            cum = np.cumsum(q, axis=0)
            cum[-1, :] = 1.0
            tables = (cum, evals[ui], evals[vi])
            self._pair_cum[(vi, ui)] = tables
        return tables

    def values(self, vi: int, ui: int, count: int, rng: np.random.Generator) -> np.ndarray:
        if self.backend == "bernoulli":
            w = float(self.exact_wigner()[vi, ui])
            if abs(w) > 1.0 + self.tol.structural:
                raise NumericalError(f"channel Wigner value {w} outside [-1, 1]")
            w = min(max(w, -1.0), 1.0)
            return np.where(rng.random(count) < (1.0 + w) / 2.0, 1.0, -1.0)
        cum, lam_in, lam_out = self._pair_tables(vi, ui)
        # |lambda|/L is uniform over the D eigenvectors since the spectrum is +-1
        i = rng.integers(0, self.spec.D, size=count)
        draws = rng.random(count)
        f = np.minimum((cum.T[i] < draws[:, None]).sum(axis=1), self.spec.D - 1)
        return lam_in[i] * lam_out[f]


def sample_channel_wigner(
    spec: SystemSpec,
    ch: QuantumChannel,
    u,
    v,
    backend: str,
    rng: np.random.Generator,
) -> MeasurementSample:
    """Single bounded sample with E[value] = W_ch(v|u) and |value| <= 1."""
    ui, vi = as_point_index(spec, u), as_point_index(spec, v)
    sampler = ChannelSampler(spec, ch, backend)
    val = float(sampler.values(vi, ui, 1, rng)[0])
    return MeasurementSample(
        value=val,
        point=spec.index_to_point(ui),
        backend=backend,
        eigenvalue=val,
        out_point=spec.index_to_point(vi),
    )
