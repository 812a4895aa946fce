"""Heisenberg-Weyl operators, phase-space point operators and discrete Wigner
representations of operators, states and channels.

Conventions: X|j> = |j+1 mod d>, Z|j> = w^j |j> with w = exp(2*pi*i/d),
T_(a1,a2) = tau^(-a1*a2) Z^a1 X^a2 with tau = exp((d+1)*pi*i/d), and
A_u = T_u A_0 T_u^dag where A_0 = (1/d^n) sum_u T_u.  Composite systems take
tensor products qudit by qudit, matching the flat point index of SystemSpec.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, ValidationError
from .system import (
    DEFAULT_TOL,
    SystemSpec,
    Tolerances,
    as_point_index,
    validate_hermitian,
    validate_state_vector,
)


def _single_qudit_family(d: int):
    """Return (T1, A1) stacks of the d^2 single-qudit Weyl and point operators."""
    omega = np.exp(2j * np.pi / d)
    tau = np.exp((d + 1) * np.pi * 1j / d)
    shift = np.zeros((d, d), dtype=complex)
    for j in range(d):
        shift[(j + 1) % d, j] = 1.0
    boost = np.diag(omega ** np.arange(d))
    T1 = np.empty((d * d, d, d), dtype=complex)
    for a1 in range(d):
        za = np.linalg.matrix_power(boost, a1)
        for a2 in range(d):
            T1[a1 * d + a2] = tau ** (-a1 * a2) * za @ np.linalg.matrix_power(shift, a2)
    A0 = T1.sum(axis=0) / d
    A1 = np.einsum("uij,jk,ulk->uil", T1, A0, T1.conj())
    return T1, A1


class PhaseSpace:
    """Immutable per-system cache of phase-space point operators.

    `A` is the (P, D, D) stack of point operators in flat-index order; the
    eigendecompositions and the full Weyl stack are built lazily on first use
    and shared read-only afterwards.
    """

    def __init__(self, spec: SystemSpec, tol: Tolerances = DEFAULT_TOL):
        self.spec = spec
        self.tol = tol
        d, n = spec.d, spec.n
        T1, A1 = _single_qudit_family(d)
        self._T1 = T1
        A = A1
        for _ in range(n - 1):
            A = np.einsum("uij,vkl->uvikjl", A, A1).reshape(
                A.shape[0] * d * d, A.shape[1] * d, A.shape[1] * d
            )
        self.A = A
        self.A.setflags(write=False)
        self.A_flat = self.A.reshape(spec.P, -1)
        self._lock = threading.Lock()
        self._T = T1 if n == 1 else None
        self._eig = None

    @property
    def T(self) -> np.ndarray:
        """Full (P, D, D) Heisenberg-Weyl stack, built on demand."""
        if self._T is None:
            with self._lock:
                if self._T is None:
                    d, n = self.spec.d, self.spec.n
                    T = self._T1
                    for _ in range(n - 1):
                        T = np.einsum("uij,vkl->uvikjl", T, self._T1).reshape(
                            T.shape[0] * d * d, T.shape[1] * d, T.shape[1] * d
                        )
                    T.setflags(write=False)
                    self._T = T
        return self._T

    def eig(self):
        """(eigenvalues, eigenvectors) of every A_u, eigenvalues snapped to +-1.

        The spectrum of every point operator is verified to be +-1 at build
        time (A_0 is the parity operator); a violation is a NumericalError so
        samplers never run with a wrong range bound.
        """
        if self._eig is None:
            with self._lock:
                if self._eig is None:
                    evals, evecs = np.linalg.eigh(self.A)
                    drift = np.abs(np.abs(evals) - 1.0).max()
                    if drift > self.tol.derived:
                        raise NumericalError(
                            f"A_u spectrum deviates from +-1 by {drift:.3e} "
                            f"for d={self.spec.d}, n={self.spec.n}"
                        )
                    snapped = np.where(evals > 0, 1.0, -1.0)
                    evecs = self._canonical_eigvecs(snapped, evecs)
                    snapped.setflags(write=False)
                    evecs.setflags(write=False)
                    self._eig = (snapped, evecs)
        return self._eig

    @staticmethod
    def _canonical_eigvecs(evals: np.ndarray, evecs: np.ndarray) -> np.ndarray:
        """Fix a deterministic basis: phase-align each eigenvector, then order
        columns within degenerate blocks lexicographically."""
        out = np.array(evecs)
        P, D, _ = out.shape
        for u in range(P):
            for i in range(D):
                col = out[u, :, i]
                j = int(np.argmax(np.abs(col) > 1e-8))
                phase = col[j] / abs(col[j])
                out[u, :, i] = col / phase
            for lam in (-1.0, 1.0):
                sel = np.nonzero(evals[u] == lam)[0]
                if len(sel) > 1:
                    keys = [tuple(np.round(out[u, :, i], 9).view(float)) for i in sel]
                    order = sorted(range(len(sel)), key=lambda m: keys[m])
                    out[u][:, sel] = out[u][:, sel[order]]
        return out


_CACHES: dict[tuple[int, int], PhaseSpace] = {}
_CACHE_LOCK = threading.Lock()


def phase_space_for(spec: SystemSpec) -> PhaseSpace:
    """Shared read-only cache of the A_u family for this system."""
    key = (spec.d, spec.n)
    ps = _CACHES.get(key)
    if ps is None:
        with _CACHE_LOCK:
            ps = _CACHES.get(key)
            if ps is None:
                ps = PhaseSpace(spec)
                _CACHES[key] = ps
    return ps


def heisenberg_weyl(spec: SystemSpec, u) -> np.ndarray:
    """The Weyl operator T_u as a dense D x D unitary."""
    idx = as_point_index(spec, u)
    return np.array(phase_space_for(spec).T[idx])


def phase_point_operator(spec: SystemSpec, u) -> np.ndarray:
    """The phase-space point operator A_u (Hermitian, trace 1, spectrum +-1)."""
    idx = as_point_index(spec, u)
    return np.array(phase_space_for(spec).A[idx])


@dataclass(frozen=True)
class WignerFunction:
    """Real Wigner representation of a Hermitian operator over the P points."""

    system: SystemSpec
    values: np.ndarray
    source_trace: float = 1.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(-1)
        if v.shape != (self.system.P,):
            raise ValidationError(
                f"Wigner vector has length {v.size}, expected {self.system.P}"
            )
        object.__setattr__(self, "values", v)

    def sum(self) -> float:
        return float(self.values.sum())

    def purity(self) -> float:
        """D * sum(W^2) = tr[rho^2] for a density-matrix source (overlap identity)."""
        return float(self.system.D * np.sum(self.values**2))


def _real_part_checked(values: np.ndarray, tol: Tolerances, what: str) -> np.ndarray:
    resid = np.abs(values.imag).max() if values.size else 0.0
    if resid > tol.structural:
        raise NumericalError(f"{what} has imaginary residue {resid:.3e} above tolerance")
    return np.ascontiguousarray(values.real)


def wigner_of_operator(
    spec: SystemSpec, X: np.ndarray, tol: Tolerances = DEFAULT_TOL
) -> WignerFunction:
    """W_X(u) = tr[A_u X] / d^n for a Hermitian operator X."""
    X = validate_hermitian(X, spec, tol)
    ps = phase_space_for(spec)
    raw = ps.A_flat @ X.T.reshape(-1) / spec.D
    vals = _real_part_checked(raw, tol, "Wigner function")
    return WignerFunction(spec, vals, source_trace=float(np.trace(X).real))


def wigner_of_state(
    spec: SystemSpec, psi: np.ndarray, tol: Tolerances = DEFAULT_TOL
) -> WignerFunction:
    """Wigner function of a pure state vector (of its projector)."""
    psi = validate_state_vector(psi, spec, tol)
    ps = phase_space_for(spec)
    raw = np.einsum("uij,j,i->u", ps.A, psi, psi.conj()) / spec.D
    vals = _real_part_checked(raw, tol, "Wigner function")
    return WignerFunction(spec, vals, source_trace=1.0)


def reconstruct(spec: SystemSpec, w: WignerFunction) -> np.ndarray:
    """X = sum_u W_X(u) A_u; inverse of wigner_of_operator."""
    if w.system != spec:
        raise ValidationError("Wigner function belongs to a different system")
    ps = phase_space_for(spec)
    return np.tensordot(w.values, ps.A, axes=(0, 0))


def wigner_inner_product(wM: WignerFunction, wN: WignerFunction) -> float:
    """tr[MN] = d^n sum_u W_M(u) W_N(u) (overlap formula)."""
    if wM.system != wN.system:
        raise ValidationError("Wigner functions belong to different systems")
    return float(wM.system.D * np.dot(wM.values, wN.values))


@dataclass(frozen=True)
class QuantumChannel:
    """CPTP map in Kraus form; input and output dimensions are equal."""

    system: SystemSpec
    kraus: tuple = field(repr=False)

    def __post_init__(self):
        D = self.system.D
        ks = tuple(np.asarray(K, dtype=complex) for K in self.kraus)
        if not ks:
            raise ValidationError("channel needs at least one Kraus operator")
        for K in ks:
            if K.shape != (D, D):
                raise ValidationError(f"Kraus operator shape {K.shape}, expected ({D}, {D})")
        tp = sum(K.conj().T @ K for K in ks)
        if np.abs(tp - np.eye(D)).max() > DEFAULT_TOL.derived:
            raise ValidationError("Kraus operators are not trace preserving within tolerance")
        object.__setattr__(self, "kraus", ks)

    @classmethod
    def from_unitary(cls, spec: SystemSpec, U: np.ndarray) -> "QuantumChannel":
        from .system import validate_unitary

        return cls(spec, (validate_unitary(U, spec),))

    @classmethod
    def identity(cls, spec: SystemSpec) -> "QuantumChannel":
        return cls(spec, (np.eye(spec.D, dtype=complex),))

    @classmethod
    def depolarizing(cls, spec: SystemSpec, p: float) -> "QuantumChannel":
        """rho -> (1-p) rho + p tr[rho] I/D, via the Weyl twirl Kraus form."""
        if not 0.0 <= p <= 1.0:
            raise ValidationError(f"depolarizing probability p={p} outside [0, 1]")
        T = phase_space_for(spec).T
        ks = [np.sqrt(1.0 - p) * np.eye(spec.D, dtype=complex)]
        ks += [np.sqrt(p) / spec.D * T[i] for i in range(spec.P)]
        return cls(spec, tuple(ks))

    @classmethod
    def dephasing(cls, spec: SystemSpec, p: float) -> "QuantumChannel":
        """rho -> (1-p) rho + p sum_j |j><j| rho |j><j| (computational basis)."""
        if not 0.0 <= p <= 1.0:
            raise ValidationError(f"dephasing probability p={p} outside [0, 1]")
        D = spec.D
        ks = [np.sqrt(1.0 - p) * np.eye(D, dtype=complex)]
        for j in range(D):
            proj = np.zeros((D, D), dtype=complex)
            proj[j, j] = np.sqrt(p)
            ks.append(proj)
        return cls(spec, tuple(ks))

    @property
    def is_unitary(self) -> bool:
        if len(self.kraus) != 1:
            return False
        K = self.kraus[0]
        return np.abs(K.conj().T @ K - np.eye(self.system.D)).max() <= DEFAULT_TOL.derived

    def apply(self, M: np.ndarray) -> np.ndarray:
        """Channel action on a dense operator."""
        M = np.asarray(M, dtype=complex)
        return sum(K @ M @ K.conj().T for K in self.kraus)


def compose(after: QuantumChannel, before: QuantumChannel) -> QuantumChannel:
    """(after o before)(rho) = after(before(rho))."""
    if after.system != before.system:
        raise ValidationError("cannot compose channels on different systems")
    ks = tuple(Ka @ Kb for Ka in after.kraus for Kb in before.kraus)
    return QuantumChannel(after.system, ks)


def tensor(a: QuantumChannel, b: QuantumChannel) -> QuantumChannel:
    """Tensor product channel on the combined system (equal d required)."""
    if a.system.d != b.system.d:
        raise ValidationError("tensor product needs matching qudit dimension")
    spec = SystemSpec(a.system.d, a.system.n + b.system.n)
    ks = tuple(np.kron(Ka, Kb) for Ka in a.kraus for Kb in b.kraus)
    return QuantumChannel(spec, ks)


@dataclass(frozen=True)
class ChannelWigner:
    """W_N(v|u) = tr[A_v N(A_u)] / d^n as a P x P real matrix indexed (v, u)."""

    system: SystemSpec
    values: np.ndarray
    unitary: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.system.P, self.system.P):
            raise ValidationError(
                f"channel Wigner matrix has shape {v.shape}, expected square of size {self.system.P}"
            )
        object.__setattr__(self, "values", v)

    def column_sums(self) -> np.ndarray:
        return self.values.sum(axis=0)


def wigner_of_channel(
    spec: SystemSpec, ch: QuantumChannel, tol: Tolerances = DEFAULT_TOL
) -> ChannelWigner:
    """Channel Wigner function; every column sums to 1 for a CPTP map."""
    if ch.system != spec:
        raise ValidationError("channel belongs to a different system")
    ps = phase_space_for(spec)
    D = spec.D
    if 2 * len(ch.kraus) <= D:
        out = np.zeros((spec.P, D, D), dtype=complex)
        for K in ch.kraus:
            KA = np.einsum("ij,ujk->uik", K, ps.A)
            out += np.einsum("uik,lk->uil", KA, K.conj())
        out_flat = out.reshape(spec.P, -1)
    else:
        # Many Kraus operators: apply the transfer matrix S[(ij),(kl)] =
        # sum_m K[m,i,k] conj(K[m,j,l]) to the stacked A_u in one gemm.
        Kf = np.stack(ch.kraus).reshape(len(ch.kraus), -1)
        S = (Kf.T @ Kf.conj()).reshape(D, D, D, D).transpose(0, 2, 1, 3).reshape(D * D, D * D)
        out_flat = ps.A_flat @ S.T
    # tr[A_v N(A_u)] = vec(A_v) . vec(N(A_u)^T)
    raw = ps.A_flat @ out_flat.reshape(spec.P, D, D).transpose(0, 2, 1).reshape(spec.P, -1).T / spec.D
    vals = _real_part_checked(raw, tol, "channel Wigner function")
    colsum_err = np.abs(vals.sum(axis=0) - 1.0).max()
    if colsum_err > tol.derived:
        raise NumericalError(
            f"channel Wigner columns deviate from sum 1 by {colsum_err:.3e}"
        )
    return ChannelWigner(spec, vals, unitary=ch.is_unitary)
