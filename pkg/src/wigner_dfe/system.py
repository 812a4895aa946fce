"""System descriptors, phase points and the shared tolerance record."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class Tolerances:
    """Numeric tolerance policy: structural identities vs derived quantities."""

    structural: float = 1e-10
    derived: float = 1e-9


DEFAULT_TOL = Tolerances()


def _is_odd_prime(d: int) -> bool:
    if d < 3 or d % 2 == 0:
        return False
    f = 3
    while f * f <= d:
        if d % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class SystemSpec:
    """n qudits of odd prime dimension d; D = d^n, P = d^(2n) phase points."""

    d: int
    n: int

    def __post_init__(self):
        if not isinstance(self.d, int) or not isinstance(self.n, int):
            raise ValidationError(f"d and n must be integers, got d={self.d!r}, n={self.n!r}")
        if not _is_odd_prime(self.d):
            raise ValidationError(f"d must be an odd prime >= 3, got d={self.d}")
        if self.n < 1:
            raise ValidationError(f"n must be >= 1, got n={self.n}")
        # Exact integer arithmetic; reject sizes that cannot be realized as dense arrays.
        if self.d ** (2 * self.n) > 2**22:
            raise ValidationError(
                f"phase space with d={self.d}, n={self.n} has {self.d ** (2 * self.n)} points, "
                "beyond desk scale"
            )

    @property
    def D(self) -> int:
        return self.d**self.n

    @property
    def P(self) -> int:
        return self.d ** (2 * self.n)

    def point_to_index(self, coords) -> int:
        """Flat index of a phase point; row-major over qudits, (a1, a2) within each."""
        coords = tuple(int(c) for c in coords)
        if len(coords) != 2 * self.n:
            raise ValidationError(
                f"phase point needs {2 * self.n} coordinates, got {len(coords)}"
            )
        if any(c < 0 or c >= self.d for c in coords):
            raise ValidationError(f"phase point coordinates {coords} out of range [0, {self.d})")
        idx = 0
        for c in coords:
            idx = idx * self.d + c
        return idx

    def index_to_point(self, idx: int) -> tuple[int, ...]:
        if not 0 <= idx < self.P:
            raise ValidationError(f"flat index {idx} out of range [0, {self.P})")
        coords = []
        for _ in range(2 * self.n):
            coords.append(idx % self.d)
            idx //= self.d
        return tuple(reversed(coords))

    def all_points(self):
        """All phase points in flat-index order."""
        return itertools.product(range(self.d), repeat=2 * self.n)


@dataclass(frozen=True)
class PhasePoint:
    """A point of the discrete phase space, validated against its system."""

    coords: tuple[int, ...]

    @classmethod
    def of(cls, spec: SystemSpec, coords) -> "PhasePoint":
        spec.point_to_index(coords)
        return cls(tuple(int(c) for c in coords))


def as_point_index(spec: SystemSpec, u) -> int:
    """Accept a PhasePoint, a coordinate tuple, or a flat index."""
    if isinstance(u, PhasePoint):
        return spec.point_to_index(u.coords)
    if isinstance(u, (int, np.integer)):
        if not 0 <= int(u) < spec.P:
            raise ValidationError(f"flat index {u} out of range [0, {spec.P})")
        return int(u)
    return spec.point_to_index(u)


def validate_state_vector(psi: np.ndarray, spec: SystemSpec, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.shape != (spec.D,):
        raise ValidationError(f"state vector has dimension {psi.size}, expected {spec.D}")
    norm = float(np.vdot(psi, psi).real)
    if abs(norm - 1.0) > tol.derived:
        raise ValidationError(f"state vector norm^2 = {norm}, not 1 within {tol.derived}")
    return psi


def validate_hermitian(M: np.ndarray, spec: SystemSpec, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.shape != (spec.D, spec.D):
        raise ValidationError(f"operator has shape {M.shape}, expected ({spec.D}, {spec.D})")
    if np.abs(M - M.conj().T).max() > tol.structural:
        raise ValidationError("operator is not Hermitian within tolerance")
    return M


def validate_unitary(U: np.ndarray, spec: SystemSpec, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    U = np.asarray(U, dtype=complex)
    if U.shape != (spec.D, spec.D):
        raise ValidationError(f"operator has shape {U.shape}, expected ({spec.D}, {spec.D})")
    if np.abs(U.conj().T @ U - np.eye(spec.D)).max() > tol.derived:
        raise ValidationError("operator is not unitary within tolerance")
    return U


def validate_density_matrix(rho: np.ndarray, spec: SystemSpec, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    rho = validate_hermitian(rho, spec, tol)
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > tol.derived:
        raise ValidationError(f"density matrix trace = {tr}, not 1 within {tol.derived}")
    evals = np.linalg.eigvalsh(rho)
    if evals.min() < -tol.structural:
        raise ValidationError(f"density matrix has negative eigenvalue {evals.min()}")
    return rho
