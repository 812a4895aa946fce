"""Clifford group and stabilizer state enumeration at desk scale.

Clifford membership is decided operationally: U is Clifford iff conjugation
maps every Weyl operator to another Weyl operator up to phase.  The induced
point map is read off the phase-point operators, where conjugation acts
without phases (U A_u U^dag = A_u' exactly), so Weyl translations show up as
translations of phase space rather than as trivial relabelings.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, ResourceError, ValidationError
from .phase_space import phase_space_for, wigner_of_state
from .system import DEFAULT_TOL, SystemSpec, Tolerances, validate_state_vector, validate_unitary

GROUP_CAP = 10**6
STATE_CAP = 10**5


def _embed(spec: SystemSpec, gate: np.ndarray, qudit: int) -> np.ndarray:
    """Single-qudit gate acting on one factor of the composite system."""
    d = spec.d
    M = np.eye(d**qudit, dtype=complex)
    M = np.kron(M, gate)
    M = np.kron(M, np.eye(d ** (spec.n - qudit - 1), dtype=complex))
    return M


def fourier_gate(d: int) -> np.ndarray:
    omega = np.exp(2j * np.pi / d)
    j, k = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    return omega ** (j * k) / np.sqrt(d)


def phase_gate(d: int) -> np.ndarray:
    """Quadratic phase gate diag(tau^(j^2))."""
    tau = np.exp((d + 1) * np.pi * 1j / d)
    return np.diag(tau ** (np.arange(d) ** 2))


def shift_gate(d: int) -> np.ndarray:
    X = np.zeros((d, d), dtype=complex)
    for j in range(d):
        X[(j + 1) % d, j] = 1.0
    return X


def boost_gate(d: int) -> np.ndarray:
    omega = np.exp(2j * np.pi / d)
    return np.diag(omega ** np.arange(d))


def sum_gate(d: int) -> np.ndarray:
    """Entangling SUM gate |i, j> -> |i, i + j mod d| on two qudits."""
    M = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            M[d * i + (i + j) % d, d * i + j] = 1.0
    return M


def default_generators(spec: SystemSpec) -> list[tuple[str, np.ndarray]]:
    """Validated default Clifford generating set: Fourier, quadratic phase,
    shift and boost per qudit, plus SUM on adjacent pairs for n >= 2."""
    d = spec.d
    gens: list[tuple[str, np.ndarray]] = []
    singles = [("F", fourier_gate(d)), ("S", phase_gate(d)), ("X", shift_gate(d)), ("Z", boost_gate(d))]
    for q in range(spec.n):
        for name, g in singles:
            label = name if spec.n == 1 else f"{name}{q}"
            gens.append((label, _embed(spec, g, q)))
    for q in range(spec.n - 1):
        s = sum_gate(d)
        if spec.n > 2:
            s = np.kron(np.eye(d**q, dtype=complex), np.kron(s, np.eye(d ** (spec.n - q - 2), dtype=complex)))
        gens.append((f"SUM{q}{q + 1}", s))
    for label, g in gens:
        ok, _ = is_clifford(g, spec)
        if not ok:
            raise ValidationError(f"default generator {label} failed the Clifford check")
    return gens


def _weyl_images(U: np.ndarray, stack: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ujk,lk->uil", U, stack, U.conj())


def induced_point_map(U: np.ndarray, spec: SystemSpec, tol: Tolerances = DEFAULT_TOL):
    """Permutation u -> u' with U A_u U^dag = A_u', or None if U is not Clifford."""
    ps = phase_space_for(spec)
    V = _weyl_images(U, ps.A)
    # C[v, u] = tr[A_v U A_u U^dag] / D; a Clifford hits exactly one 1 per column.
    C = np.real(ps.A_flat.conj() @ V.reshape(spec.P, -1).T) / spec.D
    perm = np.argmax(C, axis=0)
    if np.abs(C[perm, np.arange(spec.P)] - 1.0).max() > 1e-6:
        return None
    resid = np.abs(V - ps.A[perm]).max()
    if resid > tol.derived:
        return None
    return tuple(int(v) for v in perm)


def is_clifford(U: np.ndarray, spec: SystemSpec, tol: Tolerances = DEFAULT_TOL):
    """(True, induced point map) if conjugation maps every T_u to some T_u'
    up to phase within tolerance, else (False, None)."""
    U = validate_unitary(U, spec, tol)
    ps = phase_space_for(spec)
    V = _weyl_images(U, ps.T)
    Tflat = ps.T.reshape(spec.P, -1)
    # Weyl operators are orthogonal: tr[T_v^dag T_u] = D delta, so the overlap
    # table has one unit-modulus entry per column iff U is Clifford.
    C = Tflat.conj() @ V.reshape(spec.P, -1).T / spec.D
    match = np.argmax(np.abs(C), axis=0)
    coeff = C[match, np.arange(spec.P)]
    if np.abs(np.abs(coeff) - 1.0).max() > tol.derived * spec.D:
        return False, None
    phases = coeff / np.abs(coeff)
    resid = np.abs(V - phases[:, None, None] * ps.T[match]).max()
    if resid > tol.derived:
        return False, None
    perm = induced_point_map(U, spec, tol)
    if perm is None:
        return False, None
    return True, perm


@dataclass(frozen=True)
class CliffordElement:
    """A Clifford unitary with its generator word and induced point permutation."""

    matrix: np.ndarray = field(repr=False)
    generator_word: tuple[str, ...]
    point_map: tuple[int, ...]


def clifford_group(
    spec: SystemSpec,
    generators: list[tuple[str, np.ndarray]] | None = None,
    cap: int = GROUP_CAP,
) -> list[CliffordElement]:
    """Breadth-first closure of the generators, deduplicated up to global phase.

    Identification uses |tr[U^dag V]| = D; the induced point permutation (a
    faithful fingerprint of the class mod phase) indexes the candidates so the
    trace test only runs on hash collisions.
    """
    if generators is None:
        generators = default_generators(spec)
    gens = []
    for label, g in generators:
        ok, perm = is_clifford(np.asarray(g, dtype=complex), spec)
        if not ok:
            raise ValidationError(f"generator {label} is not a Clifford operator")
        gens.append((label, np.asarray(g, dtype=complex), perm))

    D = spec.D
    ident = np.eye(D, dtype=complex)
    id_perm = induced_point_map(ident, spec)
    elements: dict[tuple[int, ...], CliffordElement] = {
        id_perm: CliffordElement(ident, (), id_perm)
    }
    frontier = [elements[id_perm]]
    while frontier:
        new: list[CliffordElement] = []
        for el in frontier:
            for label, g, gperm in gens:
                W = g @ el.matrix
                perm = tuple(gperm[p] for p in el.point_map)
                prev = elements.get(perm)
                if prev is not None:
                    if abs(abs(np.trace(prev.matrix.conj().T @ W)) - D) > 1e-8 * D:
                        raise NumericalError(
                            "point-map fingerprint collision without phase equality"
                        )
                    continue
                cand = CliffordElement(W, (label,) + el.generator_word, perm)
                elements[perm] = cand
                new.append(cand)
                if len(elements) > cap:
                    raise ResourceError(
                        f"Clifford closure exceeded the cap of {cap} elements"
                    )
        frontier = new
    return list(elements.values())


@dataclass(frozen=True)
class StabilizerState:
    """Pure stabilizer state with its phase-space support (the set S_psi)."""

    vector: np.ndarray = field(repr=False)
    support: frozenset[int]


def enumerate_stabilizer_states(
    spec: SystemSpec,
    generators: list[tuple[str, np.ndarray]] | None = None,
    cap: int = STATE_CAP,
) -> list[StabilizerState]:
    """All states U|0...0> for U in the Clifford group, deduplicated up to phase.

    Enumerated as the orbit of |0...0> under the generators (the group itself
    can exceed its cap long before the state orbit does).
    """
    if generators is None:
        generators = default_generators(spec)
    gens = [np.asarray(g, dtype=complex) for _, g in generators]
    start = np.zeros(spec.D, dtype=complex)
    start[0] = 1.0
    states = [start]
    mat = np.array(states)
    frontier = [start]
    while frontier:
        new = []
        for s in frontier:
            for g in gens:
                t = g @ s
                if np.abs(mat.conj() @ t).max() < 1.0 - 1e-9:
                    states.append(t)
                    mat = np.array(states)
                    new.append(t)
                    if len(states) > cap:
                        raise ResourceError(
                            f"stabilizer orbit exceeded the cap of {cap} states"
                        )
        frontier = new

    out = []
    uniform = 1.0 / spec.D
    for s in states:
        w = wigner_of_state(spec, s).values
        on = np.abs(w - uniform) <= DEFAULT_TOL.structural
        off = np.abs(w) <= DEFAULT_TOL.structural
        if int(on.sum()) != spec.D or not np.all(on | off):
            raise NumericalError("enumerated state fails the uniform-support check")
        out.append(StabilizerState(s, frozenset(int(i) for i in np.nonzero(on)[0])))
    return out


def load_generators(path) -> list[tuple[str, np.ndarray]]:
    """Generator set from the JSON operator format (kind 'kraus', one entry
    per generator); validation against the Clifford check happens at use."""
    from .serialize import load_operator_json

    _, kind, payload = load_operator_json(path)
    if kind != "kraus":
        raise ValidationError(f"generator file holds a {kind}, expected a list of unitaries")
    return [(f"G{i}", np.asarray(g, dtype=complex)) for i, g in enumerate(payload)]


def export_states_json(states: list[StabilizerState], path) -> None:
    """Enumerated states as a JSON array of [re, im]-pair vectors."""
    import json

    from .serialize import complex_to_pairs

    doc = [complex_to_pairs(s.vector) for s in states]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def is_stabilizer_state(psi: np.ndarray, spec: SystemSpec, tol: Tolerances = DEFAULT_TOL) -> bool:
    """True iff the Wigner function of psi is non-negative (equivalently, for
    a pure state, iff it is uniform on a D-point support).  Both criteria are
    evaluated; a disagreement means the input sits outside tolerance of any
    exact pure state and is reported as a numerical error."""
    psi = validate_state_vector(psi, spec, tol)
    w = wigner_of_state(spec, psi, tol).values
    positive = bool(w.min() >= -tol.structural)
    on = np.abs(w - 1.0 / spec.D) <= tol.structural
    off = np.abs(w) <= tol.structural
    uniform = bool(int(on.sum()) == spec.D and np.all(on | off))
    if positive != uniform:
        raise NumericalError(
            "positivity and uniform-support checks disagree; state is not "
            "within tolerance of a pure state with definite stabilizer character"
        )
    return positive
