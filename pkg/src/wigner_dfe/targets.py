"""Named target states and channels, plus the stabilizer-to-magic interpolation
family used by sweeps."""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .phase_space import QuantumChannel
from .serialize import load_operator_json
from .stabilizer import enumerate_stabilizer_states, fourier_gate, phase_gate, shift_gate, sum_gate
from .system import SystemSpec, validate_state_vector


def _lift(spec: SystemSpec, first: np.ndarray) -> np.ndarray:
    """Single-qudit state on qudit 1, |0> on the rest."""
    psi = first
    for _ in range(spec.n - 1):
        zero = np.zeros(spec.d, dtype=complex)
        zero[0] = 1.0
        psi = np.kron(psi, zero)
    return psi


def _lift_gate(spec: SystemSpec, gate: np.ndarray) -> np.ndarray:
    return np.kron(gate, np.eye(spec.d ** (spec.n - 1), dtype=complex))


def strange_state(d: int) -> np.ndarray:
    """(|1> - |2>)/sqrt(2): the maximally negative single-qudit reference."""
    psi = np.zeros(d, dtype=complex)
    psi[1] = 1.0 / np.sqrt(2.0)
    psi[2] = -1.0 / np.sqrt(2.0)
    return psi


def interpolated_state(spec: SystemSpec, t: float) -> np.ndarray:
    """cos(t pi/2)|0> + sin(t pi/2)|strange> on qudit 1: a stabilizer state at
    t=0, the strange state at t=1.  Magic is not monotone in t between the
    endpoints, so consumers order sweep rows by the measured Delta, not by t."""
    if not 0.0 <= t <= 1.0:
        raise ValidationError(f"interpolation parameter t={t} outside [0, 1]")
    zero = np.zeros(spec.d, dtype=complex)
    zero[0] = 1.0
    theta = t * np.pi / 2.0
    first = np.cos(theta) * zero + np.sin(theta) * strange_state(spec.d)
    return _lift(spec, first)


NAMED_STATES = ("zero", "fourier_plus", "strange_state")
NAMED_CHANNELS = ("identity", "fourier", "phase", "shift", "sum", "nonclifford_phase")


def named_state(spec: SystemSpec, name: str) -> np.ndarray:
    d = spec.d
    if name == "zero":
        first = np.zeros(d, dtype=complex)
        first[0] = 1.0
    elif name == "fourier_plus":
        first = np.ones(d, dtype=complex) / np.sqrt(d)
    elif name == "strange_state":
        first = strange_state(d)
    else:
        raise ValidationError(f"unknown named state {name!r}; expected one of {NAMED_STATES}")
    return _lift(spec, first)


def nonclifford_phase_gate(d: int) -> np.ndarray:
    """Diagonal unitary outside the Clifford group: e^(2 pi i / d^2) on |d-1>."""
    diag = np.ones(d, dtype=complex)
    diag[d - 1] = np.exp(2j * np.pi / d**2)
    return np.diag(diag)


def named_channel(spec: SystemSpec, name: str) -> QuantumChannel:
    d = spec.d
    if name == "identity":
        return QuantumChannel.identity(spec)
    if name == "fourier":
        return QuantumChannel.from_unitary(spec, _lift_gate(spec, fourier_gate(d)))
    if name == "phase":
        return QuantumChannel.from_unitary(spec, _lift_gate(spec, phase_gate(d)))
    if name == "shift":
        return QuantumChannel.from_unitary(spec, _lift_gate(spec, shift_gate(d)))
    if name == "nonclifford_phase":
        return QuantumChannel.from_unitary(spec, _lift_gate(spec, nonclifford_phase_gate(d)))
    if name == "sum":
        if spec.n < 2:
            raise ValidationError("the sum channel needs n >= 2")
        gate = np.kron(sum_gate(d), np.eye(d ** (spec.n - 2), dtype=complex))
        return QuantumChannel.from_unitary(spec, gate)
    raise ValidationError(f"unknown named channel {name!r}; expected one of {NAMED_CHANNELS}")


def state_target_from_config(spec: SystemSpec, cfg: dict) -> np.ndarray:
    kind = cfg.get("kind")
    if kind == "named":
        return named_state(spec, cfg["name"])
    if kind == "stabilizer_index":
        states = enumerate_stabilizer_states(spec)
        idx = int(cfg["index"])
        if not 0 <= idx < len(states):
            raise ValidationError(f"stabilizer index {idx} out of range [0, {len(states)})")
        return np.array(states[idx].vector)
    if kind == "interpolation":
        return interpolated_state(spec, float(cfg["t"]))
    if kind == "file":
        fspec, fkind, payload = load_operator_json(cfg["path"])
        if fspec != spec:
            raise ValidationError("operator file system does not match the run config")
        if fkind != "state_vector":
            raise ValidationError(f"state target file holds a {fkind}")
        return validate_state_vector(payload, spec)
    raise ValidationError(f"unknown state target kind {kind!r}")


def channel_target_from_config(spec: SystemSpec, cfg: dict) -> QuantumChannel:
    kind = cfg.get("kind")
    if kind == "named":
        return named_channel(spec, cfg["name"])
    if kind == "file":
        fspec, fkind, payload = load_operator_json(cfg["path"])
        if fspec != spec:
            raise ValidationError("operator file system does not match the run config")
        if fkind != "kraus":
            raise ValidationError(f"channel target file holds a {fkind}")
        return QuantumChannel(spec, tuple(payload))
    raise ValidationError(f"unknown channel target kind {kind!r}")
