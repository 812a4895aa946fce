"""Discrete phase-space toolkit for odd-prime qudits and Monte Carlo direct
fidelity estimation of states and channels."""

from .errors import NumericalError, ResourceError, ValidationError, WignerDfeError
from .system import PhasePoint, SystemSpec, Tolerances
from .phase_space import (
    ChannelWigner,
    QuantumChannel,
    WignerFunction,
    compose,
    heisenberg_weyl,
    phase_point_operator,
    reconstruct,
    tensor,
    wigner_inner_product,
    wigner_of_channel,
    wigner_of_operator,
    wigner_of_state,
)
from .stabilizer import (
    CliffordElement,
    StabilizerState,
    clifford_group,
    default_generators,
    enumerate_stabilizer_states,
    is_clifford,
    is_stabilizer_state,
)
from .magic import MagicReport, mana_channel, mana_state, wigner_rank_channel, wigner_rank_state
from .device import (
    ChannelSampler,
    MeasurementSample,
    NoiseModel,
    StateSampler,
    measure_phase_point,
    prepare_channel,
    prepare_state,
    rng_stream,
    sample_channel_wigner,
)
from .protocols import (
    EstimationResult,
    ProtocolConfig,
    estimate_channel_fidelity_l1,
    estimate_channel_fidelity_l2,
    estimate_clifford_fidelity,
    estimate_stabilizer_fidelity,
    estimate_state_fidelity_l1,
    estimate_state_fidelity_l2,
    exact_channel_fidelity,
    exact_state_fidelity,
    expected_sample_bound,
    run_protocol,
)
from .harness import (
    RunPlan,
    SweepRow,
    SweepSpec,
    TrialRecord,
    build_run_plan,
    emit,
    run_sweep,
    run_trials,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelSampler",
    "ChannelWigner",
    "CliffordElement",
    "EstimationResult",
    "MagicReport",
    "MeasurementSample",
    "NoiseModel",
    "NumericalError",
    "PhasePoint",
    "ProtocolConfig",
    "QuantumChannel",
    "ResourceError",
    "RunPlan",
    "StabilizerState",
    "StateSampler",
    "SweepRow",
    "SweepSpec",
    "SystemSpec",
    "Tolerances",
    "TrialRecord",
    "ValidationError",
    "WignerDfeError",
    "WignerFunction",
    "build_run_plan",
    "clifford_group",
    "compose",
    "default_generators",
    "emit",
    "enumerate_stabilizer_states",
    "estimate_channel_fidelity_l1",
    "estimate_channel_fidelity_l2",
    "estimate_clifford_fidelity",
    "estimate_stabilizer_fidelity",
    "estimate_state_fidelity_l1",
    "estimate_state_fidelity_l2",
    "exact_channel_fidelity",
    "exact_state_fidelity",
    "expected_sample_bound",
    "heisenberg_weyl",
    "is_clifford",
    "is_stabilizer_state",
    "mana_channel",
    "mana_state",
    "measure_phase_point",
    "phase_point_operator",
    "prepare_channel",
    "prepare_state",
    "reconstruct",
    "rng_stream",
    "run_protocol",
    "run_sweep",
    "run_trials",
    "sample_channel_wigner",
    "tensor",
    "wigner_inner_product",
    "wigner_of_channel",
    "wigner_of_operator",
    "wigner_of_state",
    "wigner_rank_channel",
    "wigner_rank_state",
]
