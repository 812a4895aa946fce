"""Experiment orchestration: config-driven runs, parameter sweeps, bound
comparisons and deterministic CSV/JSON emission."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .device import NoiseModel, prepare_channel, prepare_state
from .errors import ResourceError, ValidationError
from .magic import DEFAULT_ZERO_THRESHOLD, mana_channel, mana_state
from .phase_space import wigner_of_channel, wigner_of_state
from .protocols import (
    PROTOCOL_NAMES,
    STATE_PROTOCOLS,
    EstimationResult,
    ProtocolConfig,
    expected_sample_bound,
    run_protocol,
)
from .serialize import fmt_float
from .system import SystemSpec
from .targets import channel_target_from_config, state_target_from_config

DEFAULT_BUDGET = 10**9
DEFAULT_SLACK = 0.05
RUN_CSV_HEADER = "trial,estimate,exact,abs_error,within_epsilon,K,total_samples,seed"
SWEEP_CSV_HEADER = (
    "axis_value,mean_abs_error,coverage_fraction,mean_total_samples,"
    "bound_total_samples,magic_delta,magic_chi_log"
)
SWEEP_AXES = ("epsilon", "delta", "noise_p", "magic_interpolation")


@dataclass(frozen=True)
class RunPlan:
    """A fully resolved run: system, protocol, target, prepared device, config."""

    spec: SystemSpec
    protocol: str
    target: object
    device: object
    cfg: ProtocolConfig
    trials: int
    config: dict = field(repr=False, default_factory=dict)


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    estimate: float
    exact: float
    abs_error: float
    within_epsilon: bool
    K: int
    total_samples: int
    seed: int


@dataclass(frozen=True)
class SweepRow:
    axis_value: float
    mean_abs_error: float
    coverage_fraction: float
    mean_total_samples: float
    bound_total_samples: float
    magic_delta: float
    magic_chi_log: float


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple[float, ...]
    base: dict
    trials_per_point: int
    budget: float = DEFAULT_BUDGET
    slack: float = DEFAULT_SLACK

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ValidationError(f"unknown sweep axis {self.axis!r}; expected one of {SWEEP_AXES}")
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ValidationError("sweep values must be non-empty")
        diffs = np.diff(vals)
        if len(vals) > 1 and not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ValidationError("sweep values must be strictly monotone")
        if self.trials_per_point < 1:
            raise ValidationError(f"trials_per_point={self.trials_per_point} must be >= 1")
        object.__setattr__(self, "values", vals)


def build_run_plan(config: dict) -> RunPlan:
    """Resolve a run config dict into target, prepared device and protocol config."""
    for key in ("system", "protocol", "target", "epsilon", "delta"):
        if key not in config:
            raise ValidationError(f"run config missing key {key!r}")
    sys_cfg = config["system"]
    spec = SystemSpec(int(sys_cfg["d"]), int(sys_cfg["n"]))
    protocol = config["protocol"]
    if protocol not in PROTOCOL_NAMES:
        raise ValidationError(f"unknown protocol {protocol!r}; expected one of {PROTOCOL_NAMES}")
    cfg = ProtocolConfig(
        epsilon=float(config["epsilon"]),
        delta=float(config["delta"]),
        seed=int(config.get("seed", 0)),
        protocol=protocol,
        backend=config.get("backend", "bernoulli"),
    )
    noise = NoiseModel.from_config(config.get("noise"), spec)
    if protocol in STATE_PROTOCOLS:
        target = state_target_from_config(spec, config["target"])
        device = prepare_state(target, noise, spec)
    else:
        target = channel_target_from_config(spec, config["target"])
        device = prepare_channel(target, noise, spec)
    trials = int(config.get("trials", 1))
    if trials < 1:
        raise ValidationError(f"trials={trials} must be >= 1")
    return RunPlan(spec, protocol, target, device, cfg, trials, dict(config))


def run_trials(plan: RunPlan, workers: int = 1, stream_base: int = 0) -> list[TrialRecord]:
    """Run `plan.trials` independent estimations; trial t uses RNG stream
    stream_base + t, so results are identical for any worker count."""
    if workers < 1:
        raise ValidationError(f"workers={workers} must be >= 1")

    def one(t: int) -> EstimationResult:
        return run_protocol(
            plan.protocol, plan.target, plan.device, plan.cfg, plan.spec,
            stream=stream_base + t,
        )

    if workers == 1:
        results = [one(t) for t in range(plan.trials)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, range(plan.trials)))
    records = []
    for t, r in enumerate(results):
        err = abs(r.estimate - r.exact)
        records.append(
            TrialRecord(
                trial=t,
                estimate=r.estimate,
                exact=r.exact,
                abs_error=err,
                within_epsilon=bool(err <= plan.cfg.epsilon),
                K=r.K,
                total_samples=r.total_samples,
                seed=plan.cfg.seed,
            )
        )
    return records


def target_magic(plan: RunPlan) -> tuple[float, float]:
    """(Delta, chi_log) of the plan's target: Delta_psi/Delta_U and the
    logarithmic Wigner rank, as consumed by sweep rows."""
    if plan.protocol in STATE_PROTOCOLS:
        wf = wigner_of_state(plan.spec, plan.target)
        chi = int((np.abs(wf.values) > DEFAULT_ZERO_THRESHOLD).sum())
        return 2.0 ** mana_state(wf), float(np.log2(chi / plan.spec.D))
    cw = wigner_of_channel(plan.spec, plan.target)
    chi = int((np.abs(cw.values) > DEFAULT_ZERO_THRESHOLD).sum())
    return 2.0 ** mana_channel(cw), float(np.log2(chi / plan.spec.P))


def _axis_config(sweep: SweepSpec, value: float) -> dict:
    cfg = json.loads(json.dumps(sweep.base))
    if sweep.axis == "epsilon":
        cfg["epsilon"] = value
    elif sweep.axis == "delta":
        cfg["delta"] = value
    elif sweep.axis == "noise_p":
        noise = dict(cfg.get("noise") or {"kind": "depolarizing"})
        noise["p"] = value
        cfg["noise"] = noise
    else:  # magic_interpolation
        cfg["target"] = {"kind": "interpolation", "t": value}
    return cfg


def sweep_spec_from_config(config: dict) -> SweepSpec:
    for key in ("axis", "values", "base", "trials_per_point"):
        if key not in config:
            raise ValidationError(f"sweep config missing key {key!r}")
    return SweepSpec(
        axis=config["axis"],
        values=tuple(config["values"]),
        base=config["base"],
        trials_per_point=int(config["trials_per_point"]),
        budget=float(config.get("budget", DEFAULT_BUDGET)),
        slack=float(config.get("slack", DEFAULT_SLACK)),
    )


def run_sweep(sweep: SweepSpec, workers: int = 1) -> list[SweepRow]:
    """One SweepRow per axis value.  Fails fast (with the estimate) when the
    analytic E[N] bounds predict more device samples than the budget allows."""
    plans = []
    bounds = []
    for value in sweep.values:
        plan = build_run_plan(_axis_config(sweep, value))
        bound = expected_sample_bound(
            plan.protocol, plan.cfg.epsilon, plan.cfg.delta, plan.spec, plan.target
        )
        plans.append(plan)
        bounds.append(bound)
    estimated = sum(b * sweep.trials_per_point for b in bounds)
    if estimated > sweep.budget:
        raise ResourceError(
            f"sweep would consume about {estimated:.3e} device samples, "
            f"over the budget of {sweep.budget:.3e}"
        )

    rows = []
    for a, (value, plan, bound) in enumerate(zip(sweep.values, plans, bounds)):
        records = run_trials(plan, workers=workers, stream_base=a * sweep.trials_per_point)
        errors = np.array([r.abs_error for r in records])
        totals = np.array([r.total_samples for r in records], dtype=float)
        delta_magic, chi_log = target_magic(plan)
        mean_total = float(totals.mean())
        if mean_total > bound * (1.0 + sweep.slack):
            raise ResourceError(
                f"measured mean samples {mean_total:.1f} exceed the E[N] bound "
                f"{bound:.1f} with {sweep.slack:.0%} slack at axis value {value}"
            )
        rows.append(
            SweepRow(
                axis_value=float(value),
                mean_abs_error=float(errors.mean()),
                coverage_fraction=float(np.mean([r.within_epsilon for r in records])),
                mean_total_samples=mean_total,
                bound_total_samples=float(bound),
                magic_delta=delta_magic,
                magic_chi_log=chi_log,
            )
        )
    return rows


def emit(results: list[SweepRow], format: str, path, config: dict | None = None) -> None:
    """Bit-stable emission of sweep rows: fixed 12-significant-digit floats,
    '.' decimal separator, '\\n' line endings."""
    if format == "csv":
        lines = [SWEEP_CSV_HEADER]
        for r in results:
            lines.append(
                ",".join(
                    fmt_float(x)
                    for x in (
                        r.axis_value,
                        r.mean_abs_error,
                        r.coverage_fraction,
                        r.mean_total_samples,
                        r.bound_total_samples,
                        r.magic_delta,
                        r.magic_chi_log,
                    )
                )
            )
        text = "\n".join(lines) + "\n"
    elif format == "json":
        doc = {
            "config": config or {},
            "rows": [
                {
                    "axis_value": float(fmt_float(r.axis_value)),
                    "mean_abs_error": float(fmt_float(r.mean_abs_error)),
                    "coverage_fraction": float(fmt_float(r.coverage_fraction)),
                    "mean_total_samples": float(fmt_float(r.mean_total_samples)),
                    "bound_total_samples": float(fmt_float(r.bound_total_samples)),
                    "magic_delta": float(fmt_float(r.magic_delta)),
                    "magic_chi_log": float(fmt_float(r.magic_chi_log)),
                }
                for r in results
            ],
        }
        text = json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"
    else:
        raise ValidationError(f"unknown emit format {format!r}; expected 'csv' or 'json'")
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ValidationError(f"cannot write {path}: {exc}") from exc


def emit_trials_csv(records: list[TrialRecord], path) -> None:
    """Per-trial CSV for `dfe run` (one row per trial, fixed formatting)."""
    lines = [RUN_CSV_HEADER]
    for r in records:
        lines.append(
            f"{r.trial},{fmt_float(r.estimate)},{fmt_float(r.exact)},"
            f"{fmt_float(r.abs_error)},{int(r.within_epsilon)},{r.K},"
            f"{r.total_samples},{r.seed}"
        )
    text = "\n".join(lines) + "\n"
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ValidationError(f"cannot write {path}: {exc}") from exc
