"""Command line entry points: dfe (run/sweep), wigner (dump), magic (report).

Exit codes: 0 success, 2 validation error, 3 resource/budget error,
4 numerical error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .device import NoiseModel, prepare_channel, prepare_state
from .errors import ValidationError, WignerDfeError
from .harness import (
    build_run_plan,
    emit,
    emit_trials_csv,
    run_sweep,
    run_trials,
    sweep_spec_from_config,
)
from .magic import wigner_rank_channel, wigner_rank_state
from .phase_space import wigner_of_channel, wigner_of_operator, wigner_of_state
from .serialize import dump_channel_wigner_csv, dump_wigner_csv, load_operator_json
from .system import SystemSpec
from .targets import (
    NAMED_CHANNELS,
    NAMED_STATES,
    channel_target_from_config,
    state_target_from_config,
)


def _load_config(path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc


def _target_is_state(spec: SystemSpec, target_cfg: dict) -> bool:
    kind = target_cfg.get("kind")
    if kind in ("stabilizer_index", "interpolation"):
        return True
    if kind == "named":
        name = target_cfg.get("name")
        if name in NAMED_STATES:
            return True
        if name in NAMED_CHANNELS:
            return False
        raise ValidationError(f"unknown named target {name!r}")
    if kind == "file":
        _, fkind, _ = load_operator_json(target_cfg["path"])
        return fkind != "kraus"
    raise ValidationError(f"unknown target kind {kind!r}")


def _resolve_target(config: dict):
    """(spec, is_state, target, noise-prepared device) from a dump/report config."""
    if "system" not in config or "target" not in config:
        raise ValidationError("config needs 'system' and 'target'")
    spec = SystemSpec(int(config["system"]["d"]), int(config["system"]["n"]))
    noise = NoiseModel.from_config(config.get("noise"), spec)
    if _target_is_state(spec, config["target"]):
        psi = state_target_from_config(spec, config["target"])
        return spec, True, psi, prepare_state(psi, noise, spec)
    ch = channel_target_from_config(spec, config["target"])
    return spec, False, ch, prepare_channel(ch, noise, spec)


def _run_command(args) -> int:
    config = _load_config(args.config)
    plan = build_run_plan(config)
    records = run_trials(plan, workers=args.workers)
    emit_trials_csv(records, args.out)
    if args.plot:
        from .plotting import plot_run

        plot_run(records, plan.cfg.epsilon, Path(args.out).with_suffix(".png"))
    return 0


def _sweep_command(args) -> int:
    config = _load_config(args.config)
    sweep = sweep_spec_from_config(config)
    rows = run_sweep(sweep, workers=args.workers)
    emit(rows, args.format, args.out, config=config)
    if args.plot:
        from .plotting import plot_sweep

        plot_sweep(rows, sweep.axis, Path(args.out).with_suffix(".png"))
    return 0


def _dump_command(args) -> int:
    config = _load_config(args.config)
    spec, is_state, _, device = _resolve_target(config)
    if is_state:
        dump_wigner_csv(args.out, wigner_of_operator(spec, device))
    else:
        dump_channel_wigner_csv(args.out, wigner_of_channel(spec, device))
    return 0


def _report_command(args) -> int:
    config = _load_config(args.config)
    spec, is_state, target, _ = _resolve_target(config)
    threshold = float(config.get("threshold", 1e-10))
    if is_state:
        report = wigner_rank_state(wigner_of_state(spec, target), threshold)
    else:
        report = wigner_rank_channel(wigner_of_channel(spec, target), threshold)
    text = json.dumps(report.to_json_dict(), sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return 0


def _dispatch(parser: argparse.ArgumentParser, argv) -> int:
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except WignerDfeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


def dfe_main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="dfe", description="Direct fidelity estimation runs")
    sub = parser.add_subparsers(required=True)
    run = sub.add_parser("run", help="run one protocol config for N trials")
    run.add_argument("--config", required=True)
    run.add_argument("--out", required=True)
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--plot", action="store_true", help="render a PNG beside the CSV")
    run.set_defaults(func=_run_command)
    sweep = sub.add_parser("sweep", help="sweep one axis and emit aggregate rows")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--format", choices=("csv", "json"), default="csv")
    sweep.add_argument("--workers", type=int, default=1)
    sweep.add_argument("--plot", action="store_true", help="render a PNG beside the output")
    sweep.set_defaults(func=_sweep_command)
    return _dispatch(parser, argv)


def wigner_main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="wigner", description="Discrete Wigner function dumps")
    sub = parser.add_subparsers(required=True)
    dump = sub.add_parser("dump", help="dump a target's Wigner function as CSV")
    dump.add_argument("--config", required=True)
    dump.add_argument("--out", required=True)
    dump.set_defaults(func=_dump_command)
    return _dispatch(parser, argv)


def magic_main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="magic", description="Magic measure reports")
    sub = parser.add_subparsers(required=True)
    report = sub.add_parser("report", help="print a mana / Wigner-rank report as JSON")
    report.add_argument("--config", required=True)
    report.add_argument("--out", default=None)
    report.set_defaults(func=_report_command)
    return _dispatch(parser, argv)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(dfe_main())
