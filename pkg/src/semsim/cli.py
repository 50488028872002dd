"""Command-line runner: `semsim run|console|validate-file`.

Exit codes: 0 on clean completion, 1 on configuration errors (unknown model,
malformed files), 2 when the validation policy halted the run.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import models, validation
from .console import Console
from .engine import Kernel
from .errors import SemsimError
from .modelfile import load_model_file
from .scenarios import apply_scenario, load_scenario
from .world import World

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_HALTED = 2


@dataclass
class RunConfig:
    model: str
    steps: int | None = None
    portions: int | None = None
    seed: int = 0
    mode: str = "deterministic"
    validate_policy: str = "halt"
    trace_path: str | None = None
    scenario_path: str | None = None

    @property
    def report_path(self) -> str:
        return str(self.trace_path) + ".report.json"


def default_seed() -> int:
    return int(os.environ.get("SEMSIM_SEED", "0"))


def resolve_model(config: RunConfig) -> World:
    if config.model in models.BUILTIN_MODEL_NAMES:
        return models.build_builtin(config.model, portions=config.portions)
    path = Path(config.model)
    if not path.exists():
        raise SemsimError(f"unknown model {config.model!r} (not a builtin, not a file)")
    return load_model_file(path)


def standard_rules(kernel: Kernel):
    """The default rule set every run carries."""
    kernel.add_rule(validation.capacity_rule())
    kernel.add_rule(validation.dangling_location_rule())
    kernel.add_rule(validation.connection_present_rule())
    if "water" in kernel.world.substances:
        kernel.add_rule(validation.fluidity_rule("water"))


def make_kernel(world: World, config: RunConfig) -> Kernel:
    kernel = Kernel(
        world,
        seed=config.seed,
        mode=config.mode,
        validate_policy=config.validate_policy,
    )
    standard_rules(kernel)
    return kernel


def planned_steps(world: World, config: RunConfig) -> int | None:
    if config.steps is not None:
        return config.steps
    # --portions sets the tick budget only for the builtin waterfalls; a model
    # file fixes its own portion count and needs --steps.
    if config.portions is not None and config.model in ("waterfall", "waterfall-frames"):
        if config.model == "waterfall-frames":
            return models.ticks_to_pool(models.WaterfallConfig(), config.portions)
        return config.portions
    return None


def write_outputs(kernel: Kernel, config: RunConfig, exit_code: int):
    if config.trace_path is None:
        return
    text = "".join(line + "\n" for line in kernel.trace_lines())
    Path(config.trace_path).write_text(text, encoding="utf-8", newline="\n")
    sidecar = {
        "model": kernel.world.name,
        "seed": kernel.seed,
        "mode": kernel.mode,
        "policy": kernel.validate_policy,
        "steps_executed": len(kernel.reports),
        "halted_at_step": kernel.halted_at,
        "exit_code": exit_code,
        "reports": [
            {
                "step": r.step,
                "fired": [f.mechanism for f in r.fired],
                "guard_failures": [
                    {"mechanism": g.mechanism, "failed": g.failed} for g in r.guard_failures
                ],
                "violations": [
                    {"rule": v.rule, "bindings": v.bindings} for v in r.validation.violations
                ],
            }
            for r in kernel.reports
        ],
    }
    Path(config.report_path).write_text(
        json.dumps(sidecar, indent=2) + "\n", encoding="utf-8"
    )


def run_command(config: RunConfig) -> int:
    try:
        if config.steps is not None and config.steps < 0:
            raise SemsimError("--steps must be >= 0")
        world = resolve_model(config)
        if config.scenario_path:
            apply_scenario(world, load_scenario(config.scenario_path))
        kernel = make_kernel(world, config)
    except SemsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    steps = planned_steps(world, config)
    try:
        if steps is None:
            while not kernel.halted:  # unbounded; interrupt to stop
                kernel.step()
        else:
            kernel.run(steps)
    except KeyboardInterrupt:
        pass
    exit_code = EXIT_HALTED if kernel.halted else EXIT_OK
    write_outputs(kernel, config, exit_code)
    return exit_code


def console_command(config: RunConfig, inp=None, out=None) -> int:
    try:
        world = resolve_model(config)
        if config.scenario_path:
            apply_scenario(world, load_scenario(config.scenario_path))
        kernel = make_kernel(world, config)
    except SemsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    console = Console(world, kernel, planned_steps(world, config), out=out, inp=inp)
    console.run()
    exit_code = EXIT_HALTED if kernel.halted else EXIT_OK
    write_outputs(kernel, config, exit_code)
    return exit_code


def validate_file_command(path: str) -> int:
    try:
        world = load_model_file(path)
    except SemsimError as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"ok: model {world.name!r} ({len(world.compartments)} compartments, "
          f"{len(world.mechanisms)} mechanisms)")
    return EXIT_OK


def _add_run_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--model", required=True, help="builtin name or model file path")
    parser.add_argument("--steps", type=int, default=None)
    parser.add_argument("--portions", type=int, default=None,
                        help="waterfall only: portions to pool")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--mode", choices=("deterministic", "concurrent"),
                        default="deterministic")
    parser.add_argument("--validate", choices=("halt", "warn", "off"), default=None)
    parser.add_argument("--trace", default=None, help="trace file path")
    parser.add_argument("--scenario", default=None, help="scenario file to apply")


def _config_from_args(args) -> RunConfig:
    if args.validate is not None:
        policy = args.validate
    else:
        # Batch runs stop on violations; interactive sessions keep going.
        policy = "warn" if args.command == "console" else "halt"
    return RunConfig(
        model=args.model,
        steps=args.steps,
        portions=args.portions,
        seed=args.seed if args.seed is not None else default_seed(),
        mode=args.mode,
        validate_policy=policy,
        trace_path=args.trace if args.trace is not None else f"{Path(args.model).name}.trace",
        scenario_path=args.scenario,
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="semsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run a model, writing trace and report files")
    _add_run_flags(run_p)
    con_p = sub.add_parser("console", help="interactive step/inspect session")
    _add_run_flags(con_p)
    val_p = sub.add_parser("validate-file", help="check a model file against the schema")
    val_p.add_argument("path")

    args = parser.parse_args(argv)
    if args.command == "run":
        return run_command(_config_from_args(args))
    if args.command == "console":
        return console_command(_config_from_args(args))
    return validate_file_command(args.path)


if __name__ == "__main__":
    sys.exit(main())
