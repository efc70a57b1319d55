"""Command-line surface.

Subcommands: ``search`` (run a search from a TOML config plus flag
overrides), ``cost`` (print the analytical cost report of one genome),
``resume`` (continue an interrupted run directory) and ``pareto`` (export
the archive CSV of a run directory).

Exit codes: 0 ok, 2 config/parse error, 3 evaluator spawn error,
4 checkpoint error.  The ESRN_EVALUATOR environment variable overrides the
external evaluator command line.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import shlex
import sys
from pathlib import Path

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from . import checkpoint as ckpt
from .cost_model import (CostModelError, ResolutionSpec, network_cost_json,
                         rdb_reference_cost)
from .evaluator import EvaluationError
from .evolution import SearchConfig, SearchState, continue_search, run_search
from .genome import GenomeParseError, decode_text, validate

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SPAWN = 3
EXIT_CHECKPOINT = 4


class ConfigError(ValueError):
    pass


def parse_hr(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise ConfigError(f"bad resolution {text!r}, expected WIDTHxHEIGHT") from None


def config_from_toml(path: Path) -> SearchConfig:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc

    search = doc.get("search", {})
    resolution = doc.get("resolution", {})
    evaluator = doc.get("evaluator", {})
    kwargs: dict = {}

    def take(section: dict, key: str, target: str, cast):
        if key in section:
            try:
                kwargs[target] = cast(section[key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"field {key!r}: {exc}") from exc

    take(search, "seed", "seed", int)
    take(search, "generations", "generations", int)
    take(search, "population", "population_size", int)
    take(search, "mutation_rate", "mutation_rate", float)
    take(search, "elitism", "elitism", int)
    take(search, "mode", "objective_mode", str)
    take(search, "mutation", "mutation_mode", str)
    take(search, "budget", "budget", int)
    take(search, "max_params", "max_params", int)
    take(search, "max_flops", "max_flops", int)
    if "hr" in resolution:
        hr = resolution["hr"]
        if isinstance(hr, str):
            kwargs["hr_width"], kwargs["hr_height"] = parse_hr(hr)
        else:
            try:
                kwargs["hr_width"], kwargs["hr_height"] = int(hr[0]), int(hr[1])
            except (TypeError, ValueError, IndexError) as exc:
                raise ConfigError(f"field 'hr': {exc}") from exc
    take(resolution, "scale", "scale", int)
    take(evaluator, "backend", "evaluator", str)
    take(evaluator, "timeout", "evaluator_timeout", float)
    if "command" in evaluator:
        cmd = evaluator["command"]
        if isinstance(cmd, str):
            cmd = shlex.split(cmd)
        kwargs["evaluator_command"] = [str(c) for c in cmd]

    try:
        return SearchConfig(**kwargs)
    except (TypeError, ValueError, CostModelError) as exc:
        raise ConfigError(str(exc)) from exc


def apply_overrides(cfg: SearchConfig, args: argparse.Namespace) -> SearchConfig:
    values = cfg.to_dict()
    if args.seed is not None:
        values["seed"] = args.seed
    if args.generations is not None:
        values["generations"] = args.generations
    if args.mode is not None:
        values["objective_mode"] = args.mode
    if args.mutation is not None:
        values["mutation_mode"] = args.mutation
    if args.max_params is not None:
        values["max_params"] = args.max_params
    if args.max_flops is not None:
        values["max_flops"] = args.max_flops
    if args.scale is not None:
        values["scale"] = args.scale
    if args.hr is not None:
        values["hr_width"], values["hr_height"] = parse_hr(args.hr)
    if args.evaluator is not None:
        values["evaluator"] = args.evaluator
    if args.budget is not None:
        values["budget"] = args.budget
    env_cmd = os.environ.get("ESRN_EVALUATOR")
    if env_cmd:
        values["evaluator_command"] = shlex.split(env_cmd)
    try:
        return SearchConfig.from_dict(values)
    except (TypeError, ValueError, CostModelError) as exc:
        raise ConfigError(str(exc)) from exc


def _persist_hooks(run_dir: Path):
    def on_generation(state: SearchState, record: dict) -> None:
        ckpt.write_history(run_dir, state.history)
        ckpt.save_checkpoint(run_dir, state)

    return on_generation


def _finalize(run_dir: Path, state: SearchState) -> None:
    ckpt.write_pareto_csv(run_dir / ckpt.PARETO_FILE,
                          list(state.archive.values()))


def cmd_search(args: argparse.Namespace) -> int:
    try:
        cfg = (config_from_toml(Path(args.config))
               if args.config else SearchConfig())
        cfg = apply_overrides(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    run_dir = Path(args.out)
    run_dir.mkdir(parents=True, exist_ok=True)
    try:
        state = run_search(cfg, on_generation=_persist_hooks(run_dir),
                           stop_after=args.stop_after)
    except EvaluationError as exc:
        print(f"evaluator error: {exc}", file=sys.stderr)
        return EXIT_SPAWN
    try:
        if state.population.generation >= cfg.generations:
            _finalize(run_dir, state)
    finally:
        state.close()
    best = state.history[-1]
    print(json.dumps({"run_dir": str(run_dir), "generations": state.population.generation,
                      "best": best["best"], "best_genome": best["best_genome"]},
                     sort_keys=True))
    return EXIT_OK


def cmd_resume(args: argparse.Namespace) -> int:
    run_dir = Path(args.run_dir)
    try:
        state = ckpt.load_checkpoint(run_dir)
    except ckpt.CheckpointError as exc:
        print(f"checkpoint error: {exc}", file=sys.stderr)
        return EXIT_CHECKPOINT
    except EvaluationError as exc:
        print(f"evaluator error: {exc}", file=sys.stderr)
        return EXIT_SPAWN
    target = state.cfg.generations
    if state.population.generation >= target:
        print(f"run already complete at generation {state.population.generation}")
        state.close()
        return EXIT_OK
    try:
        state = continue_search(state, on_generation=_persist_hooks(run_dir),
                                stop_after=args.stop_after)
        if state.population.generation >= target:
            _finalize(run_dir, state)
    except EvaluationError as exc:
        print(f"evaluator error: {exc}", file=sys.stderr)
        return EXIT_SPAWN
    finally:
        state.close()
    print(f"resumed to generation {state.population.generation}")
    return EXIT_OK


def cmd_cost(args: argparse.Namespace) -> int:
    scale = args.scale if args.scale is not None else 2
    hr_w, hr_h = parse_hr(args.hr) if args.hr else (1280, 720)
    try:
        res = ResolutionSpec(hr_w, hr_h, scale)
    except CostModelError as exc:
        print(f"resolution error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.reference_rdb:
        print("warning: published baselines around 1017K params / 235.6G "
              "multi-adds for this configuration assume head/tail widths "
              "that are not specified; this figure uses this tool's own "
              "head/fusion/tail and carries no tolerance.", file=sys.stderr)
        print(json.dumps(rdb_reference_cost(res), sort_keys=True))
        return EXIT_OK
    if not args.genome:
        print("error: genome text required unless --reference-rdb is given",
              file=sys.stderr)
        return EXIT_CONFIG
    try:
        genome = decode_text(args.genome, scale)
    except GenomeParseError as exc:
        print(f"genome parse error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    violations = validate(genome)
    if violations:
        print("invalid genome: " + "; ".join(violations), file=sys.stderr)
        return EXIT_CONFIG
    try:
        print(json.dumps(network_cost_json(genome, res), sort_keys=True))
    except CostModelError as exc:
        print(f"cost error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def cmd_pareto(args: argparse.Namespace) -> int:
    run_dir = Path(args.run_dir)
    try:
        state = ckpt.load_checkpoint(run_dir)
    except ckpt.CheckpointError as exc:
        print(f"checkpoint error: {exc}", file=sys.stderr)
        return EXIT_CHECKPOINT
    out = Path(args.out) if args.out else run_dir / ckpt.PARETO_FILE
    ckpt.write_pareto_csv(out, list(state.archive.values()))
    state.close()
    print(f"wrote {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="esrn",
        description="Multi-objective credit-guided block search for "
                    "super-resolution networks")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("search", help="run a search")
    s.add_argument("--config", help="TOML config file")
    s.add_argument("--out", default="esrn-run", help="run directory")
    s.add_argument("--seed", type=int)
    s.add_argument("--generations", type=int)
    s.add_argument("--mode", choices=["constrained", "pareto"])
    s.add_argument("--mutation", choices=["guided", "uniform"])
    s.add_argument("--max-params", type=int, dest="max_params")
    s.add_argument("--max-flops", type=int, dest="max_flops")
    s.add_argument("--scale", type=int, choices=[2, 3, 4])
    s.add_argument("--hr", help="HR resolution as WIDTHxHEIGHT (must divide by scale)")
    s.add_argument("--evaluator", choices=["surrogate", "external"])
    s.add_argument("--budget", type=int)
    s.add_argument("--stop-after", type=int, dest="stop_after",
                   help="checkpoint and exit after N generations")
    s.set_defaults(func=cmd_search)

    c = sub.add_parser("cost", help="analytical cost of one genome")
    c.add_argument("genome", nargs="?", help="genome text encoding")
    c.add_argument("--hr", help="HR resolution, default 1280x720")
    c.add_argument("--scale", type=int, choices=[2, 3, 4])
    c.add_argument("--reference-rdb", action="store_true", dest="reference_rdb",
                   help="print the plain-RDB reference configuration instead")
    c.set_defaults(func=cmd_cost)

    r = sub.add_parser("resume", help="continue an interrupted run")
    r.add_argument("run_dir")
    r.add_argument("--stop-after", type=int, dest="stop_after")
    r.set_defaults(func=cmd_resume)

    p = sub.add_parser("pareto", help="export the archive CSV of a run")
    p.add_argument("run_dir")
    p.add_argument("--out", help="output CSV path (default: run dir)")
    p.set_defaults(func=cmd_pareto)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("ESRN_LOG", "WARNING"))
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
