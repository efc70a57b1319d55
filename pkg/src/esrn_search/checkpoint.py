"""Checkpointing, resume and report export.

A run directory holds ``checkpoint.json`` (full search state, rewritten
atomically every generation), ``history.jsonl`` (one record per
generation) and ``pareto.csv`` (written when the run completes).  The
random source is a numpy PCG64 generator whose state serializes to plain
integers, so a resumed run continues the exact random stream and
reproduces the uninterrupted history byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
import os
from pathlib import Path

from .credit import CreditMatrix
from .evolution import Individual, Population, SearchConfig, SearchState
from .cost_model import CostReport
from .genome import decode_text
from .objectives import pareto_rank

CHECKPOINT_VERSION = 1
CHECKPOINT_FILE = "checkpoint.json"
HISTORY_FILE = "history.jsonl"
PARETO_FILE = "pareto.csv"
PARETO_HEADER = ["genome", "psnr", "params", "flops", "multi_adds",
                 "front", "crowding"]


class CheckpointError(RuntimeError):
    pass


def atomic_write_text(path: Path, text: str) -> None:
    """Write-temp-then-rename so readers never observe partial files."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def individual_to_dict(ind: Individual) -> dict:
    return {
        "genome": ind.text,
        "fitness": ind.fitness,
        "prefix_fitness": list(ind.prefix_fitness),
        "params": ind.cost.params,
        "flops": ind.cost.flops,
        "multi_adds": ind.cost.multi_adds,
        "birth_generation": ind.birth_generation,
        "floored": ind.floored,
        "origin": ind.origin,
    }


def individual_from_dict(obj: dict, scale: int) -> Individual:
    return Individual(
        genome=decode_text(obj["genome"], scale),
        fitness=float(obj["fitness"]),
        prefix_fitness=tuple(float(x) for x in obj["prefix_fitness"]),
        cost=CostReport(int(obj["params"]), int(obj["flops"]),
                        int(obj["multi_adds"])),
        birth_generation=int(obj["birth_generation"]),
        floored=bool(obj["floored"]),
        origin=str(obj.get("origin", "")),
    )


def state_to_dict(state: SearchState) -> dict:
    pop = state.population
    return {
        "version": CHECKPOINT_VERSION,
        "config": state.cfg.to_dict(),
        "generation": pop.generation,
        "rng_state": state.rng.bit_generator.state,
        "population": [individual_to_dict(i) for i in pop.individuals],
        "elitism": [individual_to_dict(i) for i in pop.elitism],
        "archive": [individual_to_dict(i) for i in state.archive.values()],
        "credit": state.credit.to_dict(),
        "cache": state.evaluator.cache_to_dict(),
        "history": state.history,
    }


def state_from_dict(obj: dict, evaluator=None) -> SearchState:
    if obj.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"checkpoint version {obj.get('version')!r} != {CHECKPOINT_VERSION}")
    try:
        cfg = SearchConfig.from_dict(obj["config"])
        state = SearchState(cfg, evaluator)
        state.rng.bit_generator.state = obj["rng_state"]
        state.credit = CreditMatrix.from_dict(obj["credit"])
        state.evaluator.cache_from_dict(obj["cache"])
        scale = cfg.scale
        individuals = [individual_from_dict(d, scale) for d in obj["population"]]
        elitism = [individual_from_dict(d, scale) for d in obj["elitism"]]
        state.population = Population(individuals, elitism,
                                      int(obj["generation"]))
        state.archive = {}
        for d in obj["archive"]:
            ind = individual_from_dict(d, scale)
            state.archive[ind.text] = ind
        state.history = list(obj["history"])
        return state
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"corrupt checkpoint: {exc}") from exc


def checkpoint_text(state: SearchState) -> str:
    return json.dumps(state_to_dict(state), sort_keys=True)


def save_checkpoint(run_dir: Path, state: SearchState) -> None:
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    atomic_write_text(run_dir / CHECKPOINT_FILE, checkpoint_text(state))


def load_checkpoint(run_dir: Path, evaluator=None) -> SearchState:
    path = Path(run_dir) / CHECKPOINT_FILE
    if not path.is_file():
        raise CheckpointError(f"no checkpoint at {path}")
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"unreadable checkpoint: {exc}") from exc
    return state_from_dict(obj, evaluator)


def history_line(record: dict) -> str:
    return json.dumps(record, sort_keys=True)


def write_history(run_dir: Path, history: list[dict]) -> None:
    """Atomically rewrite the full history log (it is small, and a resumed
    run then heals any torn tail left by a crash mid-write)."""
    text = "".join(history_line(record) + "\n" for record in history)
    atomic_write_text(Path(run_dir) / HISTORY_FILE, text)


def pareto_csv_text(individuals: list[Individual]) -> str:
    """CSV export of the archive: all rows with front index and crowding
    distance, sorted by front then psnr descending."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(PARETO_HEADER)
    if individuals:
        vectors = [ind.objective_vector() for ind in individuals]
        _, front_of, crowd_of = pareto_rank(vectors,
                                            [ind.text for ind in individuals])
        order = sorted(range(len(individuals)),
                       key=lambda i: (front_of[i], -vectors[i].psnr,
                                      individuals[i].text))
        for i in order:
            ind = individuals[i]
            writer.writerow([ind.text, repr(ind.fitness), ind.cost.params,
                             ind.cost.flops, ind.cost.multi_adds,
                             front_of[i], repr(crowd_of[i])])
    return buf.getvalue()


def write_pareto_csv(path: Path, individuals: list[Individual]) -> None:
    atomic_write_text(Path(path), pareto_csv_text(individuals))
