"""Guided evolutionary search: population lifecycle, elitism selection,
roulette crossover and credit-guided mutation.

Each generation produces population_size children: half by mutating the
elites (cycled in rank order) under credit guidance, half by uniform
crossover of roulette-selected parents.  Children are evaluated, their
prefix-fitness gains feed the credit matrix, and the elitism list is
re-selected from children plus previous elites.  The whole search is a
pure function of (config, seed); evaluation responses may arrive in any
order without changing the outcome.
"""

from __future__ import annotations

import logging
import statistics
from dataclasses import dataclass, replace as dc_replace
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .cost_model import CostReport, ResolutionSpec, network_cost
from .credit import CreditMatrix, credit_from_prefix
from .evaluator import (CachedEvaluator, EvalRequest, EvaluationError,
                        ExternalEvaluator, SurrogateEvaluator)
from .genome import (CHROMOSOME_LENGTH, GENOTYPE_COUNT, MIN_ACTIVE_BLOCKS,
                     Genome, as_generator, encode_text, gene_from_genotype_id,
                     genotype_id, random_genome, validate)
from .objectives import (ConstraintSpec, ObjectiveVector, constrained_rank,
                         front0_count, pareto_rank, pareto_roulette_scores)

log = logging.getLogger(__name__)

ROULETTE_DELTA = 0.01


@dataclass
class Individual:
    genome: Genome
    fitness: float
    prefix_fitness: tuple[float, ...]   # one entry per active block
    cost: CostReport
    birth_generation: int
    floored: bool = False
    origin: str = ""                    # "init" | "mutation" | "crossover"

    @cached_property
    def text(self) -> str:
        return encode_text(self.genome)

    def objective_vector(self) -> ObjectiveVector:
        return ObjectiveVector(self.fitness, self.cost.params, self.cost.flops)


@dataclass
class Population:
    individuals: list[Individual]
    elitism: list[Individual]
    generation: int


@dataclass
class SearchConfig:
    seed: int = 0
    generations: int = 40
    population_size: int = 16
    mutation_rate: float = 0.2
    elitism: int = 8
    objective_mode: str = "constrained"     # "constrained" | "pareto"
    mutation_mode: str = "guided"           # "guided" | "uniform"
    max_params: int | None = None
    max_flops: int | None = None
    hr_width: int = 1280
    hr_height: int = 720
    scale: int = 2
    evaluator: str = "surrogate"            # "surrogate" | "external"
    evaluator_command: list[str] | None = None
    evaluator_timeout: float = 600.0
    budget: int = 10

    def __post_init__(self):
        if not 0.0 < self.mutation_rate < 1.0:
            raise ValueError("mutation_rate must lie in (0, 1)")
        if self.elitism < 1:
            raise ValueError("elitism must be >= 1")
        if self.population_size < 2 or self.population_size % 2:
            raise ValueError("population_size must be even and >= 2")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")
        if self.objective_mode not in ("constrained", "pareto"):
            raise ValueError(f"unknown objective mode {self.objective_mode!r}")
        if self.mutation_mode not in ("guided", "uniform"):
            raise ValueError(f"unknown mutation mode {self.mutation_mode!r}")
        if self.evaluator not in ("surrogate", "external"):
            raise ValueError(f"unknown evaluator backend {self.evaluator!r}")
        self.resolution()  # validates divisibility

    def resolution(self) -> ResolutionSpec:
        return ResolutionSpec(self.hr_width, self.hr_height, self.scale)

    def constraint_spec(self) -> ConstraintSpec | None:
        if self.max_params is None and self.max_flops is None:
            return None
        big = 1 << 62
        return ConstraintSpec(self.max_params or big, self.max_flops or big)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed, "generations": self.generations,
            "population_size": self.population_size,
            "mutation_rate": self.mutation_rate, "elitism": self.elitism,
            "objective_mode": self.objective_mode,
            "mutation_mode": self.mutation_mode,
            "max_params": self.max_params, "max_flops": self.max_flops,
            "hr_width": self.hr_width, "hr_height": self.hr_height,
            "scale": self.scale, "evaluator": self.evaluator,
            "evaluator_command": self.evaluator_command,
            "evaluator_timeout": self.evaluator_timeout, "budget": self.budget,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "SearchConfig":
        return cls(**obj)


def repair_min_active(genome: Genome, rng) -> Genome:
    """Flip random inactive genes on until the minimum active count holds."""
    missing = MIN_ACTIVE_BLOCKS - genome.active_count
    if missing <= 0:
        return genome
    gen = as_generator(rng)
    inactive = [i for i, g in enumerate(genome.blocks) if not g.state]
    picks = gen.choice(len(inactive), size=missing, replace=False)
    flip = {inactive[int(p)] for p in picks}
    blocks = tuple(dc_replace(g, state=True) if i in flip else g
                   for i, g in enumerate(genome.blocks))
    return Genome(blocks, genome.scale)


def guided_mutate(parent: Genome, rate: float, matrix: CreditMatrix, rng,
                  mode: str = "guided", force: bool = True) -> Genome:
    """Position-wise mutation with credit-guided architecture replacement.

    Each of the 20 positions independently mutates with probability
    ``rate``.  A mutated position redraws its whole architecture (from the
    squared-credit roulette in guided mode, uniformly in the baseline
    mode) and additionally flips its activity bit with probability
    ``rate``.  If no position fired and ``force`` is set, one random
    position is mutated so children never equal their parent by accident;
    the result is repaired to the minimum active count.
    """
    gen = as_generator(rng)
    fire = gen.random(CHROMOSOME_LENGTH) < rate
    if force and not fire.any():
        fire[int(gen.integers(CHROMOSOME_LENGTH))] = True
    blocks = []
    for depth, gene in enumerate(parent.blocks):
        if not fire[depth]:
            blocks.append(gene)
            continue
        state = gene.state != bool(gen.random() < rate)
        if mode == "guided":
            gid = matrix.sample_genotype(depth, gen)
        else:
            gid = min(int(float(gen.random()) * GENOTYPE_COUNT),
                      GENOTYPE_COUNT - 1)
        blocks.append(gene_from_genotype_id(gid, state=state))
    return repair_min_active(Genome(tuple(blocks), parent.scale), gen)


def roulette_weights(scores: Sequence[float]) -> list[float]:
    """Fitness-proportionate weights, shifted positive so the worst
    individual stays selectable."""
    lo = min(scores)
    return [s - lo + ROULETTE_DELTA for s in scores]


def roulette_pick(rng, weights: Sequence[float]) -> int:
    gen = as_generator(rng)
    total = 0.0
    for w in weights:
        total += w
    target = float(gen.random()) * total
    acc = 0.0
    for i, w in enumerate(weights):
        acc += w
        if target < acc:
            return i
    return len(weights) - 1


def crossover(pool: Sequence[Individual], rng,
              scores: Sequence[float] | None = None) -> Genome:
    """Uniform crossover of two distinct roulette-selected parents."""
    gen = as_generator(rng)
    if len(pool) == 1:
        return pool[0].genome
    if scores is None:
        scores = [ind.fitness for ind in pool]
    weights = roulette_weights(scores)
    first = roulette_pick(gen, weights)
    weights[first] = 0.0
    second = roulette_pick(gen, weights)
    a, b = pool[first].genome, pool[second].genome
    mask = gen.random(CHROMOSOME_LENGTH) < 0.5
    blocks = tuple(a.blocks[i] if mask[i] else b.blocks[i]
                   for i in range(CHROMOSOME_LENGTH))
    return repair_min_active(Genome(blocks, a.scale), gen)


def select_elitism(pool: Sequence[Individual], cfg: SearchConfig,
                   limit: int | None = None) -> list[Individual]:
    """Top-T of the pool after genome-text dedup, ranked per objective mode."""
    top = cfg.elitism if limit is None else limit
    seen: set[str] = set()
    unique: list[Individual] = []
    for ind in pool:
        if ind.text not in seen:
            seen.add(ind.text)
            unique.append(ind)
    vectors = [ind.objective_vector() for ind in unique]
    texts = [ind.text for ind in unique]
    if cfg.objective_mode == "pareto":
        order, _, _ = pareto_rank(vectors, texts)
    else:
        order = constrained_rank(vectors, cfg.constraint_spec(), texts)
    return [unique[i] for i in order[:top]]


def make_evaluator(cfg: SearchConfig):
    if cfg.evaluator == "surrogate":
        return SurrogateEvaluator()
    if not cfg.evaluator_command:
        raise EvaluationError("external evaluator selected but no command configured")
    return ExternalEvaluator(cfg.evaluator_command, cfg.evaluator_timeout)


class SearchState:
    """Everything the search loop owns; checkpointable as one record."""

    def __init__(self, cfg: SearchConfig, evaluator=None):
        self.cfg = cfg
        self.rng = np.random.Generator(np.random.PCG64(cfg.seed))
        self.credit = CreditMatrix()
        backend = evaluator if evaluator is not None else make_evaluator(cfg)
        self.evaluator = (backend if isinstance(backend, CachedEvaluator)
                          else CachedEvaluator(backend))
        self.archive: dict[str, Individual] = {}
        self.history: list[dict] = []
        self.population: Population | None = None

    # -- evaluation ---------------------------------------------------

    def _evaluate(self, genomes: Sequence[Genome], generation: int,
                  strict: bool) -> list[Individual]:
        cfg = self.cfg
        res = cfg.resolution()
        requests = [EvalRequest(f"g{generation}-i{i}", g, cfg.scale,
                                cfg.budget, cfg.seed)
                    for i, g in enumerate(genomes)]
        responses = self.evaluator.evaluate_batch(requests)
        individuals = []
        # responses may have arrived in any order; merge by individual index
        for request, genome in zip(requests, genomes):
            response = responses[request.id]
            problem = response.check_contract(genome.active_count)
            report = network_cost(genome, res)
            cost = CostReport(report.params, report.flops, report.multi_adds)
            if problem is not None:
                if strict:
                    raise EvaluationError(
                        f"evaluator failed on {encode_text(genome)}: {problem}")
                log.warning("evaluation of %s degraded to floor: %s",
                            request.id, problem)
                floor = self.evaluator.floor_fitness
                ind = Individual(genome, floor,
                                 (floor,) * genome.active_count, cost,
                                 generation, floored=True)
            else:
                prefix = response.prefix_fitness
                ind = Individual(genome, response.fitness, tuple(prefix[1:]),
                                 cost, generation)
                gains = credit_from_prefix(prefix[1:], prefix[0],
                                           genome.active_indices)
                for depth, gain in gains:
                    self.credit.update(genotype_id(genome.blocks[depth]),
                                       depth, gain)
            self.archive.setdefault(ind.text, ind)
            individuals.append(ind)
        return individuals

    # -- lifecycle ----------------------------------------------------

    def initialize(self) -> dict:
        cfg = self.cfg
        genomes = [random_genome(self.rng, cfg.scale)
                   for _ in range(cfg.population_size)]
        for genome in genomes:
            assert not validate(genome)
        individuals = self._evaluate(genomes, 0, strict=True)
        for ind in individuals:
            ind.origin = "init"
        elitism = select_elitism(individuals, cfg)
        self.population = Population(individuals, elitism, 0)
        record = self._record()
        self.history.append(record)
        return record

    def step(self) -> dict:
        """Advance the search by one generation."""
        cfg = self.cfg
        pop = self.population
        assert pop is not None, "initialize() must run first"
        half = cfg.population_size // 2

        children: list[Genome] = []
        for i in range(half):
            parent = pop.elitism[i % len(pop.elitism)]
            children.append(guided_mutate(parent.genome, cfg.mutation_rate,
                                          self.credit, self.rng,
                                          mode=cfg.mutation_mode))
        pool = pop.individuals + pop.elitism
        if cfg.objective_mode == "pareto":
            scores = pareto_roulette_scores([ind.objective_vector()
                                             for ind in pool])
        else:
            scores = [ind.fitness for ind in pool]
        for _ in range(half):
            children.append(crossover(pool, self.rng, scores))

        individuals = self._evaluate(children, pop.generation + 1,
                                     strict=False)
        for i, ind in enumerate(individuals):
            ind.origin = "mutation" if i < half else "crossover"
        elitism = select_elitism(individuals + pop.elitism, cfg)
        self.population = Population(individuals, elitism, pop.generation + 1)
        record = self._record()
        self.history.append(record)
        return record

    def _record(self) -> dict:
        pop = self.population
        pool = pop.individuals + pop.elitism
        best = min(pool, key=lambda ind: (-ind.fitness, ind.text))
        median = float(statistics.median(ind.fitness
                                         for ind in pop.individuals))
        vectors = [ind.objective_vector() for ind in self.archive.values()]
        return {
            "gen": pop.generation,
            "best": float(best.fitness),
            "median": median,
            "best_genome": best.text,
            "pareto_size": front0_count(vectors),
        }

    def close(self) -> None:
        self.evaluator.close()


def run_search(cfg: SearchConfig, evaluator=None,
               on_generation: Callable[[SearchState, dict], None] | None = None,
               stop_after: int | None = None) -> SearchState:
    """Full search: initialize, then evolve for cfg.generations generations
    (``stop_after`` caps the run early for interrupt/resume testing)."""
    state = SearchState(cfg, evaluator)
    try:
        record = state.initialize()
        if on_generation is not None:
            on_generation(state, record)
        return continue_search(state, on_generation, stop_after)
    except BaseException:
        state.close()
        raise


def continue_search(state: SearchState,
                    on_generation: Callable[[SearchState, dict], None] | None = None,
                    stop_after: int | None = None) -> SearchState:
    limit = state.cfg.generations
    if stop_after is not None:
        limit = min(limit, stop_after)
    while state.population.generation < limit:
        record = state.step()
        if on_generation is not None:
            on_generation(state, record)
    return state
