"""End to end: the search engine drives this trainer as its external
evaluator over the wire protocol (budget 0, so requests score without
training)."""

import sys

import pytest

esrn = pytest.importorskip("esrn_search",
                           reason="search engine not installed")

from esrn_search.evaluator import ExternalEvaluator
from esrn_search.evolution import SearchConfig, run_search


def trainer_command():
    return [sys.executable, "-m", "tiny_trainer", "--synthetic"]


def test_search_runs_against_real_trainer():
    cfg = SearchConfig(seed=0, generations=1, population_size=4, elitism=2,
                       evaluator="external", budget=0,
                       evaluator_command=trainer_command(),
                       evaluator_timeout=120.0)
    state = run_search(cfg)
    try:
        pop = state.population
        assert pop.generation == 1
        assert len(pop.individuals) == 4
        for ind in pop.individuals:
            assert not ind.floored
            assert len(ind.prefix_fitness) == ind.genome.active_count
    finally:
        state.close()


def test_engine_client_pairs_with_trainer_handshake():
    evaluator = ExternalEvaluator(trainer_command(), timeout=120.0)
    evaluator.close()
