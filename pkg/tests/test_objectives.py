import math

import pytest

from esrn_search.objectives import (ConstraintSpec, ObjectiveVector,
                                    constrained_rank, crowding_distance,
                                    dominates, front0_count,
                                    non_dominated_sort, pareto_rank,
                                    pareto_roulette_scores)


def vec(psnr, params, flops):
    return ObjectiveVector(psnr, params, flops)


def oracle_fronts(vectors):
    """Brute-force front peeling: recompute pairwise domination per layer."""
    remaining = list(range(len(vectors)))
    fronts = []
    while remaining:
        front = []
        for i in remaining:
            if not any(dominates(vectors[j], vectors[i])
                       for j in remaining if j != i):
                front.append(i)
        fronts.append(front)
        remaining = [i for i in remaining if i not in front]
    return fronts


def random_vectors(rng, n):
    return [vec(float(rng.uniform(25, 40)), int(rng.integers(1, 10) * 1000),
                int(rng.integers(1, 10) * 10_000)) for _ in range(n)]


def test_dominates_examples():
    assert dominates(vec(30.0, 100, 100), vec(29.0, 200, 200))
    a = vec(30.0, 100, 100)
    assert not dominates(a, a)
    x, y = vec(30.0, 100, 300), vec(29.0, 200, 200)
    assert not dominates(x, y) and not dominates(y, x)


def test_dominates_requires_one_strict_improvement():
    assert dominates(vec(30.0, 100, 100), vec(30.0, 100, 200))
    assert not dominates(vec(30.0, 100, 200), vec(30.0, 100, 100))


def test_dominates_irreflexive_antisymmetric(rng):
    vs = random_vectors(rng, 60)
    for a in vs[:20]:
        assert not dominates(a, a)
    for a in vs[:20]:
        for b in vs[20:40]:
            assert not (dominates(a, b) and dominates(b, a))


def test_dominates_transitive_on_samples(rng):
    vs = random_vectors(rng, 45)
    for a in vs[:15]:
        for b in vs[15:30]:
            for c in vs[30:]:
                if dominates(a, b) and dominates(b, c):
                    assert dominates(a, c)


def test_sort_identical_vectors_single_front():
    vs = [vec(30.0, 10, 10)] * 5
    assert non_dominated_sort(vs) == [[0, 1, 2, 3, 4]]


def test_sort_chain_gives_singleton_fronts():
    vs = [vec(32.0, 10, 10), vec(31.0, 20, 20), vec(30.0, 30, 30)]
    assert non_dominated_sort(vs) == [[0], [1], [2]]


def test_sort_matches_bruteforce_oracle(rng):
    for _ in range(25):
        vs = random_vectors(rng, 50)
        fast = [sorted(f) for f in non_dominated_sort(vs)]
        slow = [sorted(f) for f in oracle_fronts(vs)]
        assert fast == slow


def test_sort_fronts_partition_indices(rng):
    vs = random_vectors(rng, 80)
    fronts = non_dominated_sort(vs)
    flat = sorted(i for front in fronts for i in front)
    assert flat == list(range(80))


def test_front0_count_matches_sort(rng):
    vs = random_vectors(rng, 120)
    assert front0_count(vs) == len(non_dominated_sort(vs)[0])
    assert front0_count([]) == 0


def test_crowding_front_of_two_is_infinite():
    dists = crowding_distance([vec(30, 10, 10), vec(31, 20, 20)])
    assert dists == [math.inf, math.inf]


def test_crowding_collinear_middle_point():
    # evenly spaced along all three axes: middle accumulates 1.0 per axis
    vs = [vec(30.0, 100, 1000), vec(31.0, 200, 2000), vec(32.0, 300, 3000)]
    dists = crowding_distance(vs)
    assert dists[0] == math.inf and dists[2] == math.inf
    assert dists[1] == pytest.approx(3.0)


def test_crowding_zero_range_axis_contributes_nothing():
    vs = [vec(30.0, 100, 50), vec(30.0, 200, 50), vec(30.0, 300, 50)]
    dists = crowding_distance(vs)
    assert dists[1] == pytest.approx(1.0)    # only the params axis varies


def test_crowding_permutation_equivariant(rng):
    vs = random_vectors(rng, 12)
    base = crowding_distance(vs)
    perm = list(rng.permutation(12))
    permuted = crowding_distance([vs[i] for i in perm])
    for new_pos, old_pos in enumerate(perm):
        assert permuted[new_pos] == pytest.approx(base[old_pos])


def test_constrained_rank_feasibility_first():
    cs = ConstraintSpec(w_net=1000, v_net=1000)
    vs = [vec(35.0, 2000, 500), vec(29.0, 900, 900)]
    assert constrained_rank(vs, cs) == [1, 0]


def test_constrained_rank_feasible_by_psnr():
    cs = ConstraintSpec(w_net=1000, v_net=1000)
    vs = [vec(29.0, 900, 900), vec(31.0, 950, 950)]
    assert constrained_rank(vs, cs) == [1, 0]


def test_constrained_rank_violation_ordering():
    cs = ConstraintSpec(w_net=1000, v_net=1000)
    vs = [vec(30.0, 1500, 900), vec(30.0, 1100, 900)]   # violations 0.5 vs 0.1
    assert constrained_rank(vs, cs) == [1, 0]
    assert cs.violation(vs[0]) == pytest.approx(0.5)
    assert cs.violation(vs[1]) == pytest.approx(0.1)


def test_constrained_rank_feasible_subset_is_psnr_order(rng):
    cs = ConstraintSpec(w_net=10_000, v_net=100_000)
    vs = random_vectors(rng, 40)
    order = constrained_rank(vs, cs)
    feasible = [i for i in order if cs.feasible(vs[i])]
    psnrs = [vs[i].psnr for i in feasible]
    assert psnrs == sorted(psnrs, reverse=True)
    # feasible block strictly precedes the infeasible block
    flags = [cs.feasible(vs[i]) for i in order]
    assert flags == sorted(flags, reverse=True)


def test_constrained_rank_ties_break_on_cost_then_key():
    vs = [vec(30.0, 200, 100), vec(30.0, 100, 100), vec(30.0, 100, 50)]
    assert constrained_rank(vs, None) == [2, 1, 0]
    vs = [vec(30.0, 100, 100), vec(30.0, 100, 100)]
    assert constrained_rank(vs, None, tie_keys=["b", "a"]) == [1, 0]


def test_constraint_spec_validation():
    with pytest.raises(ValueError):
        ConstraintSpec(0, 10)


def test_fronts_invariant_under_common_scaling(rng):
    vs = random_vectors(rng, 60)
    scaled = [vec(v.psnr, v.params * 7, v.flops * 7) for v in vs]
    assert ([sorted(f) for f in non_dominated_sort(vs)]
            == [sorted(f) for f in non_dominated_sort(scaled)])


def test_pareto_rank_order_front_major(rng):
    vs = random_vectors(rng, 30)
    order, front_of, crowd_of = pareto_rank(vs)
    fronts_seen = [front_of[i] for i in order]
    assert fronts_seen == sorted(fronts_seen)
    scores = pareto_roulette_scores(vs)
    best_front = min(front_of)
    worst_front = max(front_of)
    for i, s in enumerate(scores):
        if front_of[i] == best_front:
            assert s > max((scores[j] for j in range(len(vs))
                            if front_of[j] == worst_front and j != i),
                           default=-1.0) - 1e-9
