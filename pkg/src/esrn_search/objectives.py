"""Multi-objective machinery over (psnr, params, flops).

PSNR is maximized, parameter count and FLOPs are minimized.  Provides
Pareto domination, fast non-dominated sorting, crowding distances and the
feasibility-first total order used by the constrained search mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class ObjectiveVector:
    psnr: float
    params: int
    flops: int

    def oriented(self) -> tuple[float, float, float]:
        """All-maximized view used by domination checks."""
        return (self.psnr, -float(self.params), -float(self.flops))


@dataclass(frozen=True)
class ConstraintSpec:
    w_net: int   # max params (strict)
    v_net: int   # max flops (strict)

    def __post_init__(self):
        if self.w_net <= 0 or self.v_net <= 0:
            raise ValueError("constraints must be positive")

    def feasible(self, v: ObjectiveVector) -> bool:
        return v.params < self.w_net and v.flops < self.v_net

    def violation(self, v: ObjectiveVector) -> float:
        """Normalized total constraint excess (0 iff feasible)."""
        return (max(0, v.params - self.w_net) / self.w_net
                + max(0, v.flops - self.v_net) / self.v_net)


def dominates(a: ObjectiveVector, b: ObjectiveVector) -> bool:
    """True iff a is at least as good in every objective and strictly
    better in at least one."""
    oa, ob = a.oriented(), b.oriented()
    if any(x < y for x, y in zip(oa, ob)):
        return False
    return any(x > y for x, y in zip(oa, ob))


def _oriented_matrix(vs: Sequence[ObjectiveVector]) -> np.ndarray:
    return np.array([v.oriented() for v in vs], dtype=np.float64)


def _domination_matrix(mat: np.ndarray) -> np.ndarray:
    """dom[i, j] is True iff vector i dominates vector j."""
    left = mat[:, None, :]
    right = mat[None, :, :]
    geq = (left >= right).all(axis=2)
    gt = (left > right).any(axis=2)
    return geq & gt


def non_dominated_sort(vs: Sequence[ObjectiveVector]) -> list[list[int]]:
    """Fronts of indices, best first (Deb's fast non-dominated sort)."""
    n = len(vs)
    if n == 0:
        raise ValueError("empty objective list")
    dom = _domination_matrix(_oriented_matrix(vs))
    dominated_by = [np.flatnonzero(dom[i]).tolist() for i in range(n)]
    counts = dom.sum(axis=0).astype(int)

    fronts = []
    current = [i for i in range(n) if counts[i] == 0]
    while current:
        fronts.append(current)
        nxt = []
        for i in current:
            for j in dominated_by[i]:
                counts[j] -= 1
                if counts[j] == 0:
                    nxt.append(j)
        current = sorted(nxt)
    return fronts


def front0_count(vs: Sequence[ObjectiveVector]) -> int:
    """Size of the non-dominated set (vectorized; used per generation on
    the growing archive)."""
    if not vs:
        return 0
    dom = _domination_matrix(_oriented_matrix(vs))
    return int((dom.sum(axis=0) == 0).sum())


def crowding_distance(front: Sequence[ObjectiveVector]) -> list[float]:
    """NSGA-II crowding distances within one front.

    Boundary points per objective get +inf; interior points accumulate
    normalized neighbor gaps; objectives with zero range contribute
    nothing.  Neighbor gaps are taken between adjacent *distinct* values,
    so tied points are treated alike and the result is permutation
    equivariant.
    """
    n = len(front)
    if n == 0:
        raise ValueError("empty front")
    distances = [0.0] * n
    mat = _oriented_matrix(front)
    for axis in range(mat.shape[1]):
        col = mat[:, axis]
        uniq = sorted(set(col.tolist()))
        lo, hi = uniq[0], uniq[-1]
        span = hi - lo
        if span == 0.0:
            continue
        position = {v: k for k, v in enumerate(uniq)}
        for i in range(n):
            v = col[i]
            if v == lo or v == hi:
                distances[i] = math.inf
            elif distances[i] != math.inf:
                k = position[v]
                distances[i] += (uniq[k + 1] - uniq[k - 1]) / span
    return distances


def constrained_rank(vs: Sequence[ObjectiveVector], cs: ConstraintSpec | None,
                     tie_keys: Sequence[str] | None = None) -> list[int]:
    """Total order of indices for the constrained mode.

    Feasible individuals come first, sorted by descending psnr; infeasible
    individuals follow, sorted by ascending violation.  Ties break by fewer
    params, fewer flops, then ``tie_keys`` (e.g. genome text) so the order
    is deterministic.
    """
    if tie_keys is None:
        tie_keys = [""] * len(vs)

    def key(i: int):
        v = vs[i]
        if cs is None or cs.feasible(v):
            return (0, -v.psnr, v.params, v.flops, tie_keys[i], i)
        return (1, cs.violation(v), -v.psnr, v.params, v.flops, tie_keys[i], i)

    return sorted(range(len(vs)), key=key)


def pareto_rank(vs: Sequence[ObjectiveVector],
                tie_keys: Sequence[str] | None = None
                ) -> tuple[list[int], list[int], list[float]]:
    """Total order for the Pareto mode plus per-index front and crowding.

    Order: ascending front, descending crowding distance, then tie keys.
    """
    if tie_keys is None:
        tie_keys = [""] * len(vs)
    fronts = non_dominated_sort(vs)
    front_of = [0] * len(vs)
    crowd_of = [0.0] * len(vs)
    for rank, front in enumerate(fronts):
        dists = crowding_distance([vs[i] for i in front])
        for i, d in zip(front, dists):
            front_of[i] = rank
            crowd_of[i] = d
    order = sorted(range(len(vs)),
                   key=lambda i: (front_of[i], -crowd_of[i], tie_keys[i], i))
    return order, front_of, crowd_of


def pareto_roulette_scores(vs: Sequence[ObjectiveVector]) -> list[float]:
    """Scalar scores standing in for fitness during Pareto-mode parent
    roulette: negated front rank with a bounded crowding tie-break."""
    _, front_of, crowd_of = pareto_rank(vs)
    max_rank = max(front_of)
    scores = []
    for rank, cd in zip(front_of, crowd_of):
        tie = 1.0 if math.isinf(cd) else cd / (1.0 + cd)
        scores.append(float(max_rank - rank) + tie)
    return scores
