"""Block-credit bookkeeping and guided-mutation sampling probabilities.

Credit of a block is the fitness gain observed when it is appended on top
of its preceding blocks; per (genotype, depth) cell the running estimate is
an exponential moving average.  Columns (fixed depth) are shifted positive
and squared to form selection probabilities, so every genotype keeps a
strictly positive chance of being drawn.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from . import _kernels
from .genome import CHROMOSOME_LENGTH, GENOTYPE_COUNT

DEFAULT_ALPHA = 0.9
DEFAULT_EPSILON = 0.001


def credit_from_prefix(prefix_fitness: Sequence[float], floor: float,
                       depths: Sequence[int] | None = None) -> list[tuple[int, float]]:
    """Per-depth credits from a prefix-fitness curve.

    ``prefix_fitness[k]`` is the fitness of the network truncated after the
    (k+1)-th active block; ``floor`` is the fitness of the bare head+tail
    network.  ``depths`` gives the chromosome positions of the active
    blocks (defaults to 0..len-1).
    """
    if len(prefix_fitness) == 0:
        raise ValueError("empty prefix fitness")
    if depths is None:
        depths = range(len(prefix_fitness))
    if len(prefix_fitness) != len(depths):
        raise ValueError("prefix fitness and depths must have equal length")
    credits = []
    previous = floor
    for depth, value in zip(depths, prefix_fitness):
        credits.append((depth, value - previous))
        previous = value
    return credits


class CreditMatrix:
    """Running credit estimate per (genotype id, chromosome depth)."""

    def __init__(self, genotypes: int = GENOTYPE_COUNT,
                 depths: int = CHROMOSOME_LENGTH,
                 alpha: float = DEFAULT_ALPHA,
                 epsilon: float = DEFAULT_EPSILON):
        if not 0.0 < alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        self.alpha = alpha
        self.epsilon = epsilon
        self.values = np.zeros((genotypes, depths), dtype=np.float64)
        self.counts = np.zeros((genotypes, depths), dtype=np.int64)

    @property
    def genotypes(self) -> int:
        return self.values.shape[0]

    @property
    def depths(self) -> int:
        return self.values.shape[1]

    def fill_values(self) -> np.ndarray:
        """Initialization values for unobserved cells, one per genotype.

        A genotype that has been observed at other depths falls back to the
        running mean of its own observed credits; a never-observed genotype
        falls back to the running mean of all observed credits (0 before
        any observation).  Recomputed from the stored arrays so a reloaded
        checkpoint reproduces the exact same priors.
        """
        mask = self.counts > 0
        total = int(mask.sum())
        if total == 0:
            return np.zeros(self.genotypes, dtype=np.float64)
        global_mean = float(self.values[mask].sum() / total)
        row_counts = mask.sum(axis=1)
        row_sums = np.where(mask, self.values, 0.0).sum(axis=1)
        fills = np.full(self.genotypes, global_mean, dtype=np.float64)
        seen = row_counts > 0
        fills[seen] = row_sums[seen] / row_counts[seen]
        return fills

    def _check(self, genotype: int, depth: int) -> None:
        if not 0 <= genotype < self.genotypes:
            raise IndexError(f"genotype {genotype} out of range")
        if not 0 <= depth < self.depths:
            raise IndexError(f"depth {depth} out of range")

    def update(self, genotype: int, depth: int, credit: float) -> None:
        """EMA update; the first observation of a cell overwrites it."""
        self._check(genotype, depth)
        if not math.isfinite(credit):
            raise ValueError(f"non-finite credit {credit}")
        if self.counts[genotype, depth] == 0:
            self.values[genotype, depth] = credit
        else:
            old = float(self.values[genotype, depth])
            self.values[genotype, depth] = (self.alpha * old
                                            + (1.0 - self.alpha) * credit)
        self.counts[genotype, depth] += 1

    def normalize_column(self, depth: int) -> np.ndarray:
        """Column shifted so its minimum maps to epsilon (> 0)."""
        self._check(0, depth)
        out = np.empty(self.genotypes, dtype=np.float64)
        _kernels.credit_normalized(
            np.ascontiguousarray(self.values[:, depth]),
            np.ascontiguousarray(self.counts[:, depth]),
            self.fill_values(), self.epsilon, out)
        return out

    def selection_probabilities(self, depth: int) -> np.ndarray:
        """Probabilities proportional to squared normalized credit; sums to
        1 within 1e-12 and is strictly positive."""
        self._check(0, depth)
        out = np.empty(self.genotypes, dtype=np.float64)
        _kernels.credit_probabilities(
            np.ascontiguousarray(self.values[:, depth]),
            np.ascontiguousarray(self.counts[:, depth]),
            self.fill_values(), self.epsilon, out)
        return out

    def sample_genotype(self, depth: int, rng: np.random.Generator) -> int:
        """One roulette draw over the squared-credit distribution."""
        self._check(0, depth)
        u = float(rng.random())
        return int(_kernels.credit_pick(
            np.ascontiguousarray(self.values[:, depth]),
            np.ascontiguousarray(self.counts[:, depth]),
            self.fill_values(), self.epsilon, u))

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "epsilon": self.epsilon,
            "values": self.values.tolist(),
            "counts": self.counts.tolist(),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "CreditMatrix":
        values = np.asarray(obj["values"], dtype=np.float64)
        matrix = cls(values.shape[0], values.shape[1],
                     alpha=float(obj["alpha"]), epsilon=float(obj["epsilon"]))
        matrix.values = values
        matrix.counts = np.asarray(obj["counts"], dtype=np.int64)
        return matrix
