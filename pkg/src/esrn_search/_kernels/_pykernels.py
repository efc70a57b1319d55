"""Pure-Python reference kernels for the search hot loops.

The compiled backend (``_ckernels``) implements exactly the same functions;
both must produce bit-identical results.  To that end every floating-point
expression here is written in the evaluation order the C code uses, all
64-bit integer arithmetic wraps explicitly through ``MASK64``, and no
library function with platform-dependent rounding (e.g. ``pow``) is used.

Hash constants (all normative, shared by every backend):

* ``MIX_GAMMA``  = 0x9E3779B97F4A7C15 (splitmix64 stream increment)
* ``MIX_MUL1``   = 0xBF58476D1CE4E5B9, ``MIX_MUL2`` = 0x94D049BB133111EB
  (splitmix64 finalizer multipliers, shifts 30/27/31)
* ``SEED_SALT``  = 0xD1B54A32D192ED03 (arbitrary odd salt for the seed lane)
* FNV-1a 64-bit: offset 0xCBF29CE484222325, prime 0x100000001B3

The pseudo-noise value is ``u = ((mix >> 11) * 2**-52) - 1.0``, uniform on
[-1, 1) and exactly representable, so both backends agree to the last bit.
"""

from __future__ import annotations

import math

BACKEND = "pure-python"

MASK64 = (1 << 64) - 1
MIX_GAMMA = 0x9E3779B97F4A7C15
MIX_MUL1 = 0xBF58476D1CE4E5B9
MIX_MUL2 = 0x94D049BB133111EB
SEED_SALT = 0xD1B54A32D192ED03
FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3

_INV_2_52 = 2.0 ** -52

# Surrogate constants: per-type quality weights (S, G, C), recursion bonus
# rho(1..4), per-position decay, noise amplitude, diminishing-returns slope
# and the floor fitness of the bare head+tail network.
TYPE_WEIGHTS = (0.60, 0.55, 0.70)
RECURSION_BONUS = (1.0, 1.08, 1.12, 1.13)
DEPTH_DECAY = 0.97
NOISE_SCALE = 0.05
DIMINISHING_SLOPE = 0.02
FLOOR_FITNESS = 28.0


def mix64(z: int) -> int:
    """splitmix64 finalizer over a 64-bit value."""
    z &= MASK64
    z ^= z >> 30
    z = (z * MIX_MUL1) & MASK64
    z ^= z >> 27
    z = (z * MIX_MUL2) & MASK64
    z ^= z >> 31
    return z


def fnv1a64(data: bytes) -> int:
    """FNV-1a 64-bit hash of a byte string."""
    h = FNV_OFFSET
    for b in data:
        h = ((h ^ b) * FNV_PRIME) & MASK64
    return h


def unit_noise(text_hash: int, depth: int, seed: int) -> float:
    """Deterministic pseudo-noise in [-1, 1) for (genome text, depth, seed)."""
    hd = mix64(((depth + 1) * MIX_GAMMA) & MASK64)
    hs = mix64((seed & MASK64) ^ SEED_SALT)
    z = mix64((text_hash & MASK64) ^ hd ^ hs)
    return (z >> 11) * _INV_2_52 - 1.0


def surrogate_prefix(state, tcode, layers, growth, recursion,
                     text_hash: int, seed: int, zero_noise: bool, out) -> int:
    """Fill ``out`` with the surrogate prefix-fitness curve.

    ``out[0]`` receives the floor fitness; ``out[k]`` the fitness of the
    network truncated after the k-th active block.  Returns the number of
    active blocks.  The input arrays are indexed by chromosome position;
    ``tcode`` is 0/1/2 for the shrink/group/contextual block types.
    """
    out[0] = FLOOR_FITNESS
    total = 0.0
    k = 0
    decay = 1.0
    for d in range(len(state)):
        if state[d]:
            k += 1
            q = (TYPE_WEIGHTS[tcode[d]]
                 * (layers[d] / 8.0)
                 * math.sqrt(growth[d] / 64.0)
                 * RECURSION_BONUS[recursion[d] - 1]
                 * decay)
            if not zero_noise:
                q = q + NOISE_SCALE * unit_noise(text_hash, d, seed)
            total += q / (1.0 + DIMINISHING_SLOPE * k)
            out[k] = FLOOR_FITNESS + total
        decay *= DEPTH_DECAY
    return k


def credit_normalized(values, counts, fills, eps: float, out) -> None:
    """Shift a credit column so every entry is >= eps (cell j falls back
    to its prior ``fills[j]`` when unobserved)."""
    n = len(values)
    m = math.inf
    for j in range(n):
        v = values[j] if counts[j] > 0 else fills[j]
        if v < m:
            m = v
    shift = m - eps
    for j in range(n):
        v = values[j] if counts[j] > 0 else fills[j]
        out[j] = v - shift


def credit_probabilities(values, counts, fills, eps: float, out) -> None:
    """Selection probabilities proportional to squared normalized credit."""
    n = len(values)
    credit_normalized(values, counts, fills, eps, out)
    total = 0.0
    for j in range(n):
        w = out[j] * out[j]
        out[j] = w
        total += w
    for j in range(n):
        out[j] /= total


def credit_pick(values, counts, fills, eps: float, u: float) -> int:
    """Sample one index proportionally to squared normalized credit.

    ``u`` is a uniform draw from [0, 1); the cumulative scan makes the
    result a deterministic function of (column, u).
    """
    n = len(values)
    m = math.inf
    for j in range(n):
        v = values[j] if counts[j] > 0 else fills[j]
        if v < m:
            m = v
    shift = m - eps
    total = 0.0
    for j in range(n):
        v = (values[j] if counts[j] > 0 else fills[j]) - shift
        total += v * v
    target = u * total
    acc = 0.0
    for j in range(n):
        v = (values[j] if counts[j] > 0 else fills[j]) - shift
        acc += v * v
        if target < acc:
            return j
    return n - 1
