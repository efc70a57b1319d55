# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the search hot loops.

Mirror image of ``_pykernels``: same constants, same operation order, same
results to the last bit (the extension is built with -ffp-contract=off so
the compiler cannot fuse multiply-adds).  See ``_pykernels`` for the
normative description of the hash and surrogate constants.
"""

from libc.math cimport sqrt, INFINITY
from libc.stdint cimport int64_t, uint64_t

BACKEND = "compiled"

cdef uint64_t MASK64_C = 0xFFFFFFFFFFFFFFFFULL
cdef uint64_t MIX_GAMMA_C = 0x9E3779B97F4A7C15ULL
cdef uint64_t MIX_MUL1_C = 0xBF58476D1CE4E5B9ULL
cdef uint64_t MIX_MUL2_C = 0x94D049BB133111EBULL
cdef uint64_t SEED_SALT_C = 0xD1B54A32D192ED03ULL
cdef uint64_t FNV_OFFSET_C = 0xCBF29CE484222325ULL
cdef uint64_t FNV_PRIME_C = 0x100000001B3ULL

cdef double INV_2_52 = 2.0 ** -52

cdef double[3] TYPE_W
TYPE_W[0] = 0.60
TYPE_W[1] = 0.55
TYPE_W[2] = 0.70
cdef double[4] RHO
RHO[0] = 1.0
RHO[1] = 1.08
RHO[2] = 1.12
RHO[3] = 1.13
cdef double DEPTH_DECAY_C = 0.97
cdef double NOISE_SCALE_C = 0.05
cdef double DIMINISHING_C = 0.02
cdef double FLOOR_C = 28.0

MASK64 = MASK64_C
MIX_GAMMA = MIX_GAMMA_C
MIX_MUL1 = MIX_MUL1_C
MIX_MUL2 = MIX_MUL2_C
SEED_SALT = SEED_SALT_C
FNV_OFFSET = FNV_OFFSET_C
FNV_PRIME = FNV_PRIME_C
TYPE_WEIGHTS = (0.60, 0.55, 0.70)
RECURSION_BONUS = (1.0, 1.08, 1.12, 1.13)
DEPTH_DECAY = DEPTH_DECAY_C
NOISE_SCALE = NOISE_SCALE_C
DIMINISHING_SLOPE = DIMINISHING_C
FLOOR_FITNESS = FLOOR_C


cdef inline uint64_t _mix64(uint64_t z) nogil:
    z ^= z >> 30
    z *= MIX_MUL1_C
    z ^= z >> 27
    z *= MIX_MUL2_C
    z ^= z >> 31
    return z


cdef inline double _unit_noise(uint64_t text_hash, int64_t depth, uint64_t seed) nogil:
    cdef uint64_t hd = _mix64((<uint64_t> (depth + 1)) * MIX_GAMMA_C)
    cdef uint64_t hs = _mix64(seed ^ SEED_SALT_C)
    cdef uint64_t z = _mix64(text_hash ^ hd ^ hs)
    return (z >> 11) * INV_2_52 - 1.0


def mix64(z):
    """splitmix64 finalizer over a 64-bit value."""
    return _mix64(<uint64_t> (z & 0xFFFFFFFFFFFFFFFF))


def fnv1a64(bytes data):
    """FNV-1a 64-bit hash of a byte string."""
    cdef const unsigned char[:] buf = data
    cdef uint64_t h = FNV_OFFSET_C
    cdef Py_ssize_t i
    for i in range(buf.shape[0]):
        h = (h ^ buf[i]) * FNV_PRIME_C
    return h


def unit_noise(text_hash, depth, seed):
    """Deterministic pseudo-noise in [-1, 1) for (genome text, depth, seed)."""
    return _unit_noise(<uint64_t> (text_hash & 0xFFFFFFFFFFFFFFFF),
                       <int64_t> depth,
                       <uint64_t> (seed & 0xFFFFFFFFFFFFFFFF))


def surrogate_prefix(const int64_t[:] state, const int64_t[:] tcode,
                     const int64_t[:] layers, const int64_t[:] growth,
                     const int64_t[:] recursion, text_hash, seed,
                     bint zero_noise, double[:] out):
    """Fill ``out`` with the surrogate prefix-fitness curve; see _pykernels."""
    cdef uint64_t th = <uint64_t> (text_hash & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t sd = <uint64_t> (seed & 0xFFFFFFFFFFFFFFFF)
    cdef double total = 0.0
    cdef double decay = 1.0
    cdef double q
    cdef Py_ssize_t d
    cdef int64_t k = 0
    out[0] = FLOOR_C
    for d in range(state.shape[0]):
        if state[d]:
            k += 1
            q = (TYPE_W[tcode[d]]
                 * (layers[d] / 8.0)
                 * sqrt(growth[d] / 64.0)
                 * RHO[recursion[d] - 1]
                 * decay)
            if not zero_noise:
                q = q + NOISE_SCALE_C * _unit_noise(th, d, sd)
            total += q / (1.0 + DIMINISHING_C * k)
            out[k] = FLOOR_C + total
        decay *= DEPTH_DECAY_C
    return k


def credit_normalized(const double[:] values, const int64_t[:] counts,
                      const double[:] fills, double eps, double[:] out):
    """Shift a credit column so every entry is >= eps."""
    cdef Py_ssize_t n = values.shape[0]
    cdef Py_ssize_t j
    cdef double m = INFINITY
    cdef double v
    for j in range(n):
        v = values[j] if counts[j] > 0 else fills[j]
        if v < m:
            m = v
    cdef double shift = m - eps
    for j in range(n):
        v = values[j] if counts[j] > 0 else fills[j]
        out[j] = v - shift


def credit_probabilities(const double[:] values, const int64_t[:] counts,
                         const double[:] fills, double eps, double[:] out):
    """Selection probabilities proportional to squared normalized credit."""
    cdef Py_ssize_t n = values.shape[0]
    cdef Py_ssize_t j
    cdef double total = 0.0
    cdef double w
    credit_normalized(values, counts, fills, eps, out)
    for j in range(n):
        w = out[j] * out[j]
        out[j] = w
        total += w
    for j in range(n):
        out[j] /= total


def credit_pick(const double[:] values, const int64_t[:] counts,
                const double[:] fills, double eps, double u):
    """Sample one index proportionally to squared normalized credit."""
    cdef Py_ssize_t n = values.shape[0]
    cdef Py_ssize_t j
    cdef double m = INFINITY
    cdef double v
    for j in range(n):
        v = values[j] if counts[j] > 0 else fills[j]
        if v < m:
            m = v
    cdef double shift = m - eps
    cdef double total = 0.0
    for j in range(n):
        v = (values[j] if counts[j] > 0 else fills[j]) - shift
        total += v * v
    cdef double target = u * total
    cdef double acc = 0.0
    for j in range(n):
        v = (values[j] if counts[j] > 0 else fills[j]) - shift
        acc += v * v
        if target < acc:
            return j
    return n - 1
