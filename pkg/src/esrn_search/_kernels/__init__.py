"""Kernel backend selection.

Imports the compiled extension when available, otherwise the pure-Python
reference implementation.  Setting ``ESRN_PURE_PYTHON=1`` forces the
fallback (used by the benchmark and the backend-equivalence tests).  Both
backends are bit-identical, so which one loads never changes results.
"""

import os

from . import _pykernels

if os.environ.get("ESRN_PURE_PYTHON"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pykernels

BACKEND = _impl.BACKEND

MASK64 = _impl.MASK64
MIX_GAMMA = _impl.MIX_GAMMA
MIX_MUL1 = _impl.MIX_MUL1
MIX_MUL2 = _impl.MIX_MUL2
SEED_SALT = _impl.SEED_SALT
FNV_OFFSET = _impl.FNV_OFFSET
FNV_PRIME = _impl.FNV_PRIME
TYPE_WEIGHTS = _impl.TYPE_WEIGHTS
RECURSION_BONUS = _impl.RECURSION_BONUS
DEPTH_DECAY = _impl.DEPTH_DECAY
NOISE_SCALE = _impl.NOISE_SCALE
DIMINISHING_SLOPE = _impl.DIMINISHING_SLOPE
FLOOR_FITNESS = _impl.FLOOR_FITNESS

mix64 = _impl.mix64
fnv1a64 = _impl.fnv1a64
unit_noise = _impl.unit_noise
surrogate_prefix = _impl.surrogate_prefix
credit_normalized = _impl.credit_normalized
credit_probabilities = _impl.credit_probabilities
credit_pick = _impl.credit_pick
