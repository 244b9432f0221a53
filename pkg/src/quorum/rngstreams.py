"""Counter-based random streams for schedule-independent simulation.

Every consumer gets its own Philox generator keyed by (master seed,
namespace, index, slot). Streams never share state, so attempts can be
sampled in any order — or in parallel — and still produce bit-identical
results for a fixed seed.

Key layout (128 bits): seed in the low 64, index in the next 48,
namespace in the top 8. The 256-bit Philox counter is offset per slot so
one (seed, index) key can host disjoint sub-streams.
"""

from __future__ import annotations

import numpy as np

_SEED_MASK = (1 << 64) - 1
_INDEX_BITS = 48

# Namespaces keep unrelated stream families disjoint.
NS_PROBLEM = 0  # per-problem attempt/shock draws (detailed simulation)
NS_BATCH = 1  # vectorized Monte Carlo experiment draws
NS_MISC = 2


def stream(seed: int, index: int, slot: int = 0, namespace: int = NS_PROBLEM) -> np.random.Generator:
    """Independent generator for (seed, namespace, index, slot)."""
    if not 0 <= index < (1 << _INDEX_BITS):
        raise ValueError(f"index out of range: {index}")
    if not 0 <= namespace < (1 << 8):
        raise ValueError(f"namespace out of range: {namespace}")
    key = (seed & _SEED_MASK) | (index << 64) | (namespace << (64 + _INDEX_BITS))
    return np.random.Generator(np.random.Philox(counter=slot << 192, key=key))


def attempt_stream(seed: int, problem_index: int, attempt_index: int) -> np.random.Generator:
    """Stream for one attempt of one problem. Slot 0 is the shock stream."""
    return stream(seed, problem_index, slot=attempt_index + 1, namespace=NS_PROBLEM)


def shock_stream(seed: int, problem_index: int) -> np.random.Generator:
    """Stream for a problem's shared correlation shock."""
    return stream(seed, problem_index, slot=0, namespace=NS_PROBLEM)
