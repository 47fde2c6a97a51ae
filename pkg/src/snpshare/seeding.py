"""Domain-separated random streams derived from one master seed."""
import numpy as np

NOISE = 1
LAPLACE = 2
SHUFFLE = 3
SYNTHETIC = 4
TRIAL = 5

_MASK64 = (1 << 64) - 1


def stream(seed, domain, index=None):
    """Return a Generator for ``(seed, domain[, index])``.

    Streams for different domains or indices are statistically independent,
    and a given key always yields the same stream no matter which worker
    consumes it.
    """
    key = (domain,) if index is None else (domain, int(index))
    ss = np.random.SeedSequence(int(seed) & _MASK64, spawn_key=key)
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed, domain, index=0):
    """Derive a child 64-bit integer seed, e.g. for per-trial runs in a sweep."""
    ss = np.random.SeedSequence(int(seed) & _MASK64, spawn_key=(domain, int(index)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
