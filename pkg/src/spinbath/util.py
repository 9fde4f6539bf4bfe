"""Small shared helpers: seeding, crossings, hashing, stable float text."""

import hashlib

import numpy as np

# kHz (technical frequency) to angular frequency in rad/us.
KHZ_TO_RAD_PER_US = 2.0 * np.pi * 1e-3


def realization_rng(master_seed, k):
    """Deterministic per-realization generator derived from (master_seed, k)."""
    return np.random.default_rng(np.random.SeedSequence(entropy=(int(master_seed), int(k))))


def first_crossing(times, values, level):
    """Time of the first downward crossing of `values` through `level`.

    Linear interpolation between samples; an exact hit takes the earlier
    sample time. Returns None when the series never reaches the level.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.shape != values.shape or times.ndim != 1:
        raise ValueError("times and values must be 1-d arrays of equal length")
    for i, v in enumerate(values):
        if v <= level:
            if i == 0:
                return float(times[0])
            v0 = values[i - 1]
            if v0 == v:
                return float(times[i])
            frac = (v0 - level) / (v0 - v)
            return float(times[i - 1] + frac * (times[i] - times[i - 1]))
    return None


def array_digest(*arrays):
    """Short hex digest identifying a set of float arrays bit-exactly."""
    h = hashlib.sha256()
    for a in arrays:
        a = np.ascontiguousarray(a, dtype=float)
        h.update(str(a.shape).encode())
        h.update(a.tobytes())
    return h.hexdigest()[:12]


def text_digest(text):
    """Hex digest of a text blob (config fingerprints)."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def fmt(x):
    """Shortest round-trip decimal text for a float; used for CSV output."""
    return repr(float(x))
