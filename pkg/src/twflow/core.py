"""Field-generic signal helpers, phase-invariant distance, keyed RNG streams."""

import numpy as np

REAL = "real"
COMPLEX = "complex"

_FIELD_DTYPES = {REAL: np.float64, COMPLEX: np.complex128}

_U64 = (1 << 64) - 1


def field_dtype(field):
    try:
        return _FIELD_DTYPES[field]
    except KeyError:
        raise ValueError(f"unknown field {field!r}, expected 'real' or 'complex'")


def field_of(v):
    """Return which field a vector lives in, judged by its dtype."""
    if np.iscomplexobj(v):
        return COMPLEX
    return REAL


def as_signal(v, field=None):
    """Coerce to a 1-D float64/complex128 vector.

    If field is given the dtype is forced (real -> complex is a widening,
    complex -> real raises). Zero-length vectors are rejected.
    """
    arr = np.asarray(v)
    if arr.ndim != 1:
        raise ValueError(f"signal must be 1-D, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("signal must be non-empty")
    if field is None:
        field = field_of(arr)
    if field == REAL and np.iscomplexobj(arr):
        raise ValueError("complex data cannot be coerced to the real field")
    return arr.astype(field_dtype(field), copy=False)


def check_pair(z, x):
    """Validate that two signals are comparable; returns (z, x, field)."""
    z = as_signal(z)
    x = as_signal(x)
    if z.shape != x.shape:
        raise ValueError(f"length mismatch: {z.shape[0]} vs {x.shape[0]}")
    field = COMPLEX if (field_of(z) == COMPLEX or field_of(x) == COMPLEX) else REAL
    return as_signal(z, field), as_signal(x, field), field


def dist(z, x):
    """Distance between z and x modulo a global phase.

    For real vectors the phase ambiguity is a sign, so this is
    min(||z - x||, ||z + x||). For complex vectors the minimizing phase has
    the closed form angle(x^* z); when <x, z> = 0 every phase ties and the
    distance degenerates to sqrt(||z||^2 + ||x||^2).
    """
    z, x, field = check_pair(z, x)
    if field == REAL:
        return float(min(np.linalg.norm(z - x), np.linalg.norm(z + x)))
    ip = np.vdot(x, z)
    if ip == 0:
        return float(np.sqrt(np.linalg.norm(z) ** 2 + np.linalg.norm(x) ** 2))
    return float(np.linalg.norm(z * np.exp(-1j * np.angle(ip)) - x))


def align_phase(z, x):
    """Rotate z by the global phase that brings it closest to x.

    dist(align_phase(z, x), x) == ||align_phase(z, x) - x||. If the optimal
    phase is ambiguous (<x, z> = 0) z is returned unchanged.
    """
    z, x, field = check_pair(z, x)
    if field == REAL:
        return z if float(np.dot(x, z)) >= 0.0 else -z
    ip = np.vdot(x, z)
    if ip == 0:
        return z
    return z * np.exp(-1j * np.angle(ip))


def _mix64(a, b):
    """Mix two 64-bit words into one (splitmix64 finalizer over a + golden * b)."""
    x = (int(a) + 0x9E3779B97F4A7C15 * (int(b) + 1)) & _U64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _U64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _U64
    return (x ^ (x >> 31)) & _U64


class RngStream:
    """Deterministic random stream keyed by (seed, stream_id).

    Thin wrapper over numpy's Philox counter-based generator: the 128-bit
    Philox key is seed | stream_id << 64, so equal keys replay the same
    sequence and distinct keys give statistically independent streams.
    substream(k) derives a child stream from (stream_id, k) without
    consuming any draws from the parent, which is what lets every trial in
    a sweep own its randomness regardless of execution order.
    """

    def __init__(self, seed, stream_id=0):
        self.seed = int(seed) & _U64
        self.stream_id = int(stream_id) & _U64
        key = self.seed | (self.stream_id << 64)
        self.gen = np.random.Generator(np.random.Philox(key=key))

    def substream(self, k):
        return RngStream(self.seed, _mix64(self.stream_id, k))

    def gaussian_vector(self, n, field=REAL):
        """Standard Gaussian vector; complex entries are N(0, 1/2) per part."""
        if n <= 0:
            raise ValueError("n must be positive")
        if field == REAL:
            return self.gen.standard_normal(n)
        if field == COMPLEX:
            re = self.gen.standard_normal(n)
            im = self.gen.standard_normal(n)
            return (re + 1j * im) / np.sqrt(2.0)
        raise ValueError(f"unknown field {field!r}")

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


def gaussian_vector(rng, n, field=REAL):
    """Module-level alias for RngStream.gaussian_vector."""
    return rng.gaussian_vector(n, field)
