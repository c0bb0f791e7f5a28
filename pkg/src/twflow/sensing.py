"""Sensing models (Gaussian rows, coded diffraction patterns) and measurement ops."""

from dataclasses import dataclass

import numpy as np

from .core import COMPLEX, REAL, as_signal, field_of


class ImageFormatError(ValueError):
    """Raised when an image file is not the 8-bit binary PGM we expect."""


@dataclass(frozen=True, eq=False)
class GaussianSensing:
    """m i.i.d. Gaussian sensing vectors stored as the rows of a dense matrix.

    Real rows are N(0, I); complex rows have independent N(0, 1/2) real and
    imaginary parts, so E a a^* = I either way.
    """

    vectors: np.ndarray

    def __post_init__(self):
        if self.vectors.ndim != 2 or min(self.vectors.shape) == 0:
            raise ValueError("vectors must be a non-empty (m, n) matrix")

    @classmethod
    def draw(cls, rng, m, n, field=REAL):
        if field == REAL:
            rows = rng.gen.standard_normal((m, n))
        elif field == COMPLEX:
            rows = (rng.gen.standard_normal((m, n))
                    + 1j * rng.gen.standard_normal((m, n))) / np.sqrt(2.0)
        else:
            raise ValueError(f"unknown field {field!r}")
        return cls(rows)

    @property
    def m(self):
        return self.vectors.shape[0]

    @property
    def n(self):
        return self.vectors.shape[1]

    @property
    def field(self):
        return field_of(self.vectors)

    def row(self, i):
        return self.vectors[i]

    def inner_products(self, z):
        """All m products <a_i, z> (conjugate-linear in a_i)."""
        if self.field == COMPLEX:
            return self.vectors.conj() @ z
        return self.vectors @ z

    def adjoint(self, coef):
        """sum_i coef_i * a_i, the adjoint of inner_products."""
        return self.vectors.T @ coef


@dataclass(frozen=True, eq=False)
class CdpSensing:
    """Coded diffraction patterns: masked signals pushed through the DFT.

    Block l of the measurement map is z -> fft(masks[l] * z) with numpy's
    unnormalized forward DFT, so there are m = L * n sensing vectors total
    and each has squared norm n. Mask entries are drawn uniformly from
    {1, -1, j, -j}.
    """

    masks: np.ndarray

    _MASK_VALUES = (1.0 + 0j, -1.0 + 0j, 1j, -1j)

    def __post_init__(self):
        if self.masks.ndim != 2 or min(self.masks.shape) == 0:
            raise ValueError("masks must be a non-empty (L, n) matrix")

    @classmethod
    def draw(cls, rng, n, num_masks):
        table = np.array(cls._MASK_VALUES, dtype=np.complex128)
        idx = rng.gen.integers(0, 4, size=(num_masks, n))
        return cls(table[idx])

    @property
    def num_masks(self):
        return self.masks.shape[0]

    @property
    def n(self):
        return self.masks.shape[1]

    @property
    def m(self):
        return self.masks.shape[0] * self.masks.shape[1]

    @property
    def field(self):
        return COMPLEX

    def block_slice(self, l):
        n = self.n
        return slice(l * n, (l + 1) * n)

    def mask_forward(self, l, z):
        """The n inner products of block l: fft(masks[l] * z)."""
        return np.fft.fft(self.masks[l] * z)

    def mask_adjoint(self, l, coef):
        """Adjoint of mask_forward: conj(mask) * (n * ifft(coef))."""
        return self.masks[l].conj() * (self.n * np.fft.ifft(coef))

    def inner_products(self, z):
        return np.fft.fft(self.masks * z[np.newaxis, :], axis=1).ravel()

    def adjoint(self, coef):
        blocks = coef.reshape(self.num_masks, self.n)
        back = self.n * np.fft.ifft(blocks, axis=1)
        return np.sum(self.masks.conj() * back, axis=0)


@dataclass(frozen=True, eq=False)
class MeasurementSet:
    """Intensity measurements plus the bookkeeping the solver needs."""

    y: np.ndarray
    mean_y: float
    kind: str = "noiseless"

    @property
    def m(self):
        return self.y.shape[0]


def _make_measurements(y, kind):
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1 or y.size == 0:
        raise ValueError("y must be a non-empty 1-D array")
    if not np.all(np.isfinite(y)):
        raise ValueError("measurements must be finite")
    return MeasurementSet(y=y, mean_y=float(np.mean(y)), kind=kind)


def measure_noiseless(model, x):
    """y_i = |<a_i, x>|^2 for every sensing vector of the model."""
    x = as_signal(x, model.field)
    if x.shape[0] != model.n:
        raise ValueError(f"signal length {x.shape[0]} != model n {model.n}")
    c = model.inner_products(x)
    if np.iscomplexobj(c):
        y = np.abs(c) ** 2
    else:
        y = c * c
    return _make_measurements(y, "noiseless")


def add_bounded_noise(mset, eta):
    """Additive noise model: returns measurements y + eta (eta finite, real)."""
    eta = np.asarray(eta, dtype=np.float64)
    if eta.shape != mset.y.shape:
        raise ValueError("noise shape must match measurements")
    if not np.all(np.isfinite(eta)):
        raise ValueError("noise must be finite")
    return _make_measurements(mset.y + eta, "additive")


def poissonize(mset, rng):
    """Poisson noise model: each clean intensity becomes a Poisson draw with that rate."""
    if np.any(mset.y < 0):
        raise ValueError("Poisson rates must be nonnegative")
    y = rng.gen.poisson(mset.y).astype(np.float64)
    return _make_measurements(y, "poisson")


# ---------------------------------------------------------------------------
# 8-bit binary PGM (P5) image I/O, values mapped to [0, 1].

def write_pgm(path, img):
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2 or img.size == 0:
        raise ValueError("image must be a non-empty 2-D array")
    if not np.all(np.isfinite(img)):
        raise ValueError("image must be finite")
    data = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
    rows, cols = data.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{cols} {rows}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def _pgm_tokens(raw):
    """Yield header tokens, skipping '#' comments, and finally the pixel offset."""
    pos = 0
    tokens = []
    while len(tokens) < 4:
        if pos >= len(raw):
            raise ImageFormatError("truncated PGM header")
        ch = raw[pos:pos + 1]
        if ch.isspace():
            pos += 1
        elif ch == b"#":
            nl = raw.find(b"\n", pos)
            if nl < 0:
                raise ImageFormatError("unterminated comment in PGM header")
            pos = nl + 1
        else:
            end = pos
            while end < len(raw) and not raw[end:end + 1].isspace():
                end += 1
            tokens.append(raw[pos:end])
            pos = end
    return tokens, pos + 1  # single whitespace byte after maxval


def read_pgm(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if not raw.startswith(b"P5"):
        raise ImageFormatError("not a binary PGM (missing P5 magic)")
    tokens, offset = _pgm_tokens(raw)
    try:
        cols, rows, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    except ValueError:
        raise ImageFormatError("non-numeric PGM header fields")
    if cols <= 0 or rows <= 0:
        raise ImageFormatError("PGM dimensions must be positive")
    if not 0 < maxval <= 255:
        raise ImageFormatError(f"only 8-bit PGM supported, got maxval={maxval}")
    pixels = raw[offset:offset + rows * cols]
    if len(pixels) < rows * cols:
        raise ImageFormatError("PGM pixel data shorter than header promises")
    data = np.frombuffer(pixels, dtype=np.uint8, count=rows * cols)
    return data.reshape(rows, cols).astype(np.float64) / float(maxval)
