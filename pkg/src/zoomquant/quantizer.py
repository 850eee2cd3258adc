"""Uniform hypercube quantizers with mixed-radix box numbering.

A quantizer splits ``{v : |v - center|_inf <= half_width}`` into ``levels``
bins per axis. Box ``(b_0, ..., b_{d-1})`` is numbered
``sum_j b_j * levels**j`` (axis 0 least significant) and decodes to its
center. A point on a shared face goes to the lower box, except on the top
face of the hypercube.
"""

from dataclasses import dataclass

import numpy as np

from .errors import QuantizerOverflow

_UINT64_MAX = 2**64 - 1


@dataclass(frozen=True)
class HypercubeQuantizer:
    center: np.ndarray
    half_width: float
    levels: int
    slack: float = 0.0
    label: str = "output"

    def __post_init__(self):
        center = np.atleast_1d(np.asarray(self.center, dtype=float)).ravel()
        if not np.all(np.isfinite(center)):
            raise ValueError("quantizer center must be finite")
        if int(self.levels) != self.levels or self.levels < 2:
            raise ValueError(f"levels must be an integer >= 2, got {self.levels}")
        if not (self.half_width >= 0 and np.isfinite(self.half_width)):
            raise ValueError(f"half_width must be finite and >= 0, got {self.half_width}")
        if int(self.levels) ** center.size > _UINT64_MAX:
            raise ValueError("levels**dim does not fit an unsigned 64-bit index")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "levels", int(self.levels))
        object.__setattr__(self, "half_width", float(self.half_width))

    @property
    def dim(self):
        return self.center.size

    @property
    def box_count(self):
        return self.levels**self.dim

    def check(self, v):
        """Raise :class:`QuantizerOverflow` if ``v`` is outside the hypercube."""
        v = np.asarray(v, dtype=float).ravel()
        dev = np.abs(v - self.center)
        excess = dev - self.half_width
        limit = saturation_tolerance(v, self.center, self.half_width, self.slack)
        worst = int(np.argmax(excess))
        if not np.all(np.isfinite(dev)) or excess[worst] > limit:
            raise QuantizerOverflow(worst, float(excess[worst]), self.label)

    def bins(self, v):
        v = np.asarray(v, dtype=float).ravel()
        if v.size != self.dim:
            raise ValueError(f"expected a {self.dim}-vector, got size {v.size}")
        self.check(v)
        if self.half_width == 0.0:
            return [0] * self.dim
        N, E = self.levels, self.half_width
        raw = np.floor((v - self.center + E) * N / (2.0 * E))
        return [int(b) for b in np.clip(raw, 0, N - 1)]

    def encode(self, v):
        index = 0
        for j, b in enumerate(self.bins(v)):
            index += b * self.levels**j
        return index

    def decode(self, index):
        index = int(index)
        if not 0 <= index < self.box_count:
            raise ValueError(f"box index {index} out of range [0, {self.box_count})")
        if self.half_width == 0.0:
            return self.center.copy()
        N, E = self.levels, self.half_width
        bins = []
        for _ in range(self.dim):
            index, b = divmod(index, N)
            bins.append(b)
        # symmetric form keeps the middle box of an odd grid exactly at the center
        offset = E * (2.0 * np.array(bins, dtype=float) + 1.0 - N) / N
        return self.center + offset

    def quantize(self, v):
        """``(index, decoded value)`` for ``v``."""
        i = self.encode(v)
        return i, self.decode(i)

    def error_bound(self):
        return quantization_error_bound(self)

    def center_offset(self):
        return center_offset_bound(self)


def saturation_tolerance(v, center, half_width, slack):
    """Allowed excess over ``half_width`` in the saturation test.

    ``slack`` is relative to the largest magnitude involved, because the
    rounding error of ``v - center`` scales with ``|v|`` and ``|center|``
    even when the half-width itself is tiny.
    """
    scale = max(1.0, half_width, float(np.max(np.abs(v), initial=0.0)))
    scale = max(scale, float(np.max(np.abs(center), initial=0.0)))
    return slack * scale


def encode(q, v):
    return q.encode(v)


def decode(q, index):
    return q.decode(index)


def quantization_error_bound(q):
    """Worst-case ``|v - decode(encode(v))|`` inside the hypercube."""
    return q.half_width / q.levels


def center_offset_bound(q):
    """Largest distance from a box center to the hypercube center."""
    return (q.levels - 1) * q.half_width / q.levels


def origin_quantizer(dim, half_width, levels, slack=0.0, label="estimate"):
    return HypercubeQuantizer(np.zeros(dim), half_width, levels, slack, label)


def pack_indices(indices):
    """Serialize box indices as little-endian unsigned 64-bit words."""
    return np.asarray(indices, dtype="<u8").tobytes()


def unpack_indices(data):
    return [int(v) for v in np.frombuffer(data, dtype="<u8")]
