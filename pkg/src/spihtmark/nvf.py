"""Noise visibility and per-coefficient distortion budget for wavelet subbands."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Watson's perceptually lossless quantization factors, rows = orientation,
# columns = level 1..4. Row order: approximation, HL, HH, LH.
WATSON_FACTORS = (
    (14.049, 11.106, 11.363, 14.5),
    (23.028, 14.608, 12.707, 14.156),
    (58.756, 28.408, 19.54, 17.864),
    (23.028, 14.685, 12.707, 14.156),
)

ORIENTATION_ROW = {"LL": 0, "HL": 1, "HH": 2, "LH": 3}


@dataclass(frozen=True)
class QuantMatrix:
    factors: tuple = WATSON_FACTORS

    def __post_init__(self):
        arr = np.asarray(self.factors, dtype=float)
        if arr.shape != (4, 4):
            raise ValueError(f"quantization matrix must be 4x4, got {arr.shape}")
        if not np.all(arr > 0):
            raise ValueError("quantization factors must be positive")

    def factor(self, orientation, level):
        if orientation not in ORIENTATION_ROW:
            raise ValueError(f"no quantization row for orientation {orientation!r}")
        if not 1 <= level <= 4:
            raise ValueError(f"no quantization column for level {level}")
        return float(self.factors[ORIENTATION_ROW[orientation]][level - 1])

    @classmethod
    def from_rows(cls, rows):
        return cls(tuple(tuple(float(v) for v in row) for row in rows))


@dataclass(frozen=True)
class NvfConfig:
    window_halfwidth: int = 1
    flat_strength: float = 3.0

    def __post_init__(self):
        if self.window_halfwidth < 1:
            raise ValueError("window_halfwidth must be >= 1")
        if not self.flat_strength > 0:
            raise ValueError("flat_strength must be > 0")


def local_moments(band, halfwidth=1):
    """Windowed mean and population variance over a ``(2L+1)^2`` window.

    Out-of-range samples are replaced by the nearest edge sample.
    """
    x = np.asarray(band, dtype=np.float64)
    size = 2 * halfwidth + 1
    padded = np.pad(x, halfwidth, mode="edge")
    rows, cols = x.shape
    # fixed row-major accumulation order keeps rounding reproducible
    shifts = [padded[m:m + rows, n:n + cols] for m in range(size) for n in range(size)]
    total = np.zeros_like(x)
    for s in shifts:
        total += s
    mean = total / len(shifts)
    sq = np.zeros_like(x)
    for s in shifts:
        sq += (s - mean) ** 2
    return mean, sq / len(shifts)


def compute_nvf(band, cfg=NvfConfig()):
    _, var = local_moments(band, cfg.window_halfwidth)
    return 1.0 / (1.0 + var)


def max_allowable_distortion(nvf, orientation, level, q=QuantMatrix(), cfg=NvfConfig()):
    """Blend the band's quantization factor and the flat-region strength by NVF."""
    factor = q.factor(orientation, level)
    nvf = np.asarray(nvf, dtype=np.float64)
    return (1.0 - nvf) * factor + nvf * cfg.flat_strength


def distortion_map(band, orientation, level, q=QuantMatrix(), cfg=NvfConfig()):
    return max_allowable_distortion(compute_nvf(band, cfg), orientation, level, q, cfg)
