"""Separable 2D discrete wavelet transform on a fixed-depth pyramid.

Images are numpy arrays indexed ``[row, col]``. Each level filters along
rows (axis 1) first and then along columns (axis 0). A band name gives the
horizontal filter first: ``LH`` is lowpass along rows and highpass along
columns, so it responds to horizontal edges; ``HL`` responds to vertical
edges.

Signals are extended periodically, which keeps every orthonormal filter bank
perfectly reconstructing at even lengths.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, PyramidError

ORIENTATIONS = ("LL", "LH", "HL", "HH")
DETAIL_ORIENTATIONS = ("LH", "HL", "HH")


@dataclass(frozen=True)
class FilterBank:
    name: str
    analysis_lowpass: tuple
    analysis_highpass: tuple
    synthesis_lowpass: tuple
    synthesis_highpass: tuple
    orthonormal: bool = True

    def __post_init__(self):
        for taps in (self.analysis_lowpass, self.analysis_highpass,
                     self.synthesis_lowpass, self.synthesis_highpass):
            if len(taps) < 2:
                raise ValueError(f"filter bank {self.name!r}: filters need at least 2 taps")


def _orthonormal(name, lowpass):
    lo = tuple(float(v) for v in lowpass)
    # quadrature mirror: g[n] = (-1)^n h[L-1-n]
    hi = tuple(((-1) ** n) * lo[len(lo) - 1 - n] for n in range(len(lo)))
    return FilterBank(name, lo, hi, lo, hi, orthonormal=True)


_S2 = np.sqrt(2.0)
_S3 = np.sqrt(3.0)

HAAR = FilterBank(
    "haar",
    (1 / _S2, 1 / _S2),
    (1 / _S2, -1 / _S2),
    (1 / _S2, 1 / _S2),
    (1 / _S2, -1 / _S2),
)

DB2 = _orthonormal(
    "db2",
    ((1 + _S3) / (4 * _S2), (3 + _S3) / (4 * _S2),
     (3 - _S3) / (4 * _S2), (1 - _S3) / (4 * _S2)),
)

FILTER_BANKS = {fb.name: fb for fb in (HAAR, DB2)}


def get_filter_bank(name):
    try:
        return FILTER_BANKS[name]
    except KeyError:
        raise ValueError(f"unknown filter bank {name!r}; known: {sorted(FILTER_BANKS)}") from None


def band_name(level, orientation):
    return f"{orientation}{level}"


def parse_band(name):
    """Split ``"LH2"`` into ``("LH", 2)``."""
    orientation, level = name[:2], name[2:]
    if orientation not in ORIENTATIONS or not level.isdigit():
        raise ValueError(f"bad band name {name!r}")
    return orientation, int(level)


@dataclass
class WaveletPyramid:
    """Subbands of a multi-level decomposition, keyed by names like ``"LH2"``.

    Only the coarsest level carries an ``LL`` band.
    """

    subbands: dict
    source_dims: tuple
    levels: int
    filter_bank_name: str = "haar"
    _order: tuple = field(init=False, repr=False)

    def __post_init__(self):
        self._order = pyramid_band_names(self.levels)

    def __getitem__(self, name):
        return self.subbands[name]

    def band(self, level, orientation):
        return self.subbands[band_name(level, orientation)]

    def names(self):
        return self._order

    def copy(self):
        return WaveletPyramid(
            {k: v.copy() for k, v in self.subbands.items()},
            self.source_dims, self.levels, self.filter_bank_name,
        )

    def coefficient_count(self):
        return sum(b.size for b in self.subbands.values())

    def validate(self):
        expected = pyramid_band_names(self.levels)
        if set(self.subbands) != set(expected):
            missing = sorted(set(expected) - set(self.subbands))
            extra = sorted(set(self.subbands) - set(expected))
            raise PyramidError(f"pyramid bands mismatch: missing={missing} extra={extra}")
        rows, cols = self.source_dims
        for name in expected:
            _, level = parse_band(name)
            shape = (rows >> level, cols >> level)
            if self.subbands[name].shape != shape:
                raise PyramidError(
                    f"band {name} has shape {self.subbands[name].shape}, expected {shape}"
                )


def pyramid_band_names(levels):
    names = [band_name(levels, "LL")]
    for level in range(levels, 0, -1):
        names.extend(band_name(level, o) for o in DETAIL_ORIENTATIONS)
    return tuple(names)


def _analyze(x, lowpass, highpass, axis):
    x = np.moveaxis(x, axis, -1)
    n = x.shape[-1]
    half = n // 2
    even = np.arange(half) * 2
    lo = np.zeros(x.shape[:-1] + (half,))
    hi = np.zeros_like(lo)
    for k, (h, g) in enumerate(zip(lowpass, highpass)):
        sample = x[..., (even + k) % n]
        lo += h * sample
        hi += g * sample
    return np.moveaxis(lo, -1, axis), np.moveaxis(hi, -1, axis)


def _synthesize(lo, hi, lowpass, highpass, axis):
    lo = np.moveaxis(lo, axis, -1)
    hi = np.moveaxis(hi, axis, -1)
    half = lo.shape[-1]
    n = 2 * half
    even = np.arange(half) * 2
    out = np.zeros(lo.shape[:-1] + (n,))
    for k, (h, g) in enumerate(zip(lowpass, highpass)):
        # indices (even + k) % n are distinct for fixed k, so += is safe
        out[..., (even + k) % n] += h * lo + g * hi
    return np.moveaxis(out, -1, axis)


def dwt2_single(x, fb=HAAR):
    """One analysis level; returns ``(LL, LH, HL, HH)``."""
    x = np.asarray(x, dtype=np.float64)
    low_h, high_h = _analyze(x, fb.analysis_lowpass, fb.analysis_highpass, axis=1)
    ll, lh = _analyze(low_h, fb.analysis_lowpass, fb.analysis_highpass, axis=0)
    hl, hh = _analyze(high_h, fb.analysis_lowpass, fb.analysis_highpass, axis=0)
    return ll, lh, hl, hh


def idwt2_single(ll, lh, hl, hh, fb=HAAR):
    low_h = _synthesize(ll, lh, fb.synthesis_lowpass, fb.synthesis_highpass, axis=0)
    high_h = _synthesize(hl, hh, fb.synthesis_lowpass, fb.synthesis_highpass, axis=0)
    return _synthesize(low_h, high_h, fb.synthesis_lowpass, fb.synthesis_highpass, axis=1)


def dwt_forward(image, levels=3, fb=HAAR):
    """Decompose ``image`` into a ``levels``-deep pyramid of real coefficients."""
    if isinstance(fb, str):
        fb = get_filter_bank(fb)
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels}")
    x = np.asarray(image, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionError(f"expected a 2D image, got shape {x.shape}")
    step = 1 << levels
    if x.shape[0] % step or x.shape[1] % step:
        raise DimensionError(
            f"image dims {x.shape} must be divisible by 2**{levels} = {step}"
        )
    subbands = {}
    approx = x
    for level in range(1, levels + 1):
        approx, lh, hl, hh = dwt2_single(approx, fb)
        subbands[band_name(level, "LH")] = lh
        subbands[band_name(level, "HL")] = hl
        subbands[band_name(level, "HH")] = hh
    subbands[band_name(levels, "LL")] = approx
    return WaveletPyramid(subbands, tuple(x.shape), levels, fb.name)


def dwt_inverse(pyramid, fb=None):
    """Reconstruct the real-valued raster a pyramid was computed from."""
    if fb is None:
        fb = pyramid.filter_bank_name
    if isinstance(fb, str):
        fb = get_filter_bank(fb)
    pyramid.validate()
    approx = pyramid.band(pyramid.levels, "LL")
    for level in range(pyramid.levels, 0, -1):
        approx = idwt2_single(
            approx,
            pyramid.band(level, "LH"),
            pyramid.band(level, "HL"),
            pyramid.band(level, "HH"),
            fb,
        )
    return approx


def quantize_to_image(raster):
    """Round half up and clamp to ``[0, 255]``; returns ``uint8``."""
    r = np.floor(np.asarray(raster, dtype=np.float64) + 0.5)
    return np.clip(r, 0, 255).astype(np.uint8)
