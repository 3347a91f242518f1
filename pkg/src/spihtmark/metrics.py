"""Watermark correlation and image fidelity metrics."""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DimensionError


@dataclass
class MetricReport:
    correlation: float | None = None
    mse: float | None = None
    psnr_db: float | None = None
    degenerate_correlation: bool = False
    context: dict = field(default_factory=dict)

    def to_dict(self):
        d = asdict(self)
        # JSON has no infinity
        if d["psnr_db"] is not None and math.isinf(d["psnr_db"]):
            d["psnr_db"] = "inf"
        return d


def _same_shape(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise DimensionError(f"shape mismatch: {x.shape} vs {y.shape}")
    return x, y


def correlation_with_flag(a, b):
    """Pearson correlation and whether either input had zero variance.

    A zero-variance input yields ``(0.0, True)``.
    """
    x, y = _same_shape(a, b)
    x = x.ravel() - x.mean()
    y = y.ravel() - y.mean()
    denom = math.sqrt(float(x @ x)) * math.sqrt(float(y @ y))
    if denom == 0.0:
        return 0.0, True
    return float(x @ y) / denom, False


def correlation(a, b):
    value, degenerate = correlation_with_flag(a, b)
    if degenerate:
        warnings.warn("correlation undefined for a constant pattern; returning 0.0",
                      RuntimeWarning, stacklevel=2)
    return value


def mse(x, y):
    x, y = _same_shape(x, y)
    return float(np.mean((x - y) ** 2))


def psnr_from_mse(err, peak=255.0):
    if err == 0:
        return math.inf
    return 20.0 * math.log10(peak / math.sqrt(err))


def psnr(x, y):
    return psnr_from_mse(mse(x, y))


def report(original_image=None, test_image=None, original_bits=None, test_bits=None, **context):
    r = MetricReport(context=context)
    if original_image is not None and test_image is not None:
        r.mse = mse(original_image, test_image)
        r.psnr_db = psnr_from_mse(r.mse)
    if original_bits is not None and test_bits is not None:
        r.correlation, r.degenerate_correlation = correlation_with_flag(original_bits, test_bits)
    return r
