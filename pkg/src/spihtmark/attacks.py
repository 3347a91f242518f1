"""Image-processing attacks on 8-bit grayscale images.

Every attack returns a new ``uint8`` image with the input's shape. Stochastic
attacks draw from ``numpy.random.default_rng(seed)`` so a fixed seed
reproduces the output bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import jpeg
from .imageio import as_gray


def _round(x):
    # round half up, then clamp
    return np.clip(np.floor(x + 0.5), 0, 255).astype(np.uint8)


def salt_pepper(img, density, seed=0):
    """Set ``floor(density * pixels)`` distinct random pixels to 0 or 255."""
    if not 0.0 <= density <= 1.0:
        raise ValueError(f"density must be in [0, 1], got {density}")
    img = as_gray(img)
    out = img.copy()
    count = int(math.floor(density * img.size))
    if count == 0:
        return out
    rng = np.random.default_rng(seed)
    where = rng.choice(img.size, size=count, replace=False)
    out.ravel()[where] = rng.integers(0, 2, size=count).astype(np.uint8) * 255
    return out


def gaussian_noise(img, variance, seed=0):
    """Add zero-mean Gaussian noise; ``variance`` is on the [0, 1] intensity scale."""
    if variance < 0:
        raise ValueError(f"variance must be >= 0, got {variance}")
    img = as_gray(img)
    if variance == 0:
        return img.copy()
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, math.sqrt(variance) * 255.0, size=img.shape)
    return _round(img + noise)


def _check_kernel(k):
    if k < 3 or k % 2 == 0:
        raise ValueError(f"kernel size must be odd and >= 3, got {k}")


def mean_filter(img, k=3):
    _check_kernel(k)
    img = as_gray(img).astype(np.float64)
    return _round(ndimage.uniform_filter(img, size=k, mode="nearest"))


def median_filter(img, k=3):
    _check_kernel(k)
    return ndimage.median_filter(as_gray(img), size=k, mode="nearest")


def default_gaussian_sigma(k):
    return 0.5 if k == 3 else (k - 1) / 4.0


def gaussian_kernel(k, sigma):
    ax = np.arange(k) - (k - 1) / 2.0
    g = np.exp(-(ax ** 2) / (2.0 * sigma ** 2))
    kern = np.outer(g, g)
    return kern / kern.sum()


def gaussian_filter(img, k=3, sigma=None):
    """Convolve with a normalized ``k x k`` Gaussian (sigma 0.5 for 3x3, (k-1)/4 otherwise)."""
    _check_kernel(k)
    if sigma is None:
        sigma = default_gaussian_sigma(k)
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    img = as_gray(img).astype(np.float64)
    return _round(ndimage.correlate(img, gaussian_kernel(k, sigma), mode="nearest"))


ANCHORS = ("top-left", "top-right", "bottom-left", "bottom-right", "center")


def crop(img, size, anchor="top-left"):
    """Zero a ``size x size`` square at ``anchor``; dimensions are kept."""
    img = as_gray(img)
    rows, cols = img.shape
    if size < 0 or size > min(rows, cols):
        raise ValueError(f"crop size {size} does not fit a {rows}x{cols} image")
    if anchor not in ANCHORS:
        raise ValueError(f"anchor must be one of {ANCHORS}")
    out = img.copy()
    if size == 0:
        return out
    r0 = {"top": 0, "bottom": rows - size}.get(anchor.split("-")[0], (rows - size) // 2)
    c0 = {"left": 0, "right": cols - size}.get(anchor.split("-")[-1], (cols - size) // 2)
    out[r0:r0 + size, c0:c0 + size] = 0
    return out


def jpeg_roundtrip(img, quality):
    return jpeg.roundtrip(as_gray(img), int(quality))


def hist_eq(img):
    """Global 256-bin histogram equalization."""
    img = as_gray(img)
    hist = np.bincount(img.ravel(), minlength=256)
    cdf = np.cumsum(hist)
    cdf_min = cdf[np.flatnonzero(hist)[0]]
    if cdf[-1] == cdf_min:
        return img.copy()
    lut = _round((cdf - cdf_min) * 255.0 / (cdf[-1] - cdf_min))
    return lut[img]


def contrast_adjust(img, percent):
    """Stretch ``[lo, 255 - lo]`` to ``[0, 255]`` with ``lo = percent/2`` % of 255, saturating outside."""
    if not 0 <= percent < 100:
        raise ValueError(f"percent must be in [0, 100), got {percent}")
    img = as_gray(img)
    if percent == 0:
        return img.copy()
    lo = percent / 2.0 * 255.0 / 100.0
    hi = 255.0 - lo
    return _round((img.astype(np.float64) - lo) * 255.0 / (hi - lo))


ATTACKS = {
    "salt_pepper": (salt_pepper, ("density",), True),
    "gaussian_noise": (gaussian_noise, ("variance",), True),
    "mean_filter": (mean_filter, ("k",), False),
    "median_filter": (median_filter, ("k",), False),
    "gaussian_filter": (gaussian_filter, ("k", "sigma"), False),
    "crop": (crop, ("size", "anchor"), False),
    "jpeg": (jpeg_roundtrip, ("quality",), False),
    "hist_eq": (hist_eq, (), False),
    "contrast": (contrast_adjust, ("percent",), False),
}


@dataclass(frozen=True)
class AttackSpec:
    kind: str
    params: dict = field(default_factory=dict)
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in ATTACKS:
            raise ValueError(f"unknown attack {self.kind!r}; known: {sorted(ATTACKS)}")
        allowed = ATTACKS[self.kind][1]
        extra = set(self.params) - set(allowed)
        if extra:
            raise ValueError(f"{self.kind}: unexpected parameters {sorted(extra)}")

    @property
    def stochastic(self):
        return ATTACKS[self.kind][2]

    def with_seed(self, seed):
        return AttackSpec(self.kind, dict(self.params), seed if self.stochastic else None)

    def label(self):
        if not self.params:
            return self.kind
        inner = ",".join(f"{k}={self.params[k]}" for k in sorted(self.params))
        return f"{self.kind}({inner})"

    def to_dict(self):
        d = {"kind": self.kind, "params": dict(self.params)}
        if self.seed is not None:
            d["seed"] = self.seed
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(d["kind"], dict(d.get("params", {})), d.get("seed"))


def apply_attack(img, spec):
    func, _, stochastic = ATTACKS[spec.kind]
    kwargs = dict(spec.params)
    if stochastic:
        kwargs["seed"] = 0 if spec.seed is None else spec.seed
    return func(img, **kwargs)
