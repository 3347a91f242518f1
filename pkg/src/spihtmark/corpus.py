"""Synthetic host images and the built-in watermark pattern.

Real test photographs are not shipped. The generators below give
deterministic stand-ins: smooth ramps, checkerboards, seeded noise, and
1/f ("fractal") textures whose spectra resemble natural images. Values are
kept away from 0 and 255 so embedding does not clip.
"""

from __future__ import annotations

import numpy as np

from .errors import FormatError


def ramp(size=512, lo=32, hi=223):
    row = np.linspace(lo, hi, size)
    return np.rint((row[None, :] + row[:, None]) / 2).astype(np.uint8)


def checkerboard(size=512, cell=32, lo=64, hi=192):
    idx = np.arange(size) // cell
    return np.where((idx[:, None] + idx[None, :]) % 2, hi, lo).astype(np.uint8)


def noise(size=512, seed=0, lo=48, hi=207):
    rng = np.random.default_rng(seed)
    return rng.integers(lo, hi + 1, size=(size, size), dtype=np.uint8)


def fractal(size=512, seed=0, beta=2.0, lo=16, hi=239):
    """Gaussian noise shaped to a ``1/f**beta`` power spectrum, rescaled to ``[lo, hi]``."""
    rng = np.random.default_rng(seed)
    f = np.fft.fftfreq(size)
    radius = np.hypot(f[:, None], f[None, :])
    radius[0, 0] = 1.0
    spectrum = np.fft.fft2(rng.normal(size=(size, size))) / radius ** (beta / 2.0)
    spectrum[0, 0] = 0.0
    field = np.real(np.fft.ifft2(spectrum))
    field = (field - field.min()) / (field.max() - field.min())
    return np.rint(lo + field * (hi - lo)).astype(np.uint8)


SYNTHETIC = {
    "ramp": ramp,
    "checkerboard": checkerboard,
    "noise": noise,
    "fractal": fractal,
}


# 6x10 glyphs, '#' = 1
_GLYPHS = {
    "C": [" #### ", "##  ##", "##    ", "##    ", "##    ",
          "##    ", "##    ", "##    ", "##  ##", " #### "],
    "U": ["##  ##", "##  ##", "##  ##", "##  ##", "##  ##",
          "##  ##", "##  ##", "##  ##", "##  ##", " #### "],
    "E": ["######", "##    ", "##    ", "##    ", "##### ",
          "##### ", "##    ", "##    ", "##    ", "######"],
    "T": ["######", "######", "  ##  ", "  ##  ", "  ##  ",
          "  ##  ", "  ##  ", "  ##  ", "  ##  ", "  ##  "],
}


def text_watermark(text="CUET", shape=(32, 32)):
    """Binary pattern with ``text`` drawn in a fixed 6x10 font, centered."""
    rows, cols = shape
    width = 8 * len(text) - 2
    if width > cols or rows < 10:
        raise ValueError(f"{text!r} does not fit a {rows}x{cols} watermark")
    out = np.zeros(shape, dtype=np.uint8)
    r0 = (rows - 10) // 2
    c0 = (cols - width) // 2
    for n, ch in enumerate(text.upper()):
        glyph = _GLYPHS.get(ch)
        if glyph is None:
            raise ValueError(f"no glyph for {ch!r}")
        for r, line in enumerate(glyph):
            for c, px in enumerate(line):
                if px == "#":
                    out[r0 + r, c0 + 8 * n + c] = 1
    return out


def random_watermark(shape=(32, 32), seed=0):
    return np.random.default_rng(seed).integers(0, 2, size=shape, dtype=np.uint8)


def _skimage_image(name):
    try:
        from skimage import data
    except ImportError:
        raise FormatError("skimage: corpus entries need scikit-image installed") from None
    loader = getattr(data, name, None)
    if loader is None:
        raise FormatError(f"scikit-image has no sample image {name!r}")
    img = np.asarray(loader())
    if img.ndim == 3:
        # Rec. 601 luma
        img = img[..., :3] @ np.array([0.299, 0.587, 0.114])
        img = np.clip(np.rint(img), 0, 255)
    return img.astype(np.uint8)


def resolve_image(source):
    """Load a corpus entry.

    ``source`` is a file path, ``synthetic:<name>[:seed]``, or ``skimage:<name>``.
    """
    if source.startswith("synthetic:"):
        _, name, *rest = source.split(":")
        if name not in SYNTHETIC:
            raise FormatError(f"unknown synthetic image {name!r}; known: {sorted(SYNTHETIC)}")
        if rest:
            return SYNTHETIC[name](seed=int(rest[0]))
        return SYNTHETIC[name]()
    if source.startswith("skimage:"):
        return _skimage_image(source.split(":", 1)[1])
    from .imageio import read_image

    return read_image(source)


def resolve_watermark(source, threshold=128):
    """``builtin:<text>``, ``random:<seed>`` or an image path thresholded to bits."""
    if source.startswith("builtin:"):
        return text_watermark(source.split(":", 1)[1] or "CUET")
    if source.startswith("random:"):
        return random_watermark(seed=int(source.split(":", 1)[1]))
    from .imageio import read_binary_watermark

    return read_binary_watermark(source, threshold)
