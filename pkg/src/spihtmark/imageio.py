"""Grayscale raster I/O.

PGM (binary P5 and ASCII P2, maxval 255) is the interchange format. Files
with a ``.png`` suffix go through Pillow when it is installed.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import FormatError

_WHITESPACE = b" \t\n\r\v\f"


def _header_tokens(data, count):
    """Read ``count`` header tokens; return them and the offset just past the last one."""
    tokens = []
    pos = 0
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos] in _WHITESPACE:
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos] not in b"\r\n":
                pos += 1
            continue
        start = pos
        while pos < n and data[pos] not in _WHITESPACE and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise FormatError("truncated PGM header")
        tokens.append(data[start:pos])
    return tokens, pos


def decode_pgm(data):
    if data[:2] not in (b"P5", b"P2"):
        raise FormatError(f"not a PGM file (magic {data[:2]!r})")
    tokens, pos = _header_tokens(data, 4)
    magic = tokens[0]
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise FormatError(f"non-numeric PGM header: {tokens[1:]!r}") from None
    if width <= 0 or height <= 0:
        raise FormatError(f"bad PGM dimensions {width}x{height}")
    if maxval != 255:
        raise FormatError(f"only maxval 255 is supported, got {maxval}")
    count = width * height
    if magic == b"P5":
        # exactly one whitespace byte separates header from raster
        payload = data[pos + 1:pos + 1 + count]
        if len(payload) < count:
            raise FormatError(f"truncated PGM payload: {len(payload)} of {count} bytes")
        pixels = np.frombuffer(payload, dtype=np.uint8)
    else:
        try:
            body = b"\n".join(line.split(b"#", 1)[0] for line in data[pos:].splitlines())
            values = [int(v) for v in body.split()]
        except ValueError:
            raise FormatError("non-numeric sample in P2 raster") from None
        if len(values) < count:
            raise FormatError(f"truncated PGM payload: {len(values)} of {count} samples")
        arr = np.asarray(values[:count])
        if arr.min() < 0 or arr.max() > 255:
            raise FormatError("P2 sample outside [0, 255]")
        pixels = arr.astype(np.uint8)
    return pixels.reshape(height, width).copy()


def encode_pgm(img):
    img = as_gray(img)
    height, width = img.shape
    return b"P5\n%d %d\n255\n" % (width, height) + img.tobytes()


def as_gray(img):
    """Validate an 8-bit grayscale raster and return it as a 2D ``uint8`` array."""
    arr = np.asarray(img)
    if arr.ndim != 2 or arr.size == 0:
        raise FormatError(f"expected a non-empty 2D raster, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if arr.min() < 0 or arr.max() > 255 or not np.all(arr == np.round(arr)):
            raise FormatError("pixel values must be integers in [0, 255]")
        arr = arr.astype(np.uint8)
    return arr


def read_image(path):
    path = Path(path)
    if path.suffix.lower() == ".png":
        return _read_png(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    return decode_pgm(data)


read_pgm = read_image


def write_image(img, path):
    path = Path(path)
    if path.suffix.lower() == ".png":
        _write_png(img, path)
    else:
        path.write_bytes(encode_pgm(img))


write_pgm = write_image


def _read_png(path):
    try:
        from PIL import Image
    except ImportError:  # pragma: no cover
        raise FormatError("PNG input needs Pillow installed") from None
    try:
        with Image.open(path) as im:
            return np.asarray(im.convert("L"), dtype=np.uint8).copy()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc


def _write_png(img, path):
    from PIL import Image

    Image.fromarray(as_gray(img)).save(path)


def threshold_watermark(img, threshold=128):
    return (as_gray(img) >= threshold).astype(np.uint8)


def read_binary_watermark(path, threshold=128):
    """Load a raster and binarize it: pixels ``>= threshold`` become 1."""
    return threshold_watermark(read_image(path), threshold)


def write_binary_watermark(bits, path):
    write_image(np.asarray(bits, dtype=np.uint8) * 255, path)
