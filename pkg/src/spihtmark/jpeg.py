"""Baseline sequential JPEG for 8-bit grayscale images.

A small self-contained encoder and decoder: 8x8 DCT, the standard luminance
quantization table scaled by the usual IJG quality mapping, and the standard
Huffman tables. Streams are plain JFIF files that other decoders read.
The decoder accepts single-component baseline streams with any Huffman and
quantization tables.
"""

from __future__ import annotations

import struct

import numpy as np
from scipy.fft import dctn, idctn

from .errors import FormatError

STD_LUMINANCE_QT = np.array([
    [16, 11, 10, 16, 24, 40, 51, 61],
    [12, 12, 14, 19, 26, 58, 60, 55],
    [14, 13, 16, 24, 40, 57, 69, 56],
    [14, 17, 22, 29, 51, 87, 80, 62],
    [18, 22, 37, 56, 68, 109, 103, 77],
    [24, 35, 55, 64, 81, 104, 113, 92],
    [49, 64, 78, 87, 103, 121, 120, 101],
    [72, 92, 95, 98, 112, 100, 103, 99],
])

# ZIGZAG[k] = raster index (row*8 + col) of the k-th coefficient in scan order
ZIGZAG = np.array([
    0, 1, 8, 16, 9, 2, 3, 10, 17, 24, 32, 25, 18, 11, 4, 5,
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6, 7, 14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63,
])

DC_BITS = (0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0)
DC_VALS = tuple(range(12))
AC_BITS = (0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7D)
AC_VALS = (
    0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06, 0x13, 0x51, 0x61, 0x07,
    0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xA1, 0x08, 0x23, 0x42, 0xB1, 0xC1, 0x15, 0x52, 0xD1, 0xF0,
    0x24, 0x33, 0x62, 0x72, 0x82, 0x09, 0x0A, 0x16, 0x17, 0x18, 0x19, 0x1A, 0x25, 0x26, 0x27, 0x28,
    0x29, 0x2A, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3A, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49,
    0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69,
    0x6A, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7A, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89,
    0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9A, 0xA2, 0xA3, 0xA4, 0xA5, 0xA6, 0xA7,
    0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4, 0xB5, 0xB6, 0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3, 0xC4, 0xC5,
    0xC6, 0xC7, 0xC8, 0xC9, 0xCA, 0xD2, 0xD3, 0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA, 0xE1, 0xE2,
    0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9, 0xEA, 0xF1, 0xF2, 0xF3, 0xF4, 0xF5, 0xF6, 0xF7, 0xF8,
    0xF9, 0xFA,
)


def quality_table(quality):
    """Luminance quantization table for an IJG quality factor in ``[1, 100]``."""
    if not 1 <= quality <= 100:
        raise ValueError(f"JPEG quality must be in [1, 100], got {quality}")
    scale = 5000 // quality if quality < 50 else 200 - 2 * quality
    return np.clip((STD_LUMINANCE_QT * scale + 50) // 100, 1, 255).astype(np.int64)


def huffman_codes(bits, vals):
    """Canonical code assignment: ``{symbol: (code, length)}``."""
    codes = {}
    code = 0
    k = 0
    for length in range(1, 17):
        for _ in range(bits[length - 1]):
            codes[vals[k]] = (code, length)
            code += 1
            k += 1
        code <<= 1
    return codes


def _category(v):
    return int(abs(v)).bit_length()


class _BitWriter:
    def __init__(self):
        self.out = bytearray()
        self.acc = 0
        self.nbits = 0

    def write(self, code, length):
        self.acc = (self.acc << length) | code
        self.nbits += length
        while self.nbits >= 8:
            self.nbits -= 8
            byte = (self.acc >> self.nbits) & 0xFF
            self.out.append(byte)
            if byte == 0xFF:
                self.out.append(0x00)
        self.acc &= (1 << self.nbits) - 1

    def flush(self):
        if self.nbits:
            # pad with 1-bits
            self.write((1 << (8 - self.nbits)) - 1, 8 - self.nbits)
        return bytes(self.out)


def _blocks(img):
    """Split into 8x8 blocks in raster order, replicating edges to a multiple of 8."""
    h, w = img.shape
    ph, pw = -h % 8, -w % 8
    padded = np.pad(img, ((0, ph), (0, pw)), mode="edge")
    H, W = padded.shape
    return padded.reshape(H // 8, 8, W // 8, 8).swapaxes(1, 2).reshape(-1, 8, 8), (H, W)


def _segment(marker, payload):
    return struct.pack(">BBH", 0xFF, marker, len(payload) + 2) + payload


def encode(img, quality=75):
    """Encode a 2D ``uint8`` array as a baseline JFIF byte string."""
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError("only single-component images are supported")
    qt = quality_table(quality)
    blocks, _ = _blocks(img.astype(np.float64) - 128.0)
    coefs = dctn(blocks, axes=(1, 2), norm="ortho") / qt
    q = (np.sign(coefs) * np.floor(np.abs(coefs) + 0.5)).astype(np.int64)
    zz = q.reshape(-1, 64)[:, ZIGZAG]

    dc_codes = huffman_codes(DC_BITS, DC_VALS)
    ac_codes = huffman_codes(AC_BITS, AC_VALS)
    bw = _BitWriter()
    prev_dc = 0
    for block in zz:
        diff = int(block[0]) - prev_dc
        prev_dc = int(block[0])
        size = _category(diff)
        bw.write(*dc_codes[size])
        if size:
            bw.write(diff if diff > 0 else diff + (1 << size) - 1, size)
        run = 0
        last = 0
        for k in np.flatnonzero(block[1:]) + 1:
            run = k - last - 1
            while run > 15:
                bw.write(*ac_codes[0xF0])
                run -= 16
            v = int(block[k])
            size = _category(v)
            bw.write(*ac_codes[(run << 4) | size])
            bw.write(v if v > 0 else v + (1 << size) - 1, size)
            last = k
        if last != 63:
            bw.write(*ac_codes[0x00])
    scan = bw.flush()

    h, w = img.shape
    out = bytearray(b"\xff\xd8")
    out += _segment(0xE0, b"JFIF\x00\x01\x01\x00\x00\x01\x00\x01\x00\x00")
    out += _segment(0xDB, bytes([0x00]) + bytes(int(v) for v in qt.ravel()[ZIGZAG]))
    out += _segment(0xC0, struct.pack(">BHHB", 8, h, w, 1) + bytes([1, 0x11, 0]))
    out += _segment(0xC4, bytes([0x00]) + bytes(DC_BITS) + bytes(DC_VALS))
    out += _segment(0xC4, bytes([0x10]) + bytes(AC_BITS) + bytes(AC_VALS))
    out += _segment(0xDA, bytes([1, 1, 0x00, 0, 63, 0]))
    out += scan
    out += b"\xff\xd9"
    return bytes(out)


class _HuffmanTable:
    def __init__(self, bits, vals):
        # 16-bit peek lookup: value -> (symbol, length)
        self.symbol = np.full(1 << 16, -1, dtype=np.int32)
        self.length = np.zeros(1 << 16, dtype=np.int32)
        for sym, (code, length) in huffman_codes(bits, vals).items():
            lo = code << (16 - length)
            hi = (code + 1) << (16 - length)
            self.symbol[lo:hi] = sym
            self.length[lo:hi] = length
        self.symbol = self.symbol.tolist()
        self.length = self.length.tolist()


class _BitReader:
    def __init__(self, data):
        bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
        self.bits = "".join("1" if b else "0" for b in bits.tolist()) + "1" * 32
        self.pos = 0
        self.end = len(bits)

    def huffman(self, table):
        peek = int(self.bits[self.pos:self.pos + 16], 2)
        sym = table.symbol[peek]
        if sym < 0:
            raise FormatError("invalid Huffman code in JPEG scan")
        self.pos += table.length[peek]
        if self.pos > self.end:
            raise FormatError("JPEG scan ended early")
        return sym

    def receive_extend(self, size):
        if size == 0:
            return 0
        v = int(self.bits[self.pos:self.pos + size], 2)
        self.pos += size
        if v < (1 << (size - 1)):
            v -= (1 << size) - 1
        return v


def _scan_end(data, start):
    """Offset of the first marker after the entropy-coded data beginning at ``start``."""
    i = start
    n = len(data)
    while i < n - 1:
        if data[i] == 0xFF and data[i + 1] != 0x00 and not 0xD0 <= data[i + 1] <= 0xD7:
            return i
        i += 1
    raise FormatError("JPEG scan is not terminated by a marker")


def decode(data):
    """Decode a single-component baseline JPEG to a 2D ``uint8`` array."""
    if data[:2] != b"\xff\xd8":
        raise FormatError("missing JPEG SOI marker")
    qts = {}
    dc_tables, ac_tables = {}, {}
    frame = None
    pixels = None
    pos = 2
    while pos < len(data):
        if data[pos] != 0xFF:
            raise FormatError(f"expected marker at offset {pos}")
        marker = data[pos + 1]
        if marker == 0xD9:
            break
        if marker == 0xFF:
            pos += 1
            continue
        (length,) = struct.unpack(">H", data[pos + 2:pos + 4])
        payload = data[pos + 4:pos + 2 + length]
        pos += 2 + length
        if marker == 0xDB:
            k = 0
            while k < len(payload):
                pq, tq = payload[k] >> 4, payload[k] & 0x0F
                if pq:
                    raise FormatError("16-bit quantization tables are not supported")
                table = np.zeros(64, dtype=np.int64)
                table[ZIGZAG] = np.frombuffer(payload[k + 1:k + 65], dtype=np.uint8)
                qts[tq] = table.reshape(8, 8)
                k += 65
        elif marker == 0xC4:
            k = 0
            while k < len(payload):
                tc, th = payload[k] >> 4, payload[k] & 0x0F
                bits = tuple(payload[k + 1:k + 17])
                vals = tuple(payload[k + 17:k + 17 + sum(bits)])
                (ac_tables if tc else dc_tables)[th] = _HuffmanTable(bits, vals)
                k += 17 + sum(bits)
        elif marker == 0xC0:
            precision, h, w, ncomp = struct.unpack(">BHHB", payload[:6])
            if precision != 8 or ncomp != 1:
                raise FormatError("only 8-bit single-component frames are supported")
            frame = (h, w, payload[8] & 0x0F)
        elif marker in (0xC1, 0xC2, 0xC3) or 0xC5 <= marker <= 0xCF and marker != 0xC8:
            raise FormatError(f"unsupported JPEG frame type 0x{marker:02X}")
        elif marker == 0xDD:
            if struct.unpack(">H", payload[:2])[0]:
                raise FormatError("restart intervals are not supported")
        elif marker == 0xDA:
            if frame is None:
                raise FormatError("scan before frame header")
            td, ta = payload[2] >> 4, payload[2] & 0x0F
            end = _scan_end(data, pos)
            scan = data[pos:end].replace(b"\xff\x00", b"\xff")
            pixels = _decode_scan(scan, frame, qts, dc_tables[td], ac_tables[ta])
            pos = end
    if pixels is None:
        raise FormatError("JPEG stream has no image data")
    return pixels


def _decode_scan(scan, frame, qts, dc, ac):
    h, w, tq = frame
    H, W = -(-h // 8) * 8, -(-w // 8) * 8
    nblocks = (H // 8) * (W // 8)
    reader = _BitReader(scan)
    zz = np.zeros((nblocks, 64), dtype=np.int64)
    pred = 0
    for b in range(nblocks):
        pred += reader.receive_extend(reader.huffman(dc))
        row = zz[b]
        row[0] = pred
        k = 1
        while k < 64:
            rs = reader.huffman(ac)
            run, size = rs >> 4, rs & 0x0F
            if size == 0:
                if run == 15:
                    k += 16
                    continue
                break
            k += run
            if k > 63:
                raise FormatError("AC run past end of block")
            row[k] = reader.receive_extend(size)
            k += 1
    coefs = np.zeros((nblocks, 64), dtype=np.float64)
    coefs[:, ZIGZAG] = zz
    coefs = coefs.reshape(-1, 8, 8) * qts[tq]
    blocks = idctn(coefs, axes=(1, 2), norm="ortho") + 128.0
    img = blocks.reshape(H // 8, W // 8, 8, 8).swapaxes(1, 2).reshape(H, W)
    return np.clip(np.floor(img + 0.5), 0, 255).astype(np.uint8)[:h, :w]


def roundtrip(img, quality):
    return decode(encode(img, quality))
