"""Independent brute-force reference implementations used by the tests."""

import math

import numpy as np


def threshold_schedule(peak, floor_min):
    """Powers of two from the largest one <= peak down to floor_min (inclusive)."""
    n = int(math.floor(math.log2(peak)))
    # guard against log2 rounding at exact powers of two
    while 2.0 ** n > peak:
        n -= 1
    while 2.0 ** (n + 1) <= peak:
        n += 1
    schedule = []
    while 2.0 ** n >= floor_min:
        schedule.append(2.0 ** n)
        n -= 1
    return schedule


def spiht_lsp_oracle(bands):
    """LSP order from per-coefficient admission passes, without list bookkeeping.

    ``bands`` maps "LH3", "HL3", "LH2", "HL2" to arrays. Each parent is
    partitioned at the first pass whose threshold is both <= its largest
    child magnitude and >= the child band floor. A child significant at that
    pass enters the LSP during the set scan; any other child enters the LIP
    and is admitted during the LIP scan of the first later pass where it is
    significant and the band gate still holds.
    """
    floors = {}
    for b in ("LH2", "HL2"):
        side = bands[b].shape[0] if bands[b].shape[0] == bands[b].shape[1] else math.sqrt(bands[b].size)
        floors[b] = np.abs(bands[b]).sum() / bands[b].size / side
    peak = max(np.abs(bands[b]).max() for b in bands)
    if peak == 0:
        return []
    schedule = threshold_schedule(peak, min(floors.values()))

    keyed = []
    parent_index = 0
    for pb, cb in (("LH3", "LH2"), ("HL3", "HL2")):
        rows, cols = bands[pb].shape
        for i in range(rows):
            for j in range(cols):
                kids = [(2 * i, 2 * j), (2 * i, 2 * j + 1), (2 * i + 1, 2 * j), (2 * i + 1, 2 * j + 1)]
                mags = [abs(bands[cb][r, c]) for r, c in kids]
                part = None
                for t, T in enumerate(schedule):
                    if T >= floors[cb] and max(mags) >= T:
                        part = t
                        break
                if part is not None:
                    for o, ((r, c), m) in enumerate(zip(kids, mags)):
                        if m >= schedule[part]:
                            keyed.append(((part, 1, parent_index, o), (cb, r, c)))
                            continue
                        for t in range(part + 1, len(schedule)):
                            if m >= schedule[t] and schedule[t] >= floors[cb]:
                                keyed.append(((t, 0, part, parent_index, o), (cb, r, c)))
                                break
                parent_index += 1
    keyed.sort(key=lambda kv: kv[0])
    return [ref for _, ref in keyed]


def local_variance_oracle(x, L):
    """Windowed mean and population variance by explicit loops, edge-clamped."""
    rows, cols = x.shape
    mean = np.zeros_like(x, dtype=float)
    var = np.zeros_like(x, dtype=float)
    for i in range(rows):
        for j in range(cols):
            vals = []
            for m in range(-L, L + 1):
                for n in range(-L, L + 1):
                    ii = min(max(i + m, 0), rows - 1)
                    jj = min(max(j + n, 0), cols - 1)
                    vals.append(float(x[ii, jj]))
            mu = sum(vals) / len(vals)
            mean[i, j] = mu
            # v*v is correctly rounded; libm pow(v, 2) need not be
            var[i, j] = sum((v - mu) * (v - mu) for v in vals) / len(vals)
    return mean, var


def median_filter_oracle(img, k):
    h = k // 2
    rows, cols = img.shape
    out = np.zeros_like(img)
    for i in range(rows):
        for j in range(cols):
            vals = sorted(
                int(img[min(max(i + m, 0), rows - 1), min(max(j + n, 0), cols - 1)])
                for m in range(-h, h + 1)
                for n in range(-h, h + 1)
            )
            out[i, j] = vals[len(vals) // 2]
    return out


def random_pyramid(rng, kind="continuous", child=8):
    """A 3-level pyramid of a (4*child)-square image with random detail bands."""
    from spihtmark.wavelet import dwt_forward

    pyr = dwt_forward(np.zeros((4 * child, 4 * child)), 3)
    for name in pyr.names():
        shape = pyr[name].shape
        if kind == "continuous":
            scale = rng.choice([1.0, 10.0, 100.0])
            pyr.subbands[name] = rng.normal(0, scale, shape) * (rng.random(shape) < 0.8)
        elif kind == "integer":
            # small integers create exact ties with power-of-two thresholds
            pyr.subbands[name] = rng.integers(-40, 41, shape).astype(float)
        else:
            pyr.subbands[name] = rng.standard_cauchy(shape)
    return pyr
