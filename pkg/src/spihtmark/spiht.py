"""Significance ranking of level-2 detail coefficients with a SPIHT sorting pass.

Only the sorting pass is run. Parents are the coefficients of the coarsest
``LH``/``HL`` bands, and their four offspring sit in the next finer band of the
same orientation. A band floor, the mean magnitude of the child band divided
by its side length, gates every significance test: once the threshold drops
below a band's floor that band admits nothing more.

The passes end when the threshold falls below the smaller of the two floors.
The order in which children enter the LSP is the significance ranking used
for embedding.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import SelectionError

log = logging.getLogger(__name__)


class CoeffRef(NamedTuple):
    band: str
    row: int
    col: int


def child_band(parent_band):
    orientation, level = parent_band[:2], int(parent_band[2:])
    return f"{orientation}{level - 1}"


def offspring(parent, parent_level=3):
    """The four children of a coarsest-level ``LH``/``HL`` coefficient, row-major."""
    band, i, j = parent
    if band not in (f"LH{parent_level}", f"HL{parent_level}"):
        raise ValueError(f"offspring are defined for LH{parent_level}/HL{parent_level} parents, got {band}")
    cb = child_band(band)
    return [
        CoeffRef(cb, 2 * i, 2 * j),
        CoeffRef(cb, 2 * i, 2 * j + 1),
        CoeffRef(cb, 2 * i + 1, 2 * j),
        CoeffRef(cb, 2 * i + 1, 2 * j + 1),
    ]


def _bands(levels):
    parents = (f"LH{levels}", f"HL{levels}")
    children = tuple(child_band(p) for p in parents)
    return parents, children


def band_side(shape):
    """Side length of a band; geometric mean of the sides for non-square bands."""
    rows, cols = shape
    return rows if rows == cols else math.sqrt(rows * cols)


def compute_band_floor(pyramid):
    """Mean absolute coefficient of each child band divided by its side length."""
    if pyramid.levels < 2:
        raise ValueError("band floor needs a pyramid of at least 2 levels")
    _, children = _bands(pyramid.levels)
    floors = {}
    for band in children:
        data = pyramid[band]
        floors[band] = float(np.mean(np.abs(data))) / band_side(data.shape)
    return floors


def initial_exponent(max_magnitude):
    """``floor(log2(max_magnitude))`` computed exactly from the float's exponent."""
    mantissa, exponent = math.frexp(max_magnitude)
    return exponent - 1


@dataclass
class SpihtState:
    lip: list = field(default_factory=list)
    lsp: list = field(default_factory=list)
    lis: list = field(default_factory=list)
    threshold: float = 0.0
    exponent: int = 0
    band_floor: dict = field(default_factory=dict)
    # threshold of the pass that admitted each LSP entry, parallel to lsp
    admitted_at: list = field(default_factory=list)
    pass_thresholds: list = field(default_factory=list)


def sorting_passes(pyramid, on_pass=None):
    """Run the sorting passes to completion and return the final lists.

    ``on_pass(state, T)`` is called after every pass.
    """
    parents, children = _bands(pyramid.levels)
    mags = {b: np.abs(pyramid[b]) for b in parents + children}
    floor = compute_band_floor(pyramid)
    state = SpihtState(band_floor=floor)
    state.lis = [
        CoeffRef(b, int(i), int(j))
        for b in parents
        for i, j in np.ndindex(mags[b].shape)
    ]

    peak = max(float(m.max()) for m in mags.values())
    if peak == 0.0:
        return state

    child_mags = np.concatenate([mags[b].ravel() for b in children])
    nonzero = child_mags[child_mags > 0]
    # past this threshold every admissible child has already been admitted
    settle = float(nonzero.min()) if nonzero.size else math.inf

    stop_floor = min(floor.values())
    n = initial_exponent(peak)
    T = math.ldexp(1.0, n)
    while T >= stop_floor and T > 0.0:
        _sorting_pass(state, mags, T, floor, pyramid.levels)
        state.pass_thresholds.append(T)
        if on_pass is not None:
            on_pass(state, T)
        if T <= settle:
            break
        n -= 1
        T = math.ldexp(1.0, n)
    state.threshold = T
    state.exponent = n
    return state


def _sorting_pass(state, mags, T, floor, levels):
    still_insignificant = []
    for ref in state.lip:
        if mags[ref.band][ref.row, ref.col] >= T and T >= floor[ref.band]:
            state.lsp.append(ref)
            state.admitted_at.append(T)
        else:
            still_insignificant.append(ref)
    state.lip = still_insignificant

    remaining = []
    for parent in state.lis:
        kids = offspring(parent, levels)
        cb = kids[0].band
        kid_mags = [mags[cb][k.row, k.col] for k in kids]
        if max(kid_mags) >= T and T >= floor[cb]:
            for kid, m in zip(kids, kid_mags):
                if m >= T:
                    state.lsp.append(kid)
                    state.admitted_at.append(T)
                else:
                    state.lip.append(kid)
        else:
            remaining.append(parent)
    state.lis = remaining


def select_significant(pyramid, count_per_band, fallback=True):
    """The first ``count_per_band`` LSP entries of each child band, in LSP order.

    A band whose LSP holds too few entries is topped up with its largest
    remaining magnitudes (row-major on ties) when ``fallback`` is set.
    """
    _, children = _bands(pyramid.levels)
    for band in children:
        if count_per_band > pyramid[band].size:
            raise SelectionError(
                f"requested {count_per_band} coefficients from {band} "
                f"which has only {pyramid[band].size}"
            )
    state = sorting_passes(pyramid)
    selected = {b: [] for b in children}
    for ref in state.lsp:
        chosen = selected[ref.band]
        if len(chosen) < count_per_band:
            chosen.append(ref)

    for band in children:
        short = count_per_band - len(selected[band])
        if short <= 0:
            continue
        if not fallback:
            raise SelectionError(
                f"{band}: only {len(selected[band])} significant coefficients, need {count_per_band}"
            )
        log.warning("%s: SPIHT found %d of %d coefficients; filling %d by magnitude",
                    band, len(selected[band]), count_per_band, short)
        selected[band].extend(_by_magnitude(pyramid[band], band, selected[band], short))
    return selected


def _by_magnitude(data, band, exclude, count):
    mag = np.abs(data)
    rows, cols = np.indices(mag.shape)
    # lexsort: last key is primary
    order = np.lexsort((cols.ravel(), rows.ravel(), -mag.ravel()))
    taken = {(r.row, r.col) for r in exclude}
    out = []
    for flat in order:
        r, c = divmod(int(flat), mag.shape[1])
        if (r, c) in taken:
            continue
        out.append(CoeffRef(band, r, c))
        if len(out) == count:
            break
    return out
