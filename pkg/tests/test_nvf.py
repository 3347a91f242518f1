import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from spihtmark.nvf import (
    NvfConfig,
    QuantMatrix,
    compute_nvf,
    distortion_map,
    local_moments,
    max_allowable_distortion,
)

from oracles import local_variance_oracle


def test_default_matrix_values():
    q = QuantMatrix()
    assert q.factor("HL", 2) == 14.608
    assert q.factor("LH", 2) == 14.685
    assert q.factor("HH", 1) == 58.756
    assert q.factor("LL", 4) == 14.5
    assert q.factor("HL", 3) == q.factor("LH", 3) == 12.707


@pytest.mark.parametrize("rows", [
    [[1] * 4] * 3,
    [[1, 2, 3, 4]] * 3 + [[1, 2, 3, -4]],
])
def test_matrix_validation(rows):
    with pytest.raises(ValueError):
        QuantMatrix.from_rows(rows)


def test_unmapped_orientation():
    with pytest.raises(ValueError):
        QuantMatrix().factor("XY", 2)
    with pytest.raises(ValueError):
        QuantMatrix().factor("LH", 5)


def test_config_validation():
    with pytest.raises(ValueError):
        NvfConfig(window_halfwidth=0)
    with pytest.raises(ValueError):
        NvfConfig(flat_strength=0)


def test_constant_band_nvf_is_one():
    assert np.all(compute_nvf(np.full((10, 12), -7.25)) == 1.0)


def test_window_of_variance_three():
    # population variance of the unscaled window is 36/9 = 4
    window = np.array([[3, -3, 0], [3, -3, 0], [0, 0, 0]], dtype=float) * np.sqrt(0.75)
    assert np.isclose(window.var(), 3.0)
    band = np.zeros((7, 7))
    band[2:5, 2:5] = window
    assert compute_nvf(band)[3, 3] == pytest.approx(0.25, abs=1e-12)


@pytest.mark.parametrize("L", [1, 2])
def test_moments_match_loop_oracle(L, rng):
    band = rng.normal(0, 30, (16, 16))
    mean, var = local_moments(band, L)
    o_mean, o_var = local_variance_oracle(band, L)
    assert np.abs(mean - o_mean).max() <= 1e-12
    assert np.abs(var - o_var).max() <= 1e-12
    np.testing.assert_allclose(compute_nvf(band, NvfConfig(L)), 1 / (1 + o_var), atol=1e-12)


def test_flat_limit_gives_s1():
    d = max_allowable_distortion(np.ones((4, 4)), "LH", 2, cfg=NvfConfig(flat_strength=2.5))
    assert np.all(d == 2.5)


def test_textured_limit_gives_q():
    assert max_allowable_distortion(np.zeros(1), "HL", 2)[0] == pytest.approx(14.608)


def test_half_blend_lh2():
    d = max_allowable_distortion(np.array([0.5]), "LH", 2, cfg=NvfConfig(flat_strength=3.0))
    assert d[0] == pytest.approx(8.8425, abs=1e-12)


def test_distortion_map_shape_and_sign(rng):
    band = rng.normal(0, 10, (12, 9))
    d = distortion_map(band, "HL", 2)
    assert d.shape == band.shape and np.all(d > 0)


bands = arrays(np.float64, (8, 8), elements=st.floats(-1e4, 1e4, allow_nan=False))


@settings(max_examples=80, deadline=None)
@given(bands, st.floats(0.01, 100))
def test_nvf_range_and_delta_bounds(band, s1):
    cfg = NvfConfig(flat_strength=s1)
    nvf = compute_nvf(band, cfg)
    assert np.all((nvf > 0) & (nvf <= 1))
    q = QuantMatrix().factor("LH", 2)
    d = max_allowable_distortion(nvf, "LH", 2, cfg=cfg)
    lo, hi = min(s1, q), max(s1, q)
    assert np.all(d >= lo - 1e-9) and np.all(d <= hi + 1e-9)


@settings(max_examples=60, deadline=None)
@given(bands, st.integers(0, 7), st.integers(0, 7), st.floats(0.5, 50))
def test_more_variance_lowers_nvf(band, i, j, bump):
    # spreading the center sample away from its window mean raises the variance
    cfg = NvfConfig(window_halfwidth=1)
    mean, var = local_moments(band, 1)
    spread = band.copy()
    direction = 1.0 if band[i, j] >= mean[i, j] else -1.0
    spread[i, j] += direction * bump
    _, var2 = local_moments(spread, 1)
    assert var2[i, j] > var[i, j]
    assert compute_nvf(spread, cfg)[i, j] < compute_nvf(band, cfg)[i, j]
