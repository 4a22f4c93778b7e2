import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dasalign.beamforming import (ScanConfig, UcaDescriptor, array_response, beam_pattern,
                                  beam_weight, codebook_angles, codebook_matrix, stage1_config)


def test_radius_at_28ghz(uca32):
    assert uca32.wavelength_m == pytest.approx(0.0107068735, rel=1e-12)
    assert uca32.radius_m == pytest.approx(0.027308676482502306, rel=1e-12)


@pytest.mark.parametrize("m", [2, 3, 8, 32, 64])
def test_adjacent_elements_half_wavelength_apart(m):
    uca = UcaDescriptor(m, 1.0)
    gap = math.hypot(uca.x_coords[1] - uca.x_coords[0], uca.y_coords[1] - uca.y_coords[0])
    assert gap == pytest.approx(0.5, rel=1e-12)


def test_codebook_example():
    cfg = ScanConfig(center_rad=math.pi / 2, half_range_rad=math.pi / 4, codebook_size=4, tx_power_w=1.0)
    expected = [math.pi / 4, 3 * math.pi / 8, math.pi / 2, 5 * math.pi / 8]
    assert np.allclose(codebook_angles(cfg), expected, rtol=0, atol=1e-15)
    assert cfg.step_rad == pytest.approx(math.pi / 8)


def test_stage1_grid_points_at_multiples():
    cfg = stage1_config(1.0, 16)
    assert np.allclose(codebook_angles(cfg), 2 * math.pi * np.arange(16) / 16, atol=1e-12)


def test_angles_wrap():
    cfg = ScanConfig(center_rad=0.1, half_range_rad=0.5, codebook_size=4, tx_power_w=1.0)
    ang = codebook_angles(cfg)
    assert np.all((ang >= 0) & (ang < 2 * math.pi))
    assert ang[0] == pytest.approx(2 * math.pi - 0.4)


def test_scan_config_validation():
    with pytest.raises(ValueError):
        ScanConfig(0.0, 0.0, 4, 1.0)
    with pytest.raises(ValueError):
        ScanConfig(0.0, 4.0, 4, 1.0)
    with pytest.raises(ValueError):
        ScanConfig(0.0, 1.0, 0, 1.0)
    with pytest.raises(ValueError):
        UcaDescriptor(0, 1.0)


def test_matched_beam_has_unit_gain(uca32):
    theta = 1.234
    assert abs(np.vdot(array_response(uca32, theta), beam_weight(uca32, theta))) ** 2 == pytest.approx(1.0)
    pattern = beam_pattern(uca32, theta, np.linspace(0, 2 * math.pi, 2000, endpoint=False))
    assert pattern.max() <= 1 + 1e-12


def test_beam_pattern_peak_at_steering(uca32):
    grid = np.linspace(0, 2 * math.pi, 3600, endpoint=False)
    pattern = beam_pattern(uca32, grid[900], grid)
    assert np.argmax(pattern) == 900


def test_codebook_matrix_cached_readonly(uca32):
    cfg = stage1_config(1.0, 16)
    w = codebook_matrix(uca32, cfg)
    assert w.shape == (32, 16)
    assert codebook_matrix(uca32, cfg) is w
    with pytest.raises(ValueError):
        w[0, 0] = 0


@settings(max_examples=100, deadline=None)
@given(m=st.integers(1, 64), theta=st.floats(-20, 20, allow_nan=False))
def test_weights_unit_norm_constant_modulus(m, theta):
    w = beam_weight(UcaDescriptor(m, 0.01), theta)
    assert np.linalg.norm(w) == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(np.abs(w), 1 / math.sqrt(m), rtol=1e-12)


@settings(max_examples=50, deadline=None)
@given(m=st.integers(2, 48), theta=st.floats(0, 2 * math.pi), shift=st.integers(-3, 3))
def test_weight_periodic_in_angle(m, theta, shift):
    uca = UcaDescriptor(m, 0.01)
    assert np.allclose(beam_weight(uca, theta), beam_weight(uca, theta + 2 * math.pi * shift), atol=1e-9)
