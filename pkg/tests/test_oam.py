import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homghost.oam import (
    SpiralSpectrum,
    bunching_probability,
    dove_phase_decomposition,
    flat_spectrum,
    hom_filter_pass,
    lorentzian_spectrum,
    map_to_csv,
    map_to_heatmap,
    spiral_bandwidth_map,
)


def joint_state_oracle(spec, theta):
    """Full (2L+1)^2 joint state: v[lA, lB] = a_lA delta(lB = -lA), Dove phase on A,
    then the anti-symmetric projection (v - v^T) / 2. Returns |anti|^2."""
    n = 2 * spec.lmax + 1
    ells = np.arange(-spec.lmax, spec.lmax + 1)
    v = np.zeros((n, n), dtype=complex)
    for i, ell in enumerate(ells):
        v[i, n - 1 - i] = spec.amps[i]
    v = np.diag(np.exp(2j * ells * theta)) @ v
    anti = (v - v.T) / 2
    return np.abs(anti) ** 2


def test_spectrum_validation():
    with pytest.raises(ValueError):
        SpiralSpectrum(1, np.array([1, 1, 1]))
    with pytest.raises(ValueError):
        SpiralSpectrum(2, np.ones(3) / math.sqrt(3))
    with pytest.raises(ValueError):
        SpiralSpectrum.from_weights(1, [0, 0, 0])
    with pytest.raises(ValueError):
        lorentzian_spectrum(3, 0.0)


def test_lorentzian_shape():
    s = lorentzian_spectrum(15, 7.0)
    w = np.abs(s.amps) ** 2
    assert w.sum() == pytest.approx(1.0, abs=1e-12)
    assert w[15 + 7] / w[15] == pytest.approx(0.5, rel=1e-12)


def test_decomposition_examples():
    spec = flat_spectrum(4)
    sym, anti = dove_phase_decomposition(spec, 0.0)
    assert not np.any(anti)
    sym, anti = dove_phase_decomposition(spec, math.pi / 4)
    for i, ell in enumerate(spec.ells):
        if ell % 2 == 0:
            assert abs(anti[i]) < 1e-15
        else:
            assert abs(sym[i]) < 1e-15
    sym, _ = dove_phase_decomposition(spec, math.pi / 8)
    assert abs(sym[2 + 4]) < 1e-15


def test_filter_pass_odd_only():
    spec = flat_spectrum(3)
    passed, p = hom_filter_pass(spec, math.pi / 4)
    kept = {int(ell) for ell, a in zip(passed.ells, passed.amps) if abs(a) > 1e-12}
    assert kept == {-3, -1, 1, 3}
    assert p == pytest.approx(4 / 7, abs=1e-12)


def test_filter_pass_empty_signals():
    assert hom_filter_pass(lorentzian_spectrum(5), 0.0)[0] is None
    only2 = SpiralSpectrum.from_weights(2, [1, 0, 0, 0, 1])
    res, p = hom_filter_pass(only2, math.pi / 4)
    assert res is None and p < 1e-24


def test_unfiltered_map_is_anti_diagonal():
    cmap = spiral_bandwidth_map(lorentzian_spectrum(15), 0.0, filter_on=False)
    assert cmap.rates.max() == 1.0
    for la in cmap.ells:
        for lb in cmap.ells:
            r = cmap.rate(int(la), int(lb))
            assert (r > 0) == (la == -lb)


def test_filtered_map_parity():
    cmap = spiral_bandwidth_map(lorentzian_spectrum(15), math.pi / 4, filter_on=True)
    peak = cmap.rates.max()
    for la in cmap.ells:
        for lb in cmap.ells:
            r = cmap.rate(int(la), int(lb))
            if la != -lb:
                assert r == 0.0
            elif la % 2 == 0:
                assert r < 1e-14 * peak
            else:
                assert r > 0


@pytest.mark.parametrize("theta", [math.pi / 4, math.pi / 8, 0.3])
def test_filtered_map_matches_joint_state_oracle(theta):
    spec = lorentzian_spectrum(6, 3.0)
    got = spiral_bandwidth_map(spec, theta, filter_on=True, normalize=False).rates
    np.testing.assert_allclose(got, joint_state_oracle(spec, theta), atol=1e-15)


def test_odd_ratio_matches_oracle():
    spec = lorentzian_spectrum(15, 7.0)
    cmap = spiral_bandwidth_map(spec, math.pi / 4, filter_on=True)
    oracle = joint_state_oracle(spec, math.pi / 4)
    ratio = cmap.rate(1, -1) / cmap.rate(3, -3)
    assert ratio == pytest.approx(oracle[15 + 1, 15 - 1] / oracle[15 + 3, 15 - 3], rel=1e-12)
    assert ratio == pytest.approx(abs(spec.amp(1)) ** 2 / abs(spec.amp(3)) ** 2, rel=1e-12)


def test_lmax_zero():
    spec = flat_spectrum(0)
    assert spiral_bandwidth_map(spec, 0.0).rates.shape == (1, 1)
    assert spiral_bandwidth_map(spec, math.pi / 4, filter_on=True).rates[0, 0] == 0.0


def test_lmax_bound():
    with pytest.raises(ValueError):
        spiral_bandwidth_map(flat_spectrum(65), 0.0)


def test_csv_and_heatmap():
    cmap = spiral_bandwidth_map(flat_spectrum(1), math.pi / 4, filter_on=True)
    lines = map_to_csv(cmap).splitlines()
    assert lines[0] == "lA,lB,rate"
    assert len(lines) == 10
    assert "-1,1,1.0" in lines and "0,0,0.0" in lines
    hm = map_to_heatmap(cmap)
    assert hm.dtype == np.uint8 and hm.max() == 255
    assert hm.tolist() == [[0, 0, 255], [0, 0, 0], [255, 0, 0]]


weights = st.lists(st.floats(0.0, 10.0), min_size=1, max_size=12)


@given(weights, st.floats(-2 * math.pi, 2 * math.pi))
def test_energy_accounting(ws, theta):
    ws = ws + ws[-2::-1] if len(ws) > 1 else ws  # symmetric a_l = a_-l, odd length
    if sum(ws) < 1e-6:
        return
    spec = SpiralSpectrum.from_weights(len(ws) // 2, ws)
    _, p = hom_filter_pass(spec, theta)
    assert abs(p + bunching_probability(spec, theta) - 1.0) < 1e-10
    sym, anti = dove_phase_decomposition(spec, theta)
    np.testing.assert_allclose(np.abs(sym) ** 2 + np.abs(anti) ** 2, np.abs(spec.amps) ** 2, atol=1e-14)


@settings(max_examples=30)
@given(st.integers(0, 20), st.floats(0.5, 30.0))
def test_parity_property(lmax, width):
    cmap = spiral_bandwidth_map(lorentzian_spectrum(lmax, width), math.pi / 4, filter_on=True)
    peak = cmap.rates.max()
    for ell in range(-lmax, lmax + 1, 1):
        if ell % 2 == 0:
            assert cmap.rate(ell, -ell) <= 1e-14 * max(peak, 1e-300)
    assert np.all(cmap.rates >= 0)
