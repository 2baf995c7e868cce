import math
from dataclasses import replace

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from mmcfrt.budget import (
    EnergyBudget,
    delta_energy,
    edd_residual,
    nominal_energy,
    post_fault_voltage,
    power_transfer,
    size_edd,
    surplus_power,
)
from mmcfrt.network import FaultSpec
from mmcfrt.owf import WindProfile
from mmcfrt.params import DEFAULT_PARAMS

N, C, V0 = 76, 3000e-6, 8.42e3


@pytest.mark.parametrize(
    "n, c, v0, expected",
    [(76, 3000e-6, 8.42e3, 48.49e6), (76, 3000e-6, 0.0, 0.0), (1, 1.0, 1.0, 3.0)],
)
def test_nominal_energy(n, c, v0, expected):
    assert nominal_energy(n, c, v0) == pytest.approx(expected, rel=5e-4, abs=1e-12)


@pytest.mark.parametrize(
    "p_wind, p_exp, expected", [(420e6, 0.0, 420e6), (420e6, 420e6, 0.0), (420e6, 140e6, 280e6)]
)
def test_surplus_power(p_wind, p_exp, expected):
    assert surplus_power(p_wind, p_exp) == expected


@pytest.mark.parametrize(
    "surplus, expected", [(0.0, 8.42e3), (31.53e6, 10.82e3), (48.49e6, 11.91e3)]
)
def test_post_fault_voltage(surplus, expected):
    assert post_fault_voltage(surplus, N, C, V0) == pytest.approx(expected, rel=1e-3)


def test_post_fault_voltage_domain():
    with pytest.raises(ValueError):
        post_fault_voltage(-49e6, N, C, V0)


@pytest.mark.parametrize(
    "v1, expected, rel",
    # 10.82 kV is itself rounded to four digits, hence the wider tolerance.
    [(8.42e3, 0.0, 0.0), (10.82e3, 31.53e6, 5e-3), (8.42e3 * math.sqrt(1.2), 9.70e6, 1e-3)],
)
def test_delta_energy(v1, expected, rel):
    assert delta_energy(N, C, V0, v1) == pytest.approx(expected, rel=rel, abs=1e-6)


@pytest.mark.parametrize(
    "surplus, stored, expected",
    [(57.58e6, 31.53e6, 26.05e6), (10e6, 10e6, 0.0), (10e6, 15e6, 0.0)],
)
def test_edd_residual(surplus, stored, expected):
    assert edd_residual(surplus, stored) == pytest.approx(expected, abs=1.0)


@pytest.mark.parametrize(
    "args, expected",
    [((1.0, 0.0, 0.3, 0.2), 0.0), ((1.0, 1.0, math.pi / 2, 1.0), 1.0), ((1.0, 1.0, math.pi / 6, 0.5), 1.0)],
)
def test_power_transfer(args, expected):
    assert power_transfer(*args) == pytest.approx(expected)


def test_power_transfer_zero_reactance():
    with pytest.raises(ValueError):
        power_transfer(1.0, 1.0, 0.1, 0.0)


volts = st.floats(0.0, 5e4)
energy = st.floats(-1e8, 1e8)


@settings(max_examples=1000)
@given(n=st.integers(1, 500), c=st.floats(1e-5, 1e-1), v0=volts, v1=volts)
def test_nominal_plus_delta_is_nominal_at_v1(n, c, v0, v1):
    lhs = nominal_energy(n, c, v0) + delta_energy(n, c, v0, v1)
    scale = nominal_energy(n, c, max(v0, v1))
    assert lhs == pytest.approx(nominal_energy(n, c, v1), rel=1e-9, abs=1e-12 * scale + 1e-300)


@settings(max_examples=1000)
@given(n=st.integers(1, 500), c=st.floats(1e-5, 1e-1), v0=st.floats(1.0, 5e4), s=energy)
def test_post_fault_voltage_inverts_delta_energy(n, c, v0, s):
    assume(s > -3 * n * c * v0 * v0 * (1 - 1e-6))
    v1 = post_fault_voltage(s, n, c, v0)
    assert delta_energy(n, c, v0, v1) == pytest.approx(s, rel=1e-9, abs=1e-9 * 3 * n * c * v0 * v0)
    assert post_fault_voltage(delta_energy(n, c, v0, v1), n, c, v0) == pytest.approx(v1, rel=1e-9)


@settings(max_examples=1000)
@given(
    vs=st.floats(-1e6, 1e6), vr=st.floats(-1e6, 1e6), ang=st.floats(-3.0, 3.0),
    x=st.floats(1e-3, 1e3), k=st.floats(-10, 10),
)
def test_power_transfer_symmetries(vs, vr, ang, x, k):
    p = power_transfer(vs, vr, ang, x)
    assert power_transfer(vs, vr, -ang, x) == pytest.approx(-p, abs=1e-9)
    assert power_transfer(k * vs, vr, ang, x) == pytest.approx(k * p, rel=1e-9, abs=1e-6)
    assert power_transfer(vs, k * vr, ang, x) == pytest.approx(k * p, rel=1e-9, abs=1e-6)


@settings(max_examples=1000)
@given(s=energy, a=st.floats(0, 1e8), b=st.floats(0, 1e8))
def test_edd_residual_monotone(s, a, b):
    lo, hi = sorted((a, b))
    assert edd_residual(s, hi) <= edd_residual(s, lo)
    assert edd_residual(lo, s) <= edd_residual(hi, s)
    assert edd_residual(s, a) >= 0.0


def test_budget_closure_arithmetic():
    b = EnergyBudget(60e6, 31e6, 4e6, 0.2e6, 23e6, 1.3e6, 0.02e6)
    assert b.closure_residual_j == pytest.approx(0.48e6)
    assert b.relative_closure == pytest.approx(0.008)
    assert b.as_record()["stored_j"] == pytest.approx(35.2e6)


LLLG = FaultSpec("LLLG", 6.5, 0.5)


def test_size_edd_lllg_band():
    s = size_edd(DEFAULT_PARAMS, LLLG)
    assert 58e6 <= s.surplus_j <= 67e6
    assert s.required_energy_j == pytest.approx(s.surplus_j - s.rec_storable_j - s.sec_storable_j)
    assert 20e6 <= s.required_energy_j <= 32e6
    assert s.feasible
    assert s.assumptions


def test_size_edd_surplus_is_closed_form():
    # Rated for 40 ms, linear ramp to zero over 220 ms, zero export.
    s = size_edd(DEFAULT_PARAMS, LLLG)
    assert s.surplus_j == pytest.approx(420e6 * (0.04 + 0.22 / 2), rel=1e-12)


def test_size_edd_zero_duration():
    s = size_edd(DEFAULT_PARAMS, FaultSpec("LLLG", 6.5, 0.0))
    assert s.required_energy_j == 0.0 and s.peak_residual_power_w == 0.0


def test_size_edd_no_storage_margin():
    p = replace(DEFAULT_PARAMS, cap_overvoltage_limit=1.0)
    s = size_edd(p, LLLG)
    assert s.required_energy_j == pytest.approx(s.surplus_j, rel=1e-9)


def test_size_edd_flags_infeasible():
    p = replace(DEFAULT_PARAMS, edd_rated_power_pu=0.1)
    s = size_edd(p, LLLG)
    assert not s.feasible
    assert s.peak_residual_power_w > p.edd_rated_power_w


def test_size_edd_slg_uncurtailed():
    slg = FaultSpec("SLG", 6.5, 0.12)
    wind = WindProfile.from_params(DEFAULT_PARAMS, curtailment_enabled=False)
    s = size_edd(DEFAULT_PARAMS, slg, wind)
    assert s.surplus_j == pytest.approx(280e6 * 0.12)
    assert s.ceiling_time_s is None
