import math
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmcfrt.params import (
    DEFAULT_PARAMS,
    QUANTITY_KINDS,
    ControlParams,
    PerUnitBase,
    SystemParams,
    from_pu,
    to_pu,
    validate,
)

BASE = DEFAULT_PARAMS.base


def test_table_values_pass():
    report = validate(DEFAULT_PARAMS)
    assert report.ok, report.errors


def test_zero_capacitance_fails():
    report = validate(replace(DEFAULT_PARAMS, sm_capacitance_f=0.0))
    assert not report.ok
    assert any("non-positive capacitance" in e for e in report.errors)


def test_low_sm_voltage_fails_arm_sum():
    report = validate(replace(DEFAULT_PARAMS, sm_rated_voltage_v=5e3))
    assert any("deviates from V_dc by >5%" in e for e in report.errors)


@pytest.mark.parametrize(
    "change, fragment",
    [
        ({"edd_activation_pu": 1.2}, "EDD activation"),
        ({"cap_overvoltage_limit": 1.0}, "capacitor overvoltage"),
        ({"sm_per_arm": 0}, "sm_per_arm"),
        ({"rated_power_w": -1.0}, "non-positive power"),
    ],
)
def test_each_violation_is_reported(change, fragment):
    report = validate(replace(DEFAULT_PARAMS, **change))
    assert any(fragment in e for e in report.errors)


def test_every_violation_listed():
    bad = replace(DEFAULT_PARAMS, sm_capacitance_f=0.0, dc_line_inductance_h=0.0)
    assert len(validate(bad).errors) == 2


def test_validate_is_pure():
    bad = replace(DEFAULT_PARAMS, sm_capacitance_f=0.0)
    assert validate(bad) == validate(bad)


def test_derived_bases():
    assert BASE.i_base_a == pytest.approx(420e6 / (math.sqrt(3) * 320e3))
    assert BASE.z_base_ohm == pytest.approx(320e3**2 / 420e6)


@pytest.mark.parametrize(
    "value, kind, expected",
    [
        (640e3, "dc_voltage", 1.0),
        (420e6, "power", 1.0),
        (48.49e6, "energy", 0.1155),
    ],
)
def test_to_pu_examples(value, kind, expected):
    assert to_pu(value, BASE, kind) == pytest.approx(expected, abs=1e-4)


def test_unknown_kind():
    with pytest.raises(ValueError):
        to_pu(1.0, BASE, "flux")
    with pytest.raises(ValueError):
        from_pu(1.0, BASE, "flux")


@settings(max_examples=1000)
@given(
    x=st.floats(-1e12, 1e12, allow_nan=False),
    kind=st.sampled_from(QUANTITY_KINDS),
    s=st.floats(1e3, 1e10),
    vdc=st.floats(1e2, 1e7),
    vac=st.floats(1e2, 1e7),
)
def test_per_unit_round_trip(x, kind, s, vdc, vac):
    base = PerUnitBase.build(s, vdc, vac, 1.0 / (2 * math.pi * 50))
    assert from_pu(to_pu(x, base, kind), base, kind) == pytest.approx(x, rel=1e-15, abs=1e-300)


def test_nominal_energy_property():
    assert DEFAULT_PARAMS.nominal_energy_j == pytest.approx(48.49e6, rel=5e-3)
    assert DEFAULT_PARAMS.cap_constant_f == pytest.approx(0.684)


def test_edd_rating_in_watts():
    p = SystemParams(edd_rated_power_pu=0.5)
    assert p.edd_rated_power_w == pytest.approx(210e6)


@pytest.mark.parametrize(
    "change",
    [{"inner_tau_s": -1.0}, {"storage_share": 1.5}, {"storage_ceiling_pu": 0.9}, {"pll_damping": math.nan}],
)
def test_control_params_reject(change):
    with pytest.raises(ValueError):
        ControlParams(**change)
