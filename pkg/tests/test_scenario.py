import configparser
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmcfrt.cli import bundled_scenario
from mmcfrt.engine import Scenario
from mmcfrt.network import FaultSpec
from mmcfrt.scenario import (
    KEYS,
    ScenarioParseError,
    ScenarioValueError,
    known_keys,
    load_scenario,
    parse_scenario,
    serialize_scenario,
    with_value,
)


def test_default_round_trip():
    assert parse_scenario(serialize_scenario(Scenario())) == Scenario()


@pytest.mark.parametrize("name", ["lllg", "slg"])
def test_bundled_files_round_trip(name):
    sc = load_scenario(bundled_scenario(name))
    assert parse_scenario(serialize_scenario(sc)) == sc


def test_bundled_fault_windows():
    lllg = load_scenario(bundled_scenario("lllg"))
    slg = load_scenario(bundled_scenario("slg"))
    assert (lllg.fault.kind, lllg.fault.onset_s, lllg.fault.duration_s) == ("LLLG", 6.5, 0.5)
    assert (slg.fault.kind, slg.fault.onset_s, slg.fault.duration_s) == ("SLG", 6.5, 0.12)
    assert not slg.curtailment and lllg.curtailment


def test_every_key_appears_once_when_serialized():
    cp = configparser.ConfigParser(interpolation=None, strict=True)
    cp.read_string(serialize_scenario(Scenario()))
    written = sorted(f"{sec}.{key}" for sec in cp.sections() for key in cp[sec])
    assert written == sorted(known_keys())
    assert len(written) == len(KEYS)


def test_unknown_key_reports_line():
    with pytest.raises(ScenarioParseError) as exc:
        parse_scenario("[fault]\nkind = SLG\nbogus = 1\n")
    assert exc.value.line == 3 and "fault.bogus" in str(exc.value)


def test_unknown_section_reports_line():
    with pytest.raises(ScenarioParseError) as exc:
        parse_scenario("[sim]\ndt_s = 1e-4\n\n[weather]\nwind = 3\n")
    assert exc.value.line == 4


def test_bad_value_reports_line():
    with pytest.raises(ScenarioParseError) as exc:
        parse_scenario("[sim]\n\nt_end_s = soon\n")
    assert exc.value.line == 3


def test_out_of_range_value_is_value_error():
    with pytest.raises(ScenarioValueError):
        parse_scenario("[fault]\nkind = DLG\n")


def test_override_wins_over_file():
    sc = parse_scenario("[fault]\nkind = SLG\n", ["fault.kind=LLLG", "sim.dt_s=1e-4"])
    assert sc.fault.kind == "LLLG" and sc.dt_s == 1e-4


@pytest.mark.parametrize("item", ["fault.kind", "kind=None", "fault.nothing=1"])
def test_malformed_override(item):
    with pytest.raises(ScenarioParseError):
        parse_scenario("", [item])


def test_with_value_changes_one_field():
    sc = with_value(Scenario(), "fault.duration_s", "0.25")
    assert sc == replace(Scenario(), fault=replace(Scenario().fault, duration_s=0.25))


@settings(max_examples=300)
@given(
    onset=st.floats(0.0, 9.0),
    dur=st.floats(0.0, 2.0),
    kind=st.sampled_from(["None", "SLG", "LLLG"]),
    phase=st.integers(0, 2),
    residual=st.floats(0.0, 1.0),
    curt=st.booleans(),
    edd_pu=st.floats(0.05, 2.0),
    share=st.floats(0.0, 1.0),
    dt=st.floats(1e-6, 1e-4),
    deci=st.integers(1, 100),
)
def test_round_trip_property(onset, dur, kind, phase, residual, curt, edd_pu, share, dt, deci):
    base = Scenario()
    sc = replace(
        base,
        params=replace(base.params, edd_rated_power_pu=edd_pu),
        control=replace(base.control, storage_share=share),
        fault=FaultSpec(kind, onset, dur, residual, phase),
        curtailment=curt,
        dt_s=dt,
        log_decimation=deci,
    )
    assert parse_scenario(serialize_scenario(sc)) == sc
