import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmcfrt.network import (
    NO_FAULT,
    DcLinkState,
    FaultSpec,
    dc_link_step,
    exported_power_limit,
    grid_voltages,
    positive_sequence,
    steady_line_current,
)
from mmcfrt.params import DEFAULT_PARAMS

P = DEFAULT_PARAMS
VPK = P.ac_phase_peak_v


def test_outside_window_is_balanced():
    f = FaultSpec("LLLG", 6.5, 0.5)
    va, vb, vc = grid_voltages(6.0, f, P)
    assert va + vb + vc == pytest.approx(0.0, abs=1e-6)
    assert max(abs(va), abs(vb), abs(vc)) <= VPK
    assert grid_voltages(6.0, f, P) == grid_voltages(6.0, NO_FAULT, P)


def test_lllg_bolted_zeroes_all_phases():
    assert grid_voltages(6.7, FaultSpec("LLLG", 6.5, 0.5), P) == (0.0, 0.0, 0.0)


def test_slg_zeroes_only_faulted_phase():
    f = FaultSpec("SLG", 6.5, 0.12, faulted_phase=0)
    va, vb, vc = grid_voltages(6.55, f, P)
    _, vb0, vc0 = grid_voltages(6.55, NO_FAULT, P)
    assert va == 0.0 and vb == vb0 and vc == vc0


def test_fault_window_edges():
    f = FaultSpec("LLLG", 6.5, 0.5)
    assert f.active(6.5) and not f.active(7.0) and not f.active(6.4999)


@settings(max_examples=1000)
@given(
    t=st.floats(0.0, 20.0),
    onset=st.floats(0.0, 10.0),
    dur=st.floats(0.0, 2.0),
    phase=st.integers(0, 2),
    r=st.floats(0.0, 1.0),
)
def test_slg_phase_purity(t, onset, dur, phase, r):
    f = FaultSpec("SLG", onset, dur, residual_factor=r, faulted_phase=phase)
    faulted = grid_voltages(t, f, P)
    healthy = grid_voltages(t, NO_FAULT, P)
    for k in range(3):
        if k != phase or not f.active(t):
            assert faulted[k] == healthy[k]
    # Evaluation is idempotent.
    assert grid_voltages(t, f, P) == faulted


def test_export_limits():
    assert exported_power_limit(FaultSpec("LLLG", 6.5, 0.5), 6.6, 420e6).applied_w == 0.0
    assert exported_power_limit(NO_FAULT, 6.6, 420e6).applied_w == 420e6


def test_slg_readings_reported_together():
    f = FaultSpec("SLG", 6.5, 0.12)
    lim = exported_power_limit(f, 6.55, 420e6)
    assert lim.sequence_w == pytest.approx(280e6)
    assert lim.two_thirds_w == pytest.approx(140e6)
    assert lim.applied_w == lim.two_thirds_w
    seq = FaultSpec("SLG", 6.5, 0.12, slg_reading="sequence")
    assert exported_power_limit(seq, 6.55, 420e6).applied_w == pytest.approx(280e6)


def test_positive_sequence_of_bolted_slg():
    v1 = positive_sequence(6.55, FaultSpec("SLG", 6.5, 0.12, faulted_phase=1))
    assert abs(v1) == pytest.approx(2.0 / 3.0)


@pytest.mark.parametrize(
    "kwargs",
    [{"kind": "DLG"}, {"onset_s": -1.0}, {"residual_factor": 1.5}, {"faulted_phase": 3}, {"slg_reading": "x"}],
)
def test_fault_spec_rejects(kwargs):
    with pytest.raises(ValueError):
        FaultSpec(**kwargs)


def test_link_unchanged_without_injection():
    s = DcLinkState(640e3, 640e3, 0.0, P.terminal_capacitance_f)
    assert dc_link_step(s, 0.0, 0.0, 50e-6, P) == s


def test_link_charging_example():
    # Equal injections keep the cable current at zero, so each terminal
    # integrates its own current: 656 A for 10 ms into 100 uF.
    s = DcLinkState(640e3, 640e3, 0.0, 100e-6)
    for _ in range(200):
        s = dc_link_step(s, 656.0, 656.0, 50e-6, P)
    assert s.v_dc_onshore_v - 640e3 == pytest.approx(65.6e3, rel=1e-9)
    assert s.i_line_a == pytest.approx(0.0, abs=1e-9)


def test_link_steady_state_ohm_relation():
    p_send = 420e6
    i = steady_line_current(P, p_send, 640e3)
    v_off = 640e3 + P.dc_line_resistance_ohm * i
    s = DcLinkState(640e3, v_off, i, P.terminal_capacitance_f)
    s1 = dc_link_step(s, -i, i, 50e-6, P)
    assert s1.v_dc_offshore_v - s1.v_dc_onshore_v == pytest.approx(i * P.dc_line_resistance_ohm)
    assert v_off * i == pytest.approx(p_send)


@settings(max_examples=1000)
@given(
    v_on=st.floats(5e5, 7.5e5), v_off=st.floats(5e5, 7.5e5), i0=st.floats(-2e3, 2e3),
    j_on=st.floats(-2e3, 2e3), j_off=st.floats(-2e3, 2e3), dt=st.floats(1e-6, 1e-4),
)
def test_link_power_balance(v_on, v_off, i0, j_on, j_off, dt):
    s0 = DcLinkState(v_on, v_off, i0, P.terminal_capacitance_f)
    s1 = dc_link_step(s0, j_on, j_off, dt, P)
    e = lambda s: s.stored_energy_j + s.inductive_energy_j(P)  # noqa: E731
    avg_on = 0.5 * (s0.v_dc_onshore_v + s1.v_dc_onshore_v)
    avg_off = 0.5 * (s0.v_dc_offshore_v + s1.v_dc_offshore_v)
    i_avg = 0.5 * (s0.i_line_a + s1.i_line_a)
    inflow = (j_on * avg_on + j_off * avg_off - P.dc_line_resistance_ohm * i_avg**2) * dt
    assert e(s1) - e(s0) == pytest.approx(inflow, abs=1e-9 * e(s0))


def test_stored_energy_formula():
    s = DcLinkState(640e3, 641e3, 0.0, 2e-5)
    assert s.stored_energy_j == pytest.approx(0.5 * 2e-5 * (640e3**2 + 641e3**2), rel=1e-12)
    assert math.isclose(DcLinkState(1.0, 1.0, 10.0, 1.0).inductive_energy_j(P), 0.5 * 0.01 * 100)
