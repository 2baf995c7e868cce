"""Converter controls: PLL, outer and inner loops, V/f control, the
two-stage energy controller and modulation synthesis.

Small per-loop states are NamedTuples so the step functions stay pure and
cheap; :class:`ControllerState` bundles them for one converter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

from .params import TWO_PI, ControlParams, SystemParams

_S23 = 2.0 / 3.0
# Operating range of the DC modulation index.
MDC_MIN, MDC_MAX = 0.3, 0.6
_PH = 2.0 * math.pi / 3.0


class Stage(str, Enum):
    NORMAL = "Normal"
    STORING = "Storing"
    DISSIPATING = "Dissipating"


# Allowed stage moves; Dissipating can only be reached through Storing.
ALLOWED_TRANSITIONS = {
    (Stage.NORMAL, Stage.STORING),
    (Stage.STORING, Stage.DISSIPATING),
    (Stage.STORING, Stage.NORMAL),
    (Stage.DISSIPATING, Stage.NORMAL),
}


class ModulationPair(NamedTuple):
    m_upper: float
    m_lower: float
    clamped: bool = False


class PllState(NamedTuple):
    angle: float
    integrator: float = 0.0
    omega: float = TWO_PI * 50.0


class OuterState(NamedTuple):
    vdc_integrator: float = 0.0
    q_integrator: float = 0.0


class InnerState(NamedTuple):
    id_integrator: float = 0.0
    iq_integrator: float = 0.0


class VfState(NamedTuple):
    angle: float = 0.0
    integrator: float = 0.0


class EnergyDecision(NamedTuple):
    m_dc: float
    stage: Stage
    edd_enable_request: bool
    p_store_w: float
    ceiling_reached: bool


@dataclass
class ControllerState:
    """Mutable controller bundle for one converter, owned by the engine."""

    pll: PllState
    outer: OuterState = OuterState()
    inner: InnerState = InnerState()
    vf: VfState = VfState()
    mdc_value: float = 0.5
    stage: Stage = Stage.NORMAL

    @property
    def pll_angle_rad(self):
        return self.pll.angle

    @property
    def pll_integrator(self):
        return self.pll.integrator

    @property
    def outer_vdc_integrator(self):
        return self.outer.vdc_integrator

    @property
    def outer_q_integrator(self):
        return self.outer.q_integrator

    @property
    def inner_id_integrator(self):
        return self.inner.id_integrator

    @property
    def inner_iq_integrator(self):
        return self.inner.iq_integrator


@dataclass(frozen=True)
class Gains:
    """Gains derived once from the system and control parameters."""

    omega0: float
    pll_kp: float
    pll_ki: float
    pll_freewheel_v: float
    vdc_kp: float
    vdc_ki: float
    q_kp: float
    q_ki: float
    i_max: float
    inner_kp: float
    inner_ki: float
    omega_l: float
    vf_kp: float
    vf_ki: float
    v_dc_ref: float
    s_base: float
    i_base: float

    @classmethod
    def build(cls, params: SystemParams, control: ControlParams) -> "Gains":
        wn = TWO_PI * control.pll_natural_hz
        # Inertia of the DC link as seen by the onshore voltage loop: cable
        # capacitance plus the offshore capacitors, which follow the DC voltage.
        c_pp = 0.5 * params.dc_link_capacitance_f
        h_dc = (0.5 * c_pp * params.dc_voltage_v**2 + params.nominal_energy_j) / params.rated_power_w
        vdc_kp = 2.0 * h_dc / control.outer_vdc_tau_s
        l_ac, r_ac = params.ac_inductance_h, params.ac_resistance_ohm
        return cls(
            omega0=params.omega,
            pll_kp=2.0 * control.pll_damping * wn,
            pll_ki=wn * wn,
            pll_freewheel_v=control.pll_freewheel_pu * params.ac_phase_peak_v,
            vdc_kp=vdc_kp,
            vdc_ki=vdc_kp / (4.0 * control.outer_vdc_tau_s),
            q_kp=control.outer_q_kp,
            q_ki=1.0 / control.outer_q_tau_s,
            i_max=control.current_limit_pu,
            inner_kp=l_ac / control.inner_tau_s,
            inner_ki=r_ac / control.inner_tau_s,
            omega_l=params.omega * l_ac,
            vf_kp=control.vf_kp,
            vf_ki=control.vf_kp / control.vf_bus_tau_s,
            v_dc_ref=params.dc_voltage_v,
            s_base=params.rated_power_w,
            i_base=params.rated_peak_current_a,
        )


def park(va: float, vb: float, vc: float, theta: float) -> tuple[float, float]:
    """Amplitude-invariant Park transform; a cosine at angle theta maps to (V, 0)."""
    ca, cb, cc = math.cos(theta), math.cos(theta - _PH), math.cos(theta + _PH)
    sa, sb, sc = math.sin(theta), math.sin(theta - _PH), math.sin(theta + _PH)
    d = _S23 * (va * ca + vb * cb + vc * cc)
    q = -_S23 * (va * sa + vb * sb + vc * sc)
    return d, q


def pll_step(v_abc, state: PllState, dt: float, gains: Gains) -> PllState:
    """Synchronous-frame PLL on the normalised q-axis voltage.

    Below the free-wheel magnitude the error is forced to zero, so the angle
    keeps advancing at the last integrator frequency.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    d, q = park(v_abc[0], v_abc[1], v_abc[2], state.angle)
    mag = math.hypot(d, q)
    err = q / mag if mag > gains.pll_freewheel_v else 0.0
    integ = state.integrator + gains.pll_ki * err * dt
    omega = gains.omega0 + gains.pll_kp * err + integ
    angle = math.fmod(state.angle + omega * dt, TWO_PI)
    return PllState(angle, integ, omega)


def _pi_clamped(err, integ, kp, ki, dt, lo, hi):
    """PI with conditional integration; returns (output, new integrator)."""
    out = kp * err + integ
    if out > hi:
        if err < 0:
            integ += ki * err * dt
        return hi, integ
    if out < lo:
        if err > 0:
            integ += ki * err * dt
        return lo, integ
    integ += ki * err * dt
    out = kp * err + integ
    return min(max(out, lo), hi), integ


def outer_loop_step(
    v_dc_meas: float,
    v_dc_ref: float,
    q_meas: float,
    q_ref: float,
    state: OuterState,
    dt: float,
    gains: Gains,
    id_cap: float | None = None,
) -> tuple[float, float, OuterState]:
    """DC-voltage and reactive-power loops of the onshore converter.

    Returns (i_d_ref, i_q_ref) in p.u. of rated peak current. A DC voltage
    above reference raises i_d_ref so more power is exported. ``id_cap``
    optionally tightens the positive i_d limit (export-power limit).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    i_max = gains.i_max
    hi = i_max if id_cap is None else max(0.0, min(i_max, id_cap))
    e_v = (v_dc_meas - v_dc_ref) / v_dc_ref
    i_d, vi = _pi_clamped(e_v, state.vdc_integrator, gains.vdc_kp, gains.vdc_ki, dt, -i_max, hi)
    # Q = -1.5 * v_d * i_q, so the q loop acts on the negated error.
    e_q = -(q_ref - q_meas) / gains.s_base
    i_q, qi = _pi_clamped(e_q, state.q_integrator, gains.q_kp, gains.q_ki, dt, -i_max, i_max)
    return i_d, i_q, OuterState(vi, qi)


def inner_current_loop(
    i_dq_meas: tuple[float, float],
    i_dq_ref: tuple[float, float],
    v_pcc_dq: tuple[float, float],
    state: InnerState,
    dt: float,
    gains: Gains,
    n_vc: float,
    m_limit: float = 0.5,
) -> tuple[float, float, InnerState, bool]:
    """Decoupled dq current PI; returns AC modulation (m_d, m_q) normalised by N*v_c.

    The modulation magnitude is limited to ``m_limit`` with the integrators
    frozen while limited.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    i_d, i_q = i_dq_meas
    e_d = i_dq_ref[0] - i_d
    e_q = i_dq_ref[1] - i_q
    kp, ki, wl = gains.inner_kp, gains.inner_ki, gains.omega_l
    int_d = state.id_integrator + ki * e_d * dt
    int_q = state.iq_integrator + ki * e_q * dt
    v_d = v_pcc_dq[0] - wl * i_q + kp * e_d + int_d
    v_q = v_pcc_dq[1] + wl * i_d + kp * e_q + int_q
    m_d, m_q = v_d / n_vc, v_q / n_vc
    mag = math.hypot(m_d, m_q)
    if mag > m_limit:
        scale = m_limit / mag
        return m_d * scale, m_q * scale, state, True
    return m_d, m_q, InnerState(int_d, int_q), False


def vf_control(
    v_owf_abc,
    f_ref: float,
    v_ref: float,
    state: VfState,
    dt: float,
    gains: Gains,
    n_vc: float,
    m_limit: float = 0.5,
) -> tuple[float, VfState]:
    """Islanded V/f control of the offshore converter.

    The angle ramps open loop at f_ref; a PI with feedforward sets the
    voltage amplitude. Returns (m_ac amplitude, new state). Nothing from the
    onshore side enters.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    va, vb, vc = v_owf_abc
    v_meas = math.sqrt(_S23 * (va * va + vb * vb + vc * vc))
    err = (v_ref - v_meas) / v_ref
    integ = state.integrator + gains.vf_ki * err * dt
    u = v_ref * (1.0 + gains.vf_kp * err + integ)
    m = u / n_vc
    if m > m_limit:
        m = m_limit
        integ = state.integrator
    angle = math.fmod(state.angle + TWO_PI * f_ref * dt, TWO_PI)
    return m, VfState(angle, integ)


def energy_controller_step(
    p_wind: float,
    p_exported: float,
    v_dc_pu: float,
    v_cap_avg: float,
    stage: Stage,
    params: SystemParams,
    control: ControlParams,
    dt: float,
    *,
    enabled: bool = True,
    i_d_ref_pu: float = 0.0,
) -> EnergyDecision:
    """Two-stage energy controller of the onshore converter.

    Normal: the converter holds its nominal energy, M_dc = V_dc/(2 N v_c).
    Storing: entered when V_dc passes the trigger with positive surplus;
    the capacitors take ``storage_share`` of the surplus.
    Dissipating: entered from Storing when the energy ceiling binds or V_dc
    passes the EDD threshold; the EDD is enabled.
    Back to Normal once the surplus is negative and V_dc is back in band;
    stored excess is then returned through the DC-voltage loop.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if v_cap_avg <= 0:
        raise ValueError("controller fault: non-positive capacitor voltage")
    cap_k = params.cap_constant_f
    energy = cap_k * v_cap_avg * v_cap_avg
    e_nom = params.nominal_energy_j
    e_ceil = control.storage_ceiling_pu * e_nom
    p_s = p_wind - p_exported
    tau = control.energy_tau_s
    m_dc = v_dc_pu * params.dc_voltage_v / (2.0 * params.sm_per_arm * v_cap_avg)
    m_dc = min(max(m_dc, MDC_MIN), MDC_MAX)

    if not enabled:
        p_store = _normal_store(energy, e_nom, tau, i_d_ref_pu, params, control)
        return EnergyDecision(m_dc, Stage.NORMAL, True, p_store, False)

    share_p = control.storage_share * max(p_s, 0.0)
    hold_p = (e_ceil - energy) / tau
    ceiling = p_s > 0 and hold_p <= share_p or energy >= e_ceil * (1.0 - 1e-3)
    release = p_s < 0 and v_dc_pu < 1.0 + control.release_band_pu

    # At most one transition per call, so Dissipating is always preceded
    # by at least one Storing step.
    new = stage
    if stage is Stage.NORMAL:
        if v_dc_pu > control.storage_trigger_pu and p_s > 0:
            new = Stage.STORING
    elif stage is Stage.STORING:
        if ceiling or v_dc_pu > params.edd_activation_pu:
            new = Stage.DISSIPATING
        elif release:
            new = Stage.NORMAL
    elif release:
        new = Stage.NORMAL

    if new is Stage.NORMAL:
        p_store = _normal_store(energy, e_nom, tau, i_d_ref_pu, params, control)
    else:
        p_store = min(share_p, hold_p)
    return EnergyDecision(m_dc, new, new is Stage.DISSIPATING, p_store, ceiling)


def _normal_store(energy, e_nom, tau, i_d_ref_pu, params, control):
    """Energy-hold power (W, positive = charging) for the Normal stage.

    Discharge is throttled as the AC current reference nears its limit so
    returning energy never outruns the export capacity.
    """
    p_lim = control.discharge_limit_pu * params.rated_power_w
    p = (e_nom - energy) / tau
    if p >= 0:
        return min(p, p_lim)
    band = control.discharge_band_pu
    room = (control.current_limit_pu - abs(i_d_ref_pu)) / band if band > 0 else 1.0
    room = min(max(room, 0.0), 1.0)
    return max(p, -p_lim * room)


def offshore_m_dc(v_dc_v: float, n: int, v_cap_avg: float) -> float:
    """Offshore converter DC modulation: no energy-controller override, so
    the arm sum simply tracks the DC voltage and the capacitors follow it."""
    return v_dc_v / (2.0 * n * v_cap_avg)


def combine_modulation(m_dc: float, m_ac: float) -> ModulationPair:
    """Upper arm M_dc - m_ac, lower arm M_dc + m_ac, each limited to [0, 1]."""
    mu = m_dc - m_ac
    ml = m_dc + m_ac
    clamped = False
    if mu < 0.0 or mu > 1.0:
        mu = min(max(mu, 0.0), 1.0)
        clamped = True
    if ml < 0.0 or ml > 1.0:
        ml = min(max(ml, 0.0), 1.0)
        clamped = True
    return ModulationPair(mu, ml, clamped)
