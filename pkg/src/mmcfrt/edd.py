"""Onshore energy dissipation device: an averaged DC chopper into a resistor."""

from __future__ import annotations

from dataclasses import dataclass

from .params import SystemParams

# Duty reaches 1 at the DC protection ceiling.
_FULL_DUTY_PU = 1.10


@dataclass(frozen=True)
class EddState:
    duty: float = 0.0
    instantaneous_power_w: float = 0.0
    cumulative_energy_j: float = 0.0
    active: bool = False


def edd_control(
    v_dc_pu: float,
    enable_request: bool,
    params: SystemParams,
    active: bool = False,
    hysteresis_pu: float = 0.005,
) -> tuple[float, bool]:
    """Duty command and engagement flag.

    Duty rises linearly from 0 at the activation voltage to 1 at 1.10 p.u.
    The flag latches on above the activation voltage and releases only
    below activation minus the hysteresis band.
    """
    v_on = params.edd_activation_pu
    if not enable_request:
        return 0.0, False
    if v_dc_pu > v_on:
        active = True
    elif v_dc_pu < v_on - hysteresis_pu:
        active = False
    if not active or v_dc_pu <= v_on:
        return 0.0, active
    duty = (v_dc_pu - v_on) / (_FULL_DUTY_PU - v_on)
    return min(duty, 1.0), active


def edd_resistance(params: SystemParams) -> float:
    return params.dc_voltage_v**2 / params.edd_rated_power_w


def edd_power(duty: float, v_dc: float, params: SystemParams) -> float:
    """Dissipated power (W), limited to the rating."""
    if duty <= 0.0:
        return 0.0
    p = duty * v_dc * v_dc / edd_resistance(params)
    return min(p, params.edd_rated_power_w)


def edd_step(state: EddState, duty: float, v_dc: float, dt: float, params: SystemParams,
             active: bool | None = None) -> EddState:
    if dt <= 0:
        raise ValueError("dt must be positive")
    p = edd_power(duty, v_dc, params)
    flag = state.active if active is None else active
    return EddState(duty, p, state.cumulative_energy_j + p * dt, flag)
