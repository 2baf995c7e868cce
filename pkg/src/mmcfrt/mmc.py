"""Averaged-value model of one MMC.

All 6N submodule capacitors are lumped into one average voltage v_c with
stored energy 3*N*C*v_c**2. The circulating component of the arm voltage
is held at zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .control import ModulationPair
from .params import SystemParams


class CapacitorDepletionError(RuntimeError):
    """The requested power would drain the capacitors below zero energy."""


@dataclass(frozen=True)
class MmcState:
    cap_voltage_avg_v: float
    i_d_a: float = 0.0
    i_q_a: float = 0.0
    i_dc_a: float = 0.0
    cap_constant_f: float = 3.0 * 76 * 3000e-6

    @property
    def stored_energy_j(self) -> float:
        return self.cap_constant_f * self.cap_voltage_avg_v**2

    @classmethod
    def nominal(cls, params: SystemParams, **kw) -> "MmcState":
        return cls(params.sm_rated_voltage_v, cap_constant_f=params.cap_constant_f, **kw)


@dataclass(frozen=True)
class ArmVoltageDecomposition:
    v_dc_component_v: float
    v_ac_component_v: float
    v_circ_component_v: float = 0.0

    @property
    def upper_v(self) -> float:
        return 0.5 * self.v_dc_component_v - self.v_ac_component_v - self.v_circ_component_v

    @property
    def lower_v(self) -> float:
        return 0.5 * self.v_dc_component_v + self.v_ac_component_v - self.v_circ_component_v

    @classmethod
    def from_arms(cls, upper_v: float, lower_v: float) -> "ArmVoltageDecomposition":
        # With no circulating component the arms determine the other two terms.
        return cls(upper_v + lower_v, 0.5 * (lower_v - upper_v), 0.0)


def synthesize_arm_voltages(mod: ModulationPair, state: MmcState, n: int) -> tuple[float, float]:
    """Inserted (upper, lower) arm voltages of one phase."""
    nv = n * state.cap_voltage_avg_v
    return mod.m_upper * nv, mod.m_lower * nv


def decompose_modulation(upper_v: float, lower_v: float, state: MmcState, n: int):
    """Inverse of synthesis: recover (M_dc, m_ac) from the two arm voltages."""
    nv = n * state.cap_voltage_avg_v
    return 0.5 * (upper_v + lower_v) / nv, 0.5 * (lower_v - upper_v) / nv


def capacitor_dynamics_step(
    state: MmcState, p_in: float, p_out: float, dt: float, params: SystemParams | None = None
) -> MmcState:
    """Advance the lumped capacitor voltage by one step.

    The update is exact in energy: stored energy changes by exactly
    (p_in - p_out) * dt. For the offshore converter p_in is the AC power,
    for the onshore converter it is the DC power.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    k = state.cap_constant_f if params is None else params.cap_constant_f
    v1 = advance_cap_voltage(state.cap_voltage_avg_v, p_in - p_out, dt, k)
    return MmcState(v1, state.i_d_a, state.i_q_a, state.i_dc_a, k)


def advance_cap_voltage(v: float, p_net_w: float, dt: float, cap_constant_f: float) -> float:
    """Scalar form of the exact update, used directly by the engine loop."""
    radicand = v * v + p_net_w * dt / cap_constant_f
    if radicand <= 0:
        raise CapacitorDepletionError(
            f"capacitor depletion: net power {p_net_w:.6g} W over {dt:.3g} s"
        )
    return math.sqrt(radicand)


def ac_power(state: MmcState, v_pcc_dq: tuple[float, float]) -> tuple[float, float]:
    """(P, Q) at the PCC, peak-phase dq convention."""
    v_d, v_q = v_pcc_dq
    i_d, i_q = state.i_d_a, state.i_q_a
    return 1.5 * (v_d * i_d + v_q * i_q), 1.5 * (v_q * i_d - v_d * i_q)
