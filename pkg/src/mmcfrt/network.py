"""Onshore grid source with fault injection, and the DC link.

The grid is a stiff Thevenin source behind the converter transformer. The
DC link is two lumped terminal capacitances joined by a series R-L cable.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple

from .params import SystemParams

FAULT_KINDS = ("None", "SLG", "LLLG")
SLG_READINGS = ("two_thirds", "sequence")

_A = cmath.exp(2j * math.pi / 3.0)
_PHASE_SHIFT = (0.0, -2.0 * math.pi / 3.0, 2.0 * math.pi / 3.0)


@dataclass(frozen=True)
class FaultSpec:
    kind: str = "None"
    onset_s: float = 6.5
    duration_s: float = 0.5
    residual_factor: float = 0.0
    faulted_phase: int = 0
    # Which exported-power reading drives the dynamics for SLG faults:
    # "two_thirds" removes 2/3 of rated export, "sequence" keeps |V1| * rated.
    slg_reading: str = "two_thirds"

    def __post_init__(self):
        if self.kind not in FAULT_KINDS:
            raise ValueError(f"fault kind must be one of {FAULT_KINDS}, got {self.kind!r}")
        if self.onset_s < 0 or self.duration_s < 0:
            raise ValueError("fault onset and duration must be >= 0")
        if not 0.0 <= self.residual_factor <= 1.0:
            raise ValueError("residual_factor must lie in [0, 1]")
        if self.faulted_phase not in (0, 1, 2):
            raise ValueError("faulted_phase must be 0, 1 or 2")
        if self.slg_reading not in SLG_READINGS:
            raise ValueError(f"slg_reading must be one of {SLG_READINGS}")

    @property
    def present(self) -> bool:
        return self.kind != "None" and self.duration_s > 0

    @property
    def clear_s(self) -> float:
        return self.onset_s + self.duration_s

    def active(self, t: float) -> bool:
        return self.present and self.onset_s <= t < self.onset_s + self.duration_s

    def phase_factors(self, t: float) -> tuple[float, float, float]:
        """Retained voltage fraction of each phase at time t."""
        if not self.active(t):
            return (1.0, 1.0, 1.0)
        r = self.residual_factor
        if self.kind == "LLLG":
            return (r, r, r)
        factors = [1.0, 1.0, 1.0]
        factors[self.faulted_phase] = r
        return (factors[0], factors[1], factors[2])


NO_FAULT = FaultSpec()


def grid_voltages(t: float, fault: FaultSpec, params: SystemParams) -> tuple[float, float, float]:
    """Instantaneous PCC source voltages (V), phase a aligned with cos(w t)."""
    vpk = params.ac_phase_peak_v
    wt = params.omega * t
    ka, kb, kc = fault.phase_factors(t)
    # Healthy phases are computed exactly as in the fault-free case.
    va = vpk * math.cos(wt + _PHASE_SHIFT[0])
    vb = vpk * math.cos(wt + _PHASE_SHIFT[1])
    vc = vpk * math.cos(wt + _PHASE_SHIFT[2])
    if ka != 1.0:
        va *= ka
    if kb != 1.0:
        vb *= kb
    if kc != 1.0:
        vc *= kc
    return va, vb, vc


def positive_sequence(t: float, fault: FaultSpec) -> complex:
    """Positive-sequence PCC phasor relative to the healthy phase-a phasor."""
    ka, kb, kc = fault.phase_factors(t)
    if ka == kb == kc:
        return complex(ka)
    va = ka
    vb = kb * cmath.exp(1j * _PHASE_SHIFT[1])
    vc = kc * cmath.exp(1j * _PHASE_SHIFT[2])
    return (va + _A * vb + _A * _A * vc) / 3.0


class ExportLimit(NamedTuple):
    """Maximum exportable power (W) under the present grid voltage."""

    applied_w: float
    sequence_w: float
    two_thirds_w: float


def exported_power_limit(fault: FaultSpec, t: float, rated: float) -> ExportLimit:
    if not fault.active(t):
        return ExportLimit(rated, rated, rated)
    seq = rated * abs(positive_sequence(t, fault))
    if fault.kind == "LLLG":
        return ExportLimit(seq, seq, seq)
    # Bolted single-phase fault: two thirds of the export is lost.
    two_thirds = rated * (1.0 - (2.0 / 3.0) * (1.0 - fault.residual_factor))
    applied = two_thirds if fault.slg_reading == "two_thirds" else seq
    return ExportLimit(applied, seq, two_thirds)


@dataclass(frozen=True)
class DcLinkState:
    v_dc_onshore_v: float
    v_dc_offshore_v: float
    i_line_a: float
    capacitance_f: float

    @property
    def stored_energy_j(self) -> float:
        c = self.capacitance_f
        return 0.5 * c * (self.v_dc_onshore_v**2 + self.v_dc_offshore_v**2)

    def inductive_energy_j(self, params: SystemParams) -> float:
        return 0.5 * params.dc_line_inductance_h * self.i_line_a**2


def dc_link_step(
    state: DcLinkState,
    i_inj_onshore: float,
    i_inj_offshore: float,
    dt: float,
    params: SystemParams,
) -> DcLinkState:
    """Advance the link one step with the trapezoidal rule.

    Injected currents are held over the step and flow into the terminal
    capacitances; the cable current flows offshore -> onshore.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    c = state.capacitance_f
    a = dt / (2.0 * c)
    b = dt / (2.0 * params.dc_line_inductance_h)
    r = params.dc_line_resistance_ohm
    v_on0, v_off0, i0 = state.v_dc_onshore_v, state.v_dc_offshore_v, state.i_line_a
    delta0 = v_off0 - v_on0
    ab2 = 2.0 * a * b
    i1 = (
        i0 * (1.0 - b * r - ab2) + 2.0 * b * delta0 + ab2 * (i_inj_offshore - i_inj_onshore)
    ) / (1.0 + b * r + ab2)
    isum = i0 + i1
    v_on1 = v_on0 + a * isum + 2.0 * a * i_inj_onshore
    v_off1 = v_off0 - a * isum + 2.0 * a * i_inj_offshore
    return DcLinkState(v_on1, v_off1, i1, c)


def steady_line_current(params: SystemParams, p_sending_w: float, v_receiving_v: float) -> float:
    """Cable current when p_sending_w leaves the offshore terminal."""
    r = params.dc_line_resistance_ohm
    v = v_receiving_v
    return (-v + math.sqrt(v * v + 4.0 * r * p_sending_w)) / (2.0 * r)
