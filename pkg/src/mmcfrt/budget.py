"""Closed-form energy bookkeeping for the two-stage ride-through scheme.

These functions need no dynamics. They size the storage/dissipation split
analytically and serve as the independent reference for the simulator.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .network import FaultSpec, exported_power_limit
from .owf import WindProfile, integrate_knots, interpolate, wind_knots
from .params import DEFAULT_CONTROL, ControlParams, SystemParams


def nominal_energy(n: float, c: float, v0: float) -> float:
    """Energy of all 6N SM capacitors at voltage v0: 3*N*C*v0**2."""
    return 3.0 * n * c * v0 * v0


def surplus_power(p_wind: float, p_exported: float) -> float:
    return p_wind - p_exported


def post_fault_voltage(surplus_j: float, n: float, c: float, v0: float) -> float:
    """Average SM voltage after absorbing surplus_j into a converter at v0."""
    radicand = surplus_j / (3.0 * n * c) + v0 * v0
    if radicand < 0:
        raise ValueError(
            f"surplus {surplus_j:.6g} J would drive the capacitor energy below zero"
        )
    return math.sqrt(radicand)


def delta_energy(n: float, c: float, v0: float, v1: float) -> float:
    return 3.0 * n * c * (v1 * v1 - v0 * v0)


def edd_residual(surplus_j: float, stored_j: float) -> float:
    return max(0.0, surplus_j - stored_j)


def power_transfer(v_send: float, v_recv: float, angle_rad: float, reactance_ohm: float) -> float:
    if reactance_ohm <= 0:
        raise ValueError("reactance must be positive")
    return v_send * v_recv * math.sin(angle_rad) / reactance_ohm


@dataclass(frozen=True)
class EnergyBudget:
    """Energy flows over the window [t0_s, t1_s] (J).

    closure_residual_j is the surplus integral minus every sink listed here.
    """

    surplus_integral_j: float
    delta_e_rec_j: float
    delta_e_sec_j: float
    delta_e_dclink_j: float
    edd_energy_j: float
    losses_j: float = 0.0
    delta_e_inductive_j: float = 0.0
    t0_s: float = 0.0
    t1_s: float = 0.0

    @property
    def stored_j(self) -> float:
        return self.delta_e_rec_j + self.delta_e_sec_j + self.delta_e_dclink_j

    @property
    def closure_residual_j(self) -> float:
        sinks = self.stored_j + self.delta_e_inductive_j + self.edd_energy_j + self.losses_j
        return self.surplus_integral_j - sinks

    @property
    def relative_closure(self) -> float:
        if self.surplus_integral_j == 0:
            return 0.0 if self.closure_residual_j == 0 else math.inf
        return abs(self.closure_residual_j) / abs(self.surplus_integral_j)

    def as_record(self) -> dict:
        rec = asdict(self)
        rec["stored_j"] = self.stored_j
        rec["closure_residual_j"] = self.closure_residual_j
        return rec


@dataclass(frozen=True)
class EddSizing:
    surplus_j: float
    rec_storable_j: float
    sec_storable_j: float
    required_energy_j: float
    peak_residual_power_w: float
    rated_power_w: float
    ceiling_time_s: float | None
    assumptions: tuple[str, ...]

    @property
    def stored_j(self) -> float:
        return self.rec_storable_j + self.sec_storable_j

    @property
    def feasible(self) -> bool:
        return self.peak_residual_power_w <= self.rated_power_w

    @property
    def residual_fraction(self) -> float:
        return self.required_energy_j / self.surplus_j if self.surplus_j > 0 else 0.0


def _surplus_knots(params: SystemParams, fault: FaultSpec, wind: WindProfile):
    t0, t1 = fault.onset_s, fault.clear_s
    knots = wind_knots(t0, t1, wind)
    limit = exported_power_limit(fault, t0, params.rated_power_w).applied_w
    return knots, limit


def size_edd(
    params: SystemParams,
    fault: FaultSpec,
    wind: WindProfile | None = None,
    control: ControlParams = DEFAULT_CONTROL,
) -> EddSizing:
    """Energy and peak power the EDD must handle for ``fault``.

    The surplus is the wind output above the export limit over the fault
    window. The onshore converter takes ``storage_share`` of it until its
    energy ceiling; the offshore converter, whose capacitors follow the DC
    voltage, holds the energy it has at the EDD activation voltage. The DC
    cable capacitance is ignored (conservative).
    """
    if wind is None:
        wind = WindProfile.from_params(params)
    e_nom = params.nominal_energy_j
    assumptions = (
        f"wind ramp: rated for {wind.comm_delay_s * 1e3:.0f} ms, "
        f"then linear to zero over {wind.rampdown_s * 1e3:.0f} ms"
        + ("" if wind.curtailment_enabled else " (curtailment disabled)"),
        f"onshore storage share {control.storage_share:.2f} up to "
        f"{control.storage_ceiling_pu:.2f} p.u. energy",
        "offshore storage at the EDD activation voltage; DC cable buffer ignored",
    )
    if not fault.present:
        return EddSizing(0.0, 0.0, 0.0, 0.0, 0.0, params.edd_rated_power_w, None, assumptions)

    knots, limit = _surplus_knots(params, fault, wind)
    t0, t1 = fault.onset_s, fault.clear_s
    surplus = integrate_knots(knots, t0, t1, level=limit)

    energy_cap_pu = params.cap_overvoltage_limit**2
    rec_margin = e_nom * max(0.0, min(control.storage_ceiling_pu, energy_cap_pu) - 1.0)
    share = control.storage_share
    rec = min(share * surplus, rec_margin)
    sec_margin = e_nom * max(0.0, min(params.edd_activation_pu**2, energy_cap_pu) - 1.0)
    sec = min(surplus - rec, sec_margin)
    required = edd_residual(surplus, rec + sec)

    # Instant the onshore converter reaches its ceiling (bisection on the
    # monotone cumulative surplus).
    t_ceiling = None
    if share > 0 and share * surplus > rec_margin:
        lo, hi = t0, t1
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if share * integrate_knots(knots, t0, mid, level=limit) < rec_margin:
                lo = mid
            else:
                hi = mid
        t_ceiling = hi

    def ps(t):
        return max(0.0, interpolate(knots, t) - limit)

    probe = [t0, t1] + [k[0] for k in knots if t0 < k[0] < t1]
    if t_ceiling is not None:
        probe.append(t_ceiling)
    peak = 0.0
    for t in probe:
        before = t_ceiling is None or t <= t_ceiling
        after = t_ceiling is not None and t >= t_ceiling
        if before:
            peak = max(peak, (1.0 - share) * ps(t))
        if after:
            peak = max(peak, ps(t))
    if required == 0.0:
        peak = 0.0
    return EddSizing(
        surplus_j=surplus,
        rec_storable_j=rec,
        sec_storable_j=max(0.0, sec),
        required_energy_j=required,
        peak_residual_power_w=peak,
        rated_power_w=params.edd_rated_power_w,
        ceiling_time_s=t_ceiling,
        assumptions=assumptions,
    )
