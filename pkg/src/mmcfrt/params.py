"""System ratings, controller settings and the per-unit system.

Everything here is immutable. A :class:`SystemParams` instance must pass
:func:`validate` before a simulation is allowed to start.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

TWO_PI = 2.0 * math.pi

# Quantity kinds understood by to_pu / from_pu.
QUANTITY_KINDS = (
    "power",
    "dc_voltage",
    "ac_voltage",
    "current",
    "impedance",
    "time",
    "energy",
)


@dataclass(frozen=True)
class SystemParams:
    """Ratings of the +-320 kV / 420 MW point-to-point link (SI units).

    Table values: 420 MW, 640 kV pole-to-pole, 76 SMs per arm, 3000 uF,
    8.42 kV per SM, 50 Hz. The AC network, cable and EDD entries are
    assumptions because no data is published for them.
    """

    rated_power_w: float = 420e6
    dc_voltage_v: float = 640e3
    sm_per_arm: int = 76
    sm_capacitance_f: float = 3000e-6
    sm_rated_voltage_v: float = 8.42e3
    grid_frequency_hz: float = 50.0
    # Converter-side line-to-line RMS voltage; doubles as the AC voltage base.
    ac_voltage_v: float = 320e3
    # 0.08 p.u. on the 320 kV / 420 MVA base.
    arm_inductance_h: float = 0.08 * (320e3**2 / 420e6) / (TWO_PI * 50.0)
    transformer_reactance_pu: float = 0.12
    ac_resistance_pu: float = 0.005
    # Per pole; pole-to-pole equivalent is half of it. Sized so the stored
    # link energy at 640 kV equals 15 ms of rated power.
    dc_link_capacitance_f: float = 4.0 * 0.015 * 420e6 / 640e3**2
    dc_line_resistance_ohm: float = 2.0
    dc_line_inductance_h: float = 0.01
    cap_overvoltage_limit: float = 1.5
    edd_activation_pu: float = 1.06
    dc_overvoltage_limit_pu: float = 1.1
    # EDD rating as a fraction of rated power.
    edd_rated_power_pu: float = 0.9
    comm_delay_s: float = 0.040
    turbine_rampdown_s: float = 0.22

    @property
    def omega(self) -> float:
        return TWO_PI * self.grid_frequency_hz

    @property
    def nominal_energy_j(self) -> float:
        """Nominal SM-capacitor energy of one converter, 3*N*C*V0**2."""
        n, c, v0 = self.sm_per_arm, self.sm_capacitance_f, self.sm_rated_voltage_v
        return 3.0 * n * c * v0 * v0

    @property
    def edd_rated_power_w(self) -> float:
        return self.edd_rated_power_pu * self.rated_power_w

    @property
    def cap_constant_f(self) -> float:
        """3*N*C, the factor relating average SM voltage squared to energy."""
        return 3.0 * self.sm_per_arm * self.sm_capacitance_f

    @property
    def base(self) -> "PerUnitBase":
        return PerUnitBase.from_params(self)

    @property
    def ac_phase_peak_v(self) -> float:
        return self.ac_voltage_v * math.sqrt(2.0 / 3.0)

    @property
    def ac_inductance_h(self) -> float:
        """Series inductance seen by the AC current: half the arm plus transformer."""
        zb = self.base.z_base_ohm
        return 0.5 * self.arm_inductance_h + self.transformer_reactance_pu * zb / self.omega

    @property
    def ac_resistance_ohm(self) -> float:
        return self.ac_resistance_pu * self.base.z_base_ohm

    @property
    def terminal_capacitance_f(self) -> float:
        """Pole-to-pole capacitance lumped at each of the two DC terminals."""
        return 0.25 * self.dc_link_capacitance_f

    @property
    def rated_peak_current_a(self) -> float:
        """Peak phase current delivering rated power at rated AC voltage."""
        return 2.0 * self.rated_power_w / (3.0 * self.ac_phase_peak_v)


@dataclass(frozen=True)
class PerUnitBase:
    s_base_va: float
    v_dc_base_v: float
    v_ac_base_v: float
    i_base_a: float
    z_base_ohm: float
    t_base_s: float
    # Energy base of s_base * 1 s; MMC energies are additionally reported
    # against the nominal converter energy (see SystemParams.nominal_energy_j).
    e_base_j: float

    @classmethod
    def from_params(cls, p: SystemParams) -> "PerUnitBase":
        return cls.build(p.rated_power_w, p.dc_voltage_v, p.ac_voltage_v, 1.0 / p.omega)

    @classmethod
    def build(cls, s_base_va, v_dc_base_v, v_ac_base_v, t_base_s=1.0) -> "PerUnitBase":
        return cls(
            s_base_va=s_base_va,
            v_dc_base_v=v_dc_base_v,
            v_ac_base_v=v_ac_base_v,
            i_base_a=s_base_va / (math.sqrt(3.0) * v_ac_base_v),
            z_base_ohm=v_ac_base_v**2 / s_base_va,
            t_base_s=t_base_s,
            e_base_j=s_base_va * 1.0,
        )

    def _base_of(self, kind: str) -> float:
        try:
            return {
                "power": self.s_base_va,
                "dc_voltage": self.v_dc_base_v,
                "ac_voltage": self.v_ac_base_v,
                "current": self.i_base_a,
                "impedance": self.z_base_ohm,
                "time": self.t_base_s,
                "energy": self.e_base_j,
            }[kind]
        except KeyError:
            raise ValueError(f"unknown quantity kind {kind!r}") from None


def to_pu(value: float, base: PerUnitBase, kind: str) -> float:
    return value / base._base_of(kind)


def from_pu(value: float, base: PerUnitBase, kind: str) -> float:
    return value * base._base_of(kind)


@dataclass(frozen=True)
class ValidationReport:
    errors: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.errors

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "pass"
        return "fail: " + "; ".join(self.errors)


_POSITIVE_FIELDS = {
    "rated_power_w": "power",
    "dc_voltage_v": "DC voltage",
    "sm_capacitance_f": "capacitance",
    "sm_rated_voltage_v": "SM rated voltage",
    "grid_frequency_hz": "frequency",
    "ac_voltage_v": "AC voltage",
    "arm_inductance_h": "arm inductance",
    "transformer_reactance_pu": "transformer reactance",
    "ac_resistance_pu": "AC resistance",
    "dc_link_capacitance_f": "DC-link capacitance",
    "dc_line_resistance_ohm": "DC line resistance",
    "dc_line_inductance_h": "DC line inductance",
    "cap_overvoltage_limit": "capacitor overvoltage limit",
    "edd_activation_pu": "EDD activation threshold",
    "dc_overvoltage_limit_pu": "DC overvoltage limit",
    "edd_rated_power_pu": "EDD rating",
    "comm_delay_s": "communication delay",
    "turbine_rampdown_s": "turbine ramp-down time",
}


def validate(params: SystemParams) -> ValidationReport:
    """Check physical consistency; every violated rule is listed."""
    errors: list[str] = []
    for name, label in _POSITIVE_FIELDS.items():
        value = getattr(params, name)
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
            errors.append(f"non-positive {label} ({name}={value!r})")
    if not isinstance(params.sm_per_arm, int) or params.sm_per_arm < 1:
        errors.append(f"sm_per_arm must be an integer >= 1 (got {params.sm_per_arm!r})")
    if params.edd_activation_pu >= params.dc_overvoltage_limit_pu:
        errors.append("EDD activation threshold must be below the DC overvoltage limit")
    if params.cap_overvoltage_limit <= 1.0:
        errors.append("capacitor overvoltage limit must exceed 1")
    if not errors:
        # One fully inserted arm spans the pole-to-pole voltage; with
        # M_dc = 0.5 the upper plus lower arm sum is N*V0 as well.
        arm_sum = params.sm_per_arm * params.sm_rated_voltage_v
        deviation = abs(arm_sum - params.dc_voltage_v) / params.dc_voltage_v
        if deviation > 0.05:
            errors.append(
                f"N*V0 deviates from V_dc by >5% "
                f"({arm_sum / 1e3:.2f} kV vs {params.dc_voltage_v / 1e3:.2f} kV)"
            )
    return ValidationReport(tuple(errors))


@dataclass(frozen=True)
class ControlParams:
    """Controller gains and thresholds.

    Gains are derived from closed-loop time constants:
      inner current loop   Kp = L/tau, Ki = R/tau (pole-zero cancellation)
      outer DC-voltage loop Kp = 2*H_dc/tau, Ti = 4*tau (critically damped)
      PLL                  Kp = 2*zeta*wn, Ki = wn**2 on the normalised q error
    """

    inner_tau_s: float = 0.003
    outer_vdc_tau_s: float = 0.030
    outer_q_kp: float = 0.3
    outer_q_tau_s: float = 0.030
    current_limit_pu: float = 1.1
    pll_natural_hz: float = 12.0
    pll_damping: float = 0.8
    # PLL holds its frequency when the voltage magnitude drops below this.
    pll_freewheel_pu: float = 0.1
    vf_kp: float = 0.5
    vf_bus_tau_s: float = 0.005
    storage_trigger_pu: float = 1.02
    storage_ceiling_pu: float = 1.65
    storage_share: float = 0.55
    energy_tau_s: float = 0.005
    discharge_limit_pu: float = 0.5
    # Width of the current-reference band over which discharge is throttled.
    discharge_band_pu: float = 0.05
    release_band_pu: float = 0.02
    edd_hysteresis_pu: float = 0.005

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"control parameter {f.name} must be finite and >= 0")
        if not 0.0 <= self.storage_share <= 1.0:
            raise ValueError("storage_share must lie in [0, 1]")
        if self.storage_ceiling_pu < 1.0:
            raise ValueError("storage_ceiling_pu must be >= 1")


DEFAULT_PARAMS = SystemParams()
DEFAULT_CONTROL = ControlParams()
