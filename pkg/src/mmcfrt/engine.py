"""Fixed-step simulation of the point-to-point link.

Each step runs in a fixed order: grid voltages and fault, wind power,
measurements, controls (PLL, outer loop, inner loop, energy controller,
EDD control), modulation, plant integration (AC currents, DC link,
converter capacitors), invariant checks and logging.

AC currents of the onshore converter are integrated in a frame rotating at
the nominal grid angle. The controller works in the PLL frame, rotated by
the PLL angle error. Every network update is trapezoidal and all energy
terms are booked with the same step-averaged quantities, so the energy
budget closes to rounding error.
"""

from __future__ import annotations

import cmath
import csv
import io
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .budget import EnergyBudget
from .control import (
    ALLOWED_TRANSITIONS,
    ControllerState,
    Gains,
    PllState,
    Stage,
    energy_controller_step,
    inner_current_loop,
    outer_loop_step,
    pll_step,
    vf_control,
    VfState,
    OuterState,
    InnerState,
)
from .edd import edd_control, edd_power
from .mmc import CapacitorDepletionError, advance_cap_voltage
from .network import (
    NO_FAULT,
    DcLinkState,
    FaultSpec,
    dc_link_step,
    exported_power_limit,
    grid_voltages,
    positive_sequence,
    steady_line_current,
)
from .owf import WindProfile, wind_knots
from .params import (
    DEFAULT_CONTROL,
    DEFAULT_PARAMS,
    TWO_PI,
    ControlParams,
    SystemParams,
    validate,
)

_PH = TWO_PI / 3.0
_ROT_B = cmath.exp(-1j * _PH)
_ROT_C = cmath.exp(1j * _PH)

# Post-clearance DC band that closes the budget window.
RECOVERY_BAND_PU = 0.02

LOG_COLUMNS = (
    "t_s",
    "v_dc_on_pu",
    "v_dc_on_v",
    "v_dc_off_pu",
    "v_dc_off_v",
    "v_pcc_a_v",
    "v_pcc_b_v",
    "v_pcc_c_v",
    "p_wind_w",
    "p_export_w",
    "q_export_var",
    "i_d_pu",
    "i_q_pu",
    "i_line_a",
    "rec_vc_v",
    "rec_energy_j",
    "rec_energy_pu",
    "sec_vc_v",
    "sec_energy_j",
    "sec_energy_pu",
    "rec_m_dc",
    "sec_m_dc",
    "v_owf_pu",
    "pll_freq_hz",
    "stage",
    "edd_duty",
    "edd_power_w",
    "edd_energy_j",
    "surplus_cum_j",
    "losses_cum_j",
)
STAGE_CODES = {Stage.NORMAL: 0, Stage.STORING: 1, Stage.DISSIPATING: 2}
STAGE_NAMES = {v: k.value for k, v in STAGE_CODES.items()}
# Cumulative columns never return to their pre-fault value.
CUMULATIVE_COLUMNS = ("t_s", "edd_energy_j", "surplus_cum_j", "losses_cum_j")


@dataclass(frozen=True)
class Scenario:
    params: SystemParams = DEFAULT_PARAMS
    control: ControlParams = DEFAULT_CONTROL
    fault: FaultSpec = NO_FAULT
    curtailment: bool = True
    recovery_s: float = 0.2
    t_end_s: float = 10.0
    dt_s: float = 50e-6
    log_decimation: int = 20
    energy_control_enabled: bool = True
    edd_enabled: bool = True

    @property
    def wind(self) -> WindProfile:
        return WindProfile.from_params(self.params, self.curtailment, self.recovery_s)

    def check(self) -> list[str]:
        """Validation errors for the parameters and the run settings."""
        errors = list(validate(self.params).errors)
        if not self.dt_s > 0:
            errors.append("dt_s must be positive")
        if not self.t_end_s > 0:
            errors.append("t_end_s must be positive")
        if int(self.log_decimation) != self.log_decimation or self.log_decimation < 1:
            errors.append("log_decimation must be a positive integer")
        if self.fault.present and not self.t_end_s > self.fault.clear_s:
            errors.append("t_end_s must extend past fault clearance")
        if self.recovery_s < 0:
            errors.append("recovery_s must be >= 0")
        return errors


class ScenarioError(ValueError):
    """The scenario failed validation and cannot be run."""


class InvariantViolation(RuntimeError):
    """A hard limit fired; the run stopped at ``time_s``."""

    def __init__(self, kind: str, time_s: float, message: str, snapshot: dict, monitors: dict):
        super().__init__(f"{kind} at t={time_s:.6f} s: {message}")
        self.kind = kind
        self.time_s = time_s
        self.snapshot = snapshot
        self.monitors = monitors


class StageEvent(NamedTuple):
    time_s: float
    from_stage: str
    to_stage: str


@dataclass
class TimeSeriesLog:
    """Uniformly sampled run record; one numpy array per column."""

    columns: dict = field(default_factory=dict)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    def __len__(self) -> int:
        return len(self.columns["t_s"]) if self.columns else 0

    def stage_names(self) -> list[str]:
        return [STAGE_NAMES[int(c)] for c in self.columns["stage"]]

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(LOG_COLUMNS)
        cols = [self.columns[c] for c in LOG_COLUMNS]
        stage_idx = LOG_COLUMNS.index("stage")
        for i in range(len(self)):
            row = [repr(float(c[i])) for c in cols]
            row[stage_idx] = STAGE_NAMES[int(cols[stage_idx][i])]
            w.writerow(row)
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, path) -> "TimeSeriesLog":
        codes = {v: k for k, v in STAGE_NAMES.items()}
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
        header = tuple(rows[0])
        if header != LOG_COLUMNS:
            raise ValueError("unexpected CSV column layout")
        data = {c: [] for c in header}
        for row in rows[1:]:
            for c, v in zip(header, row):
                data[c].append(codes[v] if c == "stage" else float(v))
        return cls({c: np.asarray(v, dtype=float) for c, v in data.items()})


@dataclass
class RunResult:
    scenario: Scenario
    log: TimeSeriesLog
    budget: EnergyBudget
    monitors: dict
    events: list
    pre_fault: dict


@dataclass
class _Meters:
    surplus_j: float = 0.0
    losses_j: float = 0.0
    edd_j: float = 0.0


def initial_operating_point(scenario: Scenario) -> dict:
    """Steady state at rated wind power with no fault."""
    p = scenario.params
    v_ref = p.dc_voltage_v
    p_w = p.rated_power_w
    i_line = steady_line_current(p, p_w, v_ref)
    v_off = v_ref + p.dc_line_resistance_ohm * i_line
    p_conv = v_ref * i_line
    vpk = p.ac_phase_peak_v
    r = p.ac_resistance_ohm
    # 1.5 * (Vpk * i + R i^2) = P_conv, current on the d axis only.
    i_d = (-vpk + math.sqrt(vpk * vpk + 4.0 * r * p_conv / 1.5)) / (2.0 * r)
    v_sec = p.sm_rated_voltage_v * v_off / v_ref
    return {
        "v_on": v_ref,
        "v_off": v_off,
        "i_line": i_line,
        "i_ac": complex(i_d, 0.0),
        "v_rec": p.sm_rated_voltage_v,
        "v_sec": v_sec,
        "p_conv": p_conv,
    }


def run(scenario: Scenario) -> RunResult:
    """Simulate ``scenario`` to its end time.

    Raises :class:`ScenarioError` on invalid input and
    :class:`InvariantViolation` when a hard limit fires.
    """
    errors = scenario.check()
    if errors:
        raise ScenarioError("; ".join(errors))
    return _Simulation(scenario).execute()


class _Simulation:
    def __init__(self, sc: Scenario):
        self.sc = sc
        self.p = sc.params
        self.c = sc.control
        self.g = Gains.build(sc.params, sc.control)

    def execute(self) -> RunResult:  # noqa: C901 - one flat loop keeps the step order visible
        sc, p, c, g = self.sc, self.p, self.c, self.g
        fault = sc.fault
        dt = sc.dt_s
        n_steps = int(round(sc.t_end_s / dt))
        dec = int(sc.log_decimation)

        op = initial_operating_point(sc)
        n = p.sm_per_arm
        k_cap = p.cap_constant_f
        e_nom = p.nominal_energy_j
        v_ref = p.dc_voltage_v
        v0 = p.sm_rated_voltage_v
        vpk = p.ac_phase_peak_v
        i_base = p.rated_peak_current_a
        s_base = p.rated_power_w
        w0 = p.omega
        l_ac, r_ac = p.ac_inductance_h, p.ac_resistance_ohm
        z_ac = complex(r_ac, w0 * l_ac)
        a_ac = l_ac / dt - 0.5 * z_ac
        b_ac = l_ac / dt + 0.5 * z_ac
        r_dc = p.dc_line_resistance_ohm
        cap_max = p.cap_overvoltage_limit * v0
        v_dc_max = p.dc_overvoltage_limit_pu
        edd_rated = p.edd_rated_power_w
        tau_e = c.energy_tau_s
        tau_bus = c.vf_bus_tau_s
        bus_alpha = 1.0 - math.exp(-dt / tau_bus)

        # Wind profile as breakpoint arrays.
        onset = fault.onset_s if fault.present else None
        clear = fault.clear_s if fault.present else None
        knots = wind_knots(onset, clear, sc.wind)
        k_t = [k[0] for k in knots]
        k_p = [k[1] for k in knots]

        def wind_at(t):
            if t <= k_t[0]:
                return k_p[0]
            if t >= k_t[-1]:
                return k_p[-1]
            j = bisect_right(k_t, t)
            t0_, t1_ = k_t[j - 1], k_t[j]
            if t1_ == t0_:
                return k_p[j]
            return k_p[j - 1] + (k_p[j] - k_p[j - 1]) * (t - t0_) / (t1_ - t0_)

        v1_fault = positive_sequence(fault.onset_s, fault) if fault.present else 1.0
        p_lim_fault = (
            exported_power_limit(fault, fault.onset_s, s_base).applied_w if fault.present else s_base
        )

        # State.
        i_ac = op["i_ac"]
        v_rec = op["v_rec"]
        v_sec = op["v_sec"]
        link = DcLinkState(op["v_on"], op["v_off"], op["i_line"], p.terminal_capacitance_f)
        ctrl = ControllerState(
            pll=PllState(0.0, 0.0, w0),
            outer=OuterState(op["i_ac"].real / i_base, 0.0),
            inner=InnerState(r_ac * op["i_ac"].real, 0.0),
            vf=VfState(0.0, 0.0),
            mdc_value=op["v_on"] / (2.0 * n * v_rec),
        )
        v_bus = vpk
        p_grid = 1.5 * vpk * i_ac.real
        q_grid = 0.0
        p_conv_meas = op["p_conv"]
        edd_active = False
        duty = 0.0
        p_edd = 0.0
        m_dc_sec = op["v_off"] / (2.0 * n * v_sec)
        e_l_ac = 0.75 * l_ac * abs(i_ac) ** 2

        meters = _Meters()
        mon = {
            "peak_v_dc_pu": op["v_on"] / v_ref,
            "peak_v_dc_off_pu": op["v_off"] / v_ref,
            "peak_rec_energy_pu": v_rec * v_rec * k_cap / e_nom,
            "peak_sec_energy_pu": v_sec * v_sec * k_cap / e_nom,
            "peak_rec_vc_pu": v_rec / v0,
            "peak_sec_vc_pu": v_sec / v0,
            "peak_edd_power_w": 0.0,
            "min_v_dc_pu_dissipating": math.inf,
            "edd_energy_j": 0.0,
            "modulation_limited_steps": 0,
            "aborted": False,
        }
        events: list[StageEvent] = []
        log = {col: [] for col in LOG_COLUMNS}
        snap0 = None
        snap1 = None
        pre_fault = None
        t_budget0 = fault.onset_s if fault.present else 0.0
        # The budget window of a fault-free run spans the whole horizon.
        need_t1 = fault.present

        def snapshot(t):
            return {
                "t_s": t,
                "surplus_j": meters.surplus_j,
                "losses_j": meters.losses_j,
                "edd_j": meters.edd_j,
                "e_rec": k_cap * v_rec * v_rec,
                "e_sec": k_cap * v_sec * v_sec,
                "e_link": link.stored_energy_j + link.inductive_energy_j(p),
                "e_l_ac": e_l_ac,
            }

        def state_dump(t):
            return {
                "t_s": t,
                "v_dc_on_v": link.v_dc_onshore_v,
                "v_dc_off_v": link.v_dc_offshore_v,
                "i_line_a": link.i_line_a,
                "rec_vc_v": v_rec,
                "sec_vc_v": v_sec,
                "i_ac_grid_frame_a": (i_ac.real, i_ac.imag),
                "stage": ctrl.stage.value,
                "m_dc": ctrl.mdc_value,
                "pll_angle_rad": ctrl.pll.angle,
                "edd_power_w": p_edd,
                "edd_energy_j": meters.edd_j,
            }

        def fail(kind, t, msg):
            mon["aborted"] = True
            mon["edd_energy_j"] = meters.edd_j
            raise InvariantViolation(kind, t, msg, state_dump(t), dict(mon))

        def record(t, v_on_pu, v_off_pu, p_w, i_c):
            va, vb, vc = grid_voltages(t, fault, p)
            row = (
                t, v_on_pu, link.v_dc_onshore_v, v_off_pu, link.v_dc_offshore_v,
                va, vb, vc, p_w, p_grid, q_grid, i_c.real / i_base, i_c.imag / i_base,
                link.i_line_a, v_rec, k_cap * v_rec * v_rec, k_cap * v_rec * v_rec / e_nom,
                v_sec, k_cap * v_sec * v_sec, k_cap * v_sec * v_sec / e_nom,
                ctrl.mdc_value, m_dc_sec, v_bus / vpk, ctrl.pll.omega / TWO_PI,
                STAGE_CODES[ctrl.stage], duty, p_edd, meters.edd_j,
                meters.surplus_j, meters.losses_j,
            )
            for col, val in zip(LOG_COLUMNS, row):
                log[col].append(val)

        for k in range(n_steps + 1):
            t = k * dt
            v_on = link.v_dc_onshore_v
            v_off = link.v_dc_offshore_v
            v_on_pu = v_on / v_ref

            # (1) grid voltage (positive sequence, grid frame) and fault state
            f_active = fault.present and fault.onset_s <= t < fault.clear_s
            v1 = v1_fault if f_active else 1.0
            v_g = vpk * v1
            theta_g = math.fmod(w0 * t, TWO_PI)
            # (2) wind
            p_w = wind_at(t)

            # (3) measurements in the PLL frame
            rot = cmath.exp(1j * (theta_g - ctrl.pll.angle))
            i_c = i_ac * rot
            v_c_pcc = v_g * rot

            if k % dec == 0:
                record(t, v_on_pu, v_off / v_ref, p_w, i_c)
            if pre_fault is None and fault.present and t + dt > fault.onset_s:
                pre_fault = {col: log[col][-1] for col in LOG_COLUMNS} if log["t_s"] else None
            if snap0 is None and t >= t_budget0 - 0.5 * dt:
                snap0 = snapshot(t)
            if need_t1 and snap1 is None and t >= fault.clear_s and abs(v_on_pu - 1.0) <= RECOVERY_BAND_PU:
                snap1 = snapshot(t)
            if k == n_steps:
                break

            # (4) controls
            e_abc = v_g * cmath.exp(1j * theta_g)
            ctrl.pll = pll_step(
                (e_abc.real, (e_abc * _ROT_B).real, (e_abc * _ROT_C).real), ctrl.pll, dt, g
            )
            id_cap = None
            if f_active and abs(v_g) > 0.05 * vpk:
                id_cap = p_lim_fault / (1.5 * abs(v_g)) / i_base
            id_ref, iq_ref, ctrl.outer = outer_loop_step(
                v_on, v_ref, q_grid, 0.0, ctrl.outer, dt, g, id_cap
            )
            m_lim = min(ctrl.mdc_value, 1.0 - ctrl.mdc_value)
            n_vc = n * v_rec
            m_d, m_q, ctrl.inner, limited = inner_current_loop(
                (i_c.real, i_c.imag), (id_ref * i_base, iq_ref * i_base),
                (v_c_pcc.real, v_c_pcc.imag), ctrl.inner, dt, g, n_vc, m_lim,
            )
            if limited:
                mon["modulation_limited_steps"] += 1
            dec_e = energy_controller_step(
                p_w, p_grid, v_on_pu, v_rec, ctrl.stage, p, c, dt,
                enabled=sc.energy_control_enabled, i_d_ref_pu=id_ref,
            )
            if dec_e.stage is not ctrl.stage:
                if (ctrl.stage, dec_e.stage) not in ALLOWED_TRANSITIONS:
                    fail("stage_order", t, f"{ctrl.stage.value} -> {dec_e.stage.value}")
                events.append(StageEvent(t, ctrl.stage.value, dec_e.stage.value))
                ctrl.stage = dec_e.stage
            ctrl.mdc_value = dec_e.m_dc
            if sc.edd_enabled:
                duty, edd_active = edd_control(
                    v_on_pu, dec_e.edd_enable_request, p, edd_active, c.edd_hysteresis_pu
                )
            else:
                duty, edd_active = 0.0, False
            p_edd = edd_power(duty, v_on, p)
            # offshore V/f
            m_dc_sec = v_off / (2.0 * n * v_sec)
            th = ctrl.vf.angle
            owf_abc = (
                v_bus * math.cos(th), v_bus * math.cos(th - _PH), v_bus * math.cos(th + _PH)
            )
            m_sec, ctrl.vf = vf_control(
                owf_abc, p.grid_frequency_hz, vpk, ctrl.vf, dt, g, n * v_sec,
                min(m_dc_sec, 1.0 - m_dc_sec),
            )

            # (5) modulation: converter voltage in the grid frame
            v_conv = complex(m_d, m_q) * n_vc / rot

            # (6) plant: AC currents
            i_new = (a_ac * i_ac + (v_conv - v_g)) / b_ac
            i_avg = 0.5 * (i_ac + i_new)
            vi = v_g * i_avg.conjugate()
            p_grid = 1.5 * vi.real
            q_grid = 1.5 * vi.imag
            p_conv_meas = 1.5 * (v_conv * i_avg.conjugate()).real
            p_loss_ac = 1.5 * r_ac * (i_avg.real ** 2 + i_avg.imag ** 2)
            i_ac = i_new
            e_l_ac = 0.75 * l_ac * (i_ac.real ** 2 + i_ac.imag ** 2)

            # DC side currents
            i_rec = (p_conv_meas + dec_e.p_store_w) / v_on
            i_edd = p_edd / v_on
            e_sec_target = e_nom * (v_off / v_ref) ** 2
            p_cap_sec = (e_sec_target - k_cap * v_sec * v_sec) / tau_e
            i_sec = (p_w - p_cap_sec) / v_off
            i_line0 = link.i_line_a
            link = dc_link_step(link, -(i_rec + i_edd), i_sec, dt, p)
            v_on_avg = 0.5 * (v_on + link.v_dc_onshore_v)
            v_off_avg = 0.5 * (v_off + link.v_dc_offshore_v)
            i_line_avg = 0.5 * (i_line0 + link.i_line_a)

            # converter capacitors
            try:
                v_rec = advance_cap_voltage(v_rec, i_rec * v_on_avg - p_conv_meas, dt, k_cap)
                v_sec = advance_cap_voltage(v_sec, p_w - i_sec * v_off_avg, dt, k_cap)
            except CapacitorDepletionError as exc:
                fail("cap_depletion", t + dt, str(exc))
            v_bus += (m_sec * n * v_sec - v_bus) * bus_alpha

            # meters
            meters.surplus_j += (p_w - p_grid) * dt
            meters.losses_j += (p_loss_ac + r_dc * i_line_avg * i_line_avg) * dt
            meters.edd_j += p_edd * dt

            # (7) invariants
            t1 = t + dt
            v_on_pu1 = link.v_dc_onshore_v / v_ref
            if not (math.isfinite(v_on_pu1) and math.isfinite(v_rec) and math.isfinite(abs(i_ac))):
                fail("non_finite", t1, "state became non-finite")
            if v_on_pu1 > mon["peak_v_dc_pu"]:
                mon["peak_v_dc_pu"] = v_on_pu1
            v_off_pu1 = link.v_dc_offshore_v / v_ref
            if v_off_pu1 > mon["peak_v_dc_off_pu"]:
                mon["peak_v_dc_off_pu"] = v_off_pu1
            if v_rec / v0 > mon["peak_rec_vc_pu"]:
                mon["peak_rec_vc_pu"] = v_rec / v0
                mon["peak_rec_energy_pu"] = k_cap * v_rec * v_rec / e_nom
            if v_sec / v0 > mon["peak_sec_vc_pu"]:
                mon["peak_sec_vc_pu"] = v_sec / v0
                mon["peak_sec_energy_pu"] = k_cap * v_sec * v_sec / e_nom
            if p_edd > 0.0:
                if p_edd > mon["peak_edd_power_w"]:
                    mon["peak_edd_power_w"] = p_edd
                if v_on_pu < mon["min_v_dc_pu_dissipating"]:
                    mon["min_v_dc_pu_dissipating"] = v_on_pu
            if v_on_pu1 > v_dc_max:
                fail("dc_overvoltage", t1, f"v_dc {v_on_pu1:.4f} p.u. above {v_dc_max} p.u.")
            if v_rec > cap_max or v_sec > cap_max:
                fail("cap_overvoltage", t1, f"capacitor voltage above {p.cap_overvoltage_limit} x V0")
            if p_edd > edd_rated * (1.0 + 1e-12):
                fail("edd_rating", t1, "EDD power above rating")

        t_end = n_steps * dt
        if snap1 is None:
            snap1 = snapshot(t_end)
        if snap0 is None:
            snap0 = snap1
        budget = EnergyBudget(
            surplus_integral_j=snap1["surplus_j"] - snap0["surplus_j"],
            delta_e_rec_j=snap1["e_rec"] - snap0["e_rec"],
            delta_e_sec_j=snap1["e_sec"] - snap0["e_sec"],
            delta_e_dclink_j=snap1["e_link"] - snap0["e_link"],
            edd_energy_j=snap1["edd_j"] - snap0["edd_j"],
            losses_j=snap1["losses_j"] - snap0["losses_j"],
            delta_e_inductive_j=snap1["e_l_ac"] - snap0["e_l_ac"],
            t0_s=snap0["t_s"],
            t1_s=snap1["t_s"],
        )
        mon["edd_energy_j"] = meters.edd_j
        mon["surplus_total_j"] = meters.surplus_j
        mon["losses_total_j"] = meters.losses_j
        cols = {name: np.asarray(vals, dtype=float) for name, vals in log.items()}
        if pre_fault is None:
            pre_fault = {col: cols[col][0] for col in LOG_COLUMNS}
        return RunResult(sc, TimeSeriesLog(cols), budget, mon, events, pre_fault)
