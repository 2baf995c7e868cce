"""Aggregated offshore wind farm with delayed, ramped curtailment."""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

from .params import SystemParams


@dataclass(frozen=True)
class WindProfile:
    rated_power_w: float = 420e6
    comm_delay_s: float = 0.040
    rampdown_s: float = 0.22
    curtailment_enabled: bool = True
    recovery_s: float = 0.2

    def __post_init__(self):
        if min(self.rated_power_w, self.comm_delay_s, self.rampdown_s, self.recovery_s) < 0:
            raise ValueError("wind profile powers and times must be >= 0")

    @classmethod
    def from_params(cls, params: SystemParams, curtailment_enabled=True, recovery_s=0.2):
        return cls(
            rated_power_w=params.rated_power_w,
            comm_delay_s=params.comm_delay_s,
            rampdown_s=params.turbine_rampdown_s,
            curtailment_enabled=curtailment_enabled,
            recovery_s=recovery_s,
        )


def wind_knots(fault_onset, cleared_at, profile: WindProfile) -> list[tuple[float, float]]:
    """Piecewise-linear breakpoints (t, P) of the farm output.

    Output is constant before the first knot and after the last one.
    ``fault_onset`` None means no fault; ``cleared_at`` None means the fault
    is never cleared.
    """
    p = profile.rated_power_w
    if fault_onset is None or not profile.curtailment_enabled:
        return [(0.0, p)]
    t_cmd = fault_onset + profile.comm_delay_s
    if cleared_at is not None and cleared_at <= t_cmd:
        return [(0.0, p)]
    t_zero = t_cmd + profile.rampdown_s
    knots = [(t_cmd, p), (t_zero, 0.0)]
    if cleared_at is None:
        return knots
    if cleared_at < t_zero:
        frac = (cleared_at - t_cmd) / profile.rampdown_s
        p_clear = p * (1.0 - frac)
        knots = [(t_cmd, p), (cleared_at, p_clear)]
    else:
        p_clear = 0.0
        knots.append((cleared_at, 0.0))
    # Recovery at a fixed rate of rated power per recovery_s.
    t_full = cleared_at + profile.recovery_s * (p - p_clear) / p if p > 0 else cleared_at
    if t_full > cleared_at:
        knots.append((t_full, p))
    return knots


def interpolate(knots: list[tuple[float, float]], t: float) -> float:
    if t <= knots[0][0]:
        return knots[0][1]
    if t >= knots[-1][0]:
        return knots[-1][1]
    ts = [k[0] for k in knots]
    j = bisect_right(ts, t)
    (t0, p0), (t1, p1) = knots[j - 1], knots[j]
    if t1 == t0:
        return p1
    return p0 + (p1 - p0) * (t - t0) / (t1 - t0)


def wind_power(t: float, fault_onset, cleared_at, profile: WindProfile) -> float:
    """Farm output (W) at time t.

    Rated until the curtailment command arrives comm_delay_s after
    fault_onset, then a linear ramp to zero over rampdown_s. After clearance
    the output ramps back to rated.
    """
    return interpolate(wind_knots(fault_onset, cleared_at, profile), t)


def integrate_knots(knots, t_a: float, t_b: float, level: float = 0.0) -> float:
    """Exact integral of max(0, P(t) - level) for piecewise-linear P over [t_a, t_b]."""
    if t_b <= t_a:
        return 0.0
    pts = [t_a] + [k[0] for k in knots if t_a < k[0] < t_b] + [t_b]
    total = 0.0
    for u, w in zip(pts[:-1], pts[1:]):
        fu = interpolate(knots, u) - level
        fw = interpolate(knots, w) - level
        if fu >= 0 and fw >= 0:
            total += 0.5 * (fu + fw) * (w - u)
        elif fu > 0 or fw > 0:
            # Segment crosses the level: keep the positive triangle only.
            pos, neg = (fu, fw) if fu > 0 else (fw, fu)
            total += 0.5 * pos * (w - u) * pos / (pos - neg)
    return total


def curtailed_energy(fault_onset, cleared_at, profile: WindProfile, t_a: float, t_b: float) -> float:
    """Energy withheld by curtailment over [t_a, t_b] (J)."""
    knots = wind_knots(fault_onset, cleared_at, profile)
    produced = integrate_knots(knots, t_a, t_b)
    return profile.rated_power_w * (t_b - t_a) - produced
