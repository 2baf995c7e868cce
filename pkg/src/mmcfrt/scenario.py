"""Scenario files: INI-style text with [system] [fault] [owf] [control] [edd] [sim].

Every key maps to exactly one scenario parameter; unknown sections or keys
are rejected with the line they appear on. ``serialize`` writes every key,
so parse -> serialize -> parse is lossless.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, fields
from pathlib import Path

from .engine import Scenario
from .network import FaultSpec
from .params import ControlParams, SystemParams

SECTIONS = ("system", "fault", "owf", "control", "edd", "sim")


class ScenarioParseError(ValueError):
    """Malformed scenario text; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None, source: str = "<scenario>"):
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)
        self.line = line
        self.source = source


@dataclass(frozen=True)
class _Key:
    target: str  # params | control | fault | scenario
    attr: str
    kind: type


def _build_keys() -> dict[tuple[str, str], _Key]:
    keys: dict[tuple[str, str], _Key] = {}
    moved = {"edd_rated_power_pu", "edd_activation_pu", "comm_delay_s", "turbine_rampdown_s"}
    for f in fields(SystemParams):
        if f.name not in moved:
            kind = int if f.name == "sm_per_arm" else float
            keys[("system", f.name)] = _Key("params", f.name, kind)
    keys[("fault", "kind")] = _Key("fault", "kind", str)
    keys[("fault", "onset_s")] = _Key("fault", "onset_s", float)
    keys[("fault", "duration_s")] = _Key("fault", "duration_s", float)
    keys[("fault", "residual")] = _Key("fault", "residual_factor", float)
    keys[("fault", "phase")] = _Key("fault", "faulted_phase", int)
    keys[("fault", "slg_reading")] = _Key("fault", "slg_reading", str)
    keys[("owf", "curtailment")] = _Key("scenario", "curtailment", bool)
    keys[("owf", "comm_delay_s")] = _Key("params", "comm_delay_s", float)
    keys[("owf", "rampdown_s")] = _Key("params", "turbine_rampdown_s", float)
    keys[("owf", "recovery_s")] = _Key("scenario", "recovery_s", float)
    for f in fields(ControlParams):
        if f.name != "edd_hysteresis_pu":
            keys[("control", f.name)] = _Key("control", f.name, float)
    keys[("control", "energy_control_enabled")] = _Key("scenario", "energy_control_enabled", bool)
    keys[("edd", "enabled")] = _Key("scenario", "edd_enabled", bool)
    keys[("edd", "rated_power_pu")] = _Key("params", "edd_rated_power_pu", float)
    keys[("edd", "activation_pu")] = _Key("params", "edd_activation_pu", float)
    keys[("edd", "hysteresis_pu")] = _Key("control", "edd_hysteresis_pu", float)
    keys[("sim", "t_end_s")] = _Key("scenario", "t_end_s", float)
    keys[("sim", "dt_s")] = _Key("scenario", "dt_s", float)
    keys[("sim", "log_decimation")] = _Key("scenario", "log_decimation", int)
    return keys


KEYS = _build_keys()
_BOOL = configparser.ConfigParser.BOOLEAN_STATES


def known_keys() -> list[str]:
    return [f"{s}.{k}" for s, k in KEYS]


def _convert(raw: str, kind: type):
    text = raw.strip()
    if kind is bool:
        low = text.lower()
        if low not in _BOOL:
            raise ValueError(f"expected a boolean, got {text!r}")
        return _BOOL[low]
    if kind is int:
        return int(text)
    if kind is float:
        return float(text)
    return text


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _line_index(text: str) -> dict[tuple[str, str | None], int]:
    """Line numbers of every section header and key."""
    where: dict[tuple[str, str | None], int] = {}
    section = None
    for no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped[0] in "#;":
            continue
        m = re.match(r"\[([^\]]+)\]", stripped)
        if m:
            section = m.group(1).strip().lower()
            where.setdefault((section, None), no)
            continue
        m = re.match(r"([^=:]+)[=:]", stripped)
        if m and section is not None:
            where.setdefault((section, m.group(1).strip().lower()), no)
    return where


def _split_override(item: str) -> tuple[str, str, str]:
    if "=" not in item:
        raise ScenarioParseError(f"override {item!r} must look like section.key=value", source="--set")
    name, value = item.split("=", 1)
    name = name.strip().lower()
    if "." not in name:
        raise ScenarioParseError(f"override key {name!r} must be section.key", source="--set")
    section, key = name.split(".", 1)
    return section, key, value


def parse_scenario(text: str, overrides=(), source: str = "<scenario>") -> Scenario:
    """Build a :class:`Scenario` from scenario text plus ``section.key=value`` overrides.

    Missing keys keep their defaults.
    """
    cp = configparser.ConfigParser(interpolation=None, strict=True)
    try:
        cp.read_string(text, source=source)
    except configparser.DuplicateOptionError as exc:
        raise ScenarioParseError(f"duplicate key {exc.option!r}", exc.lineno, source) from None
    except configparser.DuplicateSectionError as exc:
        raise ScenarioParseError(f"duplicate section [{exc.section}]", exc.lineno, source) from None
    except configparser.MissingSectionHeaderError as exc:
        raise ScenarioParseError("key outside any section", exc.lineno, source) from None
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ScenarioParseError("malformed line", line, source) from None
    lines = _line_index(text)

    values: dict[tuple[str, str], tuple[str, int | None, str]] = {}
    for section in cp.sections():
        sec = section.lower()
        if sec not in SECTIONS:
            raise ScenarioParseError(f"unknown section [{section}]", lines.get((sec, None)), source)
        for key, raw in cp.items(section):
            if (sec, key) not in KEYS:
                raise ScenarioParseError(f"unknown key {sec}.{key}", lines.get((sec, key)), source)
            values[(sec, key)] = (raw, lines.get((sec, key)), source)
    for item in overrides:
        sec, key, raw = _split_override(item)
        if (sec, key) not in KEYS:
            raise ScenarioParseError(f"unknown key {sec}.{key}", source="--set")
        values[(sec, key)] = (raw, None, "--set")

    groups: dict[str, dict] = {"params": {}, "control": {}, "fault": {}, "scenario": {}}
    for (sec, key), (raw, line, src) in values.items():
        spec = KEYS[(sec, key)]
        try:
            groups[spec.target][spec.attr] = _convert(raw, spec.kind)
        except ValueError as exc:
            raise ScenarioParseError(f"bad value for {sec}.{key}: {exc}", line, src) from None
    try:
        params = SystemParams(**groups["params"])
        control = ControlParams(**groups["control"])
        fault = FaultSpec(**groups["fault"])
    except ValueError as exc:
        raise ScenarioValueError(str(exc)) from None
    return Scenario(params=params, control=control, fault=fault, **groups["scenario"])


class ScenarioValueError(ValueError):
    """Well-formed file whose values are out of range."""


def load_scenario(path, overrides=()) -> Scenario:
    p = Path(path)
    return parse_scenario(p.read_text(encoding="utf-8"), overrides, source=str(p))


def serialize_scenario(sc: Scenario) -> str:
    """Write every key of ``sc``; the output parses back to an equal scenario."""
    objs = {"params": sc.params, "control": sc.control, "fault": sc.fault, "scenario": sc}
    out = []
    for section in SECTIONS:
        out.append(f"[{section}]")
        for (sec, key), spec in KEYS.items():
            if sec == section:
                out.append(f"{key} = {_format(getattr(objs[spec.target], spec.attr))}")
        out.append("")
    return "\n".join(out)


def with_value(sc: Scenario, name: str, value: str) -> Scenario:
    """Copy of ``sc`` with one ``section.key`` set from its text form."""
    return parse_scenario(serialize_scenario(sc), [f"{name}={value}"])


__all__ = [
    "KEYS",
    "SECTIONS",
    "ScenarioParseError",
    "ScenarioValueError",
    "known_keys",
    "load_scenario",
    "parse_scenario",
    "serialize_scenario",
    "with_value",
]
