"""Command-line entry point: ``mmcfrt run | budget | sweep``.

Exit codes: 0 success, 1 usage or parse error, 2 validation failure,
3 invariant abort.
"""

from __future__ import annotations

import argparse
import csv
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from pathlib import Path

from .budget import EnergyBudget, EddSizing, size_edd
from .engine import InvariantViolation, RunResult, Scenario, ScenarioError, run
from .network import exported_power_limit
from .scenario import (
    ScenarioParseError,
    ScenarioValueError,
    load_scenario,
    parse_scenario,
    serialize_scenario,
)

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_ABORT = 0, 1, 2, 3

SWEEP_COLUMNS = (
    "value",
    "status",
    "peak_v_dc_pu",
    "peak_rec_energy_pu",
    "peak_sec_energy_pu",
    "edd_energy_j",
    "peak_edd_power_w",
    "abort_kind",
    "abort_time_s",
)


def bundled_scenario(name: str) -> Path:
    """Path of a scenario shipped with the package (``lllg`` or ``slg``)."""
    stem = name[: -len(".scenario")] if name.endswith(".scenario") else name
    ref = resources.files("mmcfrt") / "scenarios" / f"{stem}.scenario"
    return Path(str(ref))


def resolve_scenario_path(name: str) -> Path:
    p = Path(name)
    if p.exists():
        return p
    bundled = bundled_scenario(name)
    if bundled.exists():
        return bundled
    raise FileNotFoundError(name)


def format_budget(b: EnergyBudget) -> str:
    rows = [
        ("surplus integral", b.surplus_integral_j),
        ("delta E onshore MMC", b.delta_e_rec_j),
        ("delta E offshore MMC", b.delta_e_sec_j),
        ("delta E DC link", b.delta_e_dclink_j),
        ("delta E AC inductors", b.delta_e_inductive_j),
        ("EDD energy", b.edd_energy_j),
        ("resistive losses", b.losses_j),
        ("closure residual", b.closure_residual_j),
    ]
    out = [f"energy budget over [{b.t0_s:.5f} s, {b.t1_s:.5f} s]"]
    out += [f"  {label:<22s} {value / 1e6:12.4f} MJ" for label, value in rows]
    out.append(f"  {'closure (relative)':<22s} {100 * b.relative_closure:12.6f} %")
    return "\n".join(out)


def format_record(record: dict) -> str:
    return "\n".join(f"{k} = {v!r}" for k, v in record.items())


def format_sizing(s: EddSizing, e_nom: float, limits) -> str:
    out = [
        f"Nominal converter energy: {e_nom / 1e6:.2f} MJ",
        f"export limit during fault: {limits.applied_w / 1e6:.1f} MW "
        f"(positive-sequence reading {limits.sequence_w / 1e6:.1f} MW, "
        f"two-thirds-loss reading {limits.two_thirds_w / 1e6:.1f} MW)",
        f"surplus energy:          {s.surplus_j / 1e6:10.3f} MJ",
        f"onshore storable:        {s.rec_storable_j / 1e6:10.3f} MJ",
        f"offshore storable:       {s.sec_storable_j / 1e6:10.3f} MJ",
        f"required EDD energy:     {s.required_energy_j / 1e6:10.3f} MJ",
        f"peak residual power:     {s.peak_residual_power_w / 1e6:10.3f} MW",
        f"EDD rating:              {s.rated_power_w / 1e6:10.3f} MW",
        "feasible:                " + ("yes" if s.feasible else "NO (residual power exceeds EDD rating)"),
        "assumptions:",
    ]
    out += [f"  - {a}" for a in s.assumptions]
    return "\n".join(out)


def run_summary(res: RunResult) -> str:
    m = res.monitors
    return "\n".join(
        [
            f"peak DC voltage:        {m['peak_v_dc_pu']:.4f} p.u.",
            f"onshore peak energy:    {m['peak_rec_energy_pu']:.4f} p.u.",
            f"offshore peak energy:   {m['peak_sec_energy_pu']:.4f} p.u.",
            f"EDD energy:             {m['edd_energy_j'] / 1e6:.3f} MJ",
            f"EDD peak power:         {m['peak_edd_power_w'] / 1e6:.2f} MW",
            "stage events:           "
            + (", ".join(f"{e.time_s:.4f} s {e.from_stage}->{e.to_stage}" for e in res.events) or "none"),
        ]
    )


def _load(args) -> Scenario:
    path = resolve_scenario_path(args.scenario)
    overrides = list(args.set or [])
    if getattr(args, "dt", None) is not None:
        overrides.append(f"sim.dt_s={args.dt}")
    return load_scenario(path, overrides)


def _plot_window(sc: Scenario):
    if not sc.fault.present:
        return None
    return (max(0.0, sc.fault.onset_s - 0.5), min(sc.t_end_s, sc.fault.clear_s + 1.5))


def cmd_run(args) -> int:
    sc = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        res = run(sc)
    except InvariantViolation as exc:
        (out / "abort.txt").write_text(
            f"kind = {exc.kind!r}\ntime_s = {exc.time_s!r}\n"
            + format_record(exc.snapshot) + "\n", encoding="utf-8"
        )
        print(f"invariant abort: {exc}", file=sys.stderr)
        return EXIT_ABORT
    csv_path = out / "timeseries.csv"
    res.log.to_csv(csv_path)
    text = format_budget(res.budget) + "\n\n[record]\n" + format_record(res.budget.as_record()) + "\n"
    (out / "budget.txt").write_text(text, encoding="utf-8")
    (out / "scenario.scenario").write_text(serialize_scenario(sc), encoding="utf-8")
    from .plotting import plot_csv

    plot_csv(csv_path, out / "panels.svg", _plot_window(sc))
    if not args.quiet:
        print(run_summary(res))
        print(format_budget(res.budget))
        print(f"outputs written to {out}")
    return EXIT_OK


def cmd_budget(args) -> int:
    sc = _load(args)
    errors = sc.check()
    if errors:
        raise ScenarioError("; ".join(errors))
    s = size_edd(sc.params, sc.fault, sc.wind, sc.control)
    limits = exported_power_limit(sc.fault, sc.fault.onset_s, sc.params.rated_power_w)
    record = {
        "nominal_energy_j": sc.params.nominal_energy_j,
        "surplus_j": s.surplus_j,
        "rec_storable_j": s.rec_storable_j,
        "sec_storable_j": s.sec_storable_j,
        "required_energy_j": s.required_energy_j,
        "peak_residual_power_w": s.peak_residual_power_w,
        "edd_rated_power_w": s.rated_power_w,
        "feasible": s.feasible,
    }
    print(format_sizing(s, sc.params.nominal_energy_j, limits))
    if not args.quiet:
        print("\n[record]\n" + format_record(record))
    return EXIT_OK


def _sweep_one(job):
    text, key, value = job
    sc = parse_scenario(text, [f"{key}={value}"])
    errors = sc.check()
    if errors:
        return {"value": value, "status": "invalid", "abort_kind": "; ".join(errors)}
    try:
        res = run(sc)
        m, status, kind, t_abort = res.monitors, "ok", "", ""
    except InvariantViolation as exc:
        m, status, kind, t_abort = exc.monitors, "aborted", exc.kind, exc.time_s
    return {
        "value": value,
        "status": status,
        "peak_v_dc_pu": m["peak_v_dc_pu"],
        "peak_rec_energy_pu": m["peak_rec_energy_pu"],
        "peak_sec_energy_pu": m["peak_sec_energy_pu"],
        "edd_energy_j": m["edd_energy_j"],
        "peak_edd_power_w": m["peak_edd_power_w"],
        "abort_kind": kind,
        "abort_time_s": t_abort,
    }


def sweep(sc: Scenario, key: str, values, jobs: int | None = None) -> list[dict]:
    """One run per value of ``key``; rows come back in input order."""
    text = serialize_scenario(sc)
    # Validate the key and every value before spending time on runs.
    for v in values:
        parse_scenario(text, [f"{key}={v}"])
    work = [(text, key, v) for v in values]
    if jobs == 1 or len(work) == 1:
        return [_sweep_one(w) for w in work]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_sweep_one, work))


def cmd_sweep(args) -> int:
    sc = _load(args)
    rows = sweep(sc, args.key, args.values, args.jobs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "sweep.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS, lineterminator="\n", restval="")
        w.writeheader()
        w.writerows(rows)
    if not args.quiet:
        print(f"{'value':>12s} {'status':>8s} {'peak V_dc':>10s} {'E_REC':>8s} {'E_SEC':>8s} {'E_EDD MJ':>10s}")
        for r in rows:
            if r["status"] == "invalid":
                print(f"{r['value']:>12s} {'invalid':>8s}  {r['abort_kind']}")
                continue
            print(
                f"{r['value']:>12s} {r['status']:>8s} {r['peak_v_dc_pu']:10.4f} "
                f"{r['peak_rec_energy_pu']:8.4f} {r['peak_sec_energy_pu']:8.4f} "
                f"{r['edd_energy_j'] / 1e6:10.3f}"
            )
        print(f"summary written to {out / 'sweep.csv'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmcfrt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("scenario", help="scenario file, or a bundled name (lllg, slg)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a scenario key")
        p.add_argument("--dt", type=float, help="time step in seconds")
        p.add_argument("--quiet", action="store_true")

    p_run = sub.add_parser("run", help="simulate a scenario")
    common(p_run)
    p_run.add_argument("--out", default="out", help="output directory")
    p_run.set_defaults(func=cmd_run)

    p_budget = sub.add_parser("budget", help="analytic energy budget and EDD sizing")
    common(p_budget)
    p_budget.set_defaults(func=cmd_budget)

    p_sweep = sub.add_parser("sweep", help="run one simulation per parameter value")
    common(p_sweep)
    p_sweep.add_argument("key", help="section.key to vary")
    p_sweep.add_argument("values", nargs="+")
    p_sweep.add_argument("--out", default="out", help="output directory")
    p_sweep.add_argument("--jobs", type=int, default=None, help="worker processes")
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: scenario not found: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ScenarioParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ScenarioValueError, ScenarioError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
