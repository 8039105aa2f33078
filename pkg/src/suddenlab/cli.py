"""Command-line entry point.

Exit status: 0 success, 1 scenario error, 2 numeric failure, 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .presets import load_preset, preset_names
from .runner import RunError, RunReport, resolve_out_dir, run, run_many
from .scenario import ScenarioError, load_scenario
from .sudden_death import NumericError, SweepError

EXIT_OK = 0
EXIT_SCENARIO = 1
EXIT_NUMERIC = 2
EXIT_VERIFY = 3


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _count(minimum: int):
    def parse(text: str) -> int:
        value = int(text)
        if value < minimum:
            raise argparse.ArgumentTypeError(f"must be at least {minimum}, got {text}")
        return value

    return parse


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tmax", type=_positive_float, help="end of the time window")
    common.add_argument("--points", type=_count(2), help="number of sweep points")
    common.add_argument("--tol", type=_positive_float, help="death-time bisection tolerance")
    common.add_argument("--workers", type=_count(1), help="parallel workers")
    common.add_argument("--out", help="output directory (default: $SUDDENLAB_OUT or ./suddenlab-out)")
    common.add_argument("--format", choices=("csv", "json"), help="trajectory output format")
    common.add_argument("--exhaustive", action="store_true", help="evaluate the full WWZB symmetry closure")

    parser = argparse.ArgumentParser(prog="suddenlab", description="Entanglement and Bell-violation sudden-death toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("evolve", "write measure trajectories for a scenario"),
        ("deathtime", "trajectories plus death-time detection"),
        ("bell", "Bell-functional trajectories and violation death times"),
    ):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("scenario", help="scenario file, or preset:<name>")
    p = sub.add_parser("reproduce", parents=[common], help="run a shipped preset, or all of them")
    p.add_argument("preset", help=f"one of: all, {', '.join(preset_names())}")
    p = sub.add_parser("verify", parents=[common], help="run the acceptance suite and print the table")
    p.add_argument("--only", nargs="+", metavar="ID", help="criterion ids to run, e.g. C1 C7")
    return parser


def _load(ref: str):
    if ref.startswith("preset:"):
        try:
            return load_preset(ref.split(":", 1)[1])
        except KeyError as exc:
            raise ScenarioError(str(exc.args[0])) from None
    return load_scenario(ref)


def _summary(report: RunReport) -> str:
    lines = [f"{report.scenario.name} ({report.mode}, {report.wall_time:.2f} s)"]
    for label, res in report.results.items():
        if res is None:
            lines.append(f"  {label}: trajectory only")
            continue
        line = f"  {label}: {res.status}"
        if res.t_death is not None:
            line += f" t={res.t_death:.10g}"
        for name, value in report.controls.get(label, {}).items():
            line += f" {name}={value:.10g}"
        lines.append(line)
    if report.scan is not None:
        lines.append(
            f"  scan {report.scan['parameter']}: largest value with finite death = {report.scan['largest_finite_death']}"
        )
    for path in report.files:
        lines.append(f"  wrote {path}")
    return "\n".join(lines)


def _run_kwargs(args) -> dict:
    return dict(
        out_dir=args.out,
        t_max=args.tmax,
        n_points=args.points,
        tol=args.tol,
        workers=args.workers,
        fmt=args.format,
        exhaustive=args.exhaustive or None,
    )


def _verify(args) -> int:
    from .verify import CRITERIA, criterion_passed, format_table, to_json_map, verify_suite

    unknown = [c for c in args.only or [] if c not in CRITERIA]
    if unknown:
        raise ScenarioError(f"unknown criterion id(s): {', '.join(unknown)} (known: {', '.join(CRITERIA)})")
    results = verify_suite(args.only)
    print(format_table(results))
    out_dir = resolve_out_dir(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "verify.json"
    path.write_text(json.dumps(to_json_map(results), indent=2) + "\n", encoding="utf-8")
    print(f"wrote {path}")
    failed = [cid for cid, rows in results.items() if not criterion_passed(rows)]
    if failed:
        print(f"failing criteria: {', '.join(failed)}")
        return EXIT_VERIFY
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return _verify(args)
        if args.command == "reproduce":
            names = preset_names() if args.preset == "all" else [args.preset]
            scenarios = [_load(f"preset:{n}") for n in names]
            kwargs = _run_kwargs(args)
            # Scenarios run side by side; each keeps a single sweep worker.
            batch_workers = kwargs.pop("workers") or 1
            reports = run_many(scenarios, workers=batch_workers, mode="deathtime", **kwargs)
        else:
            reports = [run(_load(args.scenario), args.command, **_run_kwargs(args))]
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    except (RunError, SweepError, NumericError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for report in reports:
        print(_summary(report))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
