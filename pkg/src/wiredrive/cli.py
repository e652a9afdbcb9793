"""Command-line front end for the wire-driven humanoid simulator.

Four commands:

* ``run`` — simulate one or more scenarios and write, per scenario, the
  trajectory CSV, the SVG plots, and a run manifest (scenario hash,
  package version, wall time).
* ``validate`` — load scenario files and print every violation found.
* ``emit-scenario`` — write a built-in scenario out as an editable file.
* ``list`` — enumerate the built-in scenario names.

Scenario values can be overridden from the command line with repeated
``--set dotted.key=value`` flags; the value is parsed as JSON when
possible and kept as a string otherwise.  Overrides are applied to the
scenario document before validation, so a typo in a key name is rejected
the same way a bad file would be.

Exit codes: 0 on success, 1 for scenario problems (unreadable file,
validation violations, infeasible tension demands at run time), 2 for
unknown commands or flags.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import json
import os
import sys
from typing import Any, Optional, Sequence

from . import __version__
from .control import InfeasibleTension
from .engine import emit_csv, emit_plots, run, write_manifest
from .model import (
    Scenario,
    ScenarioError,
    load_scenario,
    scenario_from_dict,
    scenario_to_dict,
    serialize_scenario,
)
from .scenarios import builtin_scenario, builtin_scenario_names

#: Environment variable consulted for the default output directory.
OUTDIR_ENV = "WIREDRIVE_OUT"

SCENARIO_SUFFIX = ".scn.json"


class OverrideError(ValueError):
    """A ``--set`` flag that cannot be applied to the scenario document."""


# ---------------------------------------------------------------------------
# overrides


def parse_override(text: str) -> tuple[str, Any]:
    """Split ``dotted.key=value``; the value is JSON when it parses as such."""
    key, sep, raw = text.partition("=")
    key = key.strip()
    if not sep or not key:
        raise OverrideError(
            f"override must look like dotted.key=value, got {text!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def _step_into(node: Any, part: str, key: str) -> Any:
    """Return the index usable as ``node[index]`` for one dotted segment."""
    if isinstance(node, list):
        try:
            idx = int(part)
        except ValueError:
            raise OverrideError(
                f"{key}: {part!r} must be an integer list index") from None
        if not -len(node) <= idx < len(node):
            raise OverrideError(
                f"{key}: index {idx} is outside the {len(node)}-element list")
        return idx
    if isinstance(node, dict):
        return part
    raise OverrideError(
        f"{key}: {part!r} descends into a scalar value")


def apply_overrides(doc: dict, pairs: Sequence[tuple[str, Any]]) -> dict:
    """Apply parsed overrides to a scenario document, in place."""
    for key, value in pairs:
        parts = key.split(".")
        node: Any = doc
        for part in parts[:-1]:
            idx = _step_into(node, part, key)
            if isinstance(node, dict) and idx not in node:
                # Allow filling in optional sub-documents (e.g. gains);
                # unknown keys are still rejected by scenario validation.
                node[idx] = {}
            node = node[idx]
        idx = _step_into(node, parts[-1], key)
        node[idx] = value
    return doc


# ---------------------------------------------------------------------------
# scenario sources


def _load_source(kind: str, value: str,
                 overrides: Sequence[tuple[str, Any]]) -> Scenario:
    """Materialize a scenario from a built-in name or a file path."""
    if kind == "builtin":
        scenario = builtin_scenario(value)
    else:
        try:
            with open(value, "r") as fh:
                text = fh.read()
        except OSError as exc:
            raise OverrideError(f"cannot read scenario file: {exc}") from exc
        scenario = load_scenario(text)
    if overrides:
        doc = scenario_to_dict(scenario)
        apply_overrides(doc, overrides)
        scenario = scenario_from_dict(doc)
    return scenario


def _source_label(kind: str, value: str) -> str:
    if kind == "builtin":
        return value
    stem = os.path.basename(value)
    for suffix in (SCENARIO_SUFFIX, ".json", ".scn"):
        if stem.endswith(suffix):
            return stem[:-len(suffix)]
    return stem


# ---------------------------------------------------------------------------
# the run command


def _execute_run(kind: str, value: str, overrides: Sequence[tuple[str, Any]],
                 outdir: str, full_rate: bool, plots: bool,
                 label: Optional[str] = None) -> tuple[bool, str]:
    """Run one scenario and write its outputs; returns (ok, report text)."""
    label = label or _source_label(kind, value)
    try:
        scenario = _load_source(kind, value, overrides)
        os.makedirs(outdir, exist_ok=True)
        result = run(scenario)
        csv_path = os.path.join(outdir, "trajectory.csv")
        emit_csv(result.log, csv_path, full_rate=full_rate)
        written = [csv_path]
        if plots:
            written += emit_plots(result.log, outdir)
        manifest_path = os.path.join(outdir, "run-manifest.json")
        write_manifest(result.manifest, manifest_path)
        written.append(manifest_path)
    except (ScenarioError, InfeasibleTension, OverrideError) as exc:
        return False, f"error: {label}: {type(exc).__name__}: {exc}"
    m = result.manifest
    lines = [
        f"{label}: simulated {m['duration']:g} s "
        f"({m['ticks']} ticks, {m['events']} events) "
        f"in {m['wall_time_s']:.2f} s wall",
    ]
    for i, text in result.log.all_events():
        lines.append(f"{label}:   t={result.log.t[i]:.3f} {text}")
    lines += [f"{label}:   wrote {p}" for p in written]
    return True, "\n".join(lines)


def _run_job(job: dict) -> tuple[bool, str]:
    """Picklable wrapper so runs can be fanned out to worker processes."""
    return _execute_run(**job)


def _cmd_run(args: argparse.Namespace) -> int:
    sources = [("builtin", name) for name in args.builtin]
    sources += [("file", path) for path in args.scenarios]
    if not sources:
        print("error: run needs a scenario file or --builtin NAME",
              file=sys.stderr)
        return 2
    try:
        overrides = [parse_override(text) for text in args.set]
    except OverrideError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    outdir = args.outdir or os.environ.get(OUTDIR_ENV) or "."
    jobs = []
    seen: dict[str, int] = {}
    for kind, value in sources:
        label = _source_label(kind, value)
        seen[label] = seen.get(label, 0) + 1
        if seen[label] > 1:
            label = f"{label}-{seen[label]}"
        sub = outdir if len(sources) == 1 else os.path.join(outdir, label)
        jobs.append(dict(kind=kind, value=value, overrides=overrides,
                         outdir=sub, full_rate=args.full_rate,
                         plots=not args.no_plots, label=label))

    if args.jobs > 1 and len(jobs) > 1:
        with concurrent.futures.ProcessPoolExecutor(
                max_workers=args.jobs) as pool:
            results = list(pool.map(_run_job, jobs))
    else:
        results = [_run_job(job) for job in jobs]

    status = 0
    for ok, text in results:
        print(text, file=sys.stdout if ok else sys.stderr)
        if not ok:
            status = 1
    return status


# ---------------------------------------------------------------------------
# the validate command


def _cmd_validate(args: argparse.Namespace) -> int:
    status = 0
    for path in args.scenarios:
        try:
            with open(path, "r") as fh:
                text = fh.read()
        except OSError as exc:
            print(f"error: {path}: cannot read: {exc}", file=sys.stderr)
            status = 1
            continue
        try:
            scenario = load_scenario(text)
        except ScenarioError as exc:
            print(f"error: {path}: {len(exc.violations)} violation(s)",
                  file=sys.stderr)
            for violation in exc.violations:
                print(f"  {violation}", file=sys.stderr)
            status = 1
            continue
        print(f"{path}: OK ({scenario.meta.name or 'unnamed'}, "
              f"{len(scenario.wires)} wires, {len(scenario.phases)} phases)")
    return status


# ---------------------------------------------------------------------------
# the emit-scenario command


def _cmd_emit(args: argparse.Namespace) -> int:
    try:
        overrides = [parse_override(text) for text in args.set]
    except OverrideError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        scenario = _load_source("builtin", args.name, overrides)
    except (ScenarioError, OverrideError) as exc:
        print(f"error: {args.name}: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 1
    outdir = args.outdir or os.environ.get(OUTDIR_ENV) or "."
    os.makedirs(outdir, exist_ok=True)
    path = os.path.join(outdir, args.name + SCENARIO_SUFFIX)
    with open(path, "w") as fh:
        fh.write(serialize_scenario(scenario))
    print(path)
    return 0


# ---------------------------------------------------------------------------
# the list command


def _cmd_list(_args: argparse.Namespace) -> int:
    for name in builtin_scenario_names():
        print(name)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wiredrive",
        description="Deterministic simulator for a wire-driven humanoid "
                    "suspended from environment anchors.",
        epilog=f"The {OUTDIR_ENV} environment variable sets the default "
               "output directory when -o is not given.",
    )
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True,
                                     metavar="command")

    p_run = commands.add_parser(
        "run", help="simulate scenarios and write trajectory outputs")
    p_run.add_argument("scenarios", nargs="*", metavar="FILE",
                       help="scenario files to run")
    p_run.add_argument("--builtin", action="append", default=[],
                       metavar="NAME", choices=builtin_scenario_names(),
                       help="run a built-in scenario (repeatable)")
    p_run.add_argument("-o", "--outdir", default=None,
                       help="output directory (default: $%s or .)" % OUTDIR_ENV)
    p_run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a scenario value by dotted key "
                            "(repeatable), e.g. constants.total_mass=60")
    p_run.add_argument("--full-rate", action="store_true",
                       help="log every integration step instead of "
                            "decimating to 100 Hz")
    p_run.add_argument("--no-plots", action="store_true",
                       help="skip the SVG plots, write only CSV and manifest")
    p_run.add_argument("--jobs", type=int, default=1, metavar="N",
                       help="run multiple scenarios in up to N processes")
    p_run.set_defaults(func=_cmd_run)

    p_val = commands.add_parser(
        "validate", help="check scenario files and print violations")
    p_val.add_argument("scenarios", nargs="+", metavar="FILE")
    p_val.set_defaults(func=_cmd_validate)

    p_emit = commands.add_parser(
        "emit-scenario", help="write a built-in scenario to a file")
    p_emit.add_argument("name", choices=builtin_scenario_names(),
                        help="built-in scenario name")
    p_emit.add_argument("-o", "--outdir", default=None,
                        help="output directory (default: $%s or .)" % OUTDIR_ENV)
    p_emit.add_argument("--set", action="append", default=[],
                        metavar="KEY=VALUE",
                        help="override a scenario value before writing")
    p_emit.set_defaults(func=_cmd_emit)

    p_list = commands.add_parser("list", help="list built-in scenario names")
    p_list.set_defaults(func=_cmd_list)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse prints usage itself; keep its exit code (2 for unknown
        # commands or flags, 0 for --help/--version).
        code = exc.code
        return code if isinstance(code, int) else 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
