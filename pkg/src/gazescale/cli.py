"""Command line front end.

Three operations: simulate a batch of scripted trials into an output tree,
replay a saved trace as an event timeline plus its trial score, and serve
live interaction sessions over a websocket.

Every output file is deterministic for a given flag set: trial seeds are
mixed from the single --seed value, rows are written in enumeration order
regardless of worker scheduling, and no timestamps or absolute paths are
recorded.  Exit codes: 0 success, 2 usage, 3 parse failure, 4 evaluation
failure, 5 every requested trial infeasible.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Optional, Sequence

from .actor import synthesize_trial
from .config import EngineConfig, load_config
from .errors import EngineError, InfeasibleTarget, ParseError
from .metrics import (TrialKey, TrialResult, TrialRunner, aggregate,
                      evaluate_trial, format_report)
from .records import canonical_dumps
from .state_machine import EventKind
from .techniques import Technique
from .trace import (DIRECTIONS, ActorParams, Trace, TrialSpec, dumps_trace,
                    load_trace)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_EVALUATION = 4
EXIT_INFEASIBLE = 5

DEFAULT_SCALES = (0.4, 0.67, 1.5, 2.5)
TECHNIQUE_NAMES = tuple(t.value for t in Technique)

_MASK64 = 0xFFFFFFFFFFFFFFFF


def derive_seed(base: int, index: int) -> int:
    """Per-trial seed from the batch seed and the trial's position.

    SplitMix64-style mixing keeps neighbouring trials decorrelated while
    staying reproducible across platforms.
    """
    x = (base * 0x9E3779B97F4A7C15 + (index + 1) * 0xBF58476D1CE4E5B9) \
        & _MASK64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _MASK64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _MASK64
    x ^= x >> 31
    return x


# -- simulate ---------------------------------------------------------------


def _trace_filename(index: int, technique: str, scale: float,
                    direction: str, rep: int) -> str:
    return f"trial_{index:04d}_{technique}_x{scale:g}_{direction}_r{rep}.jsonl"


def _run_one(task: tuple) -> tuple[dict[str, Any], Optional[str]]:
    """Worker body: synthesize and score one trial.

    Takes a plain tuple and returns (result row, trace text) so the batch
    can fan out over processes; the caller writes files in trial order.
    """
    (index, technique_name, scale, direction, rep, seed, noise_sd,
     config_record) = task
    config = EngineConfig.from_record(config_record)
    technique = Technique.parse(technique_name)
    row: dict[str, Any] = {
        "trial": index,
        "technique": technique_name,
        "target_scale": scale,
        "target_direction": direction,
        "rep": rep,
        "seed": seed,
    }
    spec = TrialSpec(target_direction=direction, target_scale=scale)
    actor = ActorParams(seed=seed, positional_noise_sd_m=noise_sd)
    try:
        trace = synthesize_trial(spec, actor, technique, config)
    except InfeasibleTarget as exc:
        row["infeasible"] = True
        row["reason"] = str(exc)
        return row, None
    result = evaluate_trial(trace, config=config)
    row["infeasible"] = False
    row["trace"] = "traces/" + _trace_filename(index, technique_name, scale,
                                               direction, rep)
    row["result"] = result.to_record()
    return row, dumps_trace(trace)


def _simulate_tasks(args: argparse.Namespace,
                    config: EngineConfig) -> list[tuple]:
    techniques = args.technique or list(TECHNIQUE_NAMES)
    scales = args.scale or list(DEFAULT_SCALES)
    directions = args.direction or list(DIRECTIONS)
    config_record = config.to_record()
    tasks = []
    index = 0
    for technique in techniques:
        for scale in scales:
            for direction in directions:
                for rep in range(args.reps):
                    tasks.append((index, technique, scale, direction, rep,
                                  derive_seed(args.seed, index),
                                  args.noise_sd, config_record))
                    index += 1
    return tasks


def _infeasible_lines(rows: list[dict[str, Any]]) -> list[str]:
    lines = []
    for row in rows:
        if row["infeasible"]:
            lines.append(f"  trial {row['trial']:04d} {row['technique']} "
                         f"x{row['target_scale']:g} {row['target_direction']} "
                         f"rep={row['rep']}: {row['reason']}")
    return lines


def cmd_simulate(args: argparse.Namespace) -> int:
    try:
        config = load_config(args.config) if args.config else EngineConfig()
    except ParseError as exc:
        print(f"config: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"config: {exc}", file=sys.stderr)
        return EXIT_USAGE

    tasks = _simulate_tasks(args, config)
    out = Path(args.out)
    traces_dir = out / "traces"
    traces_dir.mkdir(parents=True, exist_ok=True)

    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            outcomes = list(pool.map(_run_one, tasks))
    else:
        outcomes = [_run_one(task) for task in tasks]

    rows = []
    pairs: list[tuple[TrialKey, TrialResult]] = []
    for row, trace_text in outcomes:
        rows.append(row)
        if trace_text is not None:
            (out / row["trace"]).write_text(trace_text, encoding="utf-8")
            key = TrialKey(row["technique"], row["target_scale"],
                           row["target_direction"])
            pairs.append((key, TrialResult(**row["result"])))

    with open(out / "results.jsonl", "w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(canonical_dumps(row) + "\n")

    infeasible = _infeasible_lines(rows)
    report_rows = aggregate(pairs) if pairs else []
    with open(out / "report.jsonl", "w", encoding="utf-8") as handle:
        for agg_row in report_rows:
            handle.write(canonical_dumps(agg_row.to_record()) + "\n")

    report_text = format_report(report_rows) if report_rows \
        else "no feasible trials"
    if infeasible:
        report_text += "\n\ninfeasible targets:\n" + "\n".join(infeasible)
    (out / "report.txt").write_text(report_text + "\n", encoding="utf-8")

    print(report_text)
    print(f"\n{len(pairs)} of {len(rows)} trials written to {out}")
    if rows and not pairs:
        return EXIT_INFEASIBLE
    return EXIT_OK


# -- replay -----------------------------------------------------------------


def _resolve_technique(trace: Trace,
                       override: Optional[str]) -> Technique:
    if override:
        return Technique.parse(override)
    if trace.technique is None:
        raise ValueError("trace header names no technique; pass --technique")
    return Technique.parse(trace.technique)


_TIMELINE_KINDS = (EventKind.MODE_IN_TRANSLATION, EventKind.MODE_IN_SCALING,
                   EventKind.MODE_OUT)
_RUN_KINDS = (EventKind.TRACKING_LOSS, EventKind.OBJECT_MOVED)


def _replay_timeline(trace: Trace, technique: Technique,
                     config: Optional[EngineConfig], jsonl: bool,
                     write) -> None:
    """Stream the trace through a trial runner, printing as it goes.

    Human mode prints mode events, outline changes, snap, and a coarse
    scale trajectory; jsonl mode emits one full state record per frame.
    """
    spec = trace.trial_spec
    if spec is None:
        raise ValueError("trace header has no trial geometry")
    runner = TrialRunner(technique, spec, config)
    if not jsonl:
        write(f"technique={technique.value} scale=x{spec.target_scale:g} "
              f"direction={spec.target_direction} frames={len(trace)}")
    last_outline: Optional[str] = None
    last_scale: Optional[float] = None
    previous_runs: set[EventKind] = set()
    snapped_reported = False
    for frame in trace:
        events = runner.step(frame)
        state = runner.engine.state_record()
        if jsonl:
            write(canonical_dumps({
                "t": frame.t,
                "state": state,
                "events": [event.to_record() for event in events],
            }))
            continue
        runs: set[EventKind] = set()
        for event in events:
            if event.kind in _TIMELINE_KINDS:
                origin = f" from {event.from_mode.value}" \
                    if event.from_mode is not None else ""
                write(f"t={frame.t:8.3f}  {event.kind.value}{origin}")
            elif event.kind in _RUN_KINDS:
                runs.add(event.kind)
                if event.kind not in previous_runs:
                    write(f"t={frame.t:8.3f}  {event.kind.value}")
        previous_runs = runs
        if state["outline"] != last_outline:
            write(f"t={frame.t:8.3f}  outline {state['outline']}")
            last_outline = state["outline"]
        scale = state["object_scale"]
        if last_scale is None or abs(scale - last_scale) >= 0.01 * last_scale:
            write(f"t={frame.t:8.3f}  scale {scale:.4f}")
            last_scale = scale
        if runner.snapped and not snapped_reported:
            write(f"t={frame.t:8.3f}  snapped to target")
            snapped_reported = True


def cmd_replay(args: argparse.Namespace) -> int:
    path = Path(args.trace)
    if not path.is_file():
        print(f"no such trace file: {path}", file=sys.stderr)
        return EXIT_USAGE
    try:
        config = load_config(args.config) if args.config else None
        trace = load_trace(path)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        technique = _resolve_technique(trace, args.technique)
        _replay_timeline(trace, technique, config, args.jsonl, print)
        result = evaluate_trial(trace, technique=technique, config=config)
    except (EngineError, ValueError) as exc:
        print(f"evaluation failed: {exc}", file=sys.stderr)
        return EXIT_EVALUATION
    if args.jsonl:
        key = TrialKey(technique.value, trace.trial_spec.target_scale,
                       trace.trial_spec.target_direction)
        print(canonical_dumps({"key": key.to_record(),
                               "result": result.to_record()}))
    else:
        print("result:")
        for name, value in result.to_record().items():
            print(f"  {name}: {json.dumps(value)}")
    return EXIT_OK


# -- serve ------------------------------------------------------------------


def cmd_serve(args: argparse.Namespace) -> int:
    try:
        config = load_config(args.config) if args.config else EngineConfig()
    except ParseError as exc:
        print(f"config: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    from .server import run_server
    try:
        run_server(port=args.port, config=config)
    except OSError as exc:
        print(f"bind failed on port {args.port}: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        pass
    return EXIT_OK


# -- entry ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gazescale",
        description="Gaze-aligned scaling engine: simulate, replay, serve.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate",
                         help="run scripted trials into an output tree")
    sim.add_argument("--technique", action="append",
                     choices=TECHNIQUE_NAMES,
                     help="technique to run (repeatable; default all)")
    sim.add_argument("--scale", action="append", type=float,
                     help="target scale factor (repeatable; default "
                          "0.4 0.67 1.5 2.5)")
    sim.add_argument("--direction", action="append", choices=DIRECTIONS,
                     help="target direction (repeatable; default all)")
    sim.add_argument("--reps", type=int, default=1,
                     help="repetitions per condition (default 1)")
    sim.add_argument("--seed", type=int, default=0,
                     help="batch seed; every trial seed derives from it")
    sim.add_argument("--noise-sd", type=float, default=0.0,
                     help="tracking noise standard deviation in meters")
    sim.add_argument("--config", help="threshold config file")
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument("--jobs", type=int, default=1,
                     help="worker processes (default 1)")
    sim.set_defaults(func=cmd_simulate)

    rep = sub.add_parser("replay",
                         help="print a trace's event timeline and score")
    rep.add_argument("trace", help="trace file to replay")
    rep.add_argument("--technique", choices=TECHNIQUE_NAMES,
                     help="override the technique named in the header")
    rep.add_argument("--config", help="threshold config file")
    rep.add_argument("--jsonl", action="store_true",
                     help="emit one state record per frame instead of the "
                          "human timeline")
    rep.set_defaults(func=cmd_replay)

    srv = sub.add_parser("serve",
                         help="serve live interaction sessions over a "
                              "websocket")
    srv.add_argument("--port", type=int, default=8765,
                     help="port to bind (default 8765)")
    srv.add_argument("--config", help="threshold config file")
    srv.set_defaults(func=cmd_serve)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "reps", 1) < 1 or getattr(args, "jobs", 1) < 1:
        print("--reps and --jobs must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    if getattr(args, "noise_sd", 0.0) < 0:
        print("--noise-sd must be nonnegative", file=sys.stderr)
        return EXIT_USAGE
    if getattr(args, "scale", None):
        for value in args.scale:
            if value <= 0:
                print("--scale must be positive", file=sys.stderr)
                return EXIT_USAGE
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
