"""Experiment runner: sweep schedulers x scales x seeds, aggregate metrics,
and export results tables, traces, and step logs.

Runs are independent and may execute in parallel (--jobs); output is
byte-identical regardless of worker count because rows are sorted by
(scheduler, scale, seed) and every run is deterministic given its seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .env import Environment
from .errors import ConfigurationError, SocSimError
from .jobgen import GeneratorConfig
from .kernel import TraceRecord, sorted_trace, write_trace
from .metrics import RunStats, compute_run_stats, render_results_table
from .profiles import ResourceProfile, TaskGraph, canonical_profile_dir, load_profile_dir
from .schedulers import get_scheduler

DEFAULT_SCHEDULERS = ("sjf", "met", "etf", "heft")
DEFAULT_SCALES = (25.0, 50.0, 100.0, 250.0, 500.0)
DEFAULT_SEEDS = (0, 1, 2, 3, 4)
DEFAULT_SIM_LENGTH = 5000
DEFAULT_QUEUE_CAPACITY = 3


@dataclass(frozen=True)
class ExperimentSpec:
    """One sweep: the cross product of schedulers, scales, and seeds."""

    schedulers: tuple[str, ...] = DEFAULT_SCHEDULERS
    scales: tuple[float, ...] = DEFAULT_SCALES
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    sim_length: int = DEFAULT_SIM_LENGTH
    queue_capacity: int = DEFAULT_QUEUE_CAPACITY
    pss: bool = False
    warmup: int = 0
    drop_when_full: bool = False
    profiles: Path = field(default_factory=canonical_profile_dir)
    trace_dir: Optional[Path] = None
    trace_format: str = "csv"
    step_log: Optional[Path] = None
    out: Optional[Path] = None
    jobs: int = 1

    def validate(self) -> None:
        if not self.schedulers:
            raise ConfigurationError("no schedulers selected")
        if not self.scales:
            raise ConfigurationError("no scales selected")
        if not self.seeds:
            raise ConfigurationError("no seeds selected")
        for scale in self.scales:
            if scale <= 0:
                raise ConfigurationError(f"scale must be positive, got {scale}")
        if self.jobs < 1:
            raise ConfigurationError("jobs must be >= 1")
        if self.trace_format not in ("csv", "jsonl"):
            raise ConfigurationError(f"unknown trace format {self.trace_format!r}")
        for name in self.schedulers:
            get_scheduler(name)  # raises UnknownSchedulerError on bad names
        GeneratorConfig(
            scale=self.scales[0], queue_capacity=self.queue_capacity,
            sim_length=self.sim_length, seed=0, pss=self.pss,
            warmup_ticks=self.warmup, drop_when_full=self.drop_when_full,
        ).validate()


@dataclass(frozen=True)
class SingleRunResult:
    scheduler: str
    scale: float
    seed: int
    stats: Optional[RunStats]
    trace: tuple[TraceRecord, ...]
    steps: tuple[str, ...]  # serialized step-log lines
    error: Optional[str] = None


def run_single(graphs: Sequence[TaskGraph], resources: ResourceProfile,
               scheduler_name: str, config: GeneratorConfig,
               collect_steps: bool = False) -> tuple[RunStats, tuple[TraceRecord, ...], tuple[str, ...]]:
    """Run one full episode with a named scheduler; returns (stats, trace, steps)."""
    scheduler = get_scheduler(scheduler_name)
    env = Environment(graphs, resources, config)
    obs = env.reset()
    steps: list[str] = []
    if collect_steps:
        steps.append(json.dumps({"kind": "reset", "obs": obs.to_json()},
                                sort_keys=True, separators=(",", ":")))
    while not env.done:
        decision = scheduler.schedule(obs)
        result = env.step(decision)
        obs = result.observation
        if collect_steps:
            steps.append(json.dumps(
                {"kind": "step", "obs": obs.to_json(),
                 "reward": result.reward, "done": result.done},
                sort_keys=True, separators=(",", ":")))
    trace = tuple(sorted_trace(env.world.trace))
    stats = compute_run_stats(trace, config.warmup_ticks)
    return stats, trace, tuple(steps)


def _execute_run(args: tuple) -> SingleRunResult:
    graphs, resources, scheduler_name, scale, seed, spec_fields, collect_steps = args
    config = GeneratorConfig(
        scale=scale,
        queue_capacity=spec_fields["queue_capacity"],
        sim_length=spec_fields["sim_length"],
        seed=seed,
        pss=spec_fields["pss"],
        warmup_ticks=spec_fields["warmup"],
        drop_when_full=spec_fields["drop_when_full"],
    )
    try:
        stats, trace, steps = run_single(graphs, resources, scheduler_name,
                                         config, collect_steps)
        return SingleRunResult(scheduler_name, scale, seed, stats, trace, steps)
    except Exception as exc:  # per-run isolation: failures become table rows
        return SingleRunResult(scheduler_name, scale, seed, None, (), (),
                               error=f"{type(exc).__name__}: {exc}")


def scale_text(scale: float) -> str:
    """Integer-looking scales render without a decimal point."""
    return str(int(scale)) if float(scale).is_integer() else str(float(scale))


def _run_name(scheduler: str, scale: float, seed: int) -> str:
    return f"{scheduler}_scale{scale_text(scale)}_seed{seed}"


def _result_row(result: SingleRunResult) -> dict:
    row = {
        "scheduler": result.scheduler,
        "scale": scale_text(result.scale),
        "seed": result.seed,
        "error": result.error,
    }
    stats = result.stats
    if stats is not None:
        row.update(
            art=stats.art, mean_waiting=stats.mean_waiting,
            mean_running=stats.mean_running, avg_latency=stats.avg_latency,
            throughput_ratio=stats.throughput_ratio, injected=stats.injected,
            completed=stats.completed, remaining=stats.remaining,
        )
    return row


def run_experiment(spec: ExperimentSpec) -> tuple[list[dict], list[SingleRunResult]]:
    """Run a whole sweep; returns (table rows, per-run results), both sorted
    by (scheduler, scale, seed).  Raises on invalid specs; per-run failures
    land in the rows' error column instead."""
    spec.validate()
    graphs, resources = load_profile_dir(spec.profiles)
    spec_fields = {
        "queue_capacity": spec.queue_capacity,
        "sim_length": spec.sim_length,
        "pss": spec.pss,
        "warmup": spec.warmup,
        "drop_when_full": spec.drop_when_full,
    }
    collect_steps = spec.step_log is not None
    runs = [
        (graphs, resources, scheduler, scale, seed, spec_fields, collect_steps)
        for scheduler in sorted(dict.fromkeys(spec.schedulers))
        for scale in sorted(dict.fromkeys(spec.scales))
        for seed in sorted(dict.fromkeys(spec.seeds))
    ]
    if spec.jobs > 1 and len(runs) > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            results = list(pool.map(_execute_run, runs))
    else:
        results = [_execute_run(args) for args in runs]

    if spec.trace_dir is not None:
        spec.trace_dir.mkdir(parents=True, exist_ok=True)
        for result in results:
            name = _run_name(result.scheduler, result.scale, result.seed)
            path = spec.trace_dir / f"{name}.trace.{spec.trace_format}"
            with open(path, "w", newline="") as stream:
                write_trace(result.trace, stream, spec.trace_format)
    if spec.step_log is not None:
        spec.step_log.mkdir(parents=True, exist_ok=True)
        for result in results:
            name = _run_name(result.scheduler, result.scale, result.seed)
            path = spec.step_log / f"{name}.steps.jsonl"
            with open(path, "w", newline="") as stream:
                for line in result.steps:
                    stream.write(line + "\n")

    rows = [_result_row(result) for result in results]
    return rows, results


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="socsim",
        description="Sweep DAG-scheduling heuristics over a simulated "
                    "heterogeneous SoC and export metrics tables and traces.",
    )
    parser.add_argument("--profiles", type=Path, default=None,
                        help="profile directory (resources.json + job profiles); "
                             "defaults to the bundled canonical fixture")
    parser.add_argument("--scheduler", default=None,
                        help="comma-separated scheduler names (default: sjf,met,etf,heft)")
    parser.add_argument("--scale", default=None,
                        help="comma-separated mean inter-arrival ticks "
                             "(default: 25,50,100,250,500)")
    parser.add_argument("--seed", default=None,
                        help="comma-separated seeds (default: 0,1,2,3,4)")
    parser.add_argument("--sim-length", type=int, default=None,
                        help=f"episode horizon in ticks (default: {DEFAULT_SIM_LENGTH})")
    parser.add_argument("--queue-capacity", type=int, default=None,
                        help=f"job queue bound T (default: {DEFAULT_QUEUE_CAPACITY})")
    parser.add_argument("--pss", action="store_true", default=None,
                        help="pseudo-steady-state: prefill the job queue at tick 0")
    parser.add_argument("--warmup", type=int, default=None,
                        help="ignore jobs injected before this tick in metrics (default: 0)")
    parser.add_argument("--drop-when-full", action="store_true", default=None,
                        help="drop arrivals while the job queue is full instead of deferring")
    parser.add_argument("--trace-dir", type=Path, default=None,
                        help="write one trace file per run into this directory")
    parser.add_argument("--trace-format", choices=("csv", "jsonl"), default=None,
                        help="trace file format (default: csv)")
    parser.add_argument("--step-log", type=Path, default=None,
                        help="write one step log (observation/reward/done JSONL) per run")
    parser.add_argument("--out", type=Path, default=None,
                        help="write the results table to this file instead of stdout")
    parser.add_argument("--jobs", type=int, default=None,
                        help="parallel worker processes (default: 1)")
    parser.add_argument("--config", type=Path, default=None,
                        help="JSON file with the same keys as the flags; flags win")
    return parser


_CONFIG_KEYS = {
    "profiles", "scheduler", "scale", "seed", "sim_length", "queue_capacity",
    "pss", "warmup", "drop_when_full", "trace_dir", "trace_format",
    "step_log", "out", "jobs",
}


def _merge_config(args: argparse.Namespace) -> dict:
    """Start from hard defaults, overlay the config file, overlay the flags."""
    merged: dict = {}
    if args.config is not None:
        try:
            doc = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise ConfigurationError(f"cannot read config file: {exc}") from exc
        except ValueError as exc:
            raise ConfigurationError(f"malformed config file: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigurationError("config file must hold a JSON object")
        unknown = set(doc) - _CONFIG_KEYS
        if unknown:
            raise ConfigurationError(f"unknown config key(s): {sorted(unknown)}")
        merged.update(doc)
    for key in _CONFIG_KEYS:
        value = getattr(args, key)
        if value is not None:
            merged[key] = value
    return merged


def _parse_list(value: object, parse_item, what: str) -> tuple:
    if isinstance(value, (list, tuple)):
        items = list(value)
    else:
        items = [part.strip() for part in str(value).split(",") if part.strip()]
    try:
        return tuple(parse_item(item) for item in items)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"bad {what} list {value!r}: {exc}") from exc


def spec_from_args(args: argparse.Namespace) -> ExperimentSpec:
    merged = _merge_config(args)
    spec = ExperimentSpec(
        schedulers=_parse_list(merged["scheduler"], str, "scheduler")
        if "scheduler" in merged else DEFAULT_SCHEDULERS,
        scales=_parse_list(merged["scale"], float, "scale")
        if "scale" in merged else DEFAULT_SCALES,
        seeds=_parse_list(merged["seed"], int, "seed")
        if "seed" in merged else DEFAULT_SEEDS,
        sim_length=int(merged.get("sim_length", DEFAULT_SIM_LENGTH)),
        queue_capacity=int(merged.get("queue_capacity", DEFAULT_QUEUE_CAPACITY)),
        pss=bool(merged.get("pss", False)),
        warmup=int(merged.get("warmup", 0)),
        drop_when_full=bool(merged.get("drop_when_full", False)),
        profiles=Path(merged.get("profiles", canonical_profile_dir())),
        trace_dir=Path(merged["trace_dir"]) if merged.get("trace_dir") else None,
        trace_format=str(merged.get("trace_format", "csv")),
        step_log=Path(merged["step_log"]) if merged.get("step_log") else None,
        out=Path(merged["out"]) if merged.get("out") else None,
        jobs=int(merged.get("jobs", 1)),
    )
    spec.validate()
    return spec


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        spec = spec_from_args(args)
        rows, _ = run_experiment(spec)
    except SocSimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    table = render_results_table(rows)
    if spec.out is not None:
        spec.out.parent.mkdir(parents=True, exist_ok=True)
        with open(spec.out, "w", newline="") as stream:
            stream.write(table)
    else:
        sys.stdout.write(table)
    failures = [row for row in rows if row.get("error")]
    if failures:
        print(f"{len(failures)} run(s) failed", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
