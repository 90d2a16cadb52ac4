"""Evaluation statistics computed from an episode trace.

Every quantity here is derived from the exported trace records alone, so
results can be recomputed offline from a trace file and must agree with
the live run.  The warm-up filter drops jobs injected before warmup ticks;
tasks of jobs that never finished by the horizon still contribute their
completed-task statistics, while the job itself counts as remaining.
"""

from __future__ import annotations

import csv
import io
import statistics
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .kernel import TraceRecord

TABLE_COLUMNS = (
    "scheduler", "scale", "seed", "art", "mean_waiting", "mean_running",
    "avg_latency", "throughput_ratio", "injected", "completed", "remaining",
    "error",
)


@dataclass(frozen=True)
class TaskRecord:
    """Timing of one completed task, reconstructed from its transitions."""

    job_instance_id: int
    task_id: int
    inject_time: int
    ready_time: int
    exec_start: int
    exec_finish: int
    assigned_pe: Optional[int]

    @property
    def waiting(self) -> int:
        return self.exec_start - self.ready_time

    @property
    def running(self) -> int:
        return self.exec_finish - self.exec_start

    @property
    def response(self) -> int:
        return self.exec_finish - self.ready_time


@dataclass(frozen=True)
class JobRecord:
    job_instance_id: int
    inject_time: int
    num_tasks: int
    completed_tasks: int
    finish_time: Optional[int]  # None while any task is unfinished

    @property
    def completed(self) -> bool:
        return self.finish_time is not None

    @property
    def duration(self) -> Optional[int]:
        return None if self.finish_time is None else self.finish_time - self.inject_time


@dataclass(frozen=True)
class RunStats:
    """All per-run statistics; mean fields are None when nothing counted."""

    art: Optional[float]
    mean_waiting: Optional[float]
    mean_running: Optional[float]
    avg_latency: Optional[float]
    throughput_ratio: Optional[float]
    injected: int
    completed: int
    remaining: int
    tasks: tuple[TaskRecord, ...]
    jobs: tuple[JobRecord, ...]


def build_records(trace: Sequence[TraceRecord]) -> tuple[list[TaskRecord], list[JobRecord]]:
    """Reconstruct per-task and per-job timing from raw transitions."""
    inject: dict[int, int] = {}
    task_count: dict[int, int] = {}
    done_count: dict[int, int] = {}
    last_finish: dict[int, int] = {}
    ready: dict[tuple[int, int], int] = {}
    start: dict[tuple[int, int], int] = {}
    pe: dict[tuple[int, int], Optional[int]] = {}
    tasks: list[TaskRecord] = []
    for rec in trace:
        key = (rec.job_instance_id, rec.task_id)
        if rec.from_state == "none":
            inject.setdefault(rec.job_instance_id, rec.tick)
            task_count[rec.job_instance_id] = task_count.get(rec.job_instance_id, 0) + 1
        elif rec.to_state == "ready":
            ready[key] = rec.tick
        elif rec.to_state == "running":
            start[key] = rec.tick
            pe[key] = rec.pe_id
        elif rec.to_state == "completed":
            done_count[rec.job_instance_id] = done_count.get(rec.job_instance_id, 0) + 1
            last_finish[rec.job_instance_id] = rec.tick
            tasks.append(TaskRecord(
                job_instance_id=rec.job_instance_id,
                task_id=rec.task_id,
                inject_time=inject[rec.job_instance_id],
                ready_time=ready[key],
                exec_start=start[key],
                exec_finish=rec.tick,
                assigned_pe=pe[key],
            ))
    jobs = []
    for job_id in sorted(inject):
        total = task_count[job_id]
        done = done_count.get(job_id, 0)
        jobs.append(JobRecord(
            job_instance_id=job_id,
            inject_time=inject[job_id],
            num_tasks=total,
            completed_tasks=done,
            finish_time=last_finish[job_id] if done == total else None,
        ))
    return tasks, jobs


def compute_run_stats(trace: Sequence[TraceRecord], warmup: int = 0) -> RunStats:
    """All statistics over jobs injected at or after the warm-up tick."""
    all_tasks, all_jobs = build_records(trace)
    jobs = [j for j in all_jobs if j.inject_time >= warmup]
    counted_ids = {j.job_instance_id for j in jobs}
    tasks = [t for t in all_tasks if t.job_instance_id in counted_ids]

    art = mean_waiting = mean_running = None
    if tasks:
        art = statistics.fmean(t.response for t in tasks)
        mean_waiting = statistics.fmean(t.waiting for t in tasks)
        mean_running = statistics.fmean(t.running for t in tasks)

    durations = [j.duration for j in jobs if j.completed]
    avg_latency = statistics.fmean(durations) if durations else None

    total_exec = sum(t.running for t in tasks)
    throughput_ratio = len(durations) / total_exec if total_exec > 0 else None

    return RunStats(
        art=art,
        mean_waiting=mean_waiting,
        mean_running=mean_running,
        avg_latency=avg_latency,
        throughput_ratio=throughput_ratio,
        injected=len(jobs),
        completed=len(durations),
        remaining=len(jobs) - len(durations),
        tasks=tuple(tasks),
        jobs=tuple(jobs),
    )


def average_response_time(trace: Sequence[TraceRecord], warmup: int = 0) -> Optional[float]:
    """Mean task response (completion − ready); None when nothing counted."""
    return compute_run_stats(trace, warmup).art


def average_latency(trace: Sequence[TraceRecord], warmup: int = 0) -> Optional[float]:
    """Mean completed-job duration (finish − inject); None when none completed."""
    return compute_run_stats(trace, warmup).avg_latency


def job_counts(trace: Sequence[TraceRecord], warmup: int = 0) -> tuple[int, int, int]:
    """(injected, completed, remaining) job counts after warm-up filtering."""
    stats = compute_run_stats(trace, warmup)
    return stats.injected, stats.completed, stats.remaining


def _format_cell(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def render_results_table(rows: Sequence[Mapping[str, object]]) -> str:
    """Render experiment rows as CSV text with the fixed column set."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(TABLE_COLUMNS)
    for row in rows:
        writer.writerow([_format_cell(row.get(col)) for col in TABLE_COLUMNS])
    return buffer.getvalue()
