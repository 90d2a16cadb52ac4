"""Discrete-event simulation kernel.

The world state is an EnvStorage: an integer clock, the five task lists
(outstanding / ready / executable / running / completed), a bounded job
queue, per-PE occupancy, and an event queue.  Tasks move strictly forward
through the five states.  Execution is non-preemptive: once a task is
granted a PE slot it holds it until it finishes.

Timing model: a task dispatched to a PE starts executing at

    exec_start = max(grant_time, data_ready_time)

where grant_time is when the PE slot became available to it and
data_ready_time is the latest predecessor finish plus the edge's
communication cost when the predecessor ran on a different PE.  The
execution window is exactly exec_time[pe] ticks; communication happens
before exec_start and does not occupy the PE.
"""

from __future__ import annotations

import heapq
import json
from collections import deque
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from pathlib import Path
from typing import IO, Iterable, Optional, Sequence, Union

from .errors import InvalidActionError
from .profiles import ProcessingElement, ResourceProfile, TaskGraph

TaskKey = tuple[int, int]  # (job_instance_id, task_id)


class TaskState(Enum):
    OUTSTANDING = "outstanding"
    READY = "ready"
    EXECUTABLE = "executable"
    RUNNING = "running"
    COMPLETED = "completed"


# Forward transitions only; None marks creation.
_NEXT_STATE = {
    None: TaskState.OUTSTANDING,
    TaskState.OUTSTANDING: TaskState.READY,
    TaskState.READY: TaskState.EXECUTABLE,
    TaskState.EXECUTABLE: TaskState.RUNNING,
    TaskState.RUNNING: TaskState.COMPLETED,
}


class EventKind(IntEnum):
    """Event priority at equal time: arrivals first, then finishes, then schedule points."""

    JOB_ARRIVAL = 0
    TASK_FINISH = 1
    SCHEDULE_POINT = 2


@dataclass
class TaskInstance:
    """A runtime copy of one task belonging to one injected job."""

    job_instance_id: int
    task_id: int
    state: TaskState = TaskState.OUTSTANDING
    ready_time: Optional[int] = None
    assigned_pe: Optional[int] = None
    exec_start: Optional[int] = None
    exec_finish: Optional[int] = None

    @property
    def key(self) -> TaskKey:
        return (self.job_instance_id, self.task_id)


@dataclass
class JobInstance:
    job_instance_id: int
    graph: TaskGraph
    inject_time: int
    tasks: dict[int, TaskInstance]
    completed_count: int = 0
    finish_time: Optional[int] = None


@dataclass(frozen=True)
class TraceRecord:
    """One task state transition; from_state is 'none' for task creation."""

    tick: int
    job_instance_id: int
    task_id: int
    from_state: str
    to_state: str
    pe_id: Optional[int] = None


@dataclass
class PEUnit:
    """Runtime occupancy of one processing element."""

    pe: ProcessingElement
    running: dict[TaskKey, int] = field(default_factory=dict)  # key -> exec_finish
    queue: deque[TaskKey] = field(default_factory=deque)

    def free_slots(self) -> int:
        return self.pe.capacity - len(self.running)


class EnvStorage:
    """Mutable world state of one simulation episode.  Single-threaded."""

    def __init__(self, graphs: Sequence[TaskGraph], resources: ResourceProfile, sim_length: int):
        self.graphs = tuple(graphs)
        self.resources = resources
        self.sim_length = sim_length
        self.clock = 0
        self.done = sim_length <= 0
        self.jobs: dict[int, JobInstance] = {}
        self.lists: dict[TaskState, dict[TaskKey, TaskInstance]] = {
            state: {} for state in TaskState
        }
        self.pes = [PEUnit(pe) for pe in resources.pes]
        self.live_jobs: list[int] = []  # injected, not yet completed
        self.completed_jobs: list[tuple[int, int, int]] = []  # (job, inject, finish)
        self.injected_jobs = 0
        self.trace: list[TraceRecord] = []
        self.generator = None  # attached by init_world
        self._events: list[tuple[int, int, int, object]] = []
        self._event_seq = 0

    # -- events ------------------------------------------------------------

    def push_event(self, time: int, kind: EventKind, payload: object = None) -> None:
        heapq.heappush(self._events, (time, int(kind), self._event_seq, payload))
        self._event_seq += 1

    def next_event_time(self) -> Optional[int]:
        return self._events[0][0] if self._events else None

    # -- task bookkeeping --------------------------------------------------

    def instance(self, key: TaskKey) -> TaskInstance:
        return self.jobs[key[0]].tasks[key[1]]

    def node(self, inst: TaskInstance):
        return self.jobs[inst.job_instance_id].graph.task(inst.task_id)

    def ready_keys(self) -> list[TaskKey]:
        """Ready list in (job_instance_id, task_id) order."""
        return sorted(self.lists[TaskState.READY])

    def move(self, inst: TaskInstance, to_state: TaskState, tick: int) -> None:
        assert _NEXT_STATE[inst.state] is to_state, (
            f"illegal transition {inst.state} -> {to_state} for {inst.key}"
        )
        self.trace.append(
            TraceRecord(tick, inst.job_instance_id, inst.task_id,
                        inst.state.value, to_state.value, inst.assigned_pe)
        )
        del self.lists[inst.state][inst.key]
        inst.state = to_state
        self.lists[to_state][inst.key] = inst

    def create_task(self, inst: TaskInstance, tick: int) -> None:
        self.trace.append(
            TraceRecord(tick, inst.job_instance_id, inst.task_id,
                        "none", TaskState.OUTSTANDING.value, None)
        )
        inst.state = TaskState.OUTSTANDING
        self.lists[TaskState.OUTSTANDING][inst.key] = inst

    def live_task_count(self) -> int:
        return sum(
            len(self.lists[s])
            for s in (TaskState.OUTSTANDING, TaskState.READY,
                      TaskState.EXECUTABLE, TaskState.RUNNING)
        )

    # -- derived views -----------------------------------------------------

    def data_ready_time(self, inst: TaskInstance, pe_id: int) -> int:
        """Tick at which all predecessor outputs have reached pe_id."""
        job = self.jobs[inst.job_instance_id]
        ready = 0
        for pred_id, comm in job.graph.task(inst.task_id).predecessors:
            pred = job.tasks[pred_id]
            arrival = pred.exec_finish + comm_delay(pred.assigned_pe, pe_id, comm)
            if arrival > ready:
                ready = arrival
        return ready

    def projected_timeline(self, pe_id: int) -> list[tuple[int, int, int, int]]:
        """Projected busy intervals on a PE as (job, task, start, finish) tuples.

        Running tasks use their committed times; queued executable tasks are
        projected through the FIFO grant rule.  The projection is exact
        because all inputs of a queued task are already completed.
        """
        unit = self.pes[pe_id]
        entries = [
            (self.instance(key).exec_start, finish, key)
            for key, finish in unit.running.items()
        ]
        entries.sort()
        out = [(key[0], key[1], start, finish) for start, finish, key in entries]
        slot_free = sorted(unit.running.values())
        idle = unit.free_slots()
        slots = [self.clock] * idle + slot_free
        heapq.heapify(slots)
        for key in unit.queue:
            inst = self.instance(key)
            grant = heapq.heappop(slots)
            start = max(grant, self.data_ready_time(inst, pe_id))
            finish = start + self.node(inst).exec_time[pe_id]
            heapq.heappush(slots, finish)
            out.append((key[0], key[1], start, finish))
        return out

    def busy_until(self, pe_id: int) -> int:
        timeline = self.projected_timeline(pe_id)
        return max((finish for _, _, _, finish in timeline), default=self.clock)

    def slot_free_times(self, pe_id: int) -> list[int]:
        """Sorted ticks at which each slot of a PE could grant a new task,
        once all currently running and queued tasks are accounted for."""
        unit = self.pes[pe_id]
        slots = [self.clock] * unit.free_slots() + sorted(unit.running.values())
        heapq.heapify(slots)
        for key in unit.queue:
            inst = self.instance(key)
            grant = heapq.heappop(slots)
            start = max(grant, self.data_ready_time(inst, pe_id))
            heapq.heappush(slots, start + self.node(inst).exec_time[pe_id])
        return sorted(slots)


def comm_delay(pred_pe: int, succ_pe: int, edge_cost: int) -> int:
    """Communication cost of an edge; zero when both tasks share a PE."""
    return 0 if pred_pe == succ_pe else edge_cost


def init_world(graphs: Sequence[TaskGraph], resources: ResourceProfile, config) -> EnvStorage:
    """Create a fresh world and arm the job generator (PSS prefill or first arrival)."""
    from .jobgen import JobGenerator

    world = EnvStorage(graphs, resources, config.sim_length)
    world.generator = JobGenerator(config, graphs)
    world.generator.start(world)
    return world


def release_ready_tasks(world: EnvStorage) -> int:
    """Move every outstanding task whose predecessors all completed to ready."""
    releasable = []
    for key in world.lists[TaskState.OUTSTANDING]:
        job = world.jobs[key[0]]
        node = job.graph.task(key[1])
        if all(job.tasks[pred_id].state is TaskState.COMPLETED
               for pred_id, _ in node.predecessors):
            releasable.append(key)
    for key in sorted(releasable):
        inst = world.instance(key)
        inst.ready_time = world.clock
        world.move(inst, TaskState.READY, world.clock)
    return len(releasable)


def _pump_pe(world: EnvStorage, unit: PEUnit) -> None:
    """Grant free slots to queued tasks in FIFO order."""
    while unit.free_slots() > 0 and unit.queue:
        key = unit.queue.popleft()
        inst = world.instance(key)
        start = max(world.clock, world.data_ready_time(inst, unit.pe.id))
        finish = start + world.node(inst).exec_time[unit.pe.id]
        inst.exec_start = start
        inst.exec_finish = finish
        world.move(inst, TaskState.RUNNING, start)
        unit.running[key] = finish
        world.push_event(finish, EventKind.TASK_FINISH, key)


def dispatch(world: EnvStorage, assignments: Iterable[tuple[TaskKey, int]]) -> None:
    """Apply (task, PE) assignments: ready -> executable, then start what fits.

    Assignment order is the FIFO order on each PE.  Raises InvalidActionError
    without touching the world if any pair is stale or references an unknown
    PE; validation happens for the whole batch first.
    """
    batch = list(assignments)
    seen: set[TaskKey] = set()
    for key, pe_id in batch:
        if key in seen:
            raise InvalidActionError(f"task {key} assigned twice in one decision")
        seen.add(key)
        if key not in world.lists[TaskState.READY]:
            raise InvalidActionError(f"assignment {key} -> PE {pe_id}: task is not ready")
        if not (0 <= pe_id < len(world.pes)):
            raise InvalidActionError(f"assignment {key} -> PE {pe_id}: unknown PE")
    for key, pe_id in batch:
        inst = world.instance(key)
        inst.assigned_pe = pe_id
        world.move(inst, TaskState.EXECUTABLE, world.clock)
        unit = world.pes[pe_id]
        unit.queue.append(key)
        _pump_pe(world, unit)


def _complete_task(world: EnvStorage, key: TaskKey) -> None:
    inst = world.instance(key)
    world.move(inst, TaskState.COMPLETED, world.clock)
    unit = world.pes[inst.assigned_pe]
    del unit.running[key]
    _pump_pe(world, unit)
    release_ready_tasks(world)
    job = world.jobs[key[0]]
    job.completed_count += 1
    if job.completed_count == job.graph.num_tasks:
        job.finish_time = world.clock
        world.live_jobs.remove(key[0])
        world.completed_jobs.append((key[0], job.inject_time, world.clock))
        world.generator.on_slot_freed(world)


def advance(world: EnvStorage, force_progress: bool = False) -> None:
    """Run events until the ready list is non-empty or the episode ends.

    Events are drained in whole same-tick batches (arrivals before finishes)
    so a decision point always sees everything that happened at its tick.
    With force_progress the next batch is processed even if tasks are
    already ready; used for all-deferring actions so the clock moves.
    """
    if world.done:
        return
    if world.lists[TaskState.READY] and not force_progress:
        return
    while True:
        t = world.next_event_time()
        if t is None:
            world.done = True
            return
        if t >= world.sim_length:
            # Horizon reached: in-flight work is discarded from metrics but
            # keeps its partial trace.
            world.clock = world.sim_length
            world.done = True
            return
        world.clock = t
        while world._events and world._events[0][0] == t:
            _, kind, _, payload = heapq.heappop(world._events)
            if kind == EventKind.JOB_ARRIVAL:
                world.generator.on_arrival(world)
            elif kind == EventKind.TASK_FINISH:
                _complete_task(world, payload)
        if world.lists[TaskState.READY]:
            return


# -- trace I/O -------------------------------------------------------------

TRACE_FIELDS = ("tick", "job_instance_id", "task_id", "from_state", "to_state", "pe_id")


def sorted_trace(records: Sequence[TraceRecord]) -> list[TraceRecord]:
    """Records ordered by (tick, emission order)."""
    indexed = sorted(enumerate(records), key=lambda pair: (pair[1].tick, pair[0]))
    return [rec for _, rec in indexed]


def write_trace(records: Sequence[TraceRecord], stream: IO[str], fmt: str = "csv") -> None:
    """Write a trace in 'csv' or 'jsonl' format, sorted by tick."""
    ordered = sorted_trace(records)
    if fmt == "csv":
        stream.write(",".join(TRACE_FIELDS) + "\n")
        for rec in ordered:
            pe = "" if rec.pe_id is None else str(rec.pe_id)
            stream.write(
                f"{rec.tick},{rec.job_instance_id},{rec.task_id},"
                f"{rec.from_state},{rec.to_state},{pe}\n"
            )
    elif fmt == "jsonl":
        for rec in ordered:
            stream.write(json.dumps({
                "tick": rec.tick,
                "job_instance_id": rec.job_instance_id,
                "task_id": rec.task_id,
                "from_state": rec.from_state,
                "to_state": rec.to_state,
                "pe_id": rec.pe_id,
            }, sort_keys=True, separators=(",", ":")) + "\n")
    else:
        raise ValueError(f"unknown trace format {fmt!r}")


def read_trace(source: Union[str, Path, IO[str]]) -> list[TraceRecord]:
    """Read a trace file in either format back into records."""
    if isinstance(source, (str, Path)):
        text = Path(source).read_text()
    else:
        text = source.read()
    records: list[TraceRecord] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line == ",".join(TRACE_FIELDS):
            continue
        if line.startswith("{"):
            obj = json.loads(line)
            records.append(TraceRecord(
                obj["tick"], obj["job_instance_id"], obj["task_id"],
                obj["from_state"], obj["to_state"], obj["pe_id"],
            ))
        else:
            tick, job, task, frm, to, pe = line.split(",")
            records.append(TraceRecord(
                int(tick), int(job), int(task), frm, to,
                None if pe == "" else int(pe),
            ))
    return records
