"""Scheduling policies: the plugin registry and four built-in heuristics
(SJF, MET, ETF, HEFT).

Every policy is a pure function of the observation: no hidden state, no
randomness.  All tie-breaks are total (ids ascending) so that, given one
observation, every policy produces exactly one decision.

The decision's assignment order is the dispatch order; the kernel appends
each PE's assignments to that PE's FIFO queue in this order.
"""

from __future__ import annotations

import bisect
import heapq
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import TYPE_CHECKING, Callable, Mapping, NamedTuple, Sequence

from .errors import UnknownSchedulerError
from .profiles import ResourceProfile, TaskGraph

if TYPE_CHECKING:
    from .env import JobDagView, Observation, TaskView


class Assignment(NamedTuple):
    job_instance_id: int
    task_id: int
    pe_id: int


@dataclass(frozen=True)
class SchedulerDecision:
    """An ordered batch of assignments; empty means defer everything."""

    assignments: tuple[Assignment, ...] = ()


class PlannedAssignment(NamedTuple):
    """An assignment together with the start/finish its planner projected."""

    job_instance_id: int
    task_id: int
    pe_id: int
    start: int
    finish: int


class Scheduler:
    """Base class for scheduling policies."""

    name = "base"

    def schedule(self, observation: "Observation") -> SchedulerDecision:
        raise NotImplementedError


# -- upward rank -----------------------------------------------------------


def _graph_table(graph) -> tuple:
    """Normalize a TaskGraph or JobDagView into a hashable rank table:
    ((task_id, exec_row, ((succ_id, comm), ...)), ...) sorted by task id."""
    if isinstance(graph, TaskGraph):
        rows = []
        for node in graph.tasks:
            row = tuple(v for _, v in sorted(node.exec_time.items()))
            rows.append((node.id, row, graph.successors(node.id)))
        return tuple(sorted(rows))
    succs: dict[int, list[tuple[int, int]]] = {t.task_id: [] for t in graph.tasks}
    for t in graph.tasks:
        for pred_id, comm in t.predecessors:
            succs[pred_id].append((t.task_id, comm))
    return tuple(sorted(
        (t.task_id, tuple(t.exec_time), tuple(sorted(succs[t.task_id])))
        for t in graph.tasks
    ))


@lru_cache(maxsize=512)
def _ranks_from_table(table: tuple) -> tuple[tuple[int, Fraction], ...]:
    succs = {tid: edges for tid, _, edges in table}
    means = {tid: Fraction(sum(row), len(row)) for tid, row, _ in table}
    indeg = {tid: 0 for tid in succs}
    for _, _, edges in table:
        for succ_id, _ in edges:
            indeg[succ_id] += 1
    order: list[int] = []
    heap = sorted(tid for tid, d in indeg.items() if d == 0)
    while heap:
        tid = heapq.heappop(heap)
        order.append(tid)
        for succ_id, _ in succs[tid]:
            indeg[succ_id] -= 1
            if indeg[succ_id] == 0:
                heapq.heappush(heap, succ_id)
    ranks: dict[int, Fraction] = {}
    for tid in reversed(order):
        best = Fraction(0)
        for succ_id, comm in succs[tid]:
            candidate = comm + ranks[succ_id]
            if candidate > best:
                best = candidate
        ranks[tid] = means[tid] + best
    return tuple(sorted(ranks.items()))


def rank_upward(graph) -> dict[int, Fraction]:
    """Upward rank of every task: mean exec time over PEs plus the largest
    (edge comm + successor rank) over outgoing edges.  Exact rationals.

    Accepts a TaskGraph or an observation's JobDagView; ranks depend only on
    graph structure, so results are cached per structure.
    """
    return dict(_ranks_from_table(_graph_table(graph)))


# -- insertion-based EFT ---------------------------------------------------


def eft_with_insertion(exec_ticks: int, ready: int,
                       busy: Sequence[tuple[int, int]]) -> tuple[int, int]:
    """Earliest (start, finish) on a serial timeline with gap insertion.

    busy is a sorted list of disjoint half-open [start, finish) intervals.
    The task is placed at the earliest start >= ready such that it fits
    entirely in an idle gap, or after the last interval.
    """
    candidate = ready
    for start, finish in busy:
        if candidate + exec_ticks <= start:
            return candidate, candidate + exec_ticks
        candidate = max(candidate, finish)
    return candidate, candidate + exec_ticks


# -- observation helpers ---------------------------------------------------


def _ready_entries(observation: "Observation"):
    """Ready tasks as (job_id, task_id, dag_view, task_view), in ready-list
    ((job_instance_id, task_id) ascending) order."""
    out = []
    for job_id, task_id in observation.ready_tasks():
        dag = observation.job_dag(job_id)
        out.append((job_id, task_id, dag, dag.task(task_id)))
    return out


def data_ready_time(dag: "JobDagView", task: "TaskView", pe_id: int) -> int:
    """Tick at which all of a ready task's inputs have reached pe_id."""
    ready = 0
    for pred_id, comm in task.predecessors:
        pred = dag.task(pred_id)
        arrival = pred.exec_finish + (0 if pred.assigned_pe == pe_id else comm)
        if arrival > ready:
            ready = arrival
    return ready


# -- built-in policies -----------------------------------------------------


class METScheduler(Scheduler):
    """Minimum Execution Time: each ready task goes to its fastest PE."""

    name = "met"

    def schedule(self, observation: "Observation") -> SchedulerDecision:
        out = []
        for job_id, task_id, _, task in _ready_entries(observation):
            pe_id = min(range(len(task.exec_time)), key=lambda p: (task.exec_time[p], p))
            out.append(Assignment(job_id, task_id, pe_id))
        return SchedulerDecision(tuple(out))


class SJFScheduler(Scheduler):
    """Shortest Job First: tasks in ascending min-exec order, each to the
    PE with the earliest finish against the decision-start availability."""

    name = "sjf"

    def schedule(self, observation: "Observation") -> SchedulerDecision:
        clock = observation.clock
        avail = {pe.pe_id: min(pe.slots) for pe in observation.pes}
        entries = sorted(
            _ready_entries(observation),
            key=lambda e: (min(e[3].exec_time), e[1], e[0]),
        )
        out = []
        for job_id, task_id, dag, task in entries:
            def finish_on(pe_id: int) -> int:
                start = max(clock, avail[pe_id], data_ready_time(dag, task, pe_id))
                return start + task.exec_time[pe_id]

            pe_id = min(avail, key=lambda p: (finish_on(p), p))
            out.append(Assignment(job_id, task_id, pe_id))
        return SchedulerDecision(tuple(out))


class ETFScheduler(Scheduler):
    """Earliest Task First: repeatedly commit the (task, PE) pair with the
    globally smallest earliest start time."""

    name = "etf"

    def schedule(self, observation: "Observation") -> SchedulerDecision:
        clock = observation.clock
        slots = {pe.pe_id: list(pe.slots) for pe in observation.pes}
        for heap in slots.values():
            heapq.heapify(heap)
        remaining = _ready_entries(observation)
        out = []
        while remaining:
            best_key = None
            best = None
            for index, (job_id, task_id, dag, task) in enumerate(remaining):
                for pe_id, heap in slots.items():
                    est = max(clock, heap[0], data_ready_time(dag, task, pe_id))
                    finish = est + task.exec_time[pe_id]
                    key = (est, finish, task_id, job_id, pe_id)
                    if best_key is None or key < best_key:
                        best_key = key
                        best = (index, pe_id, finish)
            index, pe_id, finish = best
            job_id, task_id, _, _ = remaining.pop(index)
            heapq.heapreplace(slots[pe_id], finish)
            out.append(Assignment(job_id, task_id, pe_id))
        return SchedulerDecision(tuple(out))


class HEFTScheduler(Scheduler):
    """Heterogeneous Earliest Finish Time: ready tasks in descending upward
    rank, each to the PE minimizing insertion-based EFT.

    Planned (start, finish) windows are realizable: committed work blocks
    each capacity-1 PE through its earliest grant tick, and insertion only
    uses gaps between this decision's own planned windows.  PEs with
    capacity > 1 use slot availability without gap insertion.
    """

    name = "heft"

    def plan(self, observation: "Observation") -> tuple[PlannedAssignment, ...]:
        clock = observation.clock
        ranks: dict[int, dict[int, Fraction]] = {}
        for dag in observation.job_dags:
            ranks[dag.job_instance_id] = rank_upward(dag)
        entries = sorted(
            _ready_entries(observation),
            key=lambda e: (-ranks[e[0]][e[1]], e[1], e[0]),
        )
        timelines: dict[int, list[tuple[int, int]]] = {}
        slot_heaps: dict[int, list[int]] = {}
        for pe in observation.pes:
            if pe.capacity == 1:
                blocked = pe.slots[0]
                timelines[pe.pe_id] = [(clock, blocked)] if blocked > clock else []
            else:
                heap = list(pe.slots)
                heapq.heapify(heap)
                slot_heaps[pe.pe_id] = heap
        planned = []
        for job_id, task_id, dag, task in entries:
            best = None
            for pe in observation.pes:
                pe_id = pe.pe_id
                ready = max(clock, data_ready_time(dag, task, pe_id))
                if pe_id in timelines:
                    start, finish = eft_with_insertion(
                        task.exec_time[pe_id], ready, timelines[pe_id])
                else:
                    start = max(ready, slot_heaps[pe_id][0])
                    finish = start + task.exec_time[pe_id]
                if best is None or (finish, pe_id) < (best[2], best[0]):
                    best = (pe_id, start, finish)
            pe_id, start, finish = best
            if pe_id in timelines:
                bisect.insort(timelines[pe_id], (start, finish))
            else:
                heapq.heapreplace(slot_heaps[pe_id], finish)
            planned.append(PlannedAssignment(job_id, task_id, pe_id, start, finish))
        return tuple(planned)

    def schedule(self, observation: "Observation") -> SchedulerDecision:
        planned = self.plan(observation)
        # Per-PE dispatch order must match planned start order for the
        # FIFO kernel to realize the planned windows.
        ordered = sorted(planned, key=lambda p: (p.pe_id, p.start, p.finish,
                                                 p.job_instance_id, p.task_id))
        return SchedulerDecision(tuple(
            Assignment(p.job_instance_id, p.task_id, p.pe_id) for p in ordered
        ))


# -- static planning and replay --------------------------------------------


@dataclass(frozen=True)
class StaticPlan:
    """A whole-graph HEFT schedule computed offline from idle PEs."""

    graph_name: str
    tasks: tuple[PlannedAssignment, ...]  # in planning (rank) order
    makespan: int

    def planned(self, task_id: int) -> PlannedAssignment:
        for p in self.tasks:
            if p.task_id == task_id:
                return p
        raise KeyError(task_id)

    def pe_order(self, pe_id: int) -> list[int]:
        """Task ids planned on a PE, by ascending planned start."""
        mine = [(p.start, p.finish, p.task_id) for p in self.tasks if p.pe_id == pe_id]
        return [task_id for _, _, task_id in sorted(mine)]


def plan_static_schedule(graph: TaskGraph, resources: ResourceProfile) -> StaticPlan:
    """Insertion-based HEFT over one whole graph, one serial timeline per PE.

    Tasks are planned in descending upward rank (tie: ascending id); each
    goes to the PE minimizing insertion-based EFT (tie: lowest PE id).
    """
    ranks = rank_upward(graph)
    priority = {tid: (-ranks[tid], tid) for tid in graph.task_ids()}
    pe_ids = [pe.id for pe in resources.pes]
    timelines: dict[int, list[tuple[int, int]]] = {pe_id: [] for pe_id in pe_ids}
    placed: dict[int, PlannedAssignment] = {}
    planned = []
    pending = set(graph.task_ids())
    while pending:
        # Highest rank among tasks whose predecessors are all placed.  With
        # positive exec times this is plain descending-rank order.
        tid = min(
            (t for t in pending
             if all(p in placed for p, _ in graph.task(t).predecessors)),
            key=priority.get,
        )
        pending.remove(tid)
        node = graph.task(tid)
        best = None
        for pe_id in pe_ids:
            ready = 0
            for pred_id, comm in node.predecessors:
                pred = placed[pred_id]
                arrival = pred.finish + (0 if pred.pe_id == pe_id else comm)
                ready = max(ready, arrival)
            start, finish = eft_with_insertion(node.exec_time[pe_id], ready,
                                               timelines[pe_id])
            if best is None or (finish, pe_id) < (best[2], best[0]):
                best = (pe_id, start, finish)
        pe_id, start, finish = best
        bisect.insort(timelines[pe_id], (start, finish))
        entry = PlannedAssignment(0, tid, pe_id, start, finish)
        placed[tid] = entry
        planned.append(entry)
    makespan = max(p.finish for p in planned)
    return StaticPlan(graph.name, tuple(planned), makespan)


class PlanFollower(Scheduler):
    """Replays a StaticPlan through the live environment.

    At each decision point it dispatches, per PE, the longest ready prefix
    of that PE's remaining planned order; a task whose planned predecessor
    on the same PE is not dispatched yet is deferred.  Pure function of the
    observation (progress is read back from task states).
    """

    name = "plan"

    def __init__(self, plan: StaticPlan):
        self.plan = plan

    def schedule(self, observation: "Observation") -> SchedulerDecision:
        dispatched = {"executable", "running", "completed"}
        out = []
        for dag in observation.job_dags:
            if dag.graph_name != self.plan.graph_name:
                continue
            states = {t.task_id: t.state for t in dag.tasks}
            for pe in observation.pes:
                for task_id in self.plan.pe_order(pe.pe_id):
                    state = states[task_id]
                    if state in dispatched:
                        continue
                    if state == "ready":
                        out.append(Assignment(dag.job_instance_id, task_id, pe.pe_id))
                        continue
                    break
        return SchedulerDecision(tuple(out))


# -- registry --------------------------------------------------------------

_REGISTRY: dict[str, Callable[[], Scheduler]] = {}


def register_scheduler(name: str, factory: Callable[[], Scheduler]) -> None:
    """Register (or replace) a named scheduler factory."""
    _REGISTRY[name] = factory


def available_schedulers() -> list[str]:
    return sorted(_REGISTRY)


def get_scheduler(name: str) -> Scheduler:
    try:
        factory = _REGISTRY[name]
    except KeyError:
        options = ", ".join(available_schedulers())
        raise UnknownSchedulerError(
            f"unknown scheduler {name!r}; valid options: {options}"
        ) from None
    return factory()


register_scheduler("sjf", SJFScheduler)
register_scheduler("met", METScheduler)
register_scheduler("etf", ETFScheduler)
register_scheduler("heft", HEFTScheduler)


def schedule_sjf(observation: "Observation") -> SchedulerDecision:
    return SJFScheduler().schedule(observation)


def schedule_met(observation: "Observation") -> SchedulerDecision:
    return METScheduler().schedule(observation)


def schedule_etf(observation: "Observation") -> SchedulerDecision:
    return ETFScheduler().schedule(observation)


def schedule_heft(observation: "Observation") -> SchedulerDecision:
    return HEFTScheduler().schedule(observation)
