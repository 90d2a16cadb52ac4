"""The reset/step environment facade over the simulation kernel.

An Environment owns one episode at a time.  reset() builds a fresh world
and advances it to the first decision point; step() dispatches an action
(possibly empty), advances to the next decision point or to the end of the
episode, and reports the reward earned in between.

Observations are immutable snapshots.  Everything a scheduling policy may
look at — live job DAGs with per-task runtime state, the valid action
pairs, PE availability, aggregate counters — is inside the observation, so
policies can be pure functions of it.  Observations serialize to canonical
JSON (sorted keys, no whitespace) for logging and cross-language use.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Optional, Sequence, Union

from .errors import EpisodeDoneError, InvalidActionError
from .jobgen import GeneratorConfig
from .kernel import EnvStorage, TaskKey, TaskState, advance, dispatch, init_world
from .profiles import ResourceProfile, TaskGraph, validate_compatibility

ActionTriple = tuple[int, int, int]  # (job_instance_id, task_id, pe_id)


@dataclass(frozen=True)
class TaskView:
    """Read-only runtime state of one task inside an observation."""

    task_id: int
    name: str
    state: str
    exec_time: tuple[int, ...]  # indexed by PE id
    predecessors: tuple[tuple[int, int], ...]  # (pred task id, comm cost)
    ready_time: Optional[int]
    assigned_pe: Optional[int]
    exec_start: Optional[int]
    exec_finish: Optional[int]


@dataclass(frozen=True)
class JobDagView:
    """Read-only view of one live job: its DAG plus per-task runtime state."""

    job_instance_id: int
    graph_name: str
    inject_time: int
    tasks: tuple[TaskView, ...]  # ascending task_id

    def task(self, task_id: int) -> TaskView:
        for t in self.tasks:
            if t.task_id == task_id:
                return t
        raise KeyError(task_id)


@dataclass(frozen=True)
class PEView:
    """Availability of one PE.

    slots holds, per capacity slot, the earliest tick at which that slot
    could grant a newly dispatched task once all committed (running and
    queued) work is accounted for; min(slots) is the earliest possible
    grant, max(slots) equals busy_until.
    """

    pe_id: int
    name: str
    capacity: int
    slots: tuple[int, ...]
    busy_until: int


@dataclass(frozen=True)
class EnvSnapshot:
    """Aggregate counters of the episode at the observation instant."""

    clock: int
    sim_length: int
    list_sizes: Mapping[str, int]
    pe_busy_until: tuple[int, ...]
    completed_jobs: tuple[tuple[int, int, int], ...]  # (job, inject, finish)
    injected_jobs: int
    live_jobs: tuple[int, ...]


@dataclass(frozen=True)
class Observation:
    """What a scheduling policy sees at a decision point."""

    clock: int
    job_dags: tuple[JobDagView, ...]
    action_map: tuple[ActionTriple, ...]  # exactly {ready tasks} x {PEs}
    env_storage: EnvSnapshot
    pes: tuple[PEView, ...]

    def ready_tasks(self) -> list[tuple[int, int]]:
        """Unique (job_instance_id, task_id) pairs in action_map order."""
        seen: set[tuple[int, int]] = set()
        out: list[tuple[int, int]] = []
        for job_id, task_id, _ in self.action_map:
            if (job_id, task_id) not in seen:
                seen.add((job_id, task_id))
                out.append((job_id, task_id))
        return out

    def job_dag(self, job_instance_id: int) -> JobDagView:
        for dag in self.job_dags:
            if dag.job_instance_id == job_instance_id:
                return dag
        raise KeyError(job_instance_id)

    def to_dict(self) -> dict:
        return observation_to_dict(self)

    def to_json(self) -> str:
        """Canonical serialization: sorted keys, no whitespace."""
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class StepResult:
    observation: Observation
    reward: int
    done: bool
    info: dict


def observation_to_dict(obs: Observation) -> dict:
    return {
        "clock": obs.clock,
        "job_dags": [
            {
                "job_instance_id": dag.job_instance_id,
                "graph_name": dag.graph_name,
                "inject_time": dag.inject_time,
                "tasks": [
                    {
                        "task_id": t.task_id,
                        "name": t.name,
                        "state": t.state,
                        "exec_time": list(t.exec_time),
                        "predecessors": [list(edge) for edge in t.predecessors],
                        "ready_time": t.ready_time,
                        "assigned_pe": t.assigned_pe,
                        "exec_start": t.exec_start,
                        "exec_finish": t.exec_finish,
                    }
                    for t in dag.tasks
                ],
            }
            for dag in obs.job_dags
        ],
        "action_map": [list(triple) for triple in obs.action_map],
        "env_storage": {
            "clock": obs.env_storage.clock,
            "sim_length": obs.env_storage.sim_length,
            "list_sizes": dict(obs.env_storage.list_sizes),
            "pe_busy_until": list(obs.env_storage.pe_busy_until),
            "completed_jobs": [list(rec) for rec in obs.env_storage.completed_jobs],
            "injected_jobs": obs.env_storage.injected_jobs,
            "live_jobs": list(obs.env_storage.live_jobs),
        },
        "pes": [
            {
                "pe_id": pe.pe_id,
                "name": pe.name,
                "capacity": pe.capacity,
                "slots": list(pe.slots),
                "busy_until": pe.busy_until,
            }
            for pe in obs.pes
        ],
    }


def observation_from_dict(data: Mapping) -> Observation:
    """Rebuild an Observation from its to_dict()/JSON form."""
    dags = tuple(
        JobDagView(
            job_instance_id=d["job_instance_id"],
            graph_name=d["graph_name"],
            inject_time=d["inject_time"],
            tasks=tuple(
                TaskView(
                    task_id=t["task_id"],
                    name=t["name"],
                    state=t["state"],
                    exec_time=tuple(t["exec_time"]),
                    predecessors=tuple(
                        (edge[0], edge[1]) for edge in t["predecessors"]
                    ),
                    ready_time=t["ready_time"],
                    assigned_pe=t["assigned_pe"],
                    exec_start=t["exec_start"],
                    exec_finish=t["exec_finish"],
                )
                for t in d["tasks"]
            ),
        )
        for d in data["job_dags"]
    )
    storage = data["env_storage"]
    snapshot = EnvSnapshot(
        clock=storage["clock"],
        sim_length=storage["sim_length"],
        list_sizes=dict(storage["list_sizes"]),
        pe_busy_until=tuple(storage["pe_busy_until"]),
        completed_jobs=tuple(tuple(rec) for rec in storage["completed_jobs"]),
        injected_jobs=storage["injected_jobs"],
        live_jobs=tuple(storage["live_jobs"]),
    )
    pes = tuple(
        PEView(
            pe_id=p["pe_id"],
            name=p["name"],
            capacity=p["capacity"],
            slots=tuple(p["slots"]),
            busy_until=p["busy_until"],
        )
        for p in data["pes"]
    )
    return Observation(
        clock=data["clock"],
        job_dags=dags,
        action_map=tuple((a[0], a[1], a[2]) for a in data["action_map"]),
        env_storage=snapshot,
        pes=pes,
    )


def get_observation(world: EnvStorage) -> Observation:
    """Pure snapshot of a world at its current clock."""
    pe_count = len(world.pes)
    dags = []
    for job_id in world.live_jobs:
        job = world.jobs[job_id]
        views = []
        for node in sorted(job.graph.tasks, key=lambda n: n.id):
            inst = job.tasks[node.id]
            views.append(TaskView(
                task_id=node.id,
                name=node.name,
                state=inst.state.value,
                exec_time=tuple(node.exec_time[pe] for pe in range(pe_count)),
                predecessors=node.predecessors,
                ready_time=inst.ready_time,
                assigned_pe=inst.assigned_pe,
                exec_start=inst.exec_start,
                exec_finish=inst.exec_finish,
            ))
        dags.append(JobDagView(job_id, job.graph.name, job.inject_time, tuple(views)))

    action_map = tuple(
        (job_id, task_id, pe_id)
        for job_id, task_id in world.ready_keys()
        for pe_id in range(pe_count)
    )
    slot_lists = [world.slot_free_times(pe_id) for pe_id in range(pe_count)]
    pes = tuple(
        PEView(
            pe_id=unit.pe.id,
            name=unit.pe.name,
            capacity=unit.pe.capacity,
            slots=tuple(slots),
            busy_until=max(slots),
        )
        for unit, slots in zip(world.pes, slot_lists)
    )
    snapshot = EnvSnapshot(
        clock=world.clock,
        sim_length=world.sim_length,
        list_sizes={state.value: len(world.lists[state]) for state in TaskState},
        pe_busy_until=tuple(max(slots) for slots in slot_lists),
        completed_jobs=tuple(world.completed_jobs),
        injected_jobs=world.injected_jobs,
        live_jobs=tuple(world.live_jobs),
    )
    return Observation(
        clock=world.clock,
        job_dags=tuple(dags),
        action_map=action_map,
        env_storage=snapshot,
        pes=pes,
    )


def _normalize_action(action: Any) -> list[ActionTriple]:
    """Accept None, a SchedulerDecision, or an iterable of 3-item triples."""
    if action is None:
        return []
    items: Iterable = getattr(action, "assignments", action)
    triples: list[ActionTriple] = []
    for item in items:
        try:
            job_id, task_id, pe_id = item
        except (TypeError, ValueError):
            raise InvalidActionError(
                f"malformed assignment {item!r}: expected (job_instance_id, task_id, pe_id)"
            ) from None
        if not all(isinstance(v, int) for v in (job_id, task_id, pe_id)):
            raise InvalidActionError(
                f"malformed assignment {item!r}: fields must be integers"
            )
        triples.append((job_id, task_id, pe_id))
    return triples


class Environment:
    """One simulation episode behind a reset/step interface."""

    def __init__(self, graphs: Sequence[TaskGraph], resources: ResourceProfile,
                 config: GeneratorConfig):
        config.validate()
        validate_compatibility(graphs, resources)
        self.graphs = tuple(graphs)
        self.resources = resources
        self.config = config
        self.world: Optional[EnvStorage] = None

    @property
    def done(self) -> bool:
        return self.world is None or self.world.done

    def reset(self) -> Observation:
        """Start a fresh episode and advance to the first decision point."""
        self.world = init_world(self.graphs, self.resources, self.config)
        advance(self.world)
        return get_observation(self.world)

    def observation(self) -> Observation:
        if self.world is None:
            raise EpisodeDoneError("reset the environment before observing")
        return get_observation(self.world)

    def step(self, action: Union[None, Iterable, Any] = None) -> StepResult:
        """Dispatch an action and advance to the next decision point.

        An empty action (no-action) forces the simulator to process the
        next event batch so the clock always moves.  The reward is the
        negated sum of durations of jobs completed during this step.
        """
        world = self.world
        if world is None:
            raise EpisodeDoneError("reset the environment before stepping")
        if world.done:
            raise EpisodeDoneError("episode is done")
        triples = _normalize_action(action)
        completed_before = len(world.completed_jobs)
        if triples:
            dispatch(world, [((job_id, task_id), pe_id)
                             for job_id, task_id, pe_id in triples])
            advance(world)
        else:
            advance(world, force_progress=True)
        newly_completed = world.completed_jobs[completed_before:]
        reward = -sum(finish - inject for _, inject, finish in newly_completed)
        info = {
            "clock": world.clock,
            "completed_this_step": [job_id for job_id, _, _ in newly_completed],
            "injected_jobs": world.injected_jobs,
            "completed_jobs": len(world.completed_jobs),
            "live_jobs": len(world.live_jobs),
        }
        return StepResult(get_observation(world), reward, world.done, info)
