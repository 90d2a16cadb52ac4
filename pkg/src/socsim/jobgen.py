"""Stochastic job injection: seeded exponential inter-arrival times, a
bounded job queue, and pseudo-steady-state (PSS) prefill.

Two independent RNG streams are derived from the master seed: one for
inter-arrival gaps, one for choosing which job profile to instantiate.
Schedulers never touch either stream, so the sampled sequences depend only
on the seed.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import ConfigurationError
from .kernel import EnvStorage, EventKind, JobInstance, TaskInstance, release_ready_tasks
from .profiles import TaskGraph


@dataclass(frozen=True)
class GeneratorConfig:
    """Knobs of the injection process.

    scale is the mean inter-arrival gap in ticks; smaller means heavier
    load.  queue_capacity bounds the number of live jobs.  max_jobs caps
    total injections (None = indefinite); it exists for single-job and
    replay experiments.
    """

    scale: float
    queue_capacity: int
    sim_length: int
    seed: int
    pss: bool = False
    warmup_ticks: int = 0
    drop_when_full: bool = False
    max_jobs: Optional[int] = None

    def validate(self) -> None:
        if self.scale <= 0:
            raise ConfigurationError(f"scale must be positive, got {self.scale}")
        if self.queue_capacity < 1:
            raise ConfigurationError("queue_capacity must be >= 1")
        if self.sim_length < 0:
            raise ConfigurationError("sim_length must be >= 0")
        if self.warmup_ticks < 0:
            raise ConfigurationError("warmup_ticks must be >= 0")
        if self.sim_length > 0 and self.warmup_ticks >= self.sim_length:
            raise ConfigurationError("warmup_ticks must be < sim_length")
        if self.max_jobs is not None and self.max_jobs < 0:
            raise ConfigurationError("max_jobs must be >= 0")


def interarrival_from_uniform(u: float, scale: float) -> int:
    """Inverse-CDF exponential gap, rounded to ticks and floored at one."""
    return max(1, round(-scale * math.log(u)))


class JobQueue:
    """Ids of injected-but-unfinished jobs; |live| never exceeds capacity."""

    def __init__(self, capacity: int):
        self.capacity = capacity

    def count(self, world: EnvStorage) -> int:
        return len(world.live_jobs)

    def is_full(self, world: EnvStorage) -> bool:
        return len(world.live_jobs) >= self.capacity


class JobGenerator:
    """Owns the arrival process of one world.  Single-threaded with it."""

    def __init__(self, config: GeneratorConfig, graphs: Sequence[TaskGraph]):
        config.validate()
        if not graphs:
            raise ConfigurationError("no job profiles configured")
        self.config = config
        self.graphs = tuple(graphs)
        self.queue = JobQueue(config.queue_capacity)
        master = random.Random(config.seed)
        self._arrival_rng = random.Random(master.getrandbits(64))
        self._choice_rng = random.Random(master.getrandbits(64))
        self.interarrival_draws: list[int] = []
        self.pending_deferred = False
        self._next_job_id = 0

    # -- sampling ----------------------------------------------------------

    def sample_interarrival(self) -> int:
        # 1 - random() lies in (0, 1], keeping log() finite.
        gap = interarrival_from_uniform(1.0 - self._arrival_rng.random(), self.config.scale)
        self.interarrival_draws.append(gap)
        return gap

    def choose_graph(self) -> TaskGraph:
        return self.graphs[self._choice_rng.randrange(len(self.graphs))]

    # -- lifecycle ---------------------------------------------------------

    def _exhausted(self) -> bool:
        return self.config.max_jobs is not None and self._next_job_id >= self.config.max_jobs

    def _schedule_next_arrival(self, world: EnvStorage) -> None:
        if self._exhausted():
            return
        world.push_event(world.clock + self.sample_interarrival(), EventKind.JOB_ARRIVAL)

    def start(self, world: EnvStorage) -> None:
        """Arm the first arrival; in PSS mode prefill the queue at tick 0."""
        if world.sim_length <= 0:
            return
        if self.config.pss:
            self.prefill_pss(world)
        self._schedule_next_arrival(world)

    def prefill_pss(self, world: EnvStorage) -> None:
        while not self.queue.is_full(world) and not self._exhausted():
            self.inject_job(world)

    def on_arrival(self, world: EnvStorage) -> None:
        if self._exhausted():
            return
        if self.queue.is_full(world):
            if self.config.drop_when_full:
                self._schedule_next_arrival(world)
            else:
                # Deferred: injects the instant a slot frees; the next
                # arrival is sampled from that instant.
                self.pending_deferred = True
            return
        self.inject_job(world)
        self._schedule_next_arrival(world)

    def on_slot_freed(self, world: EnvStorage) -> None:
        if self.pending_deferred and not self.queue.is_full(world) and not self._exhausted():
            self.pending_deferred = False
            self.inject_job(world)
            self._schedule_next_arrival(world)

    def inject_job(self, world: EnvStorage) -> int:
        """Instantiate a sampled profile now; roots go straight to ready."""
        graph = self.choose_graph()
        job_id = self._next_job_id
        self._next_job_id += 1
        tasks = {
            node.id: TaskInstance(job_instance_id=job_id, task_id=node.id)
            for node in graph.tasks
        }
        job = JobInstance(job_id, graph, world.clock, tasks)
        world.jobs[job_id] = job
        world.live_jobs.append(job_id)
        world.injected_jobs += 1
        for node in graph.tasks:
            world.create_task(tasks[node.id], world.clock)
        release_ready_tasks(world)
        return job_id
