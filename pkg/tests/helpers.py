"""Shared test utilities: random instance builders and episode drivers."""

import json
import random

from socsim import (
    Assignment,
    Environment,
    GeneratorConfig,
    Scheduler,
    SchedulerDecision,
)
from socsim.profiles import job_graph_from_dict, resource_profile_from_dict


def random_job_doc(rng: random.Random, name: str, num_tasks: int, num_pes: int,
                   max_exec: int = 20, max_comm: int = 15) -> dict:
    """A random weakly connected DAG document: task 1 is the single root and
    every later task draws at least one predecessor from the earlier ones."""
    tasks = []
    for tid in range(1, num_tasks + 1):
        preds = []
        if tid > 1:
            count = rng.randint(1, min(3, tid - 1))
            for pred in rng.sample(range(1, tid), count):
                preds.append({"task": pred, "comm": rng.randint(0, max_comm)})
        tasks.append({
            "id": tid,
            "name": f"t{tid}",
            "exec_time": {str(pe): rng.randint(1, max_exec) for pe in range(num_pes)},
            "predecessors": preds,
        })
    return {"name": name, "tasks": tasks}


def random_resource_doc(rng: random.Random, num_pes: int, max_capacity: int = 1) -> dict:
    return {
        "pes": [
            {"id": pe, "name": f"P{pe}", "capacity": rng.randint(1, max_capacity)}
            for pe in range(num_pes)
        ]
    }


def profiles_from_docs(job_docs, resource_doc):
    graphs = [job_graph_from_dict(doc) for doc in job_docs]
    resources = resource_profile_from_dict(resource_doc)
    return graphs, resources


def write_profile_dir(path, job_docs, resource_doc):
    """Materialize profiles on disk the way the CLI consumes them."""
    path.mkdir(parents=True, exist_ok=True)
    (path / "resources.json").write_text(json.dumps(resource_doc, indent=2))
    for index, doc in enumerate(job_docs):
        (path / f"job{index:02d}.json").write_text(json.dumps(doc, indent=2))
    return path


def single_job_config(seed: int = 0, sim_length: int = 10 ** 6) -> GeneratorConfig:
    """Inject exactly one job at tick 0 and nothing else."""
    return GeneratorConfig(scale=float(sim_length), queue_capacity=1,
                           sim_length=sim_length, seed=seed, pss=True, max_jobs=1)


def drive_episode(graphs, resources, scheduler, config,
                  on_observation=None):
    """Run one full episode; returns (env, total_reward, step_rewards)."""
    env = Environment(graphs, resources, config)
    obs = env.reset()
    rewards = []
    while not env.done:
        if on_observation is not None:
            on_observation(obs)
        result = env.step(scheduler.schedule(obs))
        obs = result.observation
        rewards.append(result.reward)
    return env, sum(rewards), rewards


def episode_makespan(graphs, resources, scheduler, seed: int = 0) -> int:
    """Finish tick of the single injected job under a scheduler."""
    env, _, _ = drive_episode(graphs, resources, scheduler, single_job_config(seed))
    assert len(env.world.completed_jobs) == 1, "job did not finish"
    job_id, inject, finish = env.world.completed_jobs[0]
    return finish - inject


class RandomValidScheduler(Scheduler):
    """Assigns a random subset of ready tasks to random PEs; sometimes defers
    everything.  Valid by construction, deliberately erratic."""

    name = "random"

    def __init__(self, seed: int):
        self.rng = random.Random(seed)

    def schedule(self, observation) -> SchedulerDecision:
        ready = observation.ready_tasks()
        if not ready:
            return SchedulerDecision()
        if self.rng.random() < 0.1:
            return SchedulerDecision()  # defer everything this decision
        num_pes = len(observation.pes)
        picked = [pair for pair in ready if self.rng.random() < 0.8]
        self.rng.shuffle(picked)
        return SchedulerDecision(tuple(
            Assignment(job_id, task_id, self.rng.randrange(num_pes))
            for job_id, task_id in picked
        ))


def edges_by_job_from_world(world):
    """job_instance_id -> [(task_id, pred_id, comm)] for trace validation."""
    out = {}
    for job_id, job in world.jobs.items():
        edges = []
        for node in job.graph.tasks:
            for pred_id, comm in node.predecessors:
                edges.append((node.id, pred_id, comm))
        out[job_id] = edges
    return out
