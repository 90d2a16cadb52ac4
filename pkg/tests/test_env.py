import dataclasses
import json

import pytest

from helpers import drive_episode, profiles_from_docs, single_job_config
from socsim import (
    ConfigurationError,
    Environment,
    EpisodeDoneError,
    GeneratorConfig,
    InvalidActionError,
    ProfileValidationError,
    SchedulerDecision,
    get_scheduler,
    observation_from_dict,
)

ONE_TASK_120 = {
    "name": "single120",
    "tasks": [{"id": 1, "exec_time": {"0": 120}, "predecessors": []}],
}
ONE_PE = {"pes": [{"id": 0}]}


def canonical_env(canonical, **overrides):
    graphs, resources = canonical
    base = dict(scale=50.0, queue_capacity=3, sim_length=2000, seed=0, pss=True)
    base.update(overrides)
    return Environment(graphs, resources, GeneratorConfig(**base))


class TestReset:
    def test_pss_first_observation(self, canonical):
        env = canonical_env(canonical)
        obs = env.reset()
        assert obs.clock == 0
        assert len(obs.job_dags) == 3
        assert obs.ready_tasks() == [(0, 1), (1, 1), (2, 1)]
        assert obs.env_storage.injected_jobs == 3
        assert obs.env_storage.live_jobs == (0, 1, 2)
        assert not env.done

    def test_first_observation_without_pss(self, canonical):
        env = canonical_env(canonical, pss=False)
        obs = env.reset()
        assert obs.clock > 0
        assert len(obs.job_dags) == 1
        assert obs.job_dags[0].inject_time == obs.clock

    def test_resets_are_identical(self, canonical):
        env = canonical_env(canonical)
        first = env.reset().to_json()
        second = env.reset().to_json()
        assert first == second

    def test_reset_discards_previous_episode(self, canonical):
        env = canonical_env(canonical)
        obs = env.reset()
        env.step(get_scheduler("sjf").schedule(obs))
        assert env.reset().to_json() == obs.to_json()

    def test_observation_before_reset_raises(self, canonical):
        env = canonical_env(canonical)
        with pytest.raises(EpisodeDoneError, match="reset"):
            env.observation()

    def test_zero_sim_length_done_at_reset(self, canonical):
        env = canonical_env(canonical, sim_length=0, pss=False)
        obs = env.reset()
        assert env.done
        assert obs.job_dags == () and obs.action_map == ()
        with pytest.raises(EpisodeDoneError):
            env.step()


class TestObservation:
    def test_action_map_is_full_product(self, canonical):
        obs = canonical_env(canonical).reset()
        ready = obs.ready_tasks()
        expected = tuple((j, t, p) for j, t in ready for p in range(3))
        assert obs.action_map == expected

    def test_dag_views_expose_graph_and_state(self, canonical):
        graphs, _ = canonical
        obs = canonical_env(canonical).reset()
        dag = obs.job_dags[0]
        assert dag.graph_name == "canonical"
        assert [t.task_id for t in dag.tasks] == list(range(1, 11))
        root = dag.task(1)
        assert root.state == "ready" and root.ready_time == 0
        assert root.exec_time == (14, 16, 9)
        assert dag.task(10).state == "outstanding"
        assert dag.task(10).predecessors == graphs[0].task(10).predecessors

    def test_pe_views(self, canonical):
        obs = canonical_env(canonical).reset()
        assert [pe.pe_id for pe in obs.pes] == [0, 1, 2]
        for pe in obs.pes:
            assert pe.capacity == 1
            assert pe.slots == (0,)
            assert pe.busy_until == 0

    def test_observation_is_frozen(self, canonical):
        obs = canonical_env(canonical).reset()
        with pytest.raises(dataclasses.FrozenInstanceError):
            obs.clock = 99
        with pytest.raises(dataclasses.FrozenInstanceError):
            obs.job_dags[0].tasks[0].state = "running"

    def test_serialization_roundtrip(self, canonical):
        env = canonical_env(canonical)
        obs = env.reset()
        for _ in range(4):
            rebuilt = observation_from_dict(obs.to_dict())
            assert rebuilt == obs
            assert rebuilt.to_json() == obs.to_json()
            assert json.loads(obs.to_json()) == obs.to_dict()
            if env.done:
                break
            obs = env.step(get_scheduler("etf").schedule(obs)).observation

    def test_canonical_json_is_compact_and_sorted(self, canonical):
        text = canonical_env(canonical).reset().to_json()
        assert ": " not in text and ", " not in text
        keys = list(json.loads(text))
        assert keys == sorted(keys)

    def test_observation_call_is_stable(self, canonical):
        env = canonical_env(canonical)
        first = env.reset()
        assert env.observation() == first
        assert env.observation() == first


class TestStep:
    def test_full_episode_reward_is_negative_duration(self):
        graphs, resources = profiles_from_docs([ONE_TASK_120], ONE_PE)
        env, total, rewards = drive_episode(
            graphs, resources, get_scheduler("sjf"), single_job_config())
        assert total == -120
        assert env.world.completed_jobs == [(0, 0, 120)]

    def test_reward_zero_when_nothing_completes(self, canonical):
        env = canonical_env(canonical)
        obs = env.reset()
        result = env.step(get_scheduler("sjf").schedule(obs))
        assert result.reward == 0
        assert result.info["completed_this_step"] == []

    def test_rewards_telescope_exactly(self, canonical):
        graphs, resources = canonical
        cfg = GeneratorConfig(scale=40.0, queue_capacity=3, sim_length=1500,
                              seed=5, pss=True)
        env, total, _ = drive_episode(graphs, resources, get_scheduler("etf"), cfg)
        expected = -sum(finish - inject
                        for _, inject, finish in env.world.completed_jobs)
        assert total == expected
        assert isinstance(total, int)

    def test_no_action_advances_clock(self, canonical):
        env = canonical_env(canonical)
        before = env.reset().clock
        result = env.step()
        assert result.observation.clock > before or result.done

    def test_explicit_empty_actions(self, canonical):
        env = canonical_env(canonical)
        env.reset()
        for empty in ([], (), SchedulerDecision()):
            env2 = canonical_env(canonical)
            first = env2.reset().clock
            result = env2.step(empty)
            assert result.observation.clock > first or result.done

    def test_partial_action_keeps_rest_ready(self, canonical):
        env = canonical_env(canonical)
        obs = env.reset()
        result = env.step([(0, 1, 2)])
        remaining = result.observation.ready_tasks()
        assert (1, 1) in remaining and (2, 1) in remaining
        assert (0, 1) not in remaining

    def test_accepts_scheduler_decision_and_raw_triples(self, canonical):
        env = canonical_env(canonical)
        obs = env.reset()
        decision = get_scheduler("met").schedule(obs)
        raw = [(a.job_instance_id, a.task_id, a.pe_id)
               for a in decision.assignments]
        env2 = canonical_env(canonical)
        env2.reset()
        assert env.step(decision).observation.to_json() == \
            env2.step(raw).observation.to_json()

    def test_step_returns_done_and_matches_property(self):
        graphs, resources = profiles_from_docs([ONE_TASK_120], ONE_PE)
        env = Environment(graphs, resources, single_job_config())
        obs = env.reset()
        result = env.step([(0, 1, 0)])
        assert result.done and env.done

    def test_step_after_done_raises(self):
        graphs, resources = profiles_from_docs([ONE_TASK_120], ONE_PE)
        env = Environment(graphs, resources, single_job_config())
        env.reset()
        env.step([(0, 1, 0)])
        with pytest.raises(EpisodeDoneError, match="done"):
            env.step()

    def test_step_before_reset_raises(self, canonical):
        env = canonical_env(canonical)
        with pytest.raises(EpisodeDoneError, match="reset"):
            env.step()

    def test_info_counters_consistent(self, canonical):
        env = canonical_env(canonical)
        obs = env.reset()
        sched = get_scheduler("heft")
        while not env.done:
            result = env.step(sched.schedule(obs))
            obs = result.observation
            info = result.info
            assert info["clock"] == obs.clock
            assert info["injected_jobs"] == info["completed_jobs"] + info["live_jobs"]
            assert info["live_jobs"] == len(obs.job_dags)
            assert len(info["completed_this_step"]) <= info["completed_jobs"]

    def test_list_sizes_match_dag_states(self, canonical):
        env = canonical_env(canonical)
        obs = env.reset()
        sched = get_scheduler("sjf")
        for _ in range(6):
            if env.done:
                break
            sizes = obs.env_storage.list_sizes
            live_states = [t.state for dag in obs.job_dags for t in dag.tasks]
            for state in ("outstanding", "ready", "executable", "running"):
                assert sizes[state] == live_states.count(state)
            obs = env.step(sched.schedule(obs)).observation


class TestInvalidActions:
    def test_names_offending_pair(self, canonical):
        env = canonical_env(canonical)
        env.reset()
        with pytest.raises(InvalidActionError, match=r"\(9, 1\) -> PE 0: task is not ready"):
            env.step([(9, 1, 0)])

    def test_unknown_pe_named(self, canonical):
        env = canonical_env(canonical)
        env.reset()
        with pytest.raises(InvalidActionError, match="unknown PE"):
            env.step([(0, 1, 7)])

    def test_world_unchanged_and_env_usable_after_rejection(self, canonical):
        env = canonical_env(canonical)
        obs = env.reset()
        snapshot = obs.to_json()
        for bad in ([(9, 1, 0)], [(0, 1, 7)], [(0, 1, 0), (0, 1, 1)]):
            with pytest.raises(InvalidActionError):
                env.step(bad)
            assert env.observation().to_json() == snapshot
        result = env.step([(0, 1, 0)])
        assert result.observation.clock >= 0

    def test_malformed_triples(self, canonical):
        env = canonical_env(canonical)
        env.reset()
        with pytest.raises(InvalidActionError, match="malformed assignment"):
            env.step([(0, 1)])
        with pytest.raises(InvalidActionError, match="malformed assignment"):
            env.step([(0, 1, 0, 9)])
        with pytest.raises(InvalidActionError, match="must be integers"):
            env.step([(0, 1, "0")])

    def test_duplicate_task_in_action(self, canonical):
        env = canonical_env(canonical)
        env.reset()
        with pytest.raises(InvalidActionError, match="assigned twice"):
            env.step([(0, 1, 0), (0, 1, 1)])


class TestConstruction:
    def test_invalid_config_rejected_up_front(self, canonical):
        graphs, resources = canonical
        with pytest.raises(ConfigurationError):
            Environment(graphs, resources,
                        GeneratorConfig(scale=0.0, queue_capacity=3,
                                        sim_length=100, seed=0))

    def test_incompatible_profiles_rejected(self, canonical):
        _, resources = canonical
        narrow, _ = profiles_from_docs([ONE_TASK_120], ONE_PE)
        with pytest.raises(ProfileValidationError, match="missing exec_time"):
            Environment(narrow, resources, GeneratorConfig(
                scale=50.0, queue_capacity=3, sim_length=100, seed=0))

    @pytest.mark.parametrize("name", ["sjf", "met", "etf", "heft"])
    def test_all_builtins_run_episodes_to_completion(self, canonical, name):
        graphs, resources = canonical
        cfg = GeneratorConfig(scale=60.0, queue_capacity=2, sim_length=800,
                              seed=2, pss=True)
        env, _, rewards = drive_episode(graphs, resources, get_scheduler(name), cfg)
        assert env.done
        assert env.world.clock <= 800
        assert len(rewards) >= 1
