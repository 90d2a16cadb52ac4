"""In-process bindings for the socsim simulator.

Exposes the conventional reinforcement-learning environment contract —
``reset() -> observation`` and ``step(action) -> (observation, reward,
done, info)`` — around one simulator instance per handle.

Observations cross the boundary as canonical JSON parsed into plain dicts
and lists rather than field-by-field accessors: re-serializing an
observation with sorted keys and compact separators reproduces the
simulator's own serialization byte for byte, so there is exactly one
encoding to rely on.

Handles are independent of each other and may be driven in parallel; a
single handle must not be shared between threads.  Closing a handle
releases it, and any later operation fails with :class:`ClosedHandleError`.
"""

import json
from pathlib import Path
from types import MappingProxyType
from typing import Any, Iterable, Mapping, Optional, Sequence

import socsim

__version__ = socsim.__version__

__all__ = [
    "BoundEnvironment",
    "ClosedHandleError",
    "Environment",
    "__version__",
]


class ClosedHandleError(RuntimeError):
    """A closed environment handle was used."""


_DEFAULTS: dict[str, Any] = {
    "profiles": None,  # None selects the bundled canonical profile directory
    "scale": 50.0,
    "queue_capacity": 3,
    "sim_length": 5000,
    "seed": 0,
    "pss": False,
    "warmup_ticks": 0,
    "drop_when_full": False,
    "max_jobs": None,
}


def _observation_payload(obs: "socsim.Observation") -> dict:
    """Marshal an observation across the boundary as native structures."""
    return json.loads(obs.to_json())


class Environment:
    """One bound simulator environment.

    ``config`` may carry any of: ``profiles`` (profile directory; defaults
    to the bundled canonical fixture), ``scale``, ``queue_capacity``,
    ``sim_length``, ``seed``, ``pss``, ``warmup_ticks``,
    ``drop_when_full``, ``max_jobs``.  Unknown keys are rejected;
    configuration and profile errors surface with the simulator's own
    error text.
    """

    def __init__(self, config: Optional[Mapping[str, Any]] = None) -> None:
        self._env: Optional[socsim.Environment] = None
        merged = dict(_DEFAULTS)
        if config is not None:
            unknown = sorted(set(config) - set(_DEFAULTS))
            if unknown:
                raise ValueError("unknown config key(s): " + ", ".join(unknown))
            merged.update(config)
        if merged["profiles"] is None:
            profile_dir = socsim.canonical_profile_dir()
        else:
            profile_dir = Path(merged["profiles"])
        graphs, resources = socsim.load_profile_dir(profile_dir)
        generator_config = socsim.GeneratorConfig(
            scale=float(merged["scale"]),
            queue_capacity=int(merged["queue_capacity"]),
            sim_length=int(merged["sim_length"]),
            seed=int(merged["seed"]),
            pss=bool(merged["pss"]),
            warmup_ticks=int(merged["warmup_ticks"]),
            drop_when_full=bool(merged["drop_when_full"]),
            max_jobs=None if merged["max_jobs"] is None else int(merged["max_jobs"]),
        )
        self._env = socsim.Environment(graphs, resources, generator_config)
        echo = dict(merged)
        echo["profiles"] = str(profile_dir)
        self._config: Mapping[str, Any] = MappingProxyType(echo)

    @property
    def config(self) -> Mapping[str, Any]:
        """Read-only echo of the effective configuration."""
        return self._config

    @property
    def closed(self) -> bool:
        return self._env is None

    @property
    def done(self) -> bool:
        """Whether the current episode has ended."""
        return self._handle().done

    def reset(self) -> dict:
        """Start a fresh episode; returns the first observation."""
        return _observation_payload(self._handle().reset())

    def step(
        self, action: Optional[Iterable[Sequence[int]]] = None
    ) -> tuple[dict, int, bool, dict]:
        """Apply one decision; returns (observation, reward, done, info).

        ``action`` is an iterable of (job_instance_id, task_id, pe_id)
        triples, or None/empty to dispatch nothing and let time advance.
        Invalid actions raise with the simulator's message naming the
        offending pair, leaving the environment unchanged.
        """
        result = self._handle().step(action)
        return (
            _observation_payload(result.observation),
            result.reward,
            result.done,
            dict(result.info),
        )

    def close(self) -> None:
        """Release the handle; idempotent."""
        self._env = None

    def _handle(self) -> socsim.Environment:
        if self._env is None:
            raise ClosedHandleError("operation on a closed environment handle")
        return self._env

    def __enter__(self) -> "Environment":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()


BoundEnvironment = Environment
