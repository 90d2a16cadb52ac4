"""Static job (DAG) and resource (PE) profiles and their on-disk JSON format.

A job profile describes one application as a DAG: nodes carry per-PE
execution times in integer clock ticks, edges carry integer communication
costs paid only when producer and consumer run on different PEs.  A resource
profile lists the processing elements of the platform.  Profiles are
immutable after parsing and safe to share between concurrent simulations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Mapping, Sequence, Union

from .errors import ProfileSyntaxError, ProfileValidationError

Source = Union[bytes, str, Path, IO]


@dataclass(frozen=True)
class OperatingPerformancePoint:
    """A supported (frequency, voltage) pair of a PE.  Data only; never affects timing."""

    freq_mhz: float
    voltage_v: float


@dataclass(frozen=True)
class ProcessingElement:
    id: int
    name: str
    capacity: int = 1
    opps: tuple[OperatingPerformancePoint, ...] = ()


@dataclass(frozen=True)
class ResourceProfile:
    pes: tuple[ProcessingElement, ...]

    def pe_ids(self) -> tuple[int, ...]:
        return tuple(pe.id for pe in self.pes)

    def pe(self, pe_id: int) -> ProcessingElement:
        return self.pes[pe_id]


@dataclass(frozen=True)
class TaskNode:
    """One task of a job DAG.

    exec_time maps PE id to execution ticks on that PE; predecessors is a
    tuple of (task_id, comm_cost) pairs for the incoming edges.
    """

    id: int
    name: str
    exec_time: Mapping[int, int]
    predecessors: tuple[tuple[int, int], ...] = ()


class TaskGraph:
    """A validated job profile: an acyclic, weakly connected task DAG."""

    def __init__(self, name: str, tasks: Sequence[TaskNode]):
        self.name = name
        self.tasks = tuple(tasks)
        self.num_tasks = len(self.tasks)
        self._by_id = {t.id: t for t in self.tasks}
        succ: dict[int, list[tuple[int, int]]] = {t.id: [] for t in self.tasks}
        for t in self.tasks:
            for pred_id, comm in t.predecessors:
                succ[pred_id].append((t.id, comm))
        self._succ = {tid: tuple(sorted(out)) for tid, out in succ.items()}

    def task(self, task_id: int) -> TaskNode:
        return self._by_id[task_id]

    def task_ids(self) -> tuple[int, ...]:
        return tuple(t.id for t in self.tasks)

    def successors(self, task_id: int) -> tuple[tuple[int, int], ...]:
        """Outgoing edges of a task as (successor_id, comm_cost) pairs."""
        return self._succ[task_id]

    def roots(self) -> tuple[int, ...]:
        return tuple(t.id for t in self.tasks if not t.predecessors)

    def sinks(self) -> tuple[int, ...]:
        return tuple(t.id for t in self.tasks if not self._succ[t.id])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TaskGraph):
            return NotImplemented
        return self.name == other.name and self.tasks == other.tasks

    def __repr__(self) -> str:
        return f"TaskGraph({self.name!r}, {self.num_tasks} tasks)"


def _load_document(source: Source) -> object:
    if isinstance(source, Path):
        data = source.read_bytes()
    elif isinstance(source, (bytes, str)):
        data = source
    else:
        data = source.read()
    try:
        return json.loads(data)
    except (ValueError, TypeError) as exc:
        raise ProfileSyntaxError(f"malformed profile document: {exc}") from exc


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ProfileValidationError(message)


def _as_int(value: object, what: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ProfileSyntaxError(f"{what} must be an integer, got {value!r}")
    return value


def job_graph_from_dict(doc: object) -> TaskGraph:
    """Build and validate a TaskGraph from a decoded job profile document."""
    if not isinstance(doc, dict) or "name" not in doc or "tasks" not in doc:
        raise ProfileSyntaxError("job profile must be an object with 'name' and 'tasks'")
    name = doc["name"]
    if not isinstance(name, str):
        raise ProfileSyntaxError("job profile 'name' must be a string")
    raw_tasks = doc["tasks"]
    if not isinstance(raw_tasks, list):
        raise ProfileSyntaxError("job profile 'tasks' must be a list")
    _require(len(raw_tasks) > 0, "empty job profile")

    tasks: list[TaskNode] = []
    for raw in raw_tasks:
        if not isinstance(raw, dict):
            raise ProfileSyntaxError("each task must be an object")
        tid = _as_int(raw.get("id"), "task id")
        tname = raw.get("name", f"task{tid}")
        if not isinstance(tname, str):
            raise ProfileSyntaxError("task name must be a string")
        raw_exec = raw.get("exec_time")
        if not isinstance(raw_exec, dict) or not raw_exec:
            raise ProfileSyntaxError(f"task {tid}: exec_time must be a non-empty object")
        exec_time: dict[int, int] = {}
        for key, val in raw_exec.items():
            try:
                pe_id = int(key)
            except (TypeError, ValueError):
                raise ProfileSyntaxError(f"task {tid}: exec_time key {key!r} is not a PE id")
            ticks = _as_int(val, f"task {tid} exec_time[{key}]")
            _require(ticks >= 0, f"task {tid}: negative exec_time on PE {pe_id}")
            exec_time[pe_id] = ticks
        preds: list[tuple[int, int]] = []
        for raw_edge in raw.get("predecessors", []):
            if not isinstance(raw_edge, dict):
                raise ProfileSyntaxError(f"task {tid}: predecessor entries must be objects")
            src = _as_int(raw_edge.get("task"), f"task {tid} predecessor task")
            comm = _as_int(raw_edge.get("comm"), f"task {tid} predecessor comm")
            _require(comm >= 0, f"task {tid}: negative comm cost on edge {src}->{tid}")
            preds.append((src, comm))
        tasks.append(TaskNode(tid, tname, exec_time, tuple(preds)))

    ids = [t.id for t in tasks]
    _require(len(set(ids)) == len(ids), "duplicate task id")
    id_set = set(ids)
    pe_keys = frozenset(tasks[0].exec_time)
    for t in tasks:
        _require(
            frozenset(t.exec_time) == pe_keys,
            f"task {t.id}: exec_time PE set differs from the rest of the graph",
        )
        seen_preds = set()
        for src, _ in t.predecessors:
            _require(src in id_set, f"dangling edge: {src} -> {t.id} references unknown task")
            _require(src != t.id, f"cycle: self edge on task {t.id}")
            _require(src not in seen_preds, f"duplicate edge {src} -> {t.id}")
            seen_preds.add(src)

    graph = TaskGraph(name, tasks)
    _check_acyclic(graph)
    _check_connected(graph)
    return graph


def _check_acyclic(graph: TaskGraph) -> None:
    # Kahn's algorithm; leftovers mean a cycle.
    indeg = {t.id: len(t.predecessors) for t in graph.tasks}
    frontier = [tid for tid, d in indeg.items() if d == 0]
    seen = 0
    while frontier:
        tid = frontier.pop()
        seen += 1
        for succ_id, _ in graph.successors(tid):
            indeg[succ_id] -= 1
            if indeg[succ_id] == 0:
                frontier.append(succ_id)
    _require(seen == graph.num_tasks, "cycle in task graph")


def _check_connected(graph: TaskGraph) -> None:
    # Weak connectivity: one component when edge direction is ignored.
    if graph.num_tasks == 0:
        return
    adj: dict[int, set[int]] = {t.id: set() for t in graph.tasks}
    for t in graph.tasks:
        for src, _ in t.predecessors:
            adj[t.id].add(src)
            adj[src].add(t.id)
    start = graph.tasks[0].id
    seen = {start}
    stack = [start]
    while stack:
        for other in adj[stack.pop()]:
            if other not in seen:
                seen.add(other)
                stack.append(other)
    _require(len(seen) == graph.num_tasks, "disconnected task graph")


def parse_job_profile(source: Source) -> TaskGraph:
    """Parse a job profile document into a validated TaskGraph."""
    return job_graph_from_dict(_load_document(source))


def job_graph_to_dict(graph: TaskGraph) -> dict:
    return {
        "name": graph.name,
        "tasks": [
            {
                "id": t.id,
                "name": t.name,
                "exec_time": {str(pe): ticks for pe, ticks in sorted(t.exec_time.items())},
                "predecessors": [
                    {"task": src, "comm": comm} for src, comm in t.predecessors
                ],
            }
            for t in graph.tasks
        ],
    }


def serialize_job_profile(graph: TaskGraph) -> str:
    return json.dumps(job_graph_to_dict(graph), indent=2) + "\n"


def resource_profile_from_dict(doc: object) -> ResourceProfile:
    """Build and validate a ResourceProfile from a decoded document."""
    if not isinstance(doc, dict) or "pes" not in doc:
        raise ProfileSyntaxError("resource profile must be an object with 'pes'")
    raw_pes = doc["pes"]
    if not isinstance(raw_pes, list):
        raise ProfileSyntaxError("resource profile 'pes' must be a list")
    _require(len(raw_pes) > 0, "empty resource profile")

    pes: list[ProcessingElement] = []
    for raw in raw_pes:
        if not isinstance(raw, dict):
            raise ProfileSyntaxError("each PE must be an object")
        pe_id = _as_int(raw.get("id"), "PE id")
        name = raw.get("name", f"PE{pe_id}")
        if not isinstance(name, str):
            raise ProfileSyntaxError("PE name must be a string")
        capacity = _as_int(raw.get("capacity", 1), f"PE {pe_id} capacity")
        _require(capacity >= 1, f"PE {pe_id}: capacity must be >= 1")
        opps: list[OperatingPerformancePoint] = []
        for raw_opp in raw.get("opps", []):
            if not isinstance(raw_opp, dict):
                raise ProfileSyntaxError(f"PE {pe_id}: OPP entries must be objects")
            freq = raw_opp.get("freq_mhz")
            volt = raw_opp.get("voltage_v")
            if not isinstance(freq, (int, float)) or not isinstance(volt, (int, float)):
                raise ProfileSyntaxError(f"PE {pe_id}: OPP needs numeric freq_mhz and voltage_v")
            _require(freq > 0, f"PE {pe_id}: OPP frequency must be positive")
            _require(volt > 0, f"PE {pe_id}: OPP voltage must be positive")
            opps.append(OperatingPerformancePoint(float(freq), float(volt)))
        freqs = [o.freq_mhz for o in opps]
        _require(freqs == sorted(freqs), f"PE {pe_id}: OPP list not sorted by frequency")
        pes.append(ProcessingElement(pe_id, name, capacity, tuple(opps)))

    ids = [pe.id for pe in pes]
    _require(len(set(ids)) == len(ids), "duplicate id in resource profile")
    _require(set(ids) == set(range(len(pes))), "PE ids must be dense 0..P-1")
    pes.sort(key=lambda pe: pe.id)
    return ResourceProfile(tuple(pes))


def parse_resource_profile(source: Source) -> ResourceProfile:
    """Parse a resource profile document into a validated ResourceProfile."""
    return resource_profile_from_dict(_load_document(source))


def resource_profile_to_dict(profile: ResourceProfile) -> dict:
    return {
        "pes": [
            {
                "id": pe.id,
                "name": pe.name,
                "capacity": pe.capacity,
                "opps": [
                    {"freq_mhz": opp.freq_mhz, "voltage_v": opp.voltage_v}
                    for opp in pe.opps
                ],
            }
            for pe in profile.pes
        ]
    }


def serialize_resource_profile(profile: ResourceProfile) -> str:
    return json.dumps(resource_profile_to_dict(profile), indent=2) + "\n"


def topological_order(graph: TaskGraph) -> list[int]:
    """Deterministic topological order: predecessors first, ties by ascending id."""
    import heapq

    indeg = {t.id: len(t.predecessors) for t in graph.tasks}
    heap = [tid for tid, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    order: list[int] = []
    while heap:
        tid = heapq.heappop(heap)
        order.append(tid)
        for succ_id, _ in graph.successors(tid):
            indeg[succ_id] -= 1
            if indeg[succ_id] == 0:
                heapq.heappush(heap, succ_id)
    return order


def validate_compatibility(graphs: Iterable[TaskGraph], resources: ResourceProfile) -> None:
    """Check that every task of every graph has an exec_time entry for every PE."""
    pe_ids = set(resources.pe_ids())
    for graph in graphs:
        for t in graph.tasks:
            missing = pe_ids - set(t.exec_time)
            _require(
                not missing,
                f"graph {graph.name!r} task {t.id}: missing exec_time for PE(s) {sorted(missing)}",
            )


def canonical_profile_dir() -> Path:
    """Directory of the bundled 10-task/3-PE fixture profiles."""
    return Path(__file__).parent / "fixtures" / "canonical"


def load_profile_dir(path: Union[str, Path]) -> tuple[list[TaskGraph], ResourceProfile]:
    """Load all profiles from a directory.

    The resource profile is the file named resources.json; every other
    *.json file is a job profile.  Job graphs are returned sorted by file
    name so the sampling order is stable.
    """
    from .errors import ConfigurationError

    root = Path(path)
    if not root.is_dir():
        raise ConfigurationError(f"profile directory not found: {root}")
    resource_path = root / "resources.json"
    if not resource_path.is_file():
        raise ConfigurationError(f"resource profile not found: {resource_path}")
    resources = parse_resource_profile(resource_path)
    graphs = [
        parse_job_profile(p)
        for p in sorted(root.glob("*.json"))
        if p.name != "resources.json"
    ]
    if not graphs:
        raise ConfigurationError(f"no job profiles in {root}")
    validate_compatibility(graphs, resources)
    return graphs, resources
