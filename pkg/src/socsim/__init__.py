"""socsim: a deterministic discrete-event simulator for scheduling DAG jobs
onto heterogeneous system-on-chip processing elements, with a reset/step
environment interface, built-in scheduling heuristics, and an experiment
runner."""

from .env import (
    Environment,
    EnvSnapshot,
    JobDagView,
    Observation,
    PEView,
    StepResult,
    TaskView,
    get_observation,
    observation_from_dict,
    observation_to_dict,
)
from .errors import (
    ConfigurationError,
    EpisodeDoneError,
    InvalidActionError,
    ProfileSyntaxError,
    ProfileValidationError,
    SocSimError,
    UnknownSchedulerError,
)
from .jobgen import GeneratorConfig, JobGenerator, interarrival_from_uniform
from .kernel import (
    EnvStorage,
    EventKind,
    JobInstance,
    TaskInstance,
    TaskState,
    TraceRecord,
    read_trace,
    sorted_trace,
    write_trace,
)
from .metrics import (
    JobRecord,
    RunStats,
    TaskRecord,
    average_latency,
    average_response_time,
    compute_run_stats,
    job_counts,
    render_results_table,
)
from .profiles import (
    OperatingPerformancePoint,
    ProcessingElement,
    ResourceProfile,
    TaskGraph,
    TaskNode,
    canonical_profile_dir,
    job_graph_from_dict,
    job_graph_to_dict,
    load_profile_dir,
    parse_job_profile,
    parse_resource_profile,
    resource_profile_from_dict,
    resource_profile_to_dict,
    serialize_job_profile,
    serialize_resource_profile,
    topological_order,
    validate_compatibility,
)
from .schedulers import (
    Assignment,
    ETFScheduler,
    HEFTScheduler,
    METScheduler,
    PlanFollower,
    SJFScheduler,
    Scheduler,
    SchedulerDecision,
    StaticPlan,
    available_schedulers,
    eft_with_insertion,
    get_scheduler,
    plan_static_schedule,
    rank_upward,
    register_scheduler,
    schedule_etf,
    schedule_heft,
    schedule_met,
    schedule_sjf,
)

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "ConfigurationError",
    "ETFScheduler",
    "Environment",
    "EnvSnapshot",
    "EnvStorage",
    "EpisodeDoneError",
    "EventKind",
    "GeneratorConfig",
    "HEFTScheduler",
    "InvalidActionError",
    "JobDagView",
    "JobGenerator",
    "JobInstance",
    "JobRecord",
    "METScheduler",
    "Observation",
    "OperatingPerformancePoint",
    "PEView",
    "PlanFollower",
    "ProcessingElement",
    "ProfileSyntaxError",
    "ProfileValidationError",
    "ResourceProfile",
    "RunStats",
    "SJFScheduler",
    "Scheduler",
    "SchedulerDecision",
    "SocSimError",
    "StaticPlan",
    "StepResult",
    "TaskGraph",
    "TaskInstance",
    "TaskNode",
    "TaskRecord",
    "TaskState",
    "TaskView",
    "TraceRecord",
    "UnknownSchedulerError",
    "available_schedulers",
    "average_latency",
    "average_response_time",
    "canonical_profile_dir",
    "compute_run_stats",
    "eft_with_insertion",
    "get_observation",
    "get_scheduler",
    "interarrival_from_uniform",
    "job_counts",
    "job_graph_from_dict",
    "job_graph_to_dict",
    "load_profile_dir",
    "observation_from_dict",
    "observation_to_dict",
    "parse_job_profile",
    "parse_resource_profile",
    "plan_static_schedule",
    "rank_upward",
    "read_trace",
    "register_scheduler",
    "render_results_table",
    "schedule_etf",
    "schedule_heft",
    "schedule_met",
    "schedule_sjf",
    "resource_profile_from_dict",
    "resource_profile_to_dict",
    "serialize_job_profile",
    "serialize_resource_profile",
    "sorted_trace",
    "topological_order",
    "validate_compatibility",
    "write_trace",
    "__version__",
]
