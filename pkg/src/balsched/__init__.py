"""Single-machine slotted scheduling: BAL and classic policies, workloads, analysis and checks."""
from .core import (
    FlowStats,
    Instance,
    JobSpec,
    ScheduleTrace,
    flow_stats,
    read_instance,
    validate_instance,
    write_instance,
)
from .engine import Policy, simulate, total_work_series
from .policies import (
    Threshold,
    bal,
    dynamic_bal,
    fcfs,
    make_policy,
    priority_ratio,
    rr,
    setf,
    sjf,
    srpt,
)

__all__ = [
    "FlowStats", "Instance", "JobSpec", "ScheduleTrace", "flow_stats", "read_instance",
    "validate_instance", "write_instance", "Policy", "simulate", "total_work_series",
    "Threshold", "bal", "dynamic_bal", "fcfs", "make_policy", "priority_ratio", "rr",
    "setf", "sjf", "srpt",
]
__version__ = "0.1.0"
