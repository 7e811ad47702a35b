from .engine import (
    ComparisonReport,
    ComparisonRow,
    ExecutionPlan,
    collect_pilot_stats,
    compare,
    deploy,
    run,
    run_legacy,
    write_comparison,
)
from .errors import InsufficientResources, SimError, SimulatedOutOfMemory
from .model import (
    MB,
    ClusterSpec,
    CostModel,
    NodeSpec,
    QueueChannel,
    RunTrace,
    SimWorkload,
    StepInstance,
    build_trace,
    default_cluster,
    legacy_node,
    write_trace,
)

__all__ = [
    "MB",
    "ClusterSpec",
    "ComparisonReport",
    "ComparisonRow",
    "CostModel",
    "ExecutionPlan",
    "InsufficientResources",
    "NodeSpec",
    "QueueChannel",
    "RunTrace",
    "SimError",
    "SimWorkload",
    "SimulatedOutOfMemory",
    "StepInstance",
    "build_trace",
    "collect_pilot_stats",
    "compare",
    "default_cluster",
    "deploy",
    "legacy_node",
    "run",
    "run_legacy",
    "write_comparison",
    "write_trace",
]
