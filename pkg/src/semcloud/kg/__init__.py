from .builders import frequent_pipeline, infrequent_pipeline
from .document import FORMAT, parse_pipeline, serialize_pipeline
from .errors import (
    CycleError,
    InvalidGraph,
    MissingTask,
    PipelineGraphError,
    SchemaError,
    StructureError,
)
from .facts import apply_configuration, from_facts, to_facts
from .model import (
    CloudAttributes,
    DataEntity,
    IOHandler,
    Layer,
    PipelineGraph,
    RequirementSet,
    ResourceConfiguration,
    TaskNode,
)
from .validate import ValidationReport, Violation, validate

__all__ = [
    "FORMAT",
    "CloudAttributes",
    "CycleError",
    "DataEntity",
    "IOHandler",
    "InvalidGraph",
    "Layer",
    "MissingTask",
    "PipelineGraph",
    "PipelineGraphError",
    "RequirementSet",
    "ResourceConfiguration",
    "SchemaError",
    "StructureError",
    "TaskNode",
    "ValidationReport",
    "Violation",
    "apply_configuration",
    "from_facts",
    "frequent_pipeline",
    "infrequent_pipeline",
    "parse_pipeline",
    "serialize_pipeline",
    "to_facts",
    "validate",
]
