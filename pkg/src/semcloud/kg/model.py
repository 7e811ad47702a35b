"""Typed graph model of an ETL pipeline.

The model keeps the ontology's vocabulary (ETLPipeline, hasNextTask, ...) in
the serialized form but exposes plain Python names here.  Graph values are
immutable after construction; every mutation produces a new graph.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

TASK_KINDS = ("Retrieve", "Slice", "Prepare", "Store")
FREQUENCY_CLASSES = ("frequent", "infrequent")
STORAGE_MODES = ("fast", "cloud")

# typed relations a pipeline document may carry
EDGE_RELATIONS = (
    "hasStartTask",
    "hasNextTask",
    "hasLayer",
    "hasTask",
    "hasIO",
    "hasInput",
    "hasOutput",
    "hasInputData",
)


@dataclass(frozen=True)
class RequirementSet:
    computing: float = 0.0  # millicores
    memory: float = 0.0  # MB
    storage: float = 0.0  # MB
    network: float = 0.0  # MB/s


@dataclass(frozen=True)
class Layer:
    id: str
    kind: str  # e.g. RetrieveLayer, SliceLayer


@dataclass(frozen=True)
class IOHandler:
    id: str
    inputs: tuple = ()
    outputs: tuple = ()


@dataclass(frozen=True)
class DataEntity:
    id: str
    volume: float = 0.0  # MB
    no_records: float = 0.0
    location: Optional[str] = None


@dataclass(frozen=True)
class TaskNode:
    id: str
    kind: str
    io: Optional[str] = None  # IOHandler id
    requirement: Optional[RequirementSet] = None
    chunk_size: Optional[float] = None  # Slice only
    slice_size: Optional[float] = None  # Slice only
    memory_reservation: Optional[float] = None  # Slice / Prepare
    storage_mode: Optional[str] = None  # Store only
    required_time: Optional[float] = None  # measured seconds


@dataclass(frozen=True)
class CloudAttributes:
    id: str
    memory_buffer_coefficient: float = 0.667  # c1
    storage_buffer_coefficient: float = 0.667  # c2
    max_memory_coefficient: float = 1.5  # c3
    node_memory: float = 0.0  # MB
    node_storage: float = 0.0  # MB (the ontology's second "ns", renamed nst)
    fast_storage: str = "fast_storage"
    cloud_storage: str = "cloud_storage"


@dataclass(frozen=True)
class ResourceConfiguration:
    pipeline: str
    chunk_size: float
    slice_size: float
    storage: str  # storage id, matched against CloudAttributes fast/cloud ids
    slice_memory_reservation: float
    prepare_memory_reservation: float


@dataclass(frozen=True)
class PipelineGraph:
    id: str
    frequency_class: str = "frequent"
    depends_on: Optional[str] = None
    layers: tuple = ()
    tasks: tuple = ()
    data_entities: tuple = ()
    io_handlers: tuple = ()
    edges: tuple = ()  # (relation, subject, object) triples

    # -- read helpers --------------------------------------------------------

    def task(self, task_id: str) -> Optional[TaskNode]:
        for t in self.tasks:
            if t.id == task_id:
                return t
        return None

    def entity(self, entity_id: str) -> Optional[DataEntity]:
        for d in self.data_entities:
            if d.id == entity_id:
                return d
        return None

    def io_handler(self, io_id: str) -> Optional[IOHandler]:
        for io in self.io_handlers:
            if io.id == io_id:
                return io
        return None

    def tasks_of_kind(self, kind: str) -> list:
        return [t for t in self.tasks if t.kind == kind]

    def relation(self, name: str) -> list:
        return [(s, o) for rel, s, o in self.edges if rel == name]

    def start_task_id(self) -> Optional[str]:
        starts = self.relation("hasStartTask")
        return starts[0][1] if starts else None

    def successors(self, task_id: str) -> list:
        return sorted(o for s, o in self.relation("hasNextTask") if s == task_id)

    def predecessors(self, task_id: str) -> list:
        return sorted(s for s, o in self.relation("hasNextTask") if o == task_id)

    def input_data_ids(self) -> list:
        """Entities fed into the pipeline: explicit hasInputData edges, or the
        outputs of the Retrieve task's IO handler."""
        explicit = [o for s, o in self.relation("hasInputData") if s == self.id]
        if explicit:
            return sorted(set(explicit))
        out = set()
        for t in self.tasks_of_kind("Retrieve"):
            io = self.io_handler(t.io) if t.io else None
            if io:
                out.update(io.outputs)
        return sorted(out)

    def kind_levels(self) -> list:
        """Task kinds along the hasNextTask chain, parallel tasks grouped.

        Returns a list of sets of kinds, one per topological level starting
        from the start task.  Raises nothing; cycles simply truncate.
        """
        level_ids = [s] if (s := self.start_task_id()) else []
        levels = []
        seen = set()
        frontier = list(level_ids)
        while frontier:
            levels.append({t.kind for tid in frontier if (t := self.task(tid))})
            seen.update(frontier)
            nxt = []
            for tid in frontier:
                for o in self.successors(tid):
                    if o not in seen and o not in nxt:
                        nxt.append(o)
            frontier = nxt
        return levels

    def with_tasks(self, tasks) -> "PipelineGraph":
        return replace(self, tasks=tuple(tasks))
