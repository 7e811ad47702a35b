"""Conversion between pipeline graphs and ground Datalog facts.

``to_facts`` emits the EDB the extraction rules match on: one atom per field
with a value, task-chain atoms, cloud attributes, and -- when a pilot record
is supplied -- the hasEst* pre-estimate atoms plus the range(i) enumeration
used by the per-slice-index averaging.
"""

from __future__ import annotations

from dataclasses import replace

from ..datalog.corpus import RANGE_SIZE
from ..datalog.factset import FactSet
from .errors import InvalidGraph, MissingTask
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
from .validate import validate

_TASK_FIELD_ATOMS = (
    ("chunk_size", "hasChunkSize"),
    ("slice_size", "hasSliceSize"),
    ("memory_reservation", "hasMemoryReservation"),
    ("storage_mode", "hasStorageMode"),
    ("required_time", "hasRequiredTime"),
)

_REQ_FIELD_ATOMS = (
    ("computing", "hasComputingRequirement"),
    ("memory", "hasMemoryRequirement"),
    ("storage", "hasStorageRequirement"),
    ("network", "hasNetworkRequirement"),
)

_EST_ATOMS = (
    ("slice_memory", "hasEstSliceMemory"),
    ("prepare_memory", "hasEstPrepareMemory"),
    ("slice_storage", "hasEstSliceStorage"),
    ("prepare_storage", "hasEstPrepareStorage"),
    ("store_storage", "hasEstStoreStorage"),
)


def to_facts(graph: PipelineGraph, cloud: CloudAttributes | None = None,
             pilot=None, range_size: int = RANGE_SIZE) -> FactSet:
    """Ground the graph into an EDB.  Raises InvalidGraph on a bad graph.

    ``pilot`` is any object with slice_memory / prepare_memory /
    slice_storage / prepare_storage / store_storage attributes (MB); it
    supplies the hasEst* atoms the estimation rule starts from.
    """
    report = validate(graph)
    if not report.ok:
        raise InvalidGraph(str(report))

    facts = FactSet()
    pid = graph.id
    facts.add("ETLPipeline", (pid,))
    facts.add("frequencyClass", (pid, graph.frequency_class))
    if graph.depends_on:
        facts.add("dependsOn", (pid, graph.depends_on))

    for layer in graph.layers:
        facts.add(layer.kind, (layer.id,))
    for rel, s, o in graph.edges:
        facts.add(rel, (s, o))
    for d in graph.input_data_ids():
        facts.add("hasInputData", (pid, d))

    for t in graph.tasks:
        facts.add(t.kind, (t.id,))
        if t.io:
            facts.add("hasIO", (t.id, t.io))
        for attr, pred in _TASK_FIELD_ATOMS:
            value = getattr(t, attr)
            if value is not None:
                facts.add(pred, (t.id, value))
        if t.requirement is not None:
            for attr, pred in _REQ_FIELD_ATOMS:
                facts.add(pred, (t.id, getattr(t.requirement, attr)))

    for io in graph.io_handlers:
        facts.add("IOHandler", (io.id,))
        for d in io.inputs:
            facts.add("hasInput", (io.id, d))
        for d in io.outputs:
            facts.add("hasOutput", (io.id, d))

    for d in graph.data_entities:
        facts.add("DataEntity", (d.id,))
        facts.add("hasVolume", (d.id, d.volume))
        facts.add("hasNoRecords", (d.id, d.no_records))
        if d.location is not None:
            facts.add("storedAt", (d.id, d.location))

    if cloud is not None:
        facts.add("Cloud", (cloud.id,))
        facts.add("hasMemoryBufferCoefficient", (cloud.id, cloud.memory_buffer_coefficient))
        facts.add("hasStorageBufferCoefficient", (cloud.id, cloud.storage_buffer_coefficient))
        facts.add("hasMaxMemoryCoefficient", (cloud.id, cloud.max_memory_coefficient))
        facts.add("hasNodeMemory", (cloud.id, cloud.node_memory))
        facts.add("hasNodeStorage", (cloud.id, cloud.node_storage))
        facts.add("hasFastStorage", (cloud.id, cloud.fast_storage))
        facts.add("hasCloudStorage", (cloud.id, cloud.cloud_storage))

    if pilot is not None:
        for attr, pred in _EST_ATOMS:
            facts.add(pred, (pid, float(getattr(pilot, attr))))
        for i in range(1, range_size + 1):
            facts.add("range", (float(i),))

    return facts


def from_facts(facts: FactSet, pipeline_id: str | None = None) -> PipelineGraph:
    """Rebuild a PipelineGraph from its EDB atoms (inverse of ``to_facts``)."""
    pipelines = sorted(t[0] for t in facts.lookup("ETLPipeline", 1))
    if pipeline_id is None:
        if len(pipelines) != 1:
            raise InvalidGraph(f"fact set holds pipelines {pipelines}; pick one")
        pipeline_id = pipelines[0]
    elif pipeline_id not in pipelines:
        raise InvalidGraph(f"no ETLPipeline({pipeline_id}) atom")

    def pairs(pred):
        return sorted(facts.lookup(pred, 2))

    def prop(pred, subject, default=None):
        for s, o in facts.lookup(pred, 2):
            if s == subject:
                return o
        return default

    freq = prop("frequencyClass", pipeline_id, "frequent")
    depends = prop("dependsOn", pipeline_id)

    tasks = []
    for kind in ("Retrieve", "Slice", "Prepare", "Store"):
        for (tid,) in sorted(facts.lookup(kind, 1)):
            req = None
            if any(s == tid for s, _ in facts.lookup("hasComputingRequirement", 2)):
                req = RequirementSet(
                    computing=prop("hasComputingRequirement", tid, 0.0),
                    memory=prop("hasMemoryRequirement", tid, 0.0),
                    storage=prop("hasStorageRequirement", tid, 0.0),
                    network=prop("hasNetworkRequirement", tid, 0.0),
                )
            tasks.append(
                TaskNode(
                    id=tid,
                    kind=kind,
                    io=prop("hasIO", tid),
                    requirement=req,
                    chunk_size=prop("hasChunkSize", tid),
                    slice_size=prop("hasSliceSize", tid),
                    memory_reservation=prop("hasMemoryReservation", tid),
                    storage_mode=prop("hasStorageMode", tid),
                    required_time=prop("hasRequiredTime", tid),
                )
            )
    tasks.sort(key=lambda t: t.id)

    entities = [
        DataEntity(
            id=did,
            volume=prop("hasVolume", did, 0.0),
            no_records=prop("hasNoRecords", did, 0.0),
            location=prop("storedAt", did),
        )
        for (did,) in sorted(facts.lookup("DataEntity", 1))
    ]

    handlers = [
        IOHandler(
            id=ioid,
            inputs=tuple(o for s, o in pairs("hasInput") if s == ioid),
            outputs=tuple(o for s, o in pairs("hasOutput") if s == ioid),
        )
        for (ioid,) in sorted(facts.lookup("IOHandler", 1))
    ]

    layers = []
    for kind in ("RetrieveLayer", "SliceLayer", "PrepareLayer", "StoreLayer", "Layer"):
        for (lid,) in sorted(facts.lookup(kind, 1)):
            layers.append(Layer(id=lid, kind=kind))

    edge_rels = ("hasStartTask", "hasNextTask", "hasLayer", "hasTask")
    edges = [(rel, s, o) for rel in edge_rels for s, o in pairs(rel)]

    return PipelineGraph(
        id=pipeline_id,
        frequency_class=freq,
        depends_on=depends,
        layers=tuple(layers),
        tasks=tuple(tasks),
        data_entities=tuple(entities),
        io_handlers=tuple(handlers),
        edges=tuple(edges),
    )


def apply_configuration(graph: PipelineGraph, config: ResourceConfiguration,
                        cloud: CloudAttributes | None = None) -> PipelineGraph:
    """Write a configuration onto the task nodes; returns a new graph.

    The config's storage id is translated to a mode via the cloud attributes
    (fast/cloud ids); without cloud attributes the id is compared against the
    literal mode names.
    """
    if config.pipeline != graph.id:
        raise InvalidGraph(
            f"configuration targets {config.pipeline!r}, graph is {graph.id!r}"
        )
    if cloud is not None and config.storage == cloud.fast_storage:
        mode = "fast"
    elif cloud is not None and config.storage == cloud.cloud_storage:
        mode = "cloud"
    elif config.storage in ("fast", "cloud"):
        mode = config.storage
    else:
        raise InvalidGraph(f"unknown storage id {config.storage!r}")

    if not graph.tasks_of_kind("Slice") and graph.frequency_class == "frequent":
        raise MissingTask(f"pipeline {graph.id} has no Slice task")
    if not graph.tasks_of_kind("Store"):
        raise MissingTask(f"pipeline {graph.id} has no Store task")

    new_tasks = []
    for t in graph.tasks:
        if t.kind == "Slice":
            t = replace(
                t,
                chunk_size=config.chunk_size,
                slice_size=config.slice_size,
                memory_reservation=config.slice_memory_reservation,
            )
        elif t.kind == "Prepare":
            t = replace(t, memory_reservation=config.prepare_memory_reservation)
        elif t.kind == "Store":
            t = replace(t, storage_mode=mode)
        new_tasks.append(t)
    return graph.with_tasks(new_tasks)
