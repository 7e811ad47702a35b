"""Invariant checks over pipeline graphs.

``validate`` never raises: violations are data.  ``parse_pipeline`` turns a
non-empty report into StructureError / CycleError.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import FREQUENCY_CLASSES, PipelineGraph, TASK_KINDS


@dataclass(frozen=True)
class Violation:
    node: str
    message: str

    def __str__(self):
        return f"{self.node}: {self.message}"


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def add(self, node: str, message: str) -> None:
        self.violations.append(Violation(node=node, message=message))

    def __str__(self):
        if self.ok:
            return "valid"
        return "\n".join(str(v) for v in self.violations)


def _has_cycle(graph: PipelineGraph):
    succ = {}
    for s, o in graph.relation("hasNextTask"):
        succ.setdefault(s, []).append(o)
    WHITE, GREY, BLACK = 0, 1, 2
    color = {t.id: WHITE for t in graph.tasks}
    for s in succ:
        color.setdefault(s, WHITE)

    def visit(node):
        color[node] = GREY
        for o in succ.get(node, ()):
            if color.get(o) == GREY:
                return True
            if color.get(o) == WHITE and visit(o):
                return True
        color[node] = BLACK
        return False

    return any(color[n] == WHITE and visit(n) for n in list(color))


def validate(graph: PipelineGraph) -> ValidationReport:
    report = ValidationReport()

    if graph.frequency_class not in FREQUENCY_CLASSES:
        report.add(graph.id, f"unknown frequency class {graph.frequency_class!r}")

    task_ids = {t.id for t in graph.tasks}
    for t in graph.tasks:
        if t.kind not in TASK_KINDS:
            report.add(t.id, f"unknown task kind {t.kind!r}")

    # -- task chain shape ----------------------------------------------------
    cyclic = _has_cycle(graph)
    if cyclic:
        report.add(graph.id, "hasNextTask relation is cyclic")

    next_pairs = graph.relation("hasNextTask")
    roots = [t.id for t in graph.tasks if not graph.predecessors(t.id)]
    sinks = [t.id for t in graph.tasks if not graph.successors(t.id)]
    if graph.tasks:
        if len(roots) != 1 or (roots and graph.task(roots[0]).kind != "Retrieve"):
            report.add(graph.id, f"expected a single Retrieve root, found roots {roots}")
        if len(sinks) != 1 or (sinks and graph.task(sinks[0]).kind != "Store"):
            report.add(graph.id, f"expected a single Store sink, found sinks {sinks}")
    for s, o in next_pairs:
        for end in (s, o):
            if end not in task_ids:
                report.add(end, "hasNextTask endpoint is not a task")

    start = graph.start_task_id()
    if graph.tasks and start is None:
        report.add(graph.id, "missing hasStartTask edge")
    elif start is not None and start not in task_ids:
        report.add(start, "hasStartTask target is not a task")

    if not cyclic and graph.tasks and start in task_ids:
        levels = [sorted(k) for k in graph.kind_levels()]
        flat_ok = all(len(k) == 1 for k in levels)
        kinds = [k[0] for k in levels if len(k) == 1]
        if graph.frequency_class == "frequent":
            good = (
                flat_ok
                and len(kinds) >= 4
                and kinds[0] == "Retrieve"
                and kinds[1] == "Slice"
                and kinds[-1] == "Store"
                and all(k == "Prepare" for k in kinds[2:-1])
            )
        else:
            good = flat_ok and kinds == ["Retrieve", "Prepare", "Store"]
        if not good:
            report.add(
                graph.id,
                f"task kind sequence {levels} is not legal for a "
                f"{graph.frequency_class} pipeline",
            )

    # -- kind-specific fields --------------------------------------------------
    for t in graph.tasks:
        if t.kind == "Slice":
            if t.chunk_size is None or t.slice_size is None:
                pass  # sizes are set by configuration, absence is legal
            elif not (t.chunk_size >= t.slice_size >= 1):
                report.add(t.id, f"requires nc >= ns >= 1, got nc={t.chunk_size} ns={t.slice_size}")
        else:
            if t.chunk_size is not None or t.slice_size is not None:
                report.add(t.id, f"chunk/slice size on a {t.kind} task")
        if t.storage_mode is not None and t.kind != "Store":
            report.add(t.id, f"storage mode on a {t.kind} task")
        if t.memory_reservation is not None:
            if t.kind not in ("Slice", "Prepare"):
                report.add(t.id, f"memory reservation on a {t.kind} task")
            elif t.memory_reservation <= 0:
                report.add(t.id, "memory reservation must be positive")
        if t.io is not None and graph.io_handler(t.io) is None:
            report.add(t.id, f"unknown IO handler {t.io}")

    # -- data entities ---------------------------------------------------------
    for d in graph.data_entities:
        if d.volume < 0 or d.no_records < 0:
            report.add(d.id, "volume and record count must be nonnegative")
        if d.no_records > 0 and d.volume == 0:
            report.add(d.id, "records without volume (n > 0 requires v > 0)")

    producers: dict = {}
    consumer_kinds: dict = {}
    for io in graph.io_handlers:
        owners = [t for t in graph.tasks if t.io == io.id]
        for out in io.outputs:
            producers.setdefault(out, []).append(io.id)
        for inp in io.inputs:
            for t in owners:
                consumer_kinds.setdefault(inp, set()).add(t.kind)
    for d in graph.data_entities:
        made_by = producers.get(d.id, [])
        if len(made_by) != 1:
            report.add(d.id, f"must be output of exactly one IO handler, got {made_by}")
        if len(consumer_kinds.get(d.id, set())) > 1:
            report.add(d.id, "consumed by more than one downstream task set")

    return report
