"""Cluster, cost model, and trace data types."""

import dataclasses

import numpy as np

_trapezoid = getattr(np, "trapezoid", None) or np.trapz

MB = 2**20


@dataclasses.dataclass(frozen=True)
class NodeSpec:
    name: str
    node_memory: float = 128.0  # MB
    node_storage: float = 4096.0  # MB
    cpu: float = 2000.0  # millicores


@dataclasses.dataclass(frozen=True)
class ClusterSpec:
    nodes: tuple
    queue_latency: float = 0.02  # s per message hop
    fast_storage_mb: float = 4096.0
    cloud_storage_mb: float = 1048576.0

    def __post_init__(self):
        if not self.nodes:
            raise ValueError("cluster needs at least one node")


def default_cluster(node_count=7, node_memory=128.0, node_storage=4096.0):
    nodes = tuple(
        NodeSpec("node%d" % (i + 1), node_memory, node_storage)
        for i in range(node_count)
    )
    return ClusterSpec(nodes=nodes)


def legacy_node(node_memory=8192.0, node_storage=65536.0):
    return NodeSpec("legacy", node_memory, node_storage)


@dataclasses.dataclass(frozen=True)
class CostModel:
    """Analytic stand-in for measured step behaviour.

    Throughputs are records/s; memories are affine in the records held
    in flight (MB); storage factors expand the input volume.  Noise is
    multiplicative and seeded; amplitude 0 gives exact determinism.
    """

    thr_retrieve: float = 20000.0
    thr_slice: float = 10000.0
    thr_prepare: float = 2000.0  # the bottleneck step
    thr_store: float = 20000.0
    join_overhead: float = 0.05  # s per slice, the cross-pipeline lookup
    alpha_slice: float = 3.0  # MB per in-flight chunk MB
    beta_slice: float = 64.0  # MB
    alpha_prepare: float = 5.0  # MB per in-flight slice MB
    beta_prepare: float = 96.0  # MB
    retrieve_memory: float = 48.0  # MB
    store_memory: float = 48.0  # MB
    expansion_slice: float = 1.0
    expansion_prepare: float = 1.3
    expansion_store: float = 1.1
    legacy_kappa: float = 2.0  # MB retained per MB processed
    legacy_factor: float = 1.2  # integration overhead of the monolith
    restart_penalty: float = 1.0  # fraction of elapsed phase time
    safety_margin: float = 1.05  # default reservation over working set
    cpu_per_instance: float = 1000.0  # millicores while busy
    max_prepare_instances: int = 8
    noise_amplitude: float = 0.0
    noise_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.noise_amplitude <= 0.5:
            raise ValueError("noise amplitude must be in [0, 0.5]")

    def slice_working_mb(self, nc, record_bytes):
        return self.alpha_slice * nc * record_bytes / MB + self.beta_slice

    def prepare_working_mb(self, ns, record_bytes):
        return self.alpha_prepare * ns * record_bytes / MB + self.beta_prepare


@dataclasses.dataclass(frozen=True)
class SimWorkload:
    n_records: int
    record_bytes: int
    machines: int = 45
    pipeline: str = "p1"

    @property
    def volume_mb(self):
        return self.n_records * self.record_bytes / MB

    @classmethod
    def from_spec(cls, spec, pipeline="p1"):
        return cls(
            n_records=spec.total_records(),
            record_bytes=spec.record_bytes,
            machines=spec.machines,
            pipeline=pipeline,
        )

    @classmethod
    def from_records(cls, records, pipeline="p1"):
        records = list(records)
        machines = len({r.machine_id for r in records})
        rb = records[0].record_bytes if records else 0
        return cls(
            n_records=len(records),
            record_bytes=rb,
            machines=max(machines, 1),
            pipeline=pipeline,
        )


@dataclasses.dataclass(frozen=True)
class StepInstance:
    step: str  # retrieve | slice | prepare | store
    index: int
    node: str
    reservation_mb: float
    working_mb: float


@dataclasses.dataclass
class QueueChannel:
    name: str
    published: int = 0
    delivered: int = 0
    acknowledged: int = 0

    def conserved(self):
        return self.published == self.delivered == self.acknowledged


@dataclasses.dataclass
class RunTrace:
    """Per-node memory/cpu step series plus totals.

    Series share the times axis and hold the value immediately after
    each boundary; boundaries appear twice so the trapezoidal integral
    of the step function is exact.
    """

    times: list
    memory: dict  # node -> list of MB
    cpu: dict  # node -> list of millicores
    step_windows: dict  # step -> (start, end)
    consumed_time: float = 0.0
    cpu_integral: float = 0.0
    peak_memory: dict = dataclasses.field(default_factory=dict)
    restarts: int = 0
    channels: list = dataclasses.field(default_factory=list)
    storage_mb: dict = dataclasses.field(default_factory=dict)

    def total_cpu_series(self):
        return [sum(vals) for vals in zip(*self.cpu.values())]


def build_trace(intervals, step_windows, channels=None, storage_mb=None):
    """Assemble a RunTrace from (start, end, node, mem_mb, cpu) intervals."""
    nodes = sorted({node for _, _, node, _, _ in intervals})
    deltas = []
    for start, end, node, mem, cpu in intervals:
        deltas.append((start, node, mem, cpu))
        deltas.append((end, node, -mem, -cpu))
    deltas.sort(key=lambda d: d[0])
    times = []
    memory = {node: [] for node in nodes}
    cpu = {node: [] for node in nodes}
    level_mem = {node: 0.0 for node in nodes}
    level_cpu = {node: 0.0 for node in nodes}

    def emit(t):
        times.append(t)
        for node in nodes:
            memory[node].append(level_mem[node])
            cpu[node].append(level_cpu[node])

    i = 0
    while i < len(deltas):
        t = deltas[i][0]
        emit(t)  # value before the change
        while i < len(deltas) and deltas[i][0] == t:
            _, node, dm, dc = deltas[i]
            level_mem[node] += dm
            level_cpu[node] += dc
            i += 1
        emit(t)  # value after the change
    trace = RunTrace(
        times=times,
        memory=memory,
        cpu=cpu,
        step_windows=dict(step_windows),
        channels=list(channels or []),
        storage_mb=dict(storage_mb or {}),
    )
    trace.consumed_time = max((end for _, end, *_ in intervals), default=0.0)
    total_cpu = trace.total_cpu_series()
    if times:
        trace.cpu_integral = float(_trapezoid(total_cpu, times))
    trace.peak_memory = {
        node: (max(memory[node]) if memory[node] else 0.0) for node in nodes
    }
    return trace


def write_trace(path, trace):
    nodes = sorted(trace.memory)
    header = ["time"]
    header += ["mem_%s" % n for n in nodes]
    header += ["cpu_%s" % n for n in nodes]
    lines = ["\t".join(header)]
    for i, t in enumerate(trace.times):
        row = [repr(t)]
        row += [repr(trace.memory[n][i]) for n in nodes]
        row += [repr(trace.cpu[n][i]) for n in nodes]
        lines.append("\t".join(row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
