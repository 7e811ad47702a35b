from .errors import (
    CapacityExceeded,
    EtlError,
    MappingGap,
    MissingReference,
    UnreadableSource,
)
from .records import (
    KEY_FIELDS,
    UNIFIED_ATTRIBUTES,
    UNIFIED_HEADER,
    UnifiedRecord,
    make_record,
    read_unified,
    write_unified,
)
from .sources import Reject, SourceDescriptor, check_descriptor, ingest, map_to_unified
from .steps import (
    PreparedRecord,
    PreparedSlice,
    PreparedStore,
    ReferenceStore,
    Slice,
    StoreReceipt,
    prepare_slice,
    read_stored,
    reference_entries,
    slice_records,
    store_prepared,
)
from .workload import WorkloadSpec, base_records, generate_workload, machine_ids

__all__ = [
    "CapacityExceeded",
    "EtlError",
    "KEY_FIELDS",
    "MappingGap",
    "MissingReference",
    "PreparedRecord",
    "PreparedSlice",
    "PreparedStore",
    "ReferenceStore",
    "Reject",
    "Slice",
    "SourceDescriptor",
    "StoreReceipt",
    "UNIFIED_ATTRIBUTES",
    "UNIFIED_HEADER",
    "UnifiedRecord",
    "UnreadableSource",
    "WorkloadSpec",
    "base_records",
    "check_descriptor",
    "generate_workload",
    "ingest",
    "machine_ids",
    "make_record",
    "map_to_unified",
    "prepare_slice",
    "read_stored",
    "read_unified",
    "reference_entries",
    "slice_records",
    "store_prepared",
    "write_unified",
]
