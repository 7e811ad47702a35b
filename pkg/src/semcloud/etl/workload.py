"""Synthetic workload generator.

Emits the same underlying welding records as three heterogeneous
sources (CSV, JSON, XML) that disagree in field naming and attribute
availability.  Output is byte-deterministic for a given seed.
"""

import dataclasses
import json
import os

import numpy as np

from .records import KEY_FIELDS, UNIFIED_ATTRIBUTES, make_record
from .sources import SourceDescriptor

# Per-source field name schemes: the same unified property goes by a
# different name in every source system.
_CSV_NAME = {
    "machine_id": "M_ID",
    "program_id": "PROG_NO",
    "timestamp": "TS",
}
_JSON_NAME = {
    "machine_id": "machineId",
    "program_id": "programId",
    "timestamp": "timestamp",
}
_XML_NAME = {
    "machine_id": "machine",
    "program_id": "program",
    "timestamp": "time",
}

# Unified attributes each source system simply does not record.
_CSV_ABSENT = ("cap_wear_index", "quality_score")
_JSON_ABSENT = ("displacement_start", "displacement_end")
_XML_ABSENT = ("expulsion_flag",)

PROGRAM_COUNT = 5


def _csv_field(prop):
    return _CSV_NAME.get(prop, prop.upper())


def _json_field(prop):
    if prop in _JSON_NAME:
        return _JSON_NAME[prop]
    head, *rest = prop.split("_")
    return head + "".join(part.capitalize() for part in rest)


def _xml_field(prop):
    return _XML_NAME.get(prop, prop.replace("_", "-"))


_SCHEMES = (
    ("csv", _csv_field, _CSV_ABSENT),
    ("json", _json_field, _JSON_ABSENT),
    ("xml", _xml_field, _XML_ABSENT),
)


@dataclasses.dataclass(frozen=True)
class WorkloadSpec:
    production_lines: int = 3
    machines: int = 45
    duration: float = 86.4  # s, 1/1000 of one day
    rate: float = 1.0  # records per second per machine
    record_bytes: int = 1250  # 1/100 of the measured 125 KB per operation
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.production_lines <= self.machines:
            raise ValueError("need machines >= production_lines >= 1")

    def records_per_machine(self):
        return int(self.rate * self.duration)

    def total_records(self):
        return self.machines * self.records_per_machine()


def machine_ids(spec):
    return ["m%02d" % (i + 1) for i in range(spec.machines)]


def base_records(spec):
    """The underlying record stream all sources describe."""
    rng = np.random.RandomState(spec.seed)
    records = []
    per_machine = spec.records_per_machine()
    for m_index, machine in enumerate(machine_ids(spec)):
        for k in range(per_machine):
            program = "p%d" % (rng.randint(PROGRAM_COUNT) + 1)
            timestamp = round(k / spec.rate, 6)
            values = {}
            for j, name in enumerate(UNIFIED_ATTRIBUTES):
                base = 10.0 * (j + 1) + 0.5 * m_index
                values[name] = round(base * (1.0 + 0.1 * rng.rand()), 6)
            records.append(
                make_record(machine, program, timestamp, values, spec.record_bytes)
            )
    return records


def _source_fields(field_of, absent):
    props = [p for p in KEY_FIELDS + UNIFIED_ATTRIBUTES if p not in absent]
    return [(field_of(prop), prop) for prop in props]


def _cell(record, prop):
    if prop == "machine_id":
        return record.machine_id
    if prop == "program_id":
        return record.program_id
    if prop == "timestamp":
        return repr(record.timestamp)
    return repr(record.attribute(prop))


def _write_csv(path, fields, records):
    lines = [",".join(field for field, _ in fields)]
    for rec in records:
        lines.append(",".join(_cell(rec, prop) for _, prop in fields))
    _write(path, "\n".join(lines) + "\n")


def _write_json(path, fields, records):
    entries = []
    for rec in records:
        entry = {}
        for field, prop in fields:
            cell = _cell(rec, prop)
            entry[field] = cell if prop in ("machine_id", "program_id") else float(cell)
        entries.append(entry)
    _write(path, json.dumps(entries, indent=1) + "\n")


def _write_xml(path, fields, records):
    lines = ["<records>"]
    for rec in records:
        parts = ["  <record>"]
        for field, prop in fields:
            parts.append("<%s>%s</%s>" % (field, _cell(rec, prop), field))
        parts.append("</record>")
        lines.append("".join(parts))
    lines.append("</records>")
    _write(path, "\n".join(lines) + "\n")


def _write(path, text):
    with open(path, "w") as fh:
        fh.write(text)


_WRITERS = {"csv": _write_csv, "json": _write_json, "xml": _write_xml}


def generate_workload(spec, out_dir):
    """Write the three heterogeneous source files; returns descriptors."""
    os.makedirs(out_dir, exist_ok=True)
    records = base_records(spec)
    descriptors = []
    for fmt, field_of, absent in _SCHEMES:
        fields = _source_fields(field_of, absent)
        location = os.path.join(out_dir, "source_%s.%s" % (fmt, fmt))
        _WRITERS[fmt](location, fields, records)
        descriptors.append(
            SourceDescriptor(
                format=fmt,
                location=location,
                field_mapping=tuple(fields),
                absent=absent,
                record_bytes=spec.record_bytes,
            )
        )
    return descriptors
