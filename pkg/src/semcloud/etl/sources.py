"""Heterogeneous source ingestion and mapping to the unified schema."""

import csv
import dataclasses
import json
import re
import xml.etree.ElementTree as ET

from .errors import MappingGap, UnreadableSource
from .records import KEY_FIELDS, UNIFIED_ATTRIBUTES, make_record


@dataclasses.dataclass(frozen=True)
class SourceDescriptor:
    """One heterogeneous source and how its fields map onto the schema.

    field_mapping is injective source-field -> unified-property; absent
    lists unified attributes this source does not carry at all.
    """

    format: str  # csv | json | xml
    location: str
    field_mapping: tuple  # ((source_field, unified_property), ...)
    absent: tuple
    record_bytes: int

    def mapping_dict(self):
        return dict(self.field_mapping)


@dataclasses.dataclass(frozen=True)
class Reject:
    source: str
    index: int
    reason: str


def ingest(descriptor):
    """Read one source into raw field dicts plus a reject channel.

    Returns (raw_records, rejects).  Structural problems with single
    records become Rejects; an unreadable container raises
    UnreadableSource.
    """
    try:
        with open(descriptor.location) as fh:
            text = fh.read()
    except OSError as exc:
        raise UnreadableSource("%s: %s" % (descriptor.location, exc))
    if descriptor.format == "csv":
        return _ingest_csv(descriptor, text)
    if descriptor.format == "json":
        return _ingest_json(descriptor, text)
    if descriptor.format == "xml":
        return _ingest_xml(descriptor, text)
    raise UnreadableSource("unknown source format %r" % descriptor.format)


def _ingest_csv(descriptor, text):
    rows = list(csv.reader(text.splitlines()))
    if not rows:
        return [], []
    header = rows[0]
    records, rejects = [], []
    for i, row in enumerate(rows[1:]):
        if len(row) != len(header):
            rejects.append(Reject(descriptor.location, i, "cell count mismatch"))
            continue
        records.append(dict(zip(header, row)))
    return records, rejects


def _ingest_json(descriptor, text):
    try:
        data = json.loads(text)
    except ValueError as exc:
        raise UnreadableSource("%s: %s" % (descriptor.location, exc))
    if not isinstance(data, list):
        raise UnreadableSource("%s: expected a record array" % descriptor.location)
    records, rejects = [], []
    for i, entry in enumerate(data):
        if not isinstance(entry, dict):
            rejects.append(Reject(descriptor.location, i, "entry is not an object"))
            continue
        records.append(entry)
    return records, rejects


_XML_RECORD = re.compile(r"<record>.*?</record>", re.S)


def _ingest_xml(descriptor, text):
    # Record blocks are scanned individually so one truncated record
    # becomes a reject instead of poisoning the whole file.
    if "<records" not in text:
        raise UnreadableSource("%s: missing <records> wrapper" % descriptor.location)
    records, rejects = [], []
    matched_opens = 0
    for i, block in enumerate(_XML_RECORD.findall(text)):
        matched_opens += block.count("<record>")
        try:
            element = ET.fromstring(block)
        except ET.ParseError as exc:
            rejects.append(Reject(descriptor.location, i, "bad record: %s" % exc))
            continue
        records.append({child.tag: child.text for child in element})
    total_opens = text.count("<record>")
    for j in range(total_opens - matched_opens):
        rejects.append(
            Reject(descriptor.location, matched_opens + j, "truncated record")
        )
    return records, rejects


def map_to_unified(raw_records, descriptor, strict=True):
    """Rename and coerce raw records into UnifiedRecords.

    Unified attributes the source does not carry come out as explicit
    None.  In strict mode a source field without a mapping raises
    MappingGap; otherwise it is silently dropped.
    """
    mapping = descriptor.mapping_dict()
    unified = []
    for raw in raw_records:
        values = {}
        keys = {}
        for field, value in raw.items():
            prop = mapping.get(field)
            if prop is None:
                if strict:
                    raise MappingGap(
                        "%s: field %r has no unified mapping"
                        % (descriptor.location, field)
                    )
                continue
            if prop in KEY_FIELDS:
                keys[prop] = value
            elif value is not None:
                values[prop] = float(value)
        unified.append(
            make_record(
                keys["machine_id"],
                keys["program_id"],
                float(keys["timestamp"]),
                values,
                descriptor.record_bytes,
            )
        )
    return unified


def check_descriptor(descriptor):
    """Mapping is injective and covers every non-absent unified attribute."""
    mapping = descriptor.mapping_dict()
    targets = list(mapping.values())
    if len(set(targets)) != len(targets):
        raise MappingGap("%s: mapping is not injective" % descriptor.location)
    covered = set(targets)
    for prop in KEY_FIELDS:
        if prop not in covered:
            raise MappingGap("%s: key field %s unmapped" % (descriptor.location, prop))
    for prop in UNIFIED_ATTRIBUTES:
        if prop not in covered and prop not in descriptor.absent:
            raise MappingGap(
                "%s: attribute %s neither mapped nor declared absent"
                % (descriptor.location, prop)
            )
