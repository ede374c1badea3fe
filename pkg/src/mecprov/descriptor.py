"""MEC service descriptor (MESD): parse, validate, serialize, lower.

A descriptor is a single YAML document pairing an application descriptor
(mead) with a network-service descriptor (nsd). Parsing is strict: unknown
keys are rejected at every level so descriptor mistakes fail loudly. The
optional chain only records an ordering for operators; placement ignores it.

Schema (version tag ``apmec-sim/1``)::

    mesd_version: apmec-sim/1
    name: <string>
    mead:
      name: <string>
      vcpus: <int>
      memory_mb: <int>
      alarm: {metric: <string>, threshold: <float>, action: scale_out|heal}   # optional
    nsd:
      vnfs:
      - {type: <string>, instances: <int>}
      chain: [<string>, ...]                                                  # optional
"""

from __future__ import annotations

from dataclasses import dataclass

import yaml

from .model import AlarmConfig, MEASpec, MESRequest, NFCatalog, NSSpec

MESD_VERSION = "apmec-sim/1"

_TOP_KEYS = {"mesd_version", "name", "mead", "nsd"}
_MEAD_KEYS = {"name", "vcpus", "memory_mb", "alarm"}
_ALARM_KEYS = {"metric", "threshold", "action"}
_NSD_KEYS = {"vnfs", "chain"}
_VNF_KEYS = {"type", "instances"}


class DescriptorError(ValueError):
    """Base class for everything wrong with a descriptor document."""

    kind = "invalid_descriptor"


class DescriptorSyntaxError(DescriptorError):
    kind = "syntax_error"

    def __init__(self, message: str, line: int | None = None) -> None:
        super().__init__(message if line is None else "line %d: %s" % (line, message))
        self.line = line


class UnknownVersionError(DescriptorError):
    kind = "unknown_version"

    def __init__(self, version: object) -> None:
        super().__init__("unrecognized mesd_version %r (expected %r)" % (version, MESD_VERSION))
        self.version = version


class MissingSectionError(DescriptorError):
    kind = "missing_section"

    def __init__(self, section: str) -> None:
        super().__init__("missing required section: %s" % section)
        self.section = section


@dataclass(frozen=True)
class MESD:
    """Validated descriptor; vnfs keep declared order for serialization."""

    version: str
    name: str
    mead: MEASpec
    alarm: AlarmConfig | None
    vnfs: tuple[tuple[str, int], ...]
    chain: tuple[str, ...] | None


def _require_mapping(value: object, what: str) -> dict:
    if not isinstance(value, dict):
        raise DescriptorError("%s must be a mapping, got %s" % (what, type(value).__name__))
    return value


def _reject_unknown(mapping: dict, allowed: set[str], where: str) -> None:
    unknown = sorted(k for k in mapping if k not in allowed)
    if unknown:
        raise DescriptorError("unknown key %r in %s" % (unknown[0], where))


def _require_int(value: object, what: str, minimum: int) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise DescriptorError("%s must be an integer" % what)
    if value < minimum:
        raise DescriptorError("%s must be >= %d, got %d" % (what, minimum, value))
    return value


def _require_str(value: object, what: str) -> str:
    if not isinstance(value, str) or not value:
        raise DescriptorError("%s must be a non-empty string" % what)
    return value


def parse_mesd(text: str) -> MESD:
    """Parse and validate one descriptor document."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise DescriptorSyntaxError(getattr(exc, "problem", None) or str(exc), line) from exc
    if doc is None:
        raise DescriptorSyntaxError("document is empty", 1)
    if not isinstance(doc, dict):
        raise DescriptorSyntaxError("document is not a mapping", 1)
    _reject_unknown(doc, _TOP_KEYS, "document")

    version = doc.get("mesd_version")
    if version != MESD_VERSION:
        raise UnknownVersionError(version)
    name = _require_str(doc.get("name"), "name")

    if "mead" not in doc:
        raise MissingSectionError("mead")
    mead_doc = _require_mapping(doc["mead"], "mead")
    _reject_unknown(mead_doc, _MEAD_KEYS, "mead")
    mea = MEASpec(
        _require_str(mead_doc.get("name"), "mead.name"),
        _require_int(mead_doc.get("vcpus"), "mead.vcpus", 1),
        _require_int(mead_doc.get("memory_mb"), "mead.memory_mb", 1),
    )
    alarm = None
    if "alarm" in mead_doc:
        alarm_doc = _require_mapping(mead_doc["alarm"], "mead.alarm")
        _reject_unknown(alarm_doc, _ALARM_KEYS, "mead.alarm")
        threshold = alarm_doc.get("threshold")
        if not isinstance(threshold, (int, float)) or isinstance(threshold, bool):
            raise DescriptorError("mead.alarm.threshold must be a number")
        try:
            alarm = AlarmConfig(
                _require_str(alarm_doc.get("metric"), "mead.alarm.metric"),
                float(threshold),
                _require_str(alarm_doc.get("action"), "mead.alarm.action"),
            )
        except ValueError as exc:
            raise DescriptorError("mead.alarm: %s" % exc) from exc

    if "nsd" not in doc:
        raise MissingSectionError("nsd")
    nsd_doc = _require_mapping(doc["nsd"], "nsd")
    _reject_unknown(nsd_doc, _NSD_KEYS, "nsd")
    vnfs_doc = nsd_doc.get("vnfs")
    if not isinstance(vnfs_doc, list) or not vnfs_doc:
        raise DescriptorError("nsd.vnfs must be a non-empty list")
    vnfs: list[tuple[str, int]] = []
    seen: set[str] = set()
    for idx, entry in enumerate(vnfs_doc):
        entry = _require_mapping(entry, "nsd.vnfs[%d]" % idx)
        _reject_unknown(entry, _VNF_KEYS, "nsd.vnfs[%d]" % idx)
        type_name = _require_str(entry.get("type"), "nsd.vnfs[%d].type" % idx)
        if type_name in seen:
            raise DescriptorError("duplicate NF type %r in nsd.vnfs" % type_name)
        seen.add(type_name)
        vnfs.append((type_name, _require_int(entry.get("instances"), "nsd.vnfs[%d].instances" % idx, 1)))

    chain = None
    if "chain" in nsd_doc:
        chain_doc = nsd_doc["chain"]
        if not isinstance(chain_doc, list):
            raise DescriptorError("nsd.chain must be a list of NF type names")
        chain_names: list[str] = []
        for item in chain_doc:
            chain_names.append(_require_str(item, "nsd.chain entry"))
        if len(set(chain_names)) != len(chain_names):
            raise DescriptorError("nsd.chain repeats an NF type")
        for item in chain_names:
            if item not in seen:
                raise DescriptorError("nsd.chain names %r which is not in nsd.vnfs" % item)
        chain = tuple(chain_names)

    return MESD(MESD_VERSION, name, mea, alarm, tuple(vnfs), chain)


def serialize_mesd(mesd: MESD) -> str:
    """Stable YAML rendering; parse(serialize(m)) == m for valid descriptors."""
    mead: dict = {
        "name": mesd.mead.name,
        "vcpus": mesd.mead.vcpus,
        "memory_mb": mesd.mead.memory_mb,
    }
    if mesd.alarm is not None:
        mead["alarm"] = {
            "metric": mesd.alarm.metric,
            "threshold": mesd.alarm.threshold,
            "action": mesd.alarm.action,
        }
    nsd: dict = {"vnfs": [{"type": t, "instances": n} for t, n in mesd.vnfs]}
    if mesd.chain is not None:
        nsd["chain"] = list(mesd.chain)
    doc = {
        "mesd_version": mesd.version,
        "name": mesd.name,
        "mead": mead,
        "nsd": nsd,
    }
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=False)


def to_request(mesd: MESD, catalog: NFCatalog, request_id: int = 0) -> MESRequest:
    """Lower a descriptor to a placement request; chain ordering is dropped."""
    members: dict[int, int] = {}
    for type_name, instances in mesd.vnfs:
        members[catalog.register(type_name).id] = instances
    return MESRequest(request_id, mesd.mead, NSSpec(members))
