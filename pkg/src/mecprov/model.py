"""Domain types shared across the package.

A network service (NS) is a multiset of network-function types with a
per-type instance count; every instance costs one VM. A MEC service couples
one edge application with one requested NS.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


class UnknownNFTypeError(Exception):
    """Raised when a sealed catalog is asked for a name it does not hold."""

    def __init__(self, name: str) -> None:
        super().__init__("unknown NF type: %r" % name)
        self.name = name


@dataclass(frozen=True)
class NFType:
    """One network-function type in the catalog; ids are dense 0..N-1."""

    id: int
    name: str


class NFCatalog:
    """Registry of NF type names with densely assigned ids.

    Names register on first use until the catalog is sealed; a sealed catalog
    rejects unknown names instead of growing.
    """

    def __init__(self) -> None:
        self._by_name: dict[str, NFType] = {}
        self._sealed = False

    def __len__(self) -> int:
        return len(self._by_name)

    @property
    def sealed(self) -> bool:
        return self._sealed

    def seal(self) -> None:
        self._sealed = True

    def register(self, name: str) -> NFType:
        nf = self._by_name.get(name)
        if nf is None:
            if self._sealed:
                raise UnknownNFTypeError(name)
            nf = NFType(len(self._by_name), name)
            self._by_name[name] = nf
        return nf

    def lookup(self, name: str) -> NFType | None:
        return self._by_name.get(name)

    def types(self) -> list[NFType]:
        return sorted(self._by_name.values(), key=lambda nf: nf.id)


@dataclass(frozen=True)
class NSSpec:
    """A network service as a map NF type id -> instance count (>= 1).

    Treated as an immutable value after construction; members are normalized
    to ascending type id so iteration order is deterministic everywhere.
    """

    members: dict[int, int]

    def __post_init__(self) -> None:
        if not self.members:
            raise ValueError("a network service must list at least one NF type")
        for type_id, count in self.members.items():
            if not isinstance(type_id, int) or isinstance(type_id, bool) or type_id < 0:
                raise ValueError("NF type id must be a non-negative integer, got %r" % (type_id,))
            if not isinstance(count, int) or isinstance(count, bool) or count < 1:
                raise ValueError("instance count for type %r must be >= 1, got %r" % (type_id, count))
        object.__setattr__(self, "members", dict(sorted(self.members.items())))

    def count(self, type_id: int) -> int:
        return self.members.get(type_id, 0)

    def size(self) -> int:
        """Number of distinct NF types."""
        return len(self.members)


def footprint(ns: NSSpec) -> int:
    """Total NF instances (VMs) needed to stand the service up."""
    return sum(ns.members.values())


def overlap_types(a: NSSpec, b: NSSpec) -> set[int]:
    """NF types the two services have in common."""
    return set(a.members.keys() & b.members.keys())


@dataclass(frozen=True)
class MEASpec:
    """Resource ask of the edge application half of a MEC service."""

    name: str
    vcpus: int
    memory_mb: int

    def __post_init__(self) -> None:
        if self.vcpus < 1:
            raise ValueError("vcpus must be >= 1")
        if self.memory_mb < 1:
            raise ValueError("memory_mb must be >= 1")


# MEA resources are not drawn from the NF VM budget, so the simulator pins a
# nominal application spec on every generated request.
NOMINAL_MEA = MEASpec("mea", 1, 512)


@dataclass(frozen=True)
class MESRequest:
    """One MEC service request: an application plus its requested NS."""

    id: int
    mea: MEASpec
    ns: NSSpec


@dataclass(frozen=True)
class AlarmConfig:
    """Monitoring trigger: when `metric` crosses `threshold`, run `action`."""

    metric: str
    threshold: float
    action: str

    def __post_init__(self) -> None:
        if not math.isfinite(self.threshold):
            raise ValueError("alarm threshold must be finite")
        if self.action not in ("scale_out", "heal"):
            raise ValueError("alarm action must be scale_out or heal, got %r" % self.action)


@dataclass
class OfferedNS:
    """A deployed NS whose instances may be shared with later requests.

    reuse_count[i] is the number of services currently holding type i's
    instances, the original owner included. A type disappears from
    reuse_count when its last holder terminates (the VMs are freed); keys are
    therefore always a subset of the spec and mark which types are live.
    """

    id: int
    spec: NSSpec
    reuse_count: dict[int, int] = field(default_factory=dict)

    @classmethod
    def fresh(cls, offered_id: int, spec: NSSpec) -> "OfferedNS":
        return cls(offered_id, spec, {type_id: 1 for type_id in spec.members})

    def live_footprint(self) -> int:
        """VMs still held by this offered NS (released types excluded)."""
        return sum(self.spec.members[i] for i in self.reuse_count)
