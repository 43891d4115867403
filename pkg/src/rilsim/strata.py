"""Stratified membership levels and the community-quorum classifications.

Levels run 0..7, each stratum contained in the one below. A person's level
at time ``t`` is the longest prefix of the predicate chain they satisfy.
Quorums are "strictly more than three quarters", computed with Fractions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Iterable, Mapping, Optional

from .errors import NoCommunities, RilError

SHARED_QUORUM = Fraction(3, 4)
TOP_LEVEL = 7


class PersonEventKind(str, Enum):
    VOW = "VowV"
    REVOKE = "Revoke"
    DEATH = "Death"


class InvalidPerson(RilError, ValueError):
    pass


@dataclass(frozen=True)
class PersonRecord:
    id: str
    events: tuple[tuple[PersonEventKind, int], ...] = ()
    willing_to_renew: bool = False
    performs_tasks: bool = False
    community: Optional[str] = None
    performs_jihad_activity: bool = False

    def __post_init__(self):
        events = tuple((PersonEventKind(k), int(t)) for k, t in self.events)
        object.__setattr__(self, "events", events)
        times = [t for _, t in events]
        if times != sorted(times):
            raise InvalidPerson(f"person {self.id}: events are not time-ordered")
        if any(t < 0 for t in times):
            raise InvalidPerson(f"person {self.id}: negative event time")
        deaths = [i for i, (k, _) in enumerate(events) if k is PersonEventKind.DEATH]
        if len(deaths) > 1:
            raise InvalidPerson(f"person {self.id}: more than one Death event")
        if deaths and deaths[0] != len(events) - 1:
            raise InvalidPerson(f"person {self.id}: events recorded after Death")

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "PersonRecord":
        return cls(
            id=data["id"],
            events=tuple((e["kind"], e["t"]) for e in data.get("events", [])),
            willing_to_renew=data.get("willing_to_renew", False),
            performs_tasks=data.get("performs_tasks", False),
            community=data.get("community"),
            performs_jihad_activity=data.get("performs_jihad_activity", False),
        )

    def to_json(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "events": [{"kind": k.value, "t": t} for k, t in self.events],
            "willing_to_renew": self.willing_to_renew,
            "performs_tasks": self.performs_tasks,
            "community": self.community,
            "performs_jihad_activity": self.performs_jihad_activity,
        }

    def vow_status(self, t: int) -> tuple[bool, bool, bool]:
        """(alive, ever vowed, vow unrevoked since last assertion) at ``t``."""
        vowed = unrevoked = False
        for kind, when in self.events:
            if when > t:
                break
            if kind is PersonEventKind.DEATH:
                return (False, vowed, unrevoked)
            if kind is PersonEventKind.VOW:
                vowed = unrevoked = True
            elif vowed:
                unrevoked = False
        return (True, vowed, unrevoked)


@dataclass(frozen=True)
class CommunityProfile:
    id: str
    viewpoint_package: frozenset[str] = frozenset()
    has_lineage: bool = False
    lineage_explanatory: bool = False

    @property
    def qualifies(self) -> bool:
        return self.has_lineage and self.lineage_explanatory and bool(self.viewpoint_package)


@dataclass(frozen=True)
class StrataState:
    persons: Mapping[str, PersonRecord]
    profiles: Mapping[str, CommunityProfile]
    mainstream: frozenset[str] = frozenset()
    adherence: Mapping[str, frozenset[str]] = field(default_factory=dict)
    endorsement: Mapping[str, frozenset[str]] = field(default_factory=dict)


def membership_level(person: PersonRecord, state: StrataState, t: int) -> Optional[int]:
    if t < 0:
        raise ValueError("time must be nonnegative")
    alive, vowed, unrevoked = person.vow_status(t)
    if not alive or not vowed:
        return None
    profile = state.profiles.get(person.community) if person.community else None
    chain = (
        unrevoked,
        person.willing_to_renew,
        person.performs_tasks,
        profile is not None,
        profile is not None and profile.qualifies,
        person.community in state.mainstream,
        person.performs_jihad_activity,
    )
    level = 0
    for holds in chain:
        if not holds:
            break
        level += 1
    return level


def stratum(state: StrataState, n: int, t: int) -> frozenset[str]:
    if not 0 <= n <= TOP_LEVEL:
        raise ValueError(f"stratum index must be in 0..{TOP_LEVEL}")
    out = set()
    for pid, person in state.persons.items():
        level = membership_level(person, state, t)
        if level is not None and level >= n:
            out.add(pid)
    return frozenset(out)


def level5_communities(state: StrataState, t: int) -> frozenset[str]:
    """Qualifying communities that currently have at least one level-5 member."""
    members = stratum(state, 5, t)
    return frozenset(state.persons[p].community for p in members)


def level6_communities(state: StrataState, t: int) -> frozenset[str]:
    return level5_communities(state, t) & state.mainstream


def over_quorum(count: int, total: int) -> bool:
    return total > 0 and Fraction(count, total) > SHARED_QUORUM


class AssertionLabel(str, Enum):
    POINT_OF_VIEW = "PointOfView"
    MAINSTREAM = "Mainstream"
    SHARED = "Shared"
    SHARED_MAINSTREAM = "SharedMainstream"


class SystemLabel(str, Enum):
    ISLAMIC = "Islamic"
    MAINSTREAM_ISLAMIC = "MainstreamIslamic"
    SHARED = "Shared"
    SHARED_MAINSTREAM = "SharedMainstream"


def _quorum_labels(supporters: Iterable[str], state: StrataState, t: int, labels) -> frozenset:
    some5, some6, shared5, shared6 = labels
    l5 = level5_communities(state, t)
    if not l5:
        raise NoCommunities(5)
    l6 = l5 & state.mainstream
    backing = frozenset(supporters)
    out = set()
    if backing & l5:
        out.add(some5)
    if backing & l6:
        out.add(some6)
    if over_quorum(len(backing & l5), len(l5)):
        out.add(shared5)
    if over_quorum(len(backing & l6), len(l6)):
        out.add(shared6)
    return frozenset(out)


def classify_assertion(assertion_id: str, state: StrataState, t: int) -> frozenset[AssertionLabel]:
    L = AssertionLabel
    return _quorum_labels(
        state.adherence.get(assertion_id, ()), state, t,
        (L.POINT_OF_VIEW, L.MAINSTREAM, L.SHARED, L.SHARED_MAINSTREAM),
    )


def classify_endorsement(system_id: str, state: StrataState, t: int) -> frozenset[SystemLabel]:
    L = SystemLabel
    return _quorum_labels(
        state.endorsement.get(system_id, ()), state, t,
        (L.ISLAMIC, L.MAINSTREAM_ISLAMIC, L.SHARED, L.SHARED_MAINSTREAM),
    )
