"""Courts as event-sourced agents.

A court's only state of record is its append-only log; the current LP base is
a cache that ``replay`` can always rebuild from the log.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Optional

from .errors import InvalidLP, NotInBase
from .graph import CommunityGraph
from .lp import (
    Condition,
    EvidenceProfile,
    LegalProposition,
    Modality,
    conflicts,
    court_evidence,
    sort_lps,
)
from .priority import Order, PriorityPolicy, QueryContext, compare


class EventKind(str, Enum):
    ISSUE = "Issue"
    WITHDRAW = "Withdraw"
    IMPORT = "Import"


class Reason(str, Enum):
    NEW_JUDGEMENT = "NewJudgement"
    CHANGED_VIEWPOINT = "ChangedViewpoint"
    NEW_DILEMMA = "NewDilemma"
    CONSISTENCY_IMPROVEMENT = "ConsistencyImprovement"
    GOSSIP_IMPORT = "GossipImport"


class RevisionPolicy(str, Enum):
    KEEP_BOTH = "KeepBoth"
    WITHDRAW_OLDER_CONFLICTS = "WithdrawOlderConflicts"
    WITHDRAW_LOWER_PRIORITY = "WithdrawLowerPriority"


@dataclass(frozen=True)
class CourtEvent:
    kind: EventKind
    lp_id: str
    round: int
    reason: Reason
    payload: Optional[LegalProposition] = None
    court_id: Optional[str] = None
    seq: int = 0

    def sort_key(self) -> tuple[int, str, int]:
        # seed issues carry no court and sort first within round 0
        return (self.round, self.court_id or "", self.seq)

    def to_json(self) -> dict[str, Any]:
        return {
            "court_id": self.court_id,
            "seq": self.seq,
            "kind": self.kind.value,
            "lp_id": self.lp_id,
            "round": self.round,
            "reason": self.reason.value,
            "payload": self.payload.to_json() if self.payload is not None else None,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "CourtEvent":
        payload = data.get("payload")
        return cls(
            kind=EventKind(data["kind"]),
            lp_id=data["lp_id"],
            round=data["round"],
            reason=Reason(data["reason"]),
            payload=LegalProposition.from_json(payload) if payload is not None else None,
            court_id=data.get("court_id"),
            seq=data.get("seq", 0),
        )


def replay(events: Iterable[CourtEvent]) -> dict[str, LegalProposition]:
    """Rebuild a base from a log; raises if the log is not well formed."""
    base: dict[str, LegalProposition] = {}
    seen: set[str] = set()
    for ev in events:
        if ev.kind is EventKind.WITHDRAW:
            if ev.lp_id not in base:
                raise NotInBase(f"withdraw of {ev.lp_id} which is not in the base at round {ev.round}")
            del base[ev.lp_id]
        else:
            if ev.payload is None or ev.payload.id != ev.lp_id:
                raise InvalidLP(f"{ev.kind.value} event for {ev.lp_id} lacks a matching payload")
            if ev.lp_id in seen:
                raise InvalidLP(f"LP id {ev.lp_id} appears twice in one log")
            seen.add(ev.lp_id)
            base[ev.lp_id] = ev.payload
    return base


@dataclass
class Court:
    id: str
    community: str
    revision_policy: RevisionPolicy = RevisionPolicy.KEEP_BOTH
    activity_rate: float = 0.0
    graph: Optional[CommunityGraph] = None
    priority: PriorityPolicy = field(default_factory=PriorityPolicy)
    log: list[CourtEvent] = field(default_factory=list)
    seq: int = 1
    _base: dict[str, LegalProposition] = field(default_factory=dict, repr=False)
    _ever: set[str] = field(default_factory=set, repr=False)

    def __post_init__(self):
        self.revision_policy = RevisionPolicy(self.revision_policy)
        if not 0.0 <= self.activity_rate <= 1.0:
            raise ValueError(f"activity_rate must be in [0,1], got {self.activity_rate}")

    # -- reading --------------------------------------------------------

    def current_base(self) -> list[LegalProposition]:
        return sort_lps(self._base.values())

    def holds(self, lp_id: str) -> bool:
        return lp_id in self._base

    def base_at(self, round_: int) -> list[LegalProposition]:
        """Base as it stood at the end of ``round_``."""
        return sort_lps(replay(ev for ev in self.log if ev.round <= round_).values())

    def contents(self) -> set[tuple]:
        return {lp.content for lp in self._base.values()}

    # -- writing --------------------------------------------------------

    def _append(self, kind: EventKind, lp_id: str, round_: int, reason: Reason,
                payload: LegalProposition | None = None) -> CourtEvent:
        ev = CourtEvent(kind, lp_id, round_, reason, payload, self.id, len(self.log))
        self.log.append(ev)
        if kind is EventKind.WITHDRAW:
            del self._base[lp_id]
        else:
            self._base[lp_id] = payload
            self._ever.add(lp_id)
        return ev

    def issue(
        self,
        modality: Modality,
        action: str,
        condition: Condition,
        round_: int,
        reason: Reason = Reason.NEW_JUDGEMENT,
        evidence: EvidenceProfile | None = None,
    ) -> list[CourtEvent]:
        if evidence is None:
            evidence = court_evidence(self.id, round_)
        elif evidence.issuing_court != self.id or evidence.issue_time != round_:
            raise InvalidLP("issued evidence must name this court and the current round")
        lp = LegalProposition(f"{self.id}:{self.seq}", Modality(modality), action, condition, evidence)
        self.seq += 1
        events = [self._append(EventKind.ISSUE, lp.id, round_, reason, lp)]
        return events + self.revise(lp, round_)

    def withdraw(self, lp_id: str, round_: int, reason: Reason = Reason.CHANGED_VIEWPOINT) -> CourtEvent:
        if lp_id not in self._base:
            raise NotInBase(f"{lp_id} is not in the current base of court {self.id}")
        return self._append(EventKind.WITHDRAW, lp_id, round_, reason)

    def import_lp(self, donor_lp: LegalProposition, round_: int) -> list[CourtEvent]:
        if donor_lp.withdrawn_at is not None:
            raise InvalidLP(f"cannot import withdrawn LP {donor_lp.id}")
        if donor_lp.id in self._ever or donor_lp.content in self.contents():
            return []
        events = [self._append(EventKind.IMPORT, donor_lp.id, round_, Reason.GOSSIP_IMPORT, donor_lp)]
        return events + self.revise(donor_lp, round_)

    def own_context(self, round_: int) -> QueryContext:
        if self.graph is None:
            raise ValueError(f"court {self.id} needs a community graph for priority revision")
        return QueryContext(self.id, self.community, round_, self.graph)

    def revise(self, new_lp: LegalProposition, round_: int) -> list[CourtEvent]:
        policy = self.revision_policy
        if policy is RevisionPolicy.KEEP_BOTH:
            return []
        rivals = [x for x in self.current_base() if x.id != new_lp.id and conflicts(new_lp, x)]
        if policy is RevisionPolicy.WITHDRAW_OLDER_CONFLICTS:
            doomed = [x for x in rivals if x.evidence.issue_time < round_]
            reason = Reason.CHANGED_VIEWPOINT
        else:
            qc = self.own_context(round_)
            doomed = [x for x in rivals if compare(new_lp, x, qc, self.priority) is Order.A_PRECEDES]
            reason = Reason.CONSISTENCY_IMPROVEMENT
        return [self.withdraw(x.id, round_, reason) for x in doomed]

    def load_log(self, events: Iterable[CourtEvent]) -> None:
        """Replace this court's log, rebuilding base and sequence counter."""
        events = list(events)
        self._base = replay(events)
        self.log = events
        self._ever = {ev.lp_id for ev in events if ev.kind is not EventKind.WITHDRAW}
        own = [int(i.rpartition(":")[2]) for i in self._ever if i.rpartition(":")[0] == self.id]
        self.seq = max(own, default=0) + 1
