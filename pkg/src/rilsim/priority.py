"""The eight priority mechanisms and the maximal-priority filter.

Each mechanism maps an LP to a sortable key (higher is stronger) given the
asking agent's position. ``compare`` is lexicographic over those keys in
the policy's mechanism order, so it is a strict weak ordering for every
valid policy. Ties after all eight mechanisms are left as ties.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Any, Iterable, Sequence, Union

from .errors import InvalidPolicy
from .graph import CommunityGraph, community_distance
from .lp import LegalProposition, SourceTier, sort_lps


class Mechanism(str, Enum):
    SCIENCE_OVER_REVELATION = "M1"
    NEWER_SCIENCE = "M2"
    INTERPRETATION_OVER_REVELATION = "M3"
    DIRECT_OVER_INDIRECT_WITNESS = "M4"
    SCHOLAR_RANK = "M5"
    SCHOLAR_INVOLVEMENT = "M6"
    COURT_RECENCY = "M7"
    COURT_PROXIMITY = "M8"


class Order(str, Enum):
    A_PRECEDES = "APrecedes"
    B_PRECEDES = "BPrecedes"
    TIE = "Tie"


M = Mechanism
DEFAULT_MECHANISM_ORDER = (M("M1"), M("M3"), M("M4"), M("M2"), M("M5"), M("M6"), M("M8"), M("M7"))

T = SourceTier
DEFAULT_TIER_ORDER: tuple[frozenset[SourceTier], ...] = (
    frozenset({T.SCIENCE}),
    frozenset({T.CONFIRMED_INTERPRETATION}),
    frozenset({T.DIRECT_WITNESS}),
    frozenset({T.INDIRECT_WITNESS}),
    frozenset({T.REVELATION, T.COURT_JUDGEMENT}),
)

# (stronger, weaker, mechanism that demands it)
_TIER_CONSTRAINTS = (
    (T.SCIENCE, T.REVELATION, "M1"),
    (T.CONFIRMED_INTERPRETATION, T.REVELATION, "M3"),
    (T.DIRECT_WITNESS, T.INDIRECT_WITNESS, "M4"),
)

TierEntry = Union[SourceTier, str, Iterable[Union[SourceTier, str]]]


def _tier_group(entry: TierEntry) -> frozenset[SourceTier]:
    if isinstance(entry, (SourceTier, str)):
        return frozenset({SourceTier(entry)})
    return frozenset(SourceTier(t) for t in entry)


@dataclass(frozen=True)
class PriorityPolicy:
    """Mechanism permutation plus a ranking of source tiers, strongest first.

    ``tier_order`` entries are single tiers or groups of equally ranked tiers.
    Construction does not validate; ``validate_policy`` and every comparison do.
    """

    mechanism_order: tuple[Mechanism, ...] = DEFAULT_MECHANISM_ORDER
    tier_order: tuple[frozenset[SourceTier], ...] = DEFAULT_TIER_ORDER

    @classmethod
    def from_lists(cls, mechanism_order: Sequence[str], tier_order: Sequence[TierEntry]) -> "PriorityPolicy":
        try:
            mechs = tuple(Mechanism(m) for m in mechanism_order)
            tiers = tuple(_tier_group(t) for t in tier_order)
        except ValueError as exc:
            raise InvalidPolicy(str(exc)) from None
        return cls(mechs, tiers)

    @classmethod
    def from_json(cls, data: dict[str, Any] | None) -> "PriorityPolicy":
        if not data:
            return cls()
        return cls.from_lists(
            data.get("mechanism_order", [m.value for m in DEFAULT_MECHANISM_ORDER]),
            data.get("tier_order", [sorted(t.value for t in g) for g in DEFAULT_TIER_ORDER]),
        )

    def to_json(self) -> dict[str, Any]:
        tiers: list[Any] = []
        for group in self.tier_order:
            names = sorted(t.value for t in group)
            tiers.append(names[0] if len(names) == 1 else names)
        return {"mechanism_order": [m.value for m in self.mechanism_order], "tier_order": tiers}

    @cached_property
    def errors(self) -> tuple[str, ...]:
        return tuple(validate_policy(self))

    @cached_property
    def tier_level(self) -> dict[SourceTier, int]:
        n = len(self.tier_order)
        return {t: n - i for i, group in enumerate(self.tier_order) for t in group}

    def check(self) -> None:
        if self.errors:
            raise InvalidPolicy("; ".join(self.errors))


def validate_policy(policy: PriorityPolicy) -> list[str]:
    """Return a list of violated constraints; empty means the policy is usable."""
    problems = []
    order = list(policy.mechanism_order)
    if len(order) != len(Mechanism) or set(order) != set(Mechanism):
        missing = sorted(m.value for m in set(Mechanism) - set(order))
        problems.append(
            f"mechanism_order is not a permutation of 8 mechanisms "
            f"(got {len(order)} entries, missing {missing})"
        )
    seen: list[SourceTier] = [t for group in policy.tier_order for t in group]
    if len(seen) != len(set(seen)) or set(seen) != set(SourceTier):
        missing = sorted(t.value for t in set(SourceTier) - set(seen))
        problems.append(f"tier_order must rank every SourceTier exactly once (missing {missing})")
    else:
        level = policy.tier_level
        for strong, weak, mech in _TIER_CONSTRAINTS:
            if level[strong] <= level[weak]:
                problems.append(
                    f"tier_order violates {mech}: {strong.value} must rank above {weak.value}"
                )
    return problems


@dataclass(frozen=True)
class QueryContext:
    asking_agent: str
    agent_community: str
    current_round: int
    graph: CommunityGraph

    def __post_init__(self):
        if self.agent_community not in self.graph.communities:
            raise ValueError(f"agent community {self.agent_community!r} not in graph")

    def court_distance(self, lp: LegalProposition) -> int:
        court = lp.evidence.issuing_court
        if court is None or court not in self.graph.court_placement:
            return self.graph.diameter + 1
        return community_distance(self.graph, self.agent_community, self.graph.court_placement[court])


def _mechanism_key(mech: Mechanism, lp: LegalProposition, qc: QueryContext, policy: PriorityPolicy):
    ev = lp.evidence
    if mech in (M.SCIENCE_OVER_REVELATION, M.INTERPRETATION_OVER_REVELATION, M.DIRECT_OVER_INDIRECT_WITNESS):
        return policy.tier_level[ev.tier]
    if mech is M.NEWER_SCIENCE:
        # science version only means something among Science LPs
        return (policy.tier_level[ev.tier], ev.science_version if ev.tier is T.SCIENCE else 0)
    if mech is M.SCHOLAR_RANK:
        return ev.scholar_rank
    if mech is M.SCHOLAR_INVOLVEMENT:
        return int(ev.scholar_involved)
    if mech is M.COURT_RECENCY:
        return ev.issue_time
    return -qc.court_distance(lp)


def priority_key(lp: LegalProposition, qc: QueryContext, policy: PriorityPolicy) -> tuple:
    """Key tuple in mechanism order; lexicographically larger is stronger."""
    policy.check()
    return tuple(_mechanism_key(m, lp, qc, policy) for m in policy.mechanism_order)


def deciding_mechanism(
    a: LegalProposition, b: LegalProposition, qc: QueryContext, policy: PriorityPolicy
) -> Mechanism | None:
    """The first mechanism that separates ``a`` from ``b``, if any."""
    policy.check()
    for m in policy.mechanism_order:
        if _mechanism_key(m, a, qc, policy) != _mechanism_key(m, b, qc, policy):
            return m
    return None


def compare(a: LegalProposition, b: LegalProposition, qc: QueryContext, policy: PriorityPolicy) -> Order:
    ka, kb = priority_key(a, qc, policy), priority_key(b, qc, policy)
    if ka > kb:
        return Order.A_PRECEDES
    if kb > ka:
        return Order.B_PRECEDES
    return Order.TIE


def maximal_set(
    lps: Iterable[LegalProposition], qc: QueryContext, policy: PriorityPolicy
) -> list[LegalProposition]:
    """Undominated LPs, ordered by id."""
    policy.check()
    keyed = [(priority_key(lp, qc, policy), lp) for lp in lps]
    if not keyed:
        return []
    best = max(k for k, _ in keyed)
    return sort_lps(lp for k, lp in keyed if k == best)
