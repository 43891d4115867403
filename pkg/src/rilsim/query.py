"""Permissibility queries over the distributed LP pool, with court referral."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any, Optional, Sequence

from .errors import EmptyPlan, NoCourts
from .graph import community_distance
from .lp import Condition, LegalProposition, Modality, applicable
from .priority import PriorityPolicy, QueryContext, maximal_set
from .scenario import Query
from .sim import NetworkView


class Outcome(str, Enum):
    OBLIGATORY = "Obligatory"
    PERMITTED = "Permitted"
    FORBIDDEN = "Forbidden"
    REFER_TO_COURT = "ReferToCourt"


class ReferReason(str, Enum):
    NO_APPLICABLE_LP = "NoApplicableLP"
    UNRESOLVED_CONFLICT = "UnresolvedConflict"


class Overall(str, Enum):
    PERMISSIBLE = "Permissible"
    IMPERMISSIBLE = "Impermissible"
    NEEDS_COURT = "NeedsCourt"


class Mode(str, Enum):
    PROSPECTIVE = "Prospective"
    HISTORICAL = "Historical"


@dataclass(frozen=True)
class Verdict:
    outcome: Outcome
    refer_reason: Optional[ReferReason] = None
    supporting_lps: tuple[str, ...] = ()
    suggested_court: Optional[str] = None

    def __post_init__(self):
        if (self.refer_reason is not None) != (self.outcome is Outcome.REFER_TO_COURT):
            raise ValueError("refer_reason is required exactly for ReferToCourt")
        if self.outcome is not Outcome.REFER_TO_COURT and not self.supporting_lps:
            raise ValueError("a decided verdict needs supporting LPs")

    @property
    def decided(self) -> bool:
        return self.outcome is not Outcome.REFER_TO_COURT

    def to_json(self) -> dict[str, Any]:
        return {
            "outcome": self.outcome.value,
            "refer_reason": self.refer_reason.value if self.refer_reason else None,
            "supporting_lps": list(self.supporting_lps),
            "suggested_court": self.suggested_court,
        }


def referral_needed(verdict: Verdict) -> bool:
    return verdict.outcome is Outcome.REFER_TO_COURT


def applicable_lps(view: NetworkView, action: str, context: Condition) -> list[LegalProposition]:
    return [
        lp for lp in view.by_action.get(action, ())
        if lp.withdrawn_at is None and applicable(lp, action, context)
    ]


def select_court(qc: QueryContext, view: NetworkView) -> str:
    """Nearest court; ties go to the more central community, then the lower id."""
    if not view.bases:
        raise NoCourts("no courts in the network")
    graph = view.graph

    def rank(cid: str):
        comm = graph.court_placement[cid]
        return (community_distance(graph, qc.agent_community, comm), -view.centrality[comm], cid)

    return min(view.bases, key=rank)


def resolve_modalities(modalities: set[Modality]) -> Optional[Outcome]:
    """Joint outcome of a maximal set, or None when it holds a real dilemma."""
    if modalities == {Modality.FORBIDDEN}:
        return Outcome.FORBIDDEN
    if Modality.FORBIDDEN in modalities:
        return None
    if Modality.OBLIGATORY in modalities:
        return Outcome.OBLIGATORY
    return Outcome.PERMITTED


def decide(
    action: str,
    context: Condition,
    qc: QueryContext,
    view: NetworkView,
    policy: PriorityPolicy,
) -> Verdict:
    policy.check()
    candidates = applicable_lps(view, action, context)
    if not candidates:
        return Verdict(Outcome.REFER_TO_COURT, ReferReason.NO_APPLICABLE_LP)
    top = maximal_set(candidates, qc, policy)
    outcome = resolve_modalities({lp.modality for lp in top})
    if outcome is None:
        court = select_court(qc, view) if view.bases else None
        return Verdict(Outcome.REFER_TO_COURT, ReferReason.UNRESOLVED_CONFLICT,
                       tuple(lp.id for lp in top), court)
    return Verdict(outcome, None, tuple(lp.id for lp in top))


def answer(query: Query, view: NetworkView, policy: PriorityPolicy) -> Verdict:
    """``decide`` for a serialized query, resolving the agent's community."""
    return decide(query.action, query.context, view.context_for(query.agent_id), view, policy)


@dataclass(frozen=True)
class PlanStep:
    action: str
    context: Condition = Condition()
    round: Optional[int] = None


@dataclass(frozen=True)
class Plan:
    steps: tuple[PlanStep, ...]


@dataclass(frozen=True)
class PlanEvaluation:
    verdicts: tuple[Verdict, ...]
    overall: Overall


def overall_of(verdicts: Sequence[Verdict]) -> Overall:
    if any(v.outcome is Outcome.FORBIDDEN for v in verdicts):
        return Overall.IMPERMISSIBLE
    if any(referral_needed(v) for v in verdicts):
        return Overall.NEEDS_COURT
    return Overall.PERMISSIBLE


def evaluate_plan(plan: Plan, qc: QueryContext, state, policy: PriorityPolicy,
                  mode: Mode = Mode.PROSPECTIVE) -> PlanEvaluation:
    """Check each step of a plan.

    ``state`` is a ``NetworkView`` or anything with ``view()``; historical
    mode needs ``view_at(round)`` and a recorded round on every step.
    """
    if not plan.steps:
        raise EmptyPlan("cannot evaluate an empty plan")
    mode = Mode(mode)
    verdicts = []
    current = state if isinstance(state, NetworkView) else None
    for step in plan.steps:
        if mode is Mode.HISTORICAL:
            if step.round is None:
                raise ValueError("historical evaluation needs a round on every plan step")
            view = state.view_at(step.round)
        else:
            if current is None:
                current = state.view()
            view = current
        verdicts.append(decide(step.action, step.context, qc, view, policy))
    return PlanEvaluation(tuple(verdicts), overall_of(verdicts))
