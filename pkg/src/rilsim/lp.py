"""Legal propositions: deontic rulings over atomic actions, with guards and evidence."""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Iterable, Optional

from .errors import InvalidLP

TOKEN_RE = re.compile(r"^[a-z][a-z0-9_]*$")
ID_RE = re.compile(r"^[A-Za-z0-9_.\-]+$")


class Modality(str, Enum):
    OBLIGATORY = "Obligatory"
    PERMITTED = "Permitted"
    FORBIDDEN = "Forbidden"


class SourceTier(str, Enum):
    SCIENCE = "Science"
    CONFIRMED_INTERPRETATION = "ConfirmedInterpretation"
    DIRECT_WITNESS = "DirectWitness"
    INDIRECT_WITNESS = "IndirectWitness"
    REVELATION = "Revelation"
    COURT_JUDGEMENT = "CourtJudgement"


def check_token(name: str, what: str = "action") -> str:
    if not isinstance(name, str) or not TOKEN_RE.match(name):
        raise InvalidLP(f"{what} must be a lowercase token, got {name!r}")
    return name


def modalities_compatible(m1: Modality, m2: Modality) -> bool:
    # Only Forbidden clashes; Obligatory entails Permitted.
    return (m1 is Modality.FORBIDDEN) == (m2 is Modality.FORBIDDEN)


@dataclass(frozen=True)
class Condition:
    """Conjunction of tag literals; ``(tag, True)`` is ``tag+``."""

    literals: frozenset[tuple[str, bool]] = frozenset()

    def __post_init__(self):
        lits = frozenset(self.literals)
        object.__setattr__(self, "literals", lits)
        positive = {t for t, p in lits if p}
        for tag, _ in lits:
            check_token(tag, "tag")
        clash = positive & {t for t, p in lits if not p}
        if clash:
            raise InvalidLP(f"unsatisfiable condition, tag(s) with both polarities: {sorted(clash)}")

    @classmethod
    def of(cls, *literals: str) -> "Condition":
        """``Condition.of("night+", "travel-")``."""
        out = []
        for lit in literals:
            lit = lit.strip()
            if len(lit) < 2 or lit[-1] not in "+-":
                raise InvalidLP(f"literal must end in + or -, got {lit!r}")
            out.append((lit[:-1], lit[-1] == "+"))
        return cls(frozenset(out))

    @classmethod
    def parse(cls, text: str) -> "Condition":
        text = text.strip()
        if not text:
            return cls()
        return cls.of(*text.split(","))

    @property
    def tags(self) -> frozenset[str]:
        return frozenset(t for t, _ in self.literals)

    def sorted_literals(self) -> list[tuple[str, bool]]:
        return sorted(self.literals, key=lambda lit: (lit[0], not lit[1]))

    def __str__(self) -> str:
        return ",".join(f"{t}{'+' if p else '-'}" for t, p in self.sorted_literals())

    def to_json(self) -> list[dict[str, str]]:
        return [
            {"tag": t, "polarity": "positive" if p else "negative"}
            for t, p in self.sorted_literals()
        ]

    @classmethod
    def from_json(cls, data: Iterable[dict[str, str]]) -> "Condition":
        lits = []
        for item in data:
            pol = item["polarity"]
            if pol not in ("positive", "negative"):
                raise InvalidLP(f"polarity must be positive or negative, got {pol!r}")
            lits.append((item["tag"], pol == "positive"))
        return cls(frozenset(lits))


ALWAYS = Condition()


@dataclass(frozen=True)
class EvidenceProfile:
    tier: SourceTier
    science_version: int = 0
    witness_chain_length: int = 0
    scholar_rank: int = 0
    scholar_involved: bool = False
    issuing_court: Optional[str] = None
    issue_time: int = 0

    def __post_init__(self):
        object.__setattr__(self, "tier", SourceTier(self.tier))
        for name in ("science_version", "witness_chain_length", "issue_time"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise InvalidLP(f"{name} must be a nonnegative integer, got {value!r}")
        if not isinstance(self.scholar_rank, int) or not 0 <= self.scholar_rank <= 10:
            raise InvalidLP(f"scholar_rank must be an integer in 0..10, got {self.scholar_rank!r}")
        if self.tier is SourceTier.DIRECT_WITNESS and self.witness_chain_length != 0:
            raise InvalidLP("DirectWitness evidence must have witness_chain_length 0")
        if self.tier is SourceTier.INDIRECT_WITNESS and self.witness_chain_length < 1:
            raise InvalidLP("IndirectWitness evidence needs witness_chain_length >= 1")
        if (self.tier is SourceTier.COURT_JUDGEMENT) != (self.issuing_court is not None):
            raise InvalidLP("tier CourtJudgement iff issuing_court is present")

    def to_json(self) -> dict[str, Any]:
        return {
            "tier": self.tier.value,
            "science_version": self.science_version,
            "witness_chain_length": self.witness_chain_length,
            "scholar_rank": self.scholar_rank,
            "scholar_involved": self.scholar_involved,
            "issuing_court": self.issuing_court,
            "issue_time": self.issue_time,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "EvidenceProfile":
        return cls(**data)


def court_evidence(court_id: str, round_: int) -> EvidenceProfile:
    return EvidenceProfile(SourceTier.COURT_JUDGEMENT, issuing_court=court_id, issue_time=round_)


@dataclass(frozen=True)
class LegalProposition:
    id: str
    modality: Modality
    action: str
    condition: Condition = ALWAYS
    evidence: EvidenceProfile = field(
        default_factory=lambda: EvidenceProfile(SourceTier.REVELATION)
    )
    withdrawn_at: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "modality", Modality(self.modality))
        check_token(self.action)
        if not isinstance(self.id, str) or not self.id:
            raise InvalidLP(f"LP id must be a nonempty string, got {self.id!r}")
        if self.withdrawn_at is not None and self.withdrawn_at < 0:
            raise InvalidLP("withdrawn_at must be nonnegative")

    @property
    def content(self) -> tuple[Modality, str, Condition]:
        """The (modality, action, condition) triple, ignoring provenance."""
        return (self.modality, self.action, self.condition)

    def withdrawn(self, round_: int) -> "LegalProposition":
        if self.withdrawn_at is not None:
            raise InvalidLP(f"{self.id} already withdrawn at round {self.withdrawn_at}")
        return replace(self, withdrawn_at=round_)

    def __str__(self) -> str:
        guard = f" when {{{self.condition}}}" if self.condition.literals else ""
        return f"{self.id}: {self.modality.value}({self.action}){guard}"

    def to_json(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "modality": self.modality.value,
            "action": self.action,
            "condition": self.condition.to_json(),
            "evidence": self.evidence.to_json(),
            "withdrawn_at": self.withdrawn_at,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "LegalProposition":
        return cls(
            id=data["id"],
            modality=Modality(data["modality"]),
            action=data["action"],
            condition=Condition.from_json(data.get("condition", [])),
            evidence=EvidenceProfile.from_json(data["evidence"]),
            withdrawn_at=data.get("withdrawn_at"),
        )


def lp_id_key(lp_id: str) -> tuple[str, int, str]:
    """Sort key putting ``c:2`` before ``c:10``."""
    prefix, _, suffix = lp_id.rpartition(":")
    if prefix and suffix.isdigit():
        return (prefix, int(suffix), "")
    return (lp_id, -1, "")


def sort_lps(lps: Iterable[LegalProposition]) -> list[LegalProposition]:
    return sorted(lps, key=lambda lp: lp_id_key(lp.id))


def conditions_overlap(c1: Condition, c2: Condition) -> bool:
    """True iff the conjunction of both guards is satisfiable."""
    return not any((tag, not pol) in c2.literals for tag, pol in c1.literals)


def conflicts(a: LegalProposition, b: LegalProposition) -> bool:
    return (
        a.action == b.action
        and not modalities_compatible(a.modality, b.modality)
        and conditions_overlap(a.condition, b.condition)
    )


def applicable(lp: LegalProposition, action: str, context: Condition) -> bool:
    # A guard literal absent from the context does not match.
    return lp.action == action and lp.condition.literals <= context.literals
