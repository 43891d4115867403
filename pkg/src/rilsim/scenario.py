"""Scenario files: JSON schema, semantic validation, parsing, and digests."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional

from jsonschema import Draft202012Validator

from .court import RevisionPolicy
from .errors import InvalidLP, InvalidPolicy, ScenarioInvalid
from .graph import CommunityGraph
from .lp import ID_RE, TOKEN_RE, Condition, EvidenceProfile, LegalProposition, Modality
from .priority import PriorityPolicy, validate_policy
from .strata import CommunityProfile, InvalidPerson, PersonRecord

_ident = {"type": "string", "pattern": ID_RE.pattern}
_token = {"type": "string", "pattern": TOKEN_RE.pattern}
_prob = {"type": "number", "minimum": 0, "maximum": 1}
_literal = {
    "type": "object",
    "required": ["tag", "polarity"],
    "additionalProperties": False,
    "properties": {"tag": _token, "polarity": {"enum": ["positive", "negative"]}},
}
_condition = {"type": "array", "items": _literal}
_evidence = {
    "type": "object",
    "required": ["tier"],
    "additionalProperties": False,
    "properties": {
        "tier": {"enum": ["Science", "ConfirmedInterpretation", "DirectWitness",
                          "IndirectWitness", "Revelation", "CourtJudgement"]},
        "science_version": {"type": "integer", "minimum": 0},
        "witness_chain_length": {"type": "integer", "minimum": 0},
        "scholar_rank": {"type": "integer", "minimum": 0, "maximum": 10},
        "scholar_involved": {"type": "boolean"},
        "issuing_court": {"type": ["string", "null"]},
        "issue_time": {"type": "integer", "minimum": 0},
    },
}
_query = {
    "type": "object",
    "required": ["action", "agent_id"],
    "additionalProperties": False,
    "properties": {
        "action": _token,
        "context": _condition,
        "agent_id": _ident,
        "round": {"type": "integer", "minimum": 0},
    },
}

SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["communities", "courts", "params"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "communities": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["id"],
                "additionalProperties": False,
                "properties": {
                    "id": _ident,
                    "viewpoint_package": {"type": "array", "items": {"type": "string"}},
                    "has_lineage": {"type": "boolean"},
                    "lineage_explanatory": {"type": "boolean"},
                },
            },
        },
        "edges": {"type": "array", "items": {"type": "array", "items": _ident,
                                             "minItems": 2, "maxItems": 2}},
        "courts": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "community"],
                "additionalProperties": False,
                "properties": {
                    "id": _ident,
                    "community": _ident,
                    "revision_policy": {"enum": [p.value for p in RevisionPolicy]},
                    "activity_rate": _prob,
                },
            },
        },
        "vocabulary": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "actions": {"type": "array", "items": _token},
                "tags": {"type": "array", "items": _token},
            },
        },
        "seed_lps": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["modality", "action", "evidence"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "string"},
                    "modality": {"enum": [m.value for m in Modality]},
                    "action": _token,
                    "condition": _condition,
                    "evidence": _evidence,
                    "withdrawn_at": {"type": "null"},
                },
            },
        },
        "agents": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "community"],
                "additionalProperties": False,
                "properties": {"id": _ident, "community": _ident},
            },
        },
        "persons": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id"],
                "additionalProperties": False,
                "properties": {
                    "id": _ident,
                    "events": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["kind", "t"],
                            "additionalProperties": False,
                            "properties": {
                                "kind": {"enum": ["VowV", "Revoke", "Death"]},
                                "t": {"type": "integer", "minimum": 0},
                            },
                        },
                    },
                    "willing_to_renew": {"type": "boolean"},
                    "performs_tasks": {"type": "boolean"},
                    "community": {"type": ["string", "null"]},
                    "performs_jihad_activity": {"type": "boolean"},
                },
            },
        },
        "adherence": {"type": "object", "additionalProperties": {"type": "array", "items": _ident}},
        "endorsement": {"type": "object", "additionalProperties": {"type": "array", "items": _ident}},
        "priority_policy": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "mechanism_order": {"type": "array", "items": {"type": "string"}},
                "tier_order": {
                    "type": "array",
                    "items": {"anyOf": [{"type": "string"},
                                        {"type": "array", "items": {"type": "string"}}]},
                },
            },
        },
        "params": {
            "type": "object",
            "required": ["rounds_total", "seed"],
            "additionalProperties": False,
            "properties": {
                "gossip_interval": {"type": "integer", "minimum": 1},
                "import_probability": _prob,
                "mainstream_threshold": _prob,
                "rounds_total": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": -(2**63), "maximum": 2**64 - 1},
            },
        },
        "probe_queries": {"type": "array", "items": _query},
    },
}

_VALIDATOR = Draft202012Validator(SCHEMA)


@dataclass(frozen=True)
class SimulationParams:
    rounds_total: int
    seed: int
    gossip_interval: int = 1
    import_probability: float = 0.0
    mainstream_threshold: float = 0.5

    def __post_init__(self):
        if self.rounds_total < 0:
            raise ValueError("rounds_total must be nonnegative")
        if self.gossip_interval < 1:
            raise ValueError("gossip_interval must be a positive integer")
        for name in ("import_probability", "mainstream_threshold"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0,1]")


@dataclass(frozen=True)
class CourtSpec:
    id: str
    community: str
    revision_policy: RevisionPolicy = RevisionPolicy.KEEP_BOTH
    activity_rate: float = 0.0


@dataclass(frozen=True)
class Query:
    action: str
    context: Condition
    agent_id: str
    round: Optional[int] = None

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "Query":
        return cls(data["action"], Condition.from_json(data.get("context", [])),
                   data["agent_id"], data.get("round"))

    def to_json(self) -> dict[str, Any]:
        out = {"action": self.action, "context": self.context.to_json(), "agent_id": self.agent_id}
        if self.round is not None:
            out["round"] = self.round
        return out


@dataclass
class Scenario:
    raw: dict[str, Any]
    graph: CommunityGraph
    profiles: dict[str, CommunityProfile]
    courts: list[CourtSpec]
    actions: tuple[str, ...]
    tags: tuple[str, ...]
    seed_lps: list[LegalProposition]
    agents: dict[str, str]
    persons: dict[str, PersonRecord]
    adherence: dict[str, frozenset[str]]
    endorsement: dict[str, frozenset[str]]
    policy: PriorityPolicy
    params: SimulationParams
    probes: list[Query] = field(default_factory=list)

    @property
    def digest(self) -> str:
        return digest(self.raw)

    def derive(self, **changes: Any) -> "Scenario":
        """New scenario from a modified copy of the raw document."""
        raw = copy.deepcopy(self.raw)
        for key, value in changes.items():
            if key == "params":
                raw["params"] = {**raw["params"], **value}
            else:
                raw[key] = value
        return parse_scenario(raw)


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def digest(raw: Mapping[str, Any]) -> str:
    return hashlib.sha256(canonical_json(raw).encode("utf-8")).hexdigest()


def _seed_lp(i: int, data: Mapping[str, Any]) -> LegalProposition:
    return LegalProposition(
        id=data.get("id", f"seed:{i}"),
        modality=Modality(data["modality"]),
        action=data["action"],
        condition=Condition.from_json(data.get("condition", [])),
        evidence=EvidenceProfile.from_json(data["evidence"]),
    )


def validate_scenario(raw: Any) -> list[tuple[str, str]]:
    """All structural and semantic problems, as (JSON pointer, message) pairs."""
    diags = []
    for err in sorted(_VALIDATOR.iter_errors(raw), key=lambda e: list(map(str, e.absolute_path))):
        pointer = "".join(f"/{p}" for p in err.absolute_path)
        diags.append((pointer, err.message))
    if diags:
        return diags

    comm_ids = [c["id"] for c in raw["communities"]]
    communities = set(comm_ids)
    for i, cid in enumerate(comm_ids):
        if comm_ids.index(cid) != i:
            diags.append((f"/communities/{i}/id", f"duplicate community id {cid!r}"))

    edges = raw.get("edges", [])
    for i, (a, b) in enumerate(edges):
        for j, end in enumerate((a, b)):
            if end not in communities:
                diags.append((f"/edges/{i}/{j}", f"unknown community {end!r}"))
        if a == b:
            diags.append((f"/edges/{i}", "self-loop"))
    if not diags:
        adj: dict[str, set[str]] = {c: set() for c in communities}
        for a, b in edges:
            adj[a].add(b)
            adj[b].add(a)
        start = comm_ids[0]
        seen, todo = {start}, [start]
        while todo:
            for nxt in adj[todo.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
        for i, cid in enumerate(comm_ids):
            if cid not in seen:
                diags.append((f"/communities/{i}",
                              f"graph is disconnected: community {cid!r} is unreachable from {start!r}"))

    court_ids = []
    for i, court in enumerate(raw["courts"]):
        if court["id"] in court_ids:
            diags.append((f"/courts/{i}/id", f"duplicate court id {court['id']!r}"))
        court_ids.append(court["id"])
        if court["community"] not in communities:
            diags.append((f"/courts/{i}/community", f"unknown community {court['community']!r}"))

    vocab = raw.get("vocabulary", {})
    if any(c.get("activity_rate", 0) > 0 for c in raw["courts"]) and not vocab.get("actions"):
        diags.append(("/vocabulary/actions", "courts with activity_rate > 0 need a nonempty action vocabulary"))
    for key in ("actions", "tags"):
        items = vocab.get(key, [])
        if len(set(items)) != len(items):
            diags.append((f"/vocabulary/{key}", "duplicate entries"))

    seed_ids = set()
    for i, data in enumerate(raw.get("seed_lps", [])):
        try:
            lp = _seed_lp(i, data)
        except (InvalidLP, ValueError, TypeError) as exc:
            diags.append((f"/seed_lps/{i}", str(exc)))
            continue
        if lp.evidence.issuing_court is not None:
            diags.append((f"/seed_lps/{i}/evidence/issuing_court", "seed LPs have no issuing court"))
        if lp.id in seed_ids:
            diags.append((f"/seed_lps/{i}/id", f"duplicate LP id {lp.id!r}"))
        if lp.id.rpartition(":")[0] in court_ids:
            diags.append((f"/seed_lps/{i}/id", f"LP id {lp.id!r} collides with a court id namespace"))
        seed_ids.add(lp.id)

    agent_ids = set()
    for i, agent in enumerate(raw.get("agents", [])):
        if agent["id"] in agent_ids:
            diags.append((f"/agents/{i}/id", f"duplicate agent id {agent['id']!r}"))
        agent_ids.add(agent["id"])
        if agent["community"] not in communities:
            diags.append((f"/agents/{i}/community", f"unknown community {agent['community']!r}"))

    person_ids = set()
    for i, pdata in enumerate(raw.get("persons", [])):
        if pdata["id"] in person_ids:
            diags.append((f"/persons/{i}/id", f"duplicate person id {pdata['id']!r}"))
        person_ids.add(pdata["id"])
        if pdata.get("community") is not None and pdata["community"] not in communities:
            diags.append((f"/persons/{i}/community", f"unknown community {pdata['community']!r}"))
        try:
            PersonRecord.from_json(pdata)
        except InvalidPerson as exc:
            diags.append((f"/persons/{i}/events", str(exc)))

    for section in ("adherence", "endorsement"):
        for key, comms in raw.get(section, {}).items():
            for j, cid in enumerate(comms):
                if cid not in communities:
                    diags.append((f"/{section}/{key}/{j}", f"unknown community {cid!r}"))

    try:
        policy = PriorityPolicy.from_json(raw.get("priority_policy"))
    except InvalidPolicy as exc:
        diags.append(("/priority_policy", str(exc)))
    else:
        for problem in validate_policy(policy):
            field_name = "mechanism_order" if "mechanism_order" in problem else "tier_order"
            diags.append((f"/priority_policy/{field_name}", problem))

    for i, q in enumerate(raw.get("probe_queries", [])):
        if q["agent_id"] not in agent_ids:
            diags.append((f"/probe_queries/{i}/agent_id", f"unknown agent {q['agent_id']!r}"))
        try:
            Condition.from_json(q.get("context", []))
        except InvalidLP as exc:
            diags.append((f"/probe_queries/{i}/context", str(exc)))
    return diags


def parse_scenario(raw: Mapping[str, Any]) -> Scenario:
    raw = copy.deepcopy(dict(raw))
    diags = validate_scenario(raw)
    if diags:
        raise ScenarioInvalid(diags)
    courts = [
        CourtSpec(c["id"], c["community"], RevisionPolicy(c.get("revision_policy", "KeepBoth")),
                  float(c.get("activity_rate", 0.0)))
        for c in raw["courts"]
    ]
    graph = CommunityGraph.build(
        [c["id"] for c in raw["communities"]],
        [tuple(e) for e in raw.get("edges", [])],
        {c.id: c.community for c in courts},
    )
    profiles = {
        c["id"]: CommunityProfile(
            c["id"], frozenset(c.get("viewpoint_package", [])),
            c.get("has_lineage", False), c.get("lineage_explanatory", False),
        )
        for c in raw["communities"]
    }
    vocab = raw.get("vocabulary", {})
    params = raw["params"]
    return Scenario(
        raw=raw,
        graph=graph,
        profiles=profiles,
        courts=courts,
        actions=tuple(vocab.get("actions", [])),
        tags=tuple(vocab.get("tags", [])),
        seed_lps=[_seed_lp(i, d) for i, d in enumerate(raw.get("seed_lps", []))],
        agents={a["id"]: a["community"] for a in raw.get("agents", [])},
        persons={p["id"]: PersonRecord.from_json(p) for p in raw.get("persons", [])},
        adherence={k: frozenset(v) for k, v in raw.get("adherence", {}).items()},
        endorsement={k: frozenset(v) for k, v in raw.get("endorsement", {}).items()},
        policy=PriorityPolicy.from_json(raw.get("priority_policy")),
        params=SimulationParams(
            rounds_total=params["rounds_total"],
            seed=params["seed"],
            gossip_interval=params.get("gossip_interval", 1),
            import_probability=float(params.get("import_probability", 0.0)),
            mainstream_threshold=float(params.get("mainstream_threshold", 0.5)),
        ),
        probes=[Query.from_json(q) for q in raw.get("probe_queries", [])],
    )


def load_scenario(path: str | Path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioInvalid([("", f"not valid JSON: {exc}")]) from None
    return parse_scenario(raw)


def reference_scenario_path() -> Path:
    return Path(__file__).parent / "scenarios" / "reference.json"


def load_reference() -> Scenario:
    return load_scenario(reference_scenario_path())
