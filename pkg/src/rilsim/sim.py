"""Round-based simulation of a court network with centrality-weighted gossip.

Every court owns two random streams (issuance and gossip) seeded from the run
seed and the court id, so a court's own issuance never depends on what
other courts do, and turning gossip off leaves issuance untouched.
"""

from __future__ import annotations

import json
import logging
import random
from bisect import bisect_right
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional

from .court import Court, CourtEvent, EventKind, Reason
from .graph import CommunityGraph, centrality, mainstream
from .lp import Condition, LegalProposition, Modality, sort_lps
from .priority import QueryContext
from .scenario import Scenario, SimulationParams, canonical_json, parse_scenario
from .strata import StrataState

log = logging.getLogger(__name__)

MODALITIES = (Modality.OBLIGATORY, Modality.PERMITTED, Modality.FORBIDDEN)
STATE_FORMAT = "rilsim-state/1"


@dataclass(frozen=True)
class NetworkView:
    """Read-only snapshot of everything a query can see."""

    graph: CommunityGraph
    centrality: Mapping[str, float]
    bases: Mapping[str, tuple[LegalProposition, ...]]
    seeds: tuple[LegalProposition, ...] = ()
    round: int = 0
    agents: Mapping[str, str] = field(default_factory=dict)

    @cached_property
    def pool(self) -> tuple[LegalProposition, ...]:
        """Seed LPs plus every court's base, deduplicated by id."""
        seen: dict[str, LegalProposition] = {lp.id: lp for lp in self.seeds}
        for cid in sorted(self.bases):
            for lp in self.bases[cid]:
                seen.setdefault(lp.id, lp)
        return tuple(sort_lps(seen.values()))

    @cached_property
    def by_action(self) -> dict[str, tuple[LegalProposition, ...]]:
        out: dict[str, list[LegalProposition]] = {}
        for lp in self.pool:
            out.setdefault(lp.action, []).append(lp)
        return {a: tuple(lps) for a, lps in out.items()}

    @property
    def court_ids(self) -> list[str]:
        return sorted(self.bases)

    def context_for(self, agent_id: str) -> QueryContext:
        try:
            community = self.agents[agent_id]
        except KeyError:
            raise KeyError(f"unknown agent {agent_id!r}") from None
        return QueryContext(agent_id, community, self.round, self.graph)

    def restricted(self, court_ids: Iterable[str], seeds: bool = False) -> "NetworkView":
        keep = set(court_ids)
        return NetworkView(
            self.graph, self.centrality,
            {c: b for c, b in self.bases.items() if c in keep},
            self.seeds if seeds else (), self.round, self.agents,
        )


class SimulationState:
    def __init__(self, scenario: Scenario, seed: Optional[int] = None, rounds: Optional[int] = None):
        self.scenario = scenario
        p = scenario.params
        self.params = SimulationParams(
            rounds_total=p.rounds_total if rounds is None else rounds,
            seed=p.seed if seed is None else seed,
            gossip_interval=p.gossip_interval,
            import_probability=p.import_probability,
            mainstream_threshold=p.mainstream_threshold,
        )
        self.graph = scenario.graph
        self.centrality = centrality(self.graph)
        self.round = 0
        self.courts: dict[str, Court] = {}
        for spec in sorted(scenario.courts, key=lambda c: c.id):
            self.courts[spec.id] = Court(
                spec.id, spec.community, spec.revision_policy, spec.activity_rate,
                graph=self.graph, priority=scenario.policy,
            )
        self.seeds = tuple(sort_lps(scenario.seed_lps))
        self.seed_events = [
            CourtEvent(EventKind.ISSUE, lp.id, 0, Reason.NEW_JUDGEMENT, lp, None, i)
            for i, lp in enumerate(self.seeds)
        ]
        s = self.params.seed
        self._issue_rng = {cid: random.Random(f"{s}/issue/{cid}") for cid in self.courts}
        self._gossip_rng = {cid: random.Random(f"{s}/gossip/{cid}") for cid in self.courts}
        self._order = list(self.courts)
        weights = [self.centrality[self.courts[c].community] for c in self._order]
        self._weights = weights
        self._cum = []
        total = 0.0
        for w in weights:
            total += w
            self._cum.append(total)

    # -- schedule -------------------------------------------------------

    def choose_donor(self, importer_index: int, u: float) -> int:
        """Index of a donor court != importer, sampled proportionally to centrality."""
        w_self = self._weights[importer_index]
        before = self._cum[importer_index] - w_self
        x = u * (self._cum[-1] - w_self)
        if x >= before:
            x += w_self
        idx = min(bisect_right(self._cum, x), len(self._order) - 1)
        if idx == importer_index:  # float edge at a segment boundary
            idx = idx + 1 if idx + 1 < len(self._order) else idx - 1
        return idx

    def _generate(self, court: Court, rng: random.Random, round_: int) -> list[CourtEvent]:
        modality = MODALITIES[rng.randrange(3)]
        action = self.scenario.actions[rng.randrange(len(self.scenario.actions))]
        literals = []
        for tag in self.scenario.tags:
            pick = rng.randrange(3)
            if pick:
                literals.append((tag, pick == 1))
        return court.issue(modality, action, Condition(frozenset(literals)), round_)

    def step(self) -> list[CourtEvent]:
        if self.round >= self.params.rounds_total:
            raise RuntimeError(f"simulation already ran its {self.params.rounds_total} rounds")
        r = self.round + 1
        events: list[CourtEvent] = []
        for cid in self._order:
            court = self.courts[cid]
            rng = self._issue_rng[cid]
            if rng.random() < court.activity_rate:
                events.extend(self._generate(court, rng, r))
        if r % self.params.gossip_interval == 0 and len(self._order) > 1:
            for i, cid in enumerate(self._order):
                rng = self._gossip_rng[cid]
                if rng.random() < self.params.import_probability:
                    donor = self.courts[self._order[self.choose_donor(i, rng.random())]]
                    base = donor.current_base()
                    if base:
                        events.extend(self.courts[cid].import_lp(base[rng.randrange(len(base))], r))
        self.round = r
        events.sort(key=CourtEvent.sort_key)
        log.debug("round %d: %d events", r, len(events))
        return events

    def run(self) -> list[CourtEvent]:
        while self.round < self.params.rounds_total:
            self.step()
        return self.global_log()

    # -- reading --------------------------------------------------------

    def global_log(self) -> list[CourtEvent]:
        events = list(self.seed_events)
        for court in self.courts.values():
            events.extend(court.log)
        events.sort(key=CourtEvent.sort_key)
        return events

    def view(self) -> NetworkView:
        return NetworkView(
            self.graph, self.centrality,
            {cid: tuple(c.current_base()) for cid, c in self.courts.items()},
            self.seeds, self.round, self.scenario.agents,
        )

    def view_at(self, round_: int) -> NetworkView:
        return NetworkView(
            self.graph, self.centrality,
            {cid: tuple(c.base_at(round_)) for cid, c in self.courts.items()},
            self.seeds, min(round_, self.round), self.scenario.agents,
        )

    def mainstream_communities(self) -> frozenset[str]:
        return mainstream(self.centrality, self.params.mainstream_threshold)

    def strata_state(self) -> StrataState:
        return strata_state(self.scenario)

    def snapshot(self) -> dict[str, Any]:
        return {
            "format": STATE_FORMAT,
            "digest": self.scenario.digest,
            "seed": self.params.seed,
            "round": self.round,
            "scenario": self.scenario.raw,
            "courts": [
                {"id": cid, "seq": c.seq, "base": [lp.to_json() for lp in c.current_base()]}
                for cid, c in self.courts.items()
            ],
        }

    def load_events(self, events: Iterable[CourtEvent]) -> None:
        """Rebuild court state from a global log (seed issues are skipped)."""
        per_court: dict[str, list[CourtEvent]] = {cid: [] for cid in self.courts}
        last = 0
        for ev in events:
            last = max(last, ev.round)
            if ev.court_id is None:
                continue
            per_court[ev.court_id].append(ev)
        for cid, evs in per_court.items():
            self.courts[cid].load_log(sorted(evs, key=lambda e: e.seq))
        self.round = last


def strata_state(scenario: Scenario) -> StrataState:
    return StrataState(
        persons=scenario.persons,
        profiles=scenario.profiles,
        mainstream=mainstream(centrality(scenario.graph), scenario.params.mainstream_threshold),
        adherence=scenario.adherence,
        endorsement=scenario.endorsement,
    )


def event_line(ev: CourtEvent) -> str:
    return canonical_json(ev.to_json()) + "\n"


def write_event_log(events: Iterable[CourtEvent], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for ev in events:
            fh.write(event_line(ev))


def read_event_log(path: str | Path) -> list[CourtEvent]:
    with open(path, encoding="utf-8") as fh:
        return [CourtEvent.from_json(json.loads(line)) for line in fh if line.strip()]


def run(
    scenario: Scenario,
    seed: Optional[int] = None,
    rounds: Optional[int] = None,
    log_path: str | Path | None = None,
) -> tuple[SimulationState, list[CourtEvent]]:
    state = SimulationState(scenario, seed, rounds)
    events = state.run()
    if log_path is not None:
        write_event_log(events, log_path)
    return state, events


def replay_state(scenario: Scenario, events: Iterable[CourtEvent], seed: Optional[int] = None) -> SimulationState:
    state = SimulationState(scenario, seed)
    state.load_events(events)
    return state


def load_snapshot(data: Mapping[str, Any]) -> tuple[Scenario, NetworkView]:
    if data.get("format") != STATE_FORMAT:
        raise ValueError(f"not a {STATE_FORMAT} snapshot")
    scenario = parse_scenario(data["scenario"])
    view = NetworkView(
        scenario.graph,
        centrality(scenario.graph),
        {c["id"]: tuple(LegalProposition.from_json(lp) for lp in c["base"]) for c in data["courts"]},
        tuple(sort_lps(scenario.seed_lps)),
        data["round"],
        scenario.agents,
    )
    return scenario, view
