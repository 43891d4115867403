"""Seeded generator for large synthetic scenarios (scale and stress runs)."""

from __future__ import annotations

import random
from typing import Any

from .court import RevisionPolicy

ACTIONS = ("drink_alcohol", "charge_interest", "drive_car", "give_alms", "eat_pork",
           "gamble", "fast_ramadan", "trade_futures", "insure_cargo", "lend_money")
TAGS = ("travelling", "ill", "night")


def synthetic_scenario(
    n_courts: int,
    n_communities: int,
    *,
    seed: int = 0,
    activity_rate: float = 0.1,
    rounds: int = 200,
    extra_edges: int | None = None,
    gossip_interval: int = 5,
    import_probability: float = 0.2,
    n_probes: int = 20,
) -> dict[str, Any]:
    """Raw scenario dict: a random spanning tree plus extra edges, courts spread round-robin."""
    rng = random.Random(f"synthetic/{seed}")
    comms = [f"k{i:03d}" for i in range(n_communities)]
    edges = set()
    for i in range(1, n_communities):
        edges.add((comms[rng.randrange(i)], comms[i]))
    for _ in range(n_communities // 2 if extra_edges is None else extra_edges):
        a, b = rng.sample(comms, 2) if n_communities > 1 else (comms[0], comms[0])
        if a != b and (b, a) not in edges:
            edges.add((a, b))
    policies = list(RevisionPolicy)
    courts = [
        {
            "id": f"court-{i:04d}",
            "community": comms[i % n_communities],
            "revision_policy": policies[i % len(policies)].value,
            "activity_rate": activity_rate,
        }
        for i in range(n_courts)
    ]
    agents = [{"id": f"agent-{c}", "community": c} for c in comms]
    seeds = [
        {"modality": "Forbidden", "action": "drink_alcohol",
         "evidence": {"tier": "Revelation", "scholar_rank": 6}},
        {"modality": "Obligatory", "action": "give_alms", "evidence": {"tier": "Revelation"}},
        {"modality": "Forbidden", "action": "charge_interest",
         "evidence": {"tier": "ConfirmedInterpretation", "scholar_rank": 4}},
        {"modality": "Permitted", "action": "drink_alcohol",
         "condition": [{"tag": "ill", "polarity": "positive"}],
         "evidence": {"tier": "Science", "science_version": 1}},
    ]
    probes = []
    for _ in range(n_probes):
        ctx = [{"tag": t, "polarity": rng.choice(["positive", "negative"])}
               for t in TAGS if rng.random() < 0.5]
        probes.append({"action": rng.choice(ACTIONS), "context": ctx,
                       "agent_id": rng.choice(agents)["id"]})
    return {
        "name": f"synthetic-{n_courts}x{n_communities}-{seed}",
        "communities": [{"id": c, "viewpoint_package": ["v"], "has_lineage": True,
                         "lineage_explanatory": True} for c in comms],
        "edges": [list(e) for e in sorted(edges)],
        "courts": courts,
        "vocabulary": {"actions": list(ACTIONS), "tags": list(TAGS)},
        "seed_lps": seeds,
        "agents": agents,
        "params": {"gossip_interval": gossip_interval, "import_probability": import_probability,
                   "mainstream_threshold": 0.5, "rounds_total": rounds, "seed": seed},
        "probe_queries": probes,
    }
