import copy

import pytest

from rilsim.errors import ScenarioInvalid
from rilsim.scenario import canonical_json, digest, parse_scenario, validate_scenario


def diags_for(raw):
    return dict(validate_scenario(raw))


def test_reference_is_valid(reference_raw, reference):
    assert validate_scenario(reference_raw) == []
    assert len(reference.courts) == 20 and len(reference.graph.communities) == 5
    assert reference.params.rounds_total == 200 and reference.params.seed == 42
    assert len(reference.probes) == 20
    assert reference.digest == digest(reference_raw)


def test_digest_ignores_key_order(reference_raw):
    shuffled = dict(reversed(list(reference_raw.items())))
    assert digest(shuffled) == digest(reference_raw)
    assert canonical_json({"b": 1, "a": [1, 2]}) == '{"a":[1,2],"b":1}'


def test_disconnected_graph_points_at_the_community(reference_raw):
    raw = copy.deepcopy(reference_raw)
    raw["edges"] = [e for e in raw["edges"] if "cairo" not in e]
    diags = diags_for(raw)
    idx = [c["id"] for c in raw["communities"]].index("cairo")
    assert f"/communities/{idx}" in diags
    assert "disconnected" in diags[f"/communities/{idx}"]


def test_short_mechanism_order(reference_raw):
    raw = copy.deepcopy(reference_raw)
    raw["priority_policy"]["mechanism_order"] = raw["priority_policy"]["mechanism_order"][:7]
    diags = diags_for(raw)
    assert "not a permutation of 8" in diags["/priority_policy/mechanism_order"]


@pytest.mark.parametrize("mutate, pointer", [
    (lambda r: r["courts"][0].update(community="atlantis"), "/courts/0/community"),
    (lambda r: r["courts"][1].update(id=r["courts"][0]["id"]), "/courts/1/id"),
    (lambda r: r["edges"].append(["medina", "medina"]), None),
    (lambda r: r["params"].update(import_probability=1.5), "/params/import_probability"),
    (lambda r: r["params"].update(gossip_interval=0), "/params/gossip_interval"),
    (lambda r: r["seed_lps"][0].update(action="Not A Token"), "/seed_lps/0/action"),
    (lambda r: r["seed_lps"][0]["evidence"].update(tier="CourtJudgement", issuing_court="court-00"), None),
    (lambda r: r["probe_queries"][0].update(agent_id="ghost"), "/probe_queries/0/agent_id"),
    (lambda r: r["agents"][0].update(community="atlantis"), "/agents/0/community"),
    (lambda r: r["adherence"].update(x=["atlantis"]), "/adherence/x/0"),
    (lambda r: r["persons"][0].update(events=[{"kind": "VowV", "t": 5}, {"kind": "Revoke", "t": 1}]),
     "/persons/0/events"),
    (lambda r: r.pop("params"), ""),
])
def test_invalid_scenarios_are_located(reference_raw, mutate, pointer):
    raw = copy.deepcopy(reference_raw)
    mutate(raw)
    diags = validate_scenario(raw)
    assert diags
    if pointer is not None:
        assert pointer in dict(diags), diags
    with pytest.raises(ScenarioInvalid) as info:
        parse_scenario(raw)
    assert info.value.diagnostics == diags


def test_derive_merges_params(reference):
    quiet = reference.derive(params={"import_probability": 0.0})
    assert quiet.params.import_probability == 0.0
    assert quiet.params.rounds_total == reference.params.rounds_total
    assert quiet.digest != reference.digest
    assert reference.params.import_probability == 0.5
