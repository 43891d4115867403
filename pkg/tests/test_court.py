import json
import random

import pytest
from gen import random_condition
from hypothesis import given, settings
from hypothesis import strategies as st

from rilsim.court import Court, CourtEvent, EventKind, Reason, RevisionPolicy, replay
from rilsim.errors import InvalidLP, NotInBase
from rilsim.graph import CommunityGraph
from rilsim.lp import Condition, EvidenceProfile, LegalProposition, Modality, SourceTier, conflicts

O, P, F = Modality.OBLIGATORY, Modality.PERMITTED, Modality.FORBIDDEN
GRAPH = CommunityGraph.build(["c0", "c1"], [("c0", "c1")], {"k": "c0", "j": "c1"})


def court(policy=RevisionPolicy.KEEP_BOTH, cid="k"):
    return Court(cid, GRAPH.court_placement[cid], policy, 0.5, graph=GRAPH)


def foreign(i, mod, action="eat", cond=Condition(), tier=SourceTier.REVELATION, **kw):
    return LegalProposition(f"seed:{i}", mod, action, cond, EvidenceProfile(tier, **kw))


def conflict_count(c: Court) -> int:
    base = c.current_base()
    return sum(conflicts(a, b) for i, a in enumerate(base) for b in base[i + 1:])


def test_issue_assigns_ids_and_court_evidence():
    c = court()
    [ev] = c.issue(F, "eat", Condition.of("night+"), 3)
    assert ev.kind is EventKind.ISSUE and ev.lp_id == "k:1" and ev.court_id == "k" and ev.seq == 0
    lp = c.current_base()[0]
    assert lp.evidence.tier is SourceTier.COURT_JUDGEMENT
    assert lp.evidence.issuing_court == "k" and lp.evidence.issue_time == 3
    c.issue(P, "drink", Condition(), 4)
    assert [x.id for x in c.current_base()] == ["k:1", "k:2"]


def test_withdraw_unknown_raises():
    c = court()
    with pytest.raises(NotInBase):
        c.withdraw("k:99", 1)
    c.issue(F, "eat", Condition(), 1)
    ev = c.withdraw("k:1", 2)
    assert ev.reason is Reason.CHANGED_VIEWPOINT and not c.holds("k:1")
    with pytest.raises(NotInBase):
        c.withdraw("k:1", 3)


def test_import_duplicate_and_novel():
    c = court()
    x = foreign(1, F)
    [ev] = c.import_lp(x, 1)
    assert ev.kind is EventKind.IMPORT and ev.reason is Reason.GOSSIP_IMPORT and ev.payload == x
    assert c.import_lp(x, 2) == []
    # same content under another id is also a duplicate
    assert c.import_lp(foreign(2, F), 2) == []
    with pytest.raises(InvalidLP):
        c.import_lp(foreign(3, P).withdrawn(0), 2)


def test_withdrawn_import_is_not_reimported():
    c = court()
    c.import_lp(foreign(1, F), 1)
    c.withdraw("seed:1", 2)
    assert c.import_lp(foreign(1, F), 3) == []


def test_keep_both_counts_conflicts():
    c = court()
    c.issue(F, "eat", Condition(), 1)
    before = conflict_count(c)
    events = c.import_lp(foreign(1, P), 2)
    assert [e.kind for e in events] == [EventKind.IMPORT]
    assert conflict_count(c) == before + 1


def test_withdraw_older_conflicts():
    c = court(RevisionPolicy.WITHDRAW_OLDER_CONFLICTS)
    c.issue(F, "eat", Condition.of("night+"), 1)
    c.issue(P, "drink", Condition(), 1)
    events = c.issue(P, "eat", Condition(), 4)
    assert [(e.kind, e.lp_id, e.reason) for e in events] == [
        (EventKind.ISSUE, "k:3", Reason.NEW_JUDGEMENT),
        (EventKind.WITHDRAW, "k:1", Reason.CHANGED_VIEWPOINT),
    ]
    assert [x.id for x in c.current_base()] == ["k:2", "k:3"]
    # a same-round conflict is not "older" and survives
    c.issue(F, "eat", Condition(), 4)
    assert c.holds("k:3") and c.holds("k:4")


def test_withdraw_lower_priority():
    c = court(RevisionPolicy.WITHDRAW_LOWER_PRIORITY)
    c.import_lp(foreign(1, P, tier=SourceTier.REVELATION), 1)
    events = c.import_lp(foreign(2, F, tier=SourceTier.SCIENCE, science_version=1), 2)
    assert [(e.kind, e.lp_id, e.reason) for e in events] == [
        (EventKind.IMPORT, "seed:2", Reason.GOSSIP_IMPORT),
        (EventKind.WITHDRAW, "seed:1", Reason.CONSISTENCY_IMPROVEMENT),
    ]
    # a weaker newcomer withdraws nothing
    assert len(c.import_lp(foreign(3, O), 3)) == 1 and c.holds("seed:2") and c.holds("seed:3")


def test_replay_rejects_malformed_logs():
    lp = foreign(1, F)
    with pytest.raises(NotInBase):
        replay([CourtEvent(EventKind.WITHDRAW, "seed:1", 0, Reason.CHANGED_VIEWPOINT)])
    with pytest.raises(InvalidLP):
        replay([CourtEvent(EventKind.ISSUE, "seed:1", 0, Reason.NEW_JUDGEMENT)])
    dup = CourtEvent(EventKind.IMPORT, "seed:1", 0, Reason.GOSSIP_IMPORT, lp)
    with pytest.raises(InvalidLP):
        replay([dup, dup])


def _random_history(rng: random.Random, c: Court, steps: int) -> None:
    for r in range(1, steps + 1):
        roll = rng.random()
        if roll < 0.5:
            c.issue(rng.choice([O, P, F]), rng.choice(["eat", "drink"]), random_condition(rng, ("x", "y")), r)
        elif roll < 0.8:
            tier = rng.choice([SourceTier.REVELATION, SourceTier.SCIENCE, SourceTier.DIRECT_WITNESS])
            c.import_lp(foreign(r, rng.choice([O, P, F]), rng.choice(["eat", "drink"]),
                                random_condition(rng, ("x", "y")), tier), r)
        elif c.current_base():
            c.withdraw(rng.choice(c.current_base()).id, r)


@settings(max_examples=60)
@given(st.integers(0, 10**6), st.sampled_from(list(RevisionPolicy)))
def test_event_sourcing_round_trip(seed, policy):
    c = court(policy)
    _random_history(random.Random(seed), c, 30)
    text = "\n".join(json.dumps(ev.to_json(), sort_keys=True) for ev in c.log)
    events = [CourtEvent.from_json(json.loads(line)) for line in text.splitlines()]
    assert events == c.log
    rebuilt = replay(events)
    assert sorted(rebuilt) == sorted(x.id for x in c.current_base())
    assert [rebuilt[x.id] for x in c.current_base()] == c.current_base()
    fresh = court(policy)
    fresh.load_log(events)
    assert fresh.current_base() == c.current_base() and fresh.seq == c.seq
    # every withdraw refers to an earlier Issue/Import
    held = set()
    for ev in events:
        if ev.kind is EventKind.WITHDRAW:
            assert ev.lp_id in held
        held.add(ev.lp_id)
    assert c.base_at(30) == c.current_base()


@settings(max_examples=60)
@given(st.integers(0, 10**6))
def test_keep_both_never_touches_other_actions(seed):
    rng = random.Random(seed)
    c = court()
    _random_history(rng, c, 20)
    drinks = [x for x in c.current_base() if x.action == "drink"]
    for i in range(rng.randint(1, 4)):
        cond = random_condition(rng, ("x", "y"))
        c.import_lp(foreign(100 + 2 * i, F, "eat", cond), 21)
        c.import_lp(foreign(101 + 2 * i, P, "eat", cond, SourceTier.SCIENCE), 21)
    assert [x for x in c.current_base() if x.action == "drink"] == drinks
