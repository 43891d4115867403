import random
from dataclasses import replace

import pytest
from gen import random_lp, random_policy
from hypothesis import given, settings
from hypothesis import strategies as st

from rilsim.errors import InvalidPolicy
from rilsim.graph import CommunityGraph
from rilsim.lp import EvidenceProfile, LegalProposition, Modality, SourceTier
from rilsim.priority import (
    DEFAULT_MECHANISM_ORDER,
    Mechanism,
    Order,
    PriorityPolicy,
    QueryContext,
    compare,
    deciding_mechanism,
    maximal_set,
    validate_policy,
)

GRAPH = CommunityGraph.build(["c0", "c1", "c2"], [("c0", "c1"), ("c1", "c2")],
                             {"k0": "c0", "k1": "c1", "k2": "c2"})
QC = QueryContext("asker", "c0", 5, GRAPH)
DEFAULT = PriorityPolicy()


def lp(i, tier="Revelation", **kw):
    return LegalProposition(str(i), Modality.FORBIDDEN, "act", evidence=EvidenceProfile(tier, **kw))


def test_default_policy_valid():
    assert validate_policy(DEFAULT) == []
    assert PriorityPolicy.from_json(DEFAULT.to_json()) == DEFAULT
    assert PriorityPolicy.from_json(None) == DEFAULT


def test_missing_mechanism_rejected():
    bad = PriorityPolicy(DEFAULT_MECHANISM_ORDER[:-1])
    [msg] = validate_policy(bad)
    assert "not a permutation" in msg
    with pytest.raises(InvalidPolicy):
        compare(lp(1), lp(2), QC, bad)


def test_duplicate_mechanism_rejected():
    order = list(DEFAULT_MECHANISM_ORDER)
    order[0] = order[1]
    assert "not a permutation" in validate_policy(PriorityPolicy(tuple(order)))[0]


def test_revelation_above_science_violates_m1():
    tiers = [["Revelation", "CourtJudgement"], "Science", "ConfirmedInterpretation", "DirectWitness",
             "IndirectWitness"]
    errors = validate_policy(PriorityPolicy.from_lists([m.value for m in DEFAULT_MECHANISM_ORDER], tiers))
    assert any("violates M1" in e for e in errors)
    assert any("violates M3" in e for e in errors)


def test_indirect_above_direct_violates_m4():
    tiers = ["Science", "ConfirmedInterpretation", "IndirectWitness", "DirectWitness",
             ["Revelation", "CourtJudgement"]]
    errors = validate_policy(PriorityPolicy.from_lists([m.value for m in DEFAULT_MECHANISM_ORDER], tiers))
    assert errors == ["tier_order violates M4: DirectWitness must rank above IndirectWitness"]


def test_tier_order_must_be_complete():
    policy = PriorityPolicy.from_lists([m.value for m in DEFAULT_MECHANISM_ORDER], ["Science", "Revelation"])
    assert "every SourceTier" in validate_policy(policy)[0]
    with pytest.raises(InvalidPolicy):
        PriorityPolicy.from_lists(["M9"], [])


def test_newer_science_precedes():
    a, b = lp("a", "Science", science_version=3), lp("b", "Science", science_version=1)
    assert compare(a, b, QC, DEFAULT) is Order.A_PRECEDES
    assert compare(b, a, QC, DEFAULT) is Order.B_PRECEDES
    assert deciding_mechanism(a, b, QC, DEFAULT) is Mechanism.NEWER_SCIENCE


def test_tier_mechanisms():
    assert compare(lp(1, "Science"), lp(2), QC, DEFAULT) is Order.A_PRECEDES
    assert compare(lp(1, "ConfirmedInterpretation"), lp(2), QC, DEFAULT) is Order.A_PRECEDES
    assert compare(lp(1, "DirectWitness"), lp(2, "IndirectWitness", witness_chain_length=2), QC,
                   DEFAULT) is Order.A_PRECEDES
    assert deciding_mechanism(lp(1, "Science"), lp(2), QC, DEFAULT) is Mechanism.SCIENCE_OVER_REVELATION


def test_scholar_mechanisms():
    assert compare(lp(1, scholar_rank=7), lp(2, scholar_rank=3), QC, DEFAULT) is Order.A_PRECEDES
    assert compare(lp(1, scholar_involved=True), lp(2), QC, DEFAULT) is Order.A_PRECEDES
    assert compare(lp(1), lp(2), QC, DEFAULT) is Order.TIE


def test_closer_court_then_recency():
    near = lp(1, "CourtJudgement", issuing_court="k0", issue_time=1)
    far = lp(2, "CourtJudgement", issuing_court="k2", issue_time=9)
    assert compare(near, far, QC, DEFAULT) is Order.A_PRECEDES
    assert deciding_mechanism(near, far, QC, DEFAULT) is Mechanism.COURT_PROXIMITY
    newer = lp(3, "CourtJudgement", issuing_court="k0", issue_time=4)
    assert compare(newer, near, QC, DEFAULT) is Order.A_PRECEDES
    assert deciding_mechanism(newer, near, QC, DEFAULT) is Mechanism.COURT_RECENCY


def test_seed_lps_are_farther_than_any_court():
    court = lp(1, "CourtJudgement", issuing_court="k2")
    seed = lp(2, "CourtJudgement", issuing_court="unknown-court")
    assert QC.court_distance(court) == 2
    assert QC.court_distance(lp(3)) == QC.court_distance(seed) == GRAPH.diameter + 1
    assert compare(court, lp(3), QC, PriorityPolicy(tuple(reversed(DEFAULT_MECHANISM_ORDER)))) is Order.A_PRECEDES


def test_scoped_recency_is_not_a_weak_order():
    """Recency applied only between same-court LPs would make Tie intransitive."""
    def scoped(x, y):
        ex, ey = x.evidence, y.evidence
        if ex.issuing_court == ey.issuing_court and ex.issue_time != ey.issue_time:
            return "x" if ex.issue_time > ey.issue_time else "y"
        return None

    graph = CommunityGraph.build(["c0", "c1", "c2"], [("c0", "c1"), ("c1", "c2")], {"k0": "c0", "k1": "c2"})
    qc = QueryContext("asker", "c1", 0, graph)
    a = lp("a", "CourtJudgement", issuing_court="k1", issue_time=5)
    b = lp("b", "CourtJudgement", issuing_court="k1", issue_time=2)
    d = lp("d", "CourtJudgement", issuing_court="k0", issue_time=3)
    assert qc.court_distance(a) == qc.court_distance(d)
    # a ~ d and d ~ b, yet a beats b
    assert scoped(a, d) is None and scoped(d, b) is None and scoped(a, b) == "x"
    # total recency orders the three consistently
    assert compare(a, d, qc, DEFAULT) is Order.A_PRECEDES
    assert compare(d, b, qc, DEFAULT) is Order.A_PRECEDES
    assert compare(a, b, qc, DEFAULT) is Order.A_PRECEDES


seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=200)
@given(seeds)
def test_maximal_set_is_undominated_and_order_free(seed):
    rng = random.Random(seed)
    policy = random_policy(rng)
    lps = [random_lp(rng, f"x:{i}", ["k0", "k1", "k2"]) for i in range(rng.randint(1, 8))]
    top = maximal_set(lps, QC, policy)
    assert top
    for member in top:
        assert all(compare(other, member, QC, policy) is not Order.A_PRECEDES for other in lps)
    for other in lps:
        if other not in top:
            assert any(compare(m, other, QC, policy) is Order.A_PRECEDES for m in top)
    shuffled = lps[:]
    rng.shuffle(shuffled)
    assert maximal_set(shuffled, QC, policy) == top
    assert [x.id for x in top] == sorted((x.id for x in top), key=lambda i: int(i.split(":")[1]))


@settings(max_examples=100)
@given(seeds, st.integers(2, 5))
def test_scholar_rank_scaling_preserves_argmax(seed, factor):
    rng = random.Random(seed)
    lps = [
        LegalProposition(f"x:{i}", Modality.PERMITTED, "act",
                         evidence=EvidenceProfile(SourceTier.REVELATION, scholar_rank=rng.randint(0, 2)))
        for i in range(6)
    ]
    scaled = [replace(x, evidence=replace(x.evidence, scholar_rank=x.evidence.scholar_rank * factor))
              for x in lps]
    assert [x.id for x in maximal_set(lps, QC, DEFAULT)] == [x.id for x in maximal_set(scaled, QC, DEFAULT)]


def test_query_context_requires_known_community():
    with pytest.raises(ValueError):
        QueryContext("a", "nowhere", 0, GRAPH)
