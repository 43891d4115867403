"""Divergence, referral, and stability measurements, and the experiments built on them."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import random
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import combinations
from pathlib import Path
from typing import Any, Iterable, Sequence

from .court import Court
from .lp import LegalProposition, conflicts
from .priority import Order, PriorityPolicy, compare
from .query import answer, applicable_lps
from .scenario import Query, Scenario, canonical_json
from .sim import NetworkView, SimulationState


class ExperimentKind(str, Enum):
    CONVERGENCE = "Convergence"
    WORKLOAD = "Workload"
    PERTURBATION = "Perturbation"


PERTURBATION_KS = (0, 1, 2, 4)
ALL_REFER_BASELINE = Fraction(1)


def _contents(x: Court | Iterable[LegalProposition]) -> set:
    if isinstance(x, Court):
        return x.contents()
    return {lp.content for lp in x}


def jaccard_distance(a: set, b: set) -> Fraction:
    union = len(a | b)
    if union == 0:
        return Fraction(0)
    return 1 - Fraction(len(a & b), union)


def base_divergence(a: Court | Iterable[LegalProposition], b: Court | Iterable[LegalProposition]) -> Fraction:
    """Jaccard distance between the content triples of two bases."""
    return jaccard_distance(_contents(a), _contents(b))


def mean_pairwise_divergence(courts: Sequence[Court]) -> Fraction:
    sets = [c.contents() for c in courts]
    n_pairs = len(sets) * (len(sets) - 1) // 2
    if not n_pairs:
        return Fraction(0)
    # exact mean; intersections summed per union size to keep Fraction work small
    shared_by_union: dict[int, int] = {}
    for a, b in combinations(sets, 2):
        union = len(a | b)
        if union:
            shared_by_union[union] = shared_by_union.get(union, 0) + len(a & b)
        else:
            shared_by_union[1] = shared_by_union.get(1, 0) + 1
    similarity = sum((Fraction(i, u) for u, i in shared_by_union.items()), Fraction(0))
    return 1 - similarity / n_pairs


def _outcome_key(view: NetworkView, probe: Query, policy: PriorityPolicy) -> tuple:
    v = answer(probe, view, policy)
    return (v.outcome, v.refer_reason)


def verdict_disagreement(view: NetworkView, probes: Sequence[Query], policy: PriorityPolicy) -> Fraction:
    """Mean over court pairs of the fraction of probes on which the two courts' bases disagree."""
    if not probes:
        raise ValueError("probe set must be nonempty")
    courts = view.court_ids
    if len(courts) < 2:
        return Fraction(0)
    outcomes = {
        c: [v.outcome for v in (answer(p, view.restricted([c]), policy) for p in probes)]
        for c in courts
    }
    total = Fraction(0)
    pairs = list(combinations(courts, 2))
    for a, b in pairs:
        differ = sum(x != y for x, y in zip(outcomes[a], outcomes[b]))
        total += Fraction(differ, len(probes))
    return total / len(pairs)


def referral_rate(view: NetworkView, probes: Sequence[Query], policy: PriorityPolicy) -> Fraction:
    if not probes:
        raise ValueError("probe set must be nonempty")
    refer = sum(not answer(p, view, policy).decided for p in probes)
    return Fraction(refer, len(probes))


def covered_probes(view: NetworkView, probes: Sequence[Query], policy: PriorityPolicy) -> int:
    """Probes with an applicable LP that outranks every applicable LP conflicting with it."""
    n = 0
    for p in probes:
        qc = view.context_for(p.agent_id)
        lps = applicable_lps(view, p.action, p.context)
        if any(
            all(compare(x, y, qc, policy) is Order.A_PRECEDES for y in lps if conflicts(x, y))
            for x in lps
        ):
            n += 1
    return n


def flip_seeds(scenario: Scenario, k: int, seed: int) -> Scenario:
    """Copy of the scenario with ``k`` Forbidden/Permitted seed LPs flipped."""
    if k == 0:
        return scenario
    raw_seeds = scenario.raw.get("seed_lps", [])
    eligible = [i for i, s in enumerate(raw_seeds) if s["modality"] in ("Forbidden", "Permitted")]
    chosen = random.Random(f"{seed}/perturb/{k}").sample(eligible, min(k, len(eligible)))
    flipped = []
    for i, s in enumerate(raw_seeds):
        s = dict(s)
        s.setdefault("id", f"seed:{i}")
        if i in chosen:
            s["modality"] = "Permitted" if s["modality"] == "Forbidden" else "Forbidden"
        flipped.append(s)
    return scenario.derive(seed_lps=flipped)


def single_court(scenario: Scenario) -> Scenario:
    keep = min(scenario.raw["courts"], key=lambda c: c["id"])
    return scenario.derive(courts=[keep])


@dataclass
class ExperimentReport:
    kind: ExperimentKind
    seeds: tuple[int, ...]
    scenario_digest: str
    rows: list[tuple[int, str, Any, str, int]] = field(default_factory=list)
    summary: dict[str, Any] = field(default_factory=dict)

    @property
    def config_digest(self) -> str:
        cfg = {"kind": self.kind.value, "scenario": self.scenario_digest, "seeds": list(self.seeds)}
        return hashlib.sha256(canonical_json(cfg).encode()).hexdigest()

    @property
    def stem(self) -> str:
        seeds = "_".join(str(s) for s in self.seeds)
        return f"{self.kind.value.lower()}_seeds-{seeds}_{self.config_digest[:12]}"

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["round", "metric", "value", "arm", "seed"])
        for round_, metric, value, arm, seed in self.rows:
            w.writerow([round_, metric, f"{float(value):.6f}", arm, seed])
        return buf.getvalue()

    def summary_json(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "seeds": list(self.seeds),
            "scenario_digest": self.scenario_digest,
            "config_digest": self.config_digest,
            **self.summary,
        }

    def write(self, out_dir: str | Path) -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / f"{self.stem}.csv"
        json_path = out / f"{self.stem}.json"
        csv_path.write_text(self.csv_text(), encoding="utf-8")
        json_path.write_text(json.dumps(self.summary_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return csv_path, json_path


def _f(x: Fraction) -> float:
    return round(float(x), 6)


def divergence_series(scenario: Scenario, seed: int) -> list[Fraction]:
    """Mean pairwise base divergence after each round 0..rounds_total."""
    state = SimulationState(scenario, seed)
    courts = list(state.courts.values())
    series = [mean_pairwise_divergence(courts)]
    while state.round < state.params.rounds_total:
        state.step()
        series.append(mean_pairwise_divergence(courts))
    return series


def _convergence(scenario: Scenario, seeds: Sequence[int], report: ExperimentReport) -> None:
    no_gossip = scenario.derive(params={"import_probability": 0.0})
    final = {}
    for seed in seeds:
        arms = {"gossip": divergence_series(scenario, seed), "no_gossip": divergence_series(no_gossip, seed)}
        for arm, series in arms.items():
            report.rows.extend((r, "mean_divergence", v, arm, seed) for r, v in enumerate(series))
        g, n = arms["gossip"][-1], arms["no_gossip"][-1]
        final[str(seed)] = {"gossip": _f(g), "no_gossip": _f(n), "gossip_lower": g < n}
    report.summary.update(
        rounds=scenario.params.rounds_total,
        final_divergence=final,
        gossip_lower_count=sum(v["gossip_lower"] for v in final.values()),
    )


def _workload(scenario: Scenario, seeds: Sequence[int], report: ExperimentReport) -> None:
    probes, policy = scenario.probes, scenario.policy
    finals, covered = {}, {}
    for seed in seeds:
        state = SimulationState(scenario, seed)
        report.rows.append((0, "referral_rate", referral_rate(state.view(), probes, policy), "measured", seed))
        while state.round < state.params.rounds_total:
            state.step()
            rate = referral_rate(state.view(), probes, policy)
            report.rows.append((state.round, "referral_rate", rate, "measured", seed))
        view = state.view()
        finals[str(seed)] = referral_rate(view, probes, policy)
        covered[str(seed)] = covered_probes(view, probes, policy)
    rates = list(finals.values())
    report.summary.update(
        rounds=scenario.params.rounds_total,
        probes=len(probes),
        baseline_referral_rate=float(ALL_REFER_BASELINE),
        final_referral_rate={s: _f(r) for s, r in finals.items()},
        mean_final_referral_rate=_f(sum(rates, Fraction(0)) / len(rates)),
        min_final_referral_rate=_f(min(rates)),
        max_final_referral_rate=_f(max(rates)),
        covered_probes=covered,
        below_baseline=all(r < ALL_REFER_BASELINE for r in rates),
    )


def _final_outcomes(scenario: Scenario, seed: int) -> list[tuple]:
    state = SimulationState(scenario, seed)
    state.run()
    view = state.view()
    return [_outcome_key(view, p, scenario.policy) for p in scenario.probes]


def _perturbation(scenario: Scenario, seeds: Sequence[int], report: ExperimentReport) -> None:
    variants = {1: single_court(scenario), len(scenario.courts): scenario}
    table = []
    for n_courts, variant in sorted(variants.items()):
        per_k: dict[int, dict[str, float]] = {k: {} for k in PERTURBATION_KS}
        for seed in seeds:
            baseline = _final_outcomes(variant, seed)
            for k in PERTURBATION_KS:
                changed = _final_outcomes(flip_seeds(variant, k, seed), seed)
                frac = Fraction(sum(a != b for a, b in zip(baseline, changed)), len(baseline))
                report.rows.append((variant.params.rounds_total, "verdict_change_fraction", frac,
                                    f"courts={n_courts}/k={k}", seed))
                per_k[k][str(seed)] = frac
        for k, vals in per_k.items():
            xs = list(vals.values())
            table.append({
                "courts": n_courts, "k": k,
                "mean": _f(sum(xs, Fraction(0)) / len(xs)), "min": _f(min(xs)), "max": _f(max(xs)),
                "per_seed": {s: _f(v) for s, v in vals.items()},
            })
    counts = sorted(variants)
    contrast = {}
    for k in PERTURBATION_KS[1:]:
        means = {row["courts"]: row["mean"] for row in table if row["k"] == k}
        contrast[str(k)] = {
            "centralized_mean": means[counts[0]],
            "distributed_mean": means[counts[-1]],
            "distributed_more_stable": means[counts[-1]] < means[counts[0]],
        }
    report.summary.update(
        rounds=scenario.params.rounds_total,
        court_counts=counts,
        table=table,
        stability_contrast=contrast,
    )


def run_experiment(kind: ExperimentKind | str, scenario: Scenario, seeds: Sequence[int]) -> ExperimentReport:
    kind = ExperimentKind(kind)
    seeds = tuple(seeds)
    if not seeds:
        raise ValueError("an experiment needs at least one seed")
    if kind is not ExperimentKind.CONVERGENCE and not scenario.probes:
        raise ValueError(f"{kind.value} experiment needs probe_queries in the scenario")
    report = ExperimentReport(kind, seeds, scenario.digest)
    {
        ExperimentKind.CONVERGENCE: _convergence,
        ExperimentKind.WORKLOAD: _workload,
        ExperimentKind.PERTURBATION: _perturbation,
    }[kind](scenario, seeds, report)
    return report
