"""``rilsim`` command line: validate, simulate, query, strata, experiment.

Exit codes: 0 ok/decided, 1 invalid input or I/O failure, 2 refer to court,
3 classification over an empty community level.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .errors import InvalidLP, InvalidPolicy, NoCommunities, RilError, ScenarioInvalid
from .lp import Condition
from .metrics import ExperimentKind, run_experiment
from .priority import PriorityPolicy
from .query import decide
from .scenario import digest, load_scenario, validate_scenario
from .sim import SimulationState, load_snapshot, read_event_log, replay_state, strata_state, write_event_log
from .strata import classify_assertion, classify_endorsement, level5_communities, level6_communities, membership_level, stratum

EXIT_OK, EXIT_ERROR, EXIT_REFER, EXIT_NO_COMMUNITIES = 0, 1, 2, 3

log = logging.getLogger("rilsim")


def _setup_logging() -> None:
    level = os.environ.get("RILSIM_LOG", "").strip()
    if not level or level.lower() in ("0", "off", "none"):
        logging.getLogger("rilsim").addHandler(logging.NullHandler())
        return
    numeric = getattr(logging, level.upper(), None) if not level.isdigit() else int(level)
    logging.basicConfig(level=numeric if isinstance(numeric, int) else logging.DEBUG,
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def _dump(data: Any, path: Path | None = None) -> None:
    text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text, encoding="utf-8")


def _fail(msg: str, code: int = EXIT_ERROR) -> int:
    print(f"rilsim: {msg}", file=sys.stderr)
    return code


def parse_seeds(text: str) -> list[int]:
    """``"0-9"``, ``"1,5,7"`` or a mix such as ``"1,3-5"``."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        lo, sep, hi = part.partition("-")
        if sep and lo:
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    if not out:
        raise ValueError("no seeds given")
    return out


def cmd_validate(args) -> int:
    try:
        raw = json.loads(Path(args.path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        return _fail(f"cannot read {args.path}: {exc}")
    diags = validate_scenario(raw)
    if diags:
        for ptr, msg in diags:
            print(f"{ptr or '/'}: {msg}", file=sys.stderr)
        return EXIT_ERROR
    print(f"ok {digest(raw)}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.rounds is not None and args.rounds < 0:
        return _fail("--rounds must be nonnegative")
    scenario = load_scenario(args.scenario)
    state = SimulationState(scenario, seed=args.seed, rounds=args.rounds)
    events = state.run()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_event_log(events, out / "events.jsonl")
    _dump(state.snapshot(), out / "state.json")
    _dump({
        "version": __version__,
        "scenario_name": scenario.raw.get("name"),
        "digest": scenario.digest,
        "seed": state.params.seed,
        "rounds": state.params.rounds_total,
        "courts": len(scenario.courts),
        "communities": len(scenario.graph.communities),
        "events": len(events),
    }, out / "manifest.json")
    log.info("wrote %d events to %s", len(events), out)
    return EXIT_OK


def _load_policy(path: str | None, default: PriorityPolicy) -> PriorityPolicy:
    if path is None:
        return default
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    policy = PriorityPolicy.from_json(data.get("priority_policy", data))
    policy.check()
    return policy


def cmd_query(args) -> int:
    state_path = Path(args.state)
    try:
        snapshot = json.loads(state_path.read_text(encoding="utf-8"))
        scenario, view = load_snapshot(snapshot)
        policy = _load_policy(args.policy, scenario.policy)
        context = Condition.parse(args.context or "")
        if args.round is not None and args.round < view.round:
            events = read_event_log(state_path.with_name("events.jsonl"))
            view = replay_state(scenario, events, snapshot["seed"]).view_at(args.round)
        qc = view.context_for(args.agent)
    except (OSError, json.JSONDecodeError, ValueError, KeyError, RilError) as exc:
        return _fail(f"malformed query input: {exc}")
    verdict = decide(args.action, context, qc, view, policy)
    _dump(verdict.to_json())
    return EXIT_OK if verdict.decided else EXIT_REFER


def cmd_strata(args) -> int:
    scenario = load_scenario(args.scenario)
    st = strata_state(scenario)
    t = args.time
    if t < 0:
        return _fail("--time must be nonnegative")
    try:
        if args.person is not None:
            if args.person not in st.persons:
                return _fail(f"unknown person {args.person!r}")
            out: dict[str, Any] = {"person": args.person, "time": t,
                                   "level": membership_level(st.persons[args.person], st, t)}
        elif args.assertion is not None or args.system is not None:
            is_assertion = args.assertion is not None
            target = args.assertion if is_assertion else args.system
            labels = (classify_assertion if is_assertion else classify_endorsement)(target, st, t)
            l6 = level6_communities(st, t)
            out = {
                "assertion" if is_assertion else "system": target,
                "time": t,
                "labels": sorted(label.value for label in labels),
                "level5_communities": sorted(level5_communities(st, t)),
                "level6_communities": sorted(l6),
                "undefined": [] if l6 else ["SharedMainstream"],
            }
        else:
            out = {"time": t, "strata": {str(n): sorted(stratum(st, n, t)) for n in range(8)}}
    except NoCommunities as exc:
        print(f"rilsim: {exc}", file=sys.stderr)
        return EXIT_NO_COMMUNITIES
    _dump(out)
    return EXIT_OK


def cmd_experiment(args) -> int:
    scenario = load_scenario(args.scenario)
    try:
        seeds = parse_seeds(args.seeds)
    except ValueError as exc:
        return _fail(f"bad --seeds: {exc}")
    report = run_experiment(ExperimentKind(args.kind), scenario, seeds)
    csv_path, json_path = report.write(args.out)
    print(csv_path)
    print(json_path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rilsim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"rilsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a scenario file")
    p.add_argument("path")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="run a scenario and write events/state/manifest")
    p.add_argument("--scenario", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--rounds", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("query", help="ask whether an action is permissible")
    p.add_argument("--state", required=True)
    p.add_argument("--action", required=True)
    p.add_argument("--context", default="", help='comma-separated literals, e.g. "ill+,travelling-"')
    p.add_argument("--agent", required=True)
    p.add_argument("--policy", default=None, help="JSON file holding a priority_policy object")
    p.add_argument("--round", type=int, default=None, help="evaluate against bases as of this round")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("strata", help="membership levels and community-quorum labels")
    p.add_argument("--scenario", required=True)
    p.add_argument("--time", type=int, required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--person")
    g.add_argument("--assertion")
    g.add_argument("--system")
    p.set_defaults(func=cmd_strata)

    p = sub.add_parser("experiment", help="run a Convergence, Workload or Perturbation experiment")
    p.add_argument("--kind", required=True, choices=[k.value for k in ExperimentKind])
    p.add_argument("--scenario", required=True)
    p.add_argument("--seeds", required=True, help='e.g. "0-9" or "1,2,3"')
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioInvalid as exc:
        for ptr, msg in exc.diagnostics:
            print(f"{ptr or '/'}: {msg}", file=sys.stderr)
        return EXIT_ERROR
    except (InvalidLP, InvalidPolicy, OSError) as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
