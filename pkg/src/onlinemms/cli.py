"""Command line entry point: ``onlinemms {oracle,run,adversary,experiment,algorithms}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from . import adversary as adv
from .core import Instance, OnlineMMSError, run_stream, to_scalar
from .experiments import ALGORITHMS, GeneratorConfig, dump_report, export_cdf, get_algorithm, run_experiment
from .oracle import DEFAULT_CAP, certify, mms_all, mms_exact

ADVERSARIES = {
    "goods3": (lambda p: adv.goods3_adversary(int(p.get("r", 8)), p.get("eps", Fraction(1, 10000))), 3),
    "goodsN": (lambda p: adv.goodsN_adversary(int(p.get("n", 4)), int(p.get("r", 8)), p.get("eps", Fraction(1, 10000))), None),
    "goods2": (lambda p: adv.goods2_adversary(p.get("delta", Fraction(1, 10)), int(p["l"]) if "l" in p else None), 2),
    "chores2": (lambda p: adv.chores2_adversary(bool(int(p.get("normalize", 1)))), 2),
    "unnorm-goods": (lambda p: adv.unnormalized_goods_adversary(int(p.get("r", 10))), 2),
    "unnorm-chores": (lambda p: adv.unnormalized_chores_adversary(p.get("eps", Fraction(1, 10)), int(p.get("n", 2))), None),
}


def parse_params(text: str | None) -> dict:
    """``"r=8,eps=1/10000"`` -> ``{"r": Fraction(8), "eps": Fraction(1, 10000)}``."""
    out = {}
    if not text:
        return out
    for part in text.split(","):
        if not part.strip():
            continue
        key, sep, value = part.partition("=")
        if not sep:
            raise ValueError(f"bad parameter {part!r}; expected key=value")
        out[key.strip()] = to_scalar(value.strip())
    return out


def _load_instance(path: str) -> Instance:
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    return Instance.from_json(text)


def _emit(obj, out: str | None = None) -> None:
    text = json.dumps(obj, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def cmd_oracle(args) -> int:
    inst = _load_instance(args.instance)
    if args.agent is not None:
        agent = args.agent - 1
        if not 0 <= agent < inst.n:
            raise ValueError(f"agent {args.agent} out of range 1..{inst.n}")
        share, part = mms_exact(inst, agent, cap=args.cap, witness=True)
        report = {"agent": args.agent, "mms": str(share), "mms_float": float(share)}
        if args.witness:
            report["witness"] = [[j + 1 for j in b] for b in part.bundles]
    else:
        res = mms_all(inst, cap=args.cap)
        report = {"mms": [str(v) for v in res.values], "mms_float": [float(v) for v in res.values]}
        if args.witness:
            report["witness"] = [[[j + 1 for j in b] for b in w.bundles] for w in res.witnesses]
    _emit(report)
    return 0


def cmd_run(args) -> int:
    inst = _load_instance(args.instance)
    alloc = run_stream(get_algorithm(args.algorithm).build(inst.n, args.alpha), inst)
    report = {"algorithm": args.algorithm, "allocation": alloc.to_json()}
    if inst.m <= args.cap:
        report["certificate"] = certify(inst, alloc, cap=args.cap).to_json()
    else:
        report["certificate"] = None
        report["note"] = f"{inst.m} items exceed the oracle cap {args.cap}; no certificate"
    _emit(report, args.out)
    return 0


def cmd_adversary(args) -> int:
    params = parse_params(args.params)
    build, n = ADVERSARIES[args.name]
    opponent = build(params)
    allocator = get_algorithm(args.vs).build(opponent.n, args.alpha, check_alpha=not args.no_check)
    outcome = adv.run_adversary(allocator, opponent, cap=args.cap)
    _emit({"adversary": args.name, "vs": args.vs, **outcome.to_json()}, args.out)
    return 0


def cmd_experiment(args) -> int:
    cfg = GeneratorConfig(args.n, args.m, args.kind, args.seed, args.order)
    names = [a.strip() for a in args.algos.split(",") if a.strip()]
    report = run_experiment(names, cfg, args.trials, alpha=args.alpha, workers=args.workers)
    if args.out:
        Path(args.out).write_text(dump_report(report) + "\n")
    if args.cdf:
        Path(args.cdf).write_text(export_cdf(report))
    for name, res in report.results.items():
        s = res.summary()
        print(f"{name:22s} avg={s['avg']:.4f} min={s['min']:.4f} max={s['max']:.4f} "
              f"zero={s['zero_fraction']:.3f} time={s['seconds']:.2f}s")
    return 0


def cmd_algorithms(args) -> int:
    for spec in ALGORITHMS.values():
        extra = "--alpha p/q" if spec.needs_alpha else ""
        agents = "n=2" if spec.two_agents else ""
        print(f"{spec.name:21s} {extra:12s} {spec.kind.value:7s} {agents:4s} {spec.summary}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="onlinemms", description="Online maximin-share allocation toolkit.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("oracle", help="exact maximin shares of an instance")
    p.add_argument("--instance", required=True, help="instance JSON file, or - for stdin")
    p.add_argument("--agent", type=int, help="1-based agent; default all agents")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="largest item count to enumerate")
    p.add_argument("--witness", action="store_true", help="also print an optimal partition")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("run", help="run an online algorithm over an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--algorithm", required=True, choices=sorted(ALGORITHMS))
    p.add_argument("--alpha", type=to_scalar)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("adversary", help="play an adaptive adversary against an algorithm")
    p.add_argument("--name", required=True, choices=sorted(ADVERSARIES))
    p.add_argument("--params", help="comma separated key=value, e.g. r=8,eps=1/10000")
    p.add_argument("--vs", required=True, choices=sorted(ALGORITHMS))
    p.add_argument("--alpha", type=to_scalar)
    p.add_argument("--no-check", action="store_true", help="waive alpha promises and guarantee alarms")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--out")
    p.set_defaults(func=cmd_adversary)

    p = sub.add_parser("experiment", help="batch experiment on generated instances")
    p.add_argument("--kind", required=True, choices=["goods", "chores"])
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--m", type=int, default=100)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--algos", required=True, help="comma separated algorithm names")
    p.add_argument("--order", choices=["monotone", "random"], default="random")
    p.add_argument("--alpha", type=to_scalar)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="report JSON path")
    p.add_argument("--cdf", help="CDF CSV path")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("algorithms", help="list algorithm names")
    p.set_defaults(func=cmd_algorithms)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (OnlineMMSError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
