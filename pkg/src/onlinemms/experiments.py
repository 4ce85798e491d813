"""Random normalized instances and the batch experiment harness.

Each agent's total of ``n`` is made of ``n`` unit blocks, and every block is
cut into ``m / n`` pieces at sorted uniform points on a grid of ``2**32``.
Putting each block in its own bundle shows the share is 1 (at least 1 for
goods, at most 1 for chores), and no partition can do better since the total
is ``n``.  So ratios are read off against a share of exactly 1.
"""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import chores, goods
from .core import Instance, Kind, OnlineAllocator, run_stream, to_scalar, worst_ratio

GRID = 2 ** 32


@dataclass(frozen=True)
class GeneratorConfig:
    n: int
    m: int
    kind: Kind
    seed: int = 0
    order: str = "random"  # or "monotone"

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind.parse(self.kind))
        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be positive")
        if self.m % self.n:
            raise ValueError(f"m={self.m} is not divisible by n={self.n}")
        if self.order not in ("random", "monotone"):
            raise ValueError(f"unknown order {self.order!r}; use 'random' or 'monotone'")


def _pieces(rng: np.random.Generator, n: int, per_block: int) -> list[int]:
    """Grid lengths of one agent's ``n * per_block`` pieces, block after block."""
    out: list[int] = []
    for _ in range(n):
        cuts = np.sort(rng.integers(0, GRID, size=per_block - 1, endpoint=True))
        edges = np.concatenate(([0], cuts, [GRID]))
        out.extend(int(x) for x in np.diff(edges))
    return out


def generate_instance(config: GeneratorConfig) -> Instance:
    """Random normalized instance whose shares are all exactly 1.

    Every row is sorted in non-increasing order on its own, which makes the
    instance monotone.  ``order="random"`` then applies one shared random
    permutation to the columns.
    """
    rng = np.random.default_rng(config.seed)
    per_block = config.m // config.n
    grid_rows = [_pieces(rng, config.n, per_block) for _ in range(config.n)]
    # every row is sorted, so column j is each agent's j-th largest piece
    grid_rows = [sorted(r, reverse=True) for r in grid_rows]
    if config.order == "random":
        perm = rng.permutation(config.m)
        grid_rows = [[r[j] for j in perm] for r in grid_rows]
    rows = [[Fraction(x, GRID) for x in r] for r in grid_rows]
    return Instance(config.kind, rows, normalized=True)


# -- algorithm registry -----------------------------------------------------


@dataclass(frozen=True)
class AlgorithmSpec:
    name: str
    kind: Kind
    factory: Callable[..., OnlineAllocator]
    needs_alpha: bool = False
    two_agents: bool = False
    #: factory accepts a trailing ``check`` flag (promise / guarantee checking)
    checkable: bool = False
    summary: str = ""

    def build(self, n: int, alpha=None, check_alpha: bool = True) -> OnlineAllocator:
        if self.two_agents and n != 2:
            raise ValueError(f"{self.name} is defined for two agents only")
        if self.needs_alpha:
            if alpha is None:
                raise ValueError(f"{self.name} needs --alpha")
            return self.factory(n, to_scalar(alpha), check_alpha)
        if self.checkable:
            return self.factory(n, check_alpha)
        return self.factory(n)


ALGORITHMS: dict[str, AlgorithmSpec] = {
    s.name: s
    for s in [
        AlgorithmSpec("greedy-goods", Kind.GOODS, goods.greedy_goods, summary="item to the agent valuing it most"),
        AlgorithmSpec("capped-greedy-goods", Kind.GOODS, goods.capped_greedy_goods, two_agents=True,
                      summary="greedy that stops serving an agent at 1/2"),
        AlgorithmSpec("alg1-goods-2", Kind.GOODS, goods.alg1_two_agent_goods, two_agents=True,
                      summary="two-agent 1/2-competitive"),
        AlgorithmSpec("alg2-monotone-goods", Kind.GOODS, goods.alg2_monotone_goods,
                      summary="1/2-competitive on monotone instances"),
        AlgorithmSpec("alg3-small-goods", Kind.GOODS, goods.alg3_small_goods, needs_alpha=True,
                      summary="(1 - alpha)-competitive when values are at most alpha"),
        AlgorithmSpec("greedy-chores", Kind.CHORES, chores.greedy_chores, summary="item to the agent with lowest cost"),
        AlgorithmSpec("alg4-chores-n", Kind.CHORES, chores.alg4_chores, summary="(2 - 1/n)-competitive"),
        AlgorithmSpec("alg5-chores-2", Kind.CHORES, chores.alg5_sqrt2_chores, two_agents=True, checkable=True,
                      summary="two-agent sqrt(2)-competitive"),
        AlgorithmSpec("alg6-sesqui", Kind.CHORES, chores.alg6_sesqui_round_robin,
                      summary="positional schedule, 5/3 on monotone instances"),
        AlgorithmSpec("alg7-small-chores", Kind.CHORES, chores.alg7_small_chores, needs_alpha=True,
                      summary="(1 + alpha)-competitive when costs are at most alpha"),
        AlgorithmSpec("alg8-small-chores-2", Kind.CHORES,
                      lambda n, alpha, check=True: chores.alg8_small_chores_two(alpha, check, n),
                      needs_alpha=True, two_agents=True, summary="two-agent gamma(alpha)-competitive"),
    ]
}


def get_algorithm(name: str) -> AlgorithmSpec:
    try:
        return ALGORITHMS[name]
    except KeyError:
        raise ValueError(f"unknown algorithm {name!r}; choose from {', '.join(ALGORITHMS)}") from None


# -- harness -----------------------------------------------------------------


@dataclass
class AlgorithmResult:
    name: str
    ratios: list[Fraction] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def avg(self) -> float:
        return sum(map(float, self.ratios)) / len(self.ratios)

    @property
    def min(self) -> Fraction:
        return min(self.ratios)

    @property
    def max(self) -> Fraction:
        return max(self.ratios)

    @property
    def zero_fraction(self) -> float:
        """Share of trials where some agent got nothing of value (ratio 0)."""
        return sum(1 for r in self.ratios if r == 0) / len(self.ratios)

    def summary(self) -> dict:
        return {
            "avg": self.avg,
            "min": float(self.min),
            "max": float(self.max),
            "zero_fraction": self.zero_fraction,
            "seconds": self.seconds,
        }


@dataclass
class ExperimentReport:
    config: GeneratorConfig
    trials: int
    results: dict[str, AlgorithmResult]
    generation_seconds: float = 0.0

    def __getitem__(self, name: str) -> AlgorithmResult:
        return self.results[name]

    def to_json(self) -> dict:
        c = self.config
        return {
            "config": {"n": c.n, "m": c.m, "kind": c.kind.value, "seed": c.seed, "order": c.order},
            "trials": self.trials,
            "generation_seconds": self.generation_seconds,
            "algorithms": {
                name: {**res.summary(), "ratios": [float(r) for r in res.ratios]}
                for name, res in self.results.items()
            },
        }


def trial_seed(seed: int, trial: int) -> int:
    return seed ^ trial


def _one_trial(args):
    config, trial, names, alpha = args
    cfg = GeneratorConfig(config.n, config.m, config.kind, trial_seed(config.seed, trial), config.order)
    t0 = time.perf_counter()
    inst = generate_instance(cfg)
    gen = time.perf_counter() - t0
    ones = [Fraction(1)] * cfg.n
    out = []
    for name in names:
        t0 = time.perf_counter()
        alloc = run_stream(get_algorithm(name).build(cfg.n, alpha), inst)
        ratio = worst_ratio(inst, alloc, ones)
        out.append((ratio, time.perf_counter() - t0))
    return gen, out


def run_experiment(algorithms: Sequence[str], config: GeneratorConfig, trials: int, *, alpha=None, workers: int = 1) -> ExperimentReport:
    """Run every named algorithm on ``trials`` generated instances.

    Trial ``t`` uses seed ``config.seed ^ t``, so results do not depend on
    ``workers``.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    names = list(algorithms)
    for name in names:
        spec = get_algorithm(name)
        if spec.kind is not config.kind:
            raise ValueError(f"{name} allocates {spec.kind.value}, the experiment is about {config.kind.value}")
        if spec.two_agents and config.n != 2:
            raise ValueError(f"{name} is defined for two agents only")
    jobs = [(config, t, names, alpha) for t in range(trials)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            outcomes = list(pool.map(_one_trial, jobs, chunksize=max(1, trials // (4 * workers))))
    else:
        outcomes = [_one_trial(j) for j in jobs]
    results = {name: AlgorithmResult(name) for name in names}
    gen_total = 0.0
    for gen, rows in outcomes:
        gen_total += gen
        for name, (ratio, secs) in zip(names, rows):
            results[name].ratios.append(ratio)
            results[name].seconds += secs
    return ExperimentReport(config, trials, results, gen_total)


def cdf_rows(ratios: Sequence) -> list[tuple[float, float]]:
    """Sorted ratios with the empirical CDF value at each one."""
    if not ratios:
        raise ValueError("no ratios to summarize")
    xs = sorted(float(r) for r in ratios)
    k = len(xs)
    return [(x, (i + 1) / k) for i, x in enumerate(xs)]


def export_cdf(report: ExperimentReport, algorithm: str | None = None) -> str:
    """CSV text with columns ``ratio,cum_fraction`` (plus ``algorithm`` when there are several)."""
    names = [algorithm] if algorithm else list(report.results)
    if not names or not report.trials:
        raise ValueError("empty report")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    multi = len(names) > 1
    w.writerow(["algorithm", "ratio", "cum_fraction"] if multi else ["ratio", "cum_fraction"])
    for name in names:
        for x, f in cdf_rows(report.results[name].ratios):
            w.writerow([name, repr(x), repr(f)] if multi else [repr(x), repr(f)])
    return buf.getvalue()


def mass_below(ratios: Sequence, threshold: float) -> float:
    return sum(1 for r in ratios if float(r) < threshold) / len(ratios)


def mass_above(ratios: Sequence, threshold: float) -> float:
    return sum(1 for r in ratios if float(r) > threshold) / len(ratios)


def dump_report(report: ExperimentReport) -> str:
    return json.dumps(report.to_json(), indent=2)
