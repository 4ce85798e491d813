"""Exact maximin shares by exhaustive partition search.

Rows are rescaled to integers by the lcm of their denominators, then searched
item by item (largest first) with two prunings: bundles with equal running
sums are interchangeable, and a branch is dropped as soon as a bound shows it
cannot beat the incumbent.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .core import (
    Allocation,
    Instance,
    Kind,
    OnlineMMSError,
    agent_ratios,
    bundle_values,
    worst_ratio,
)

DEFAULT_CAP = 16


class CapacityError(OnlineMMSError):
    """The instance has more items than the enumeration cap allows."""


@dataclass(frozen=True)
class MmsResult:
    values: tuple[Fraction, ...]
    #: per agent, a partition (as an Allocation over ``n`` bundles) achieving the share
    witnesses: tuple[Allocation, ...]

    def __getitem__(self, agent: int) -> Fraction:
        return self.values[agent]

    def __len__(self):
        return len(self.values)


def _to_integers(row: Sequence[Fraction]) -> tuple[list[int], int]:
    scale = 1
    for v in row:
        scale = math.lcm(scale, Fraction(v).denominator)
    return [int(Fraction(v) * scale) for v in row], scale


def _water_level(sums: list[int], remaining: int) -> int:
    # largest t (rounded down) with sum(max(0, t - s)) <= remaining
    s = sorted(sums)
    k = len(s)
    acc = 0
    for i in range(k):
        acc += s[i]
        level = (acc + remaining) // (i + 1)
        if i + 1 == k or level <= s[i + 1]:
            return level
    return s[-1]  # pragma: no cover


def _max_min(weights: list[int], k: int) -> tuple[int, list[int]]:
    m = len(weights)
    order = sorted(range(m), key=lambda j: -weights[j])
    w = [weights[j] for j in order]
    total = sum(w)
    upper = total // k

    sums = [0] * k
    assign = [0] * m
    for idx, x in enumerate(w):
        b = min(range(k), key=sums.__getitem__)
        sums[b] += x
        assign[idx] = b
    best = min(sums)
    best_assign = assign[:]

    suffix = [0] * (m + 1)
    for idx in range(m - 1, -1, -1):
        suffix[idx] = suffix[idx + 1] + w[idx]

    cur = [0] * k
    cur_assign = [0] * m

    def rec(idx: int, used: int) -> None:
        nonlocal best, best_assign
        if best >= upper:
            return
        if idx == m:
            val = min(cur)
            if val > best:
                best = val
                best_assign = cur_assign[:]
            return
        if _water_level(cur, suffix[idx]) <= best:
            return
        x = w[idx]
        seen = set()
        for b in sorted(range(min(used + 1, k)), key=cur.__getitem__):
            if cur[b] in seen:
                continue
            seen.add(cur[b])
            cur[b] += x
            cur_assign[idx] = b
            rec(idx + 1, max(used, b + 1))
            cur[b] -= x

    if best < upper:
        rec(0, 0)
    out = [0] * m
    for idx, j in enumerate(order):
        out[j] = best_assign[idx]
    return best, out


def _min_max(weights: list[int], k: int) -> tuple[int, list[int]]:
    m = len(weights)
    order = sorted(range(m), key=lambda j: -weights[j])
    w = [weights[j] for j in order]
    total = sum(w)
    lower = max(max(w, default=0), -(-total // k))

    sums = [0] * k
    assign = [0] * m
    for idx, x in enumerate(w):
        b = min(range(k), key=sums.__getitem__)
        sums[b] += x
        assign[idx] = b
    best = max(sums)
    best_assign = assign[:]

    cur = [0] * k
    cur_assign = [0] * m

    def rec(idx: int, used: int) -> None:
        nonlocal best, best_assign
        if best <= lower:
            return
        if idx == m:
            val = max(cur)
            if val < best:
                best = val
                best_assign = cur_assign[:]
            return
        x = w[idx]
        seen = set()
        for b in sorted(range(min(used + 1, k)), key=cur.__getitem__):
            if cur[b] + x >= best:
                break
            if cur[b] in seen:
                continue
            seen.add(cur[b])
            cur[b] += x
            cur_assign[idx] = b
            rec(idx + 1, max(used, b + 1))
            cur[b] -= x

    if best > lower:
        rec(0, 0)
    out = [0] * m
    for idx, j in enumerate(order):
        out[j] = best_assign[idx]
    return best, out


def share_of_row(row: Sequence[Fraction], bundles: int, kind: Kind, cap: int = DEFAULT_CAP) -> tuple[Fraction, tuple[int, ...]]:
    """Exact max-min (goods) or min-max (chores) over partitions into ``bundles`` parts.

    Returns the share and the bundle index of every item in an optimal partition.
    """
    if bundles < 1:
        raise ValueError("need at least one bundle")
    if len(row) > cap:
        raise CapacityError(f"{len(row)} items exceeds the enumeration cap of {cap}")
    if not row:
        return Fraction(0), ()
    weights, scale = _to_integers(row)
    if Kind.parse(kind) is Kind.GOODS:
        val, assign = _max_min(weights, bundles)
    else:
        val, assign = _min_max(weights, bundles)
    return Fraction(val, scale), tuple(assign)


def mms_exact(instance: Instance, agent: int, bundles: int | None = None, *, cap: int = DEFAULT_CAP, witness: bool = False):
    """Maximin share of ``agent`` using its own row only.

    ``bundles`` defaults to ``instance.n``.  With ``witness=True`` returns
    ``(share, partition)`` where ``partition`` is an :class:`Allocation` over
    ``bundles`` parts.

    >>> from fractions import Fraction as F
    >>> inst = Instance("goods", [[F(1, 2), F(1, 2), 1]])
    >>> mms_exact(inst, 0, 2)
    Fraction(1, 1)
    """
    k = instance.n if bundles is None else bundles
    share, assign = share_of_row(instance.row(agent), k, instance.kind, cap)
    if witness:
        return share, Allocation(k, assign)
    return share


def mms_all(instance: Instance, *, cap: int = DEFAULT_CAP) -> MmsResult:
    """Shares of every agent with ``n`` bundles, plus witness partitions."""
    if instance.m > cap:
        raise CapacityError(f"{instance.m} items exceeds the enumeration cap of {cap}")
    values, witnesses = [], []
    for i in range(instance.n):
        share, part = mms_exact(instance, i, cap=cap, witness=True)
        values.append(share)
        witnesses.append(part)
    return MmsResult(tuple(values), tuple(witnesses))


def witness_objective(instance: Instance, agent: int, partition: Allocation) -> Fraction:
    """Min (goods) / max (chores) bundle value of ``partition`` under ``agent``'s row."""
    row = instance.row(agent)
    sums = [Fraction(0)] * partition.n
    for j, b in enumerate(partition.owner):
        sums[b] += row[j]
    return min(sums) if instance.kind is Kind.GOODS else max(sums)


def mms_reduced(instance: Instance, keep_agents: Iterable[int], drop_items: Iterable[int], *, cap: int = DEFAULT_CAP) -> dict[int, Fraction]:
    """Shares of the kept agents after removing as many items as agents.

    Each kept agent partitions the remaining items into ``len(keep_agents)``
    bundles.
    """
    keep = sorted(set(keep_agents))
    drop = set(drop_items)
    if any(not 0 <= a < instance.n for a in keep):
        raise ValueError(f"agents {keep} out of range for n={instance.n}")
    if any(not 0 <= j < instance.m for j in drop):
        raise ValueError(f"items {sorted(drop)} out of range for m={instance.m}")
    if instance.n - len(keep) != len(drop):
        raise ValueError(
            f"dropping {instance.n - len(keep)} agents but {len(drop)} items; the counts must match"
        )
    if not keep:
        return {}
    items = [j for j in range(instance.m) if j not in drop]
    out = {}
    for a in keep:
        row = [instance.values[a][j] for j in items]
        out[a] = share_of_row(row, len(keep), instance.kind, cap)[0]
    return out


def mms_bruteforce(row: Sequence[Fraction], bundles: int, kind: Kind) -> Fraction:
    """Plain ``bundles ** m`` enumeration, no pruning.  Only for small rows."""
    kind = Kind.parse(kind)
    best = None
    for labels in itertools.product(range(bundles), repeat=len(row)):
        sums = [Fraction(0)] * bundles
        for v, b in zip(row, labels):
            sums[b] += v
        val = min(sums) if kind is Kind.GOODS else max(sums)
        if best is None or (val > best if kind is Kind.GOODS else val < best):
            best = val
    return best


@dataclass(frozen=True)
class Certificate:
    values: tuple[Fraction, ...]
    mms: tuple[Fraction, ...]
    ratios: tuple[Fraction, ...]
    worst: Fraction
    #: agents whose share is zero; their ratio is reported as 1
    vacuous: tuple[int, ...] = ()

    def to_json(self) -> dict:
        return {
            "values": [str(v) for v in self.values],
            "mms": [str(v) for v in self.mms],
            "ratios": [str(v) for v in self.ratios],
            "worst_ratio": str(self.worst),
            "worst_ratio_float": float(self.worst),
            "vacuous_agents": [a + 1 for a in self.vacuous],
        }


def certify(instance: Instance, allocation: Allocation, *, cap: int = DEFAULT_CAP, mms: Sequence[Fraction] | None = None) -> Certificate:
    """Exact per-agent value, share and ratio for an allocation.

    Pass ``mms`` to skip the search when the shares are known by construction.
    """
    shares = tuple(mms) if mms is not None else mms_all(instance, cap=cap).values
    return Certificate(
        values=bundle_values(instance, allocation),
        mms=shares,
        ratios=agent_ratios(instance, allocation, shares),
        worst=worst_ratio(instance, allocation, shares),
        vacuous=tuple(i for i, s in enumerate(shares) if s == 0),
    )
