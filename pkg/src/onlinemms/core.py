"""Instances, allocations and the online allocation loop.

All quantities are exact rationals (:class:`fractions.Fraction`).  Agents and
items are indexed from 0 inside the library; the JSON formats use 1-based
agent ids.
"""

from __future__ import annotations

import enum
import json
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Scalar = Fraction


class OnlineMMSError(Exception):
    """Base class for errors raised by this package."""


class DimensionError(OnlineMMSError, ValueError):
    """Shapes of instances, allocations or value vectors do not agree."""


class DecisionError(OnlineMMSError):
    """An allocator returned an agent index outside ``range(n)``."""


class PreconditionViolation(OnlineMMSError, ValueError):
    """An arriving item breaks a promise the allocator was built on."""


class GuaranteeViolation(OnlineMMSError, AssertionError):
    """A state that the correctness proof rules out was reached.

    Carries the allocator state at the time of the alarm in ``state``.
    """

    def __init__(self, message: str, state: dict | None = None):
        super().__init__(message)
        self.state = state or {}


def to_scalar(x) -> Fraction:
    """Convert ints, ``"p/q"`` strings, decimal strings and floats to a Fraction.

    Floats go through ``repr`` so ``0.1`` becomes ``1/10`` rather than the
    binary expansion.

    >>> to_scalar("3/51")
    Fraction(1, 17)
    >>> to_scalar(0.25)
    Fraction(1, 4)
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not values")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


def scalar_str(x: Fraction) -> str:
    return str(x)


class Kind(enum.Enum):
    GOODS = "goods"
    CHORES = "chores"

    @classmethod
    def parse(cls, value: "Kind | str") -> "Kind":
        if isinstance(value, Kind):
            return value
        return cls(value.lower())


@dataclass(frozen=True)
class Instance:
    """An ``n x m`` value (goods) or cost (chores) matrix.

    Column ``j`` is the ``j``-th arriving item.  When ``normalized`` is set every
    row must sum to exactly ``n``.
    """

    kind: Kind
    values: tuple[tuple[Fraction, ...], ...]
    normalized: bool = False

    def __post_init__(self):
        kind = Kind.parse(self.kind)
        rows = tuple(tuple(to_scalar(v) for v in row) for row in self.values)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "values", rows)
        if not rows:
            raise DimensionError("an instance needs at least one agent")
        m = len(rows[0])
        for i, row in enumerate(rows):
            if len(row) != m:
                raise DimensionError(f"row {i} has {len(row)} entries, expected {m}")
            for j, v in enumerate(row):
                if v < 0:
                    raise ValueError(f"negative entry {v} for agent {i}, item {j}")
        if self.normalized:
            n = len(rows)
            for i, row in enumerate(rows):
                if sum(row, Fraction(0)) != n:
                    raise ValueError(f"row {i} sums to {sum(row)}, not {n}")

    @classmethod
    def from_columns(cls, kind, columns: Sequence[Sequence], n: int, normalized: bool | None = None) -> "Instance":
        """Build from item vectors in arrival order.

        ``normalized=None`` sets the flag when every row happens to sum to ``n``.
        """
        for j, col in enumerate(columns):
            if len(col) != n:
                raise DimensionError(f"item {j} has {len(col)} entries, expected {n}")
        rows = tuple(tuple(to_scalar(col[i]) for col in columns) for i in range(n))
        if normalized is None:
            normalized = all(sum(row, Fraction(0)) == n for row in rows)
        return cls(kind, rows, normalized)

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def m(self) -> int:
        return len(self.values[0])

    def row(self, agent: int) -> tuple[Fraction, ...]:
        return self.values[agent]

    def column(self, item: int) -> tuple[Fraction, ...]:
        return tuple(row[item] for row in self.values)

    def columns(self) -> list[tuple[Fraction, ...]]:
        return [self.column(j) for j in range(self.m)]

    def row_sums(self) -> tuple[Fraction, ...]:
        return tuple(sum(row, Fraction(0)) for row in self.values)

    def is_monotone(self) -> bool:
        """True when every agent sees non-increasing values in arrival order."""
        return all(row[j] >= row[j + 1] for row in self.values for j in range(self.m - 1))

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "n": self.n,
            "m": self.m,
            "values": [[str(v) for v in row] for row in self.values],
            "normalized": self.normalized,
        }

    @classmethod
    def from_json(cls, data: dict | str) -> "Instance":
        if isinstance(data, str):
            data = json.loads(data)
        rows = [[to_scalar(v) for v in row] for row in data["values"]]
        inst = cls(data["kind"], rows, bool(data.get("normalized", False)))
        if "n" in data and data["n"] != inst.n:
            raise DimensionError(f"declared n={data['n']} but {inst.n} rows given")
        if "m" in data and data["m"] != inst.m:
            raise DimensionError(f"declared m={data['m']} but {inst.m} columns given")
        return inst


@dataclass(frozen=True)
class Allocation:
    """Owner of every item, in arrival order.  ``owner[j]`` is a 0-based agent."""

    n: int
    owner: tuple[int, ...]

    def __post_init__(self):
        owner = tuple(int(a) for a in self.owner)
        object.__setattr__(self, "owner", owner)
        for j, a in enumerate(owner):
            if not 0 <= a < self.n:
                raise DecisionError(f"item {j} owned by agent {a}, outside 0..{self.n - 1}")

    @property
    def m(self) -> int:
        return len(self.owner)

    @property
    def bundles(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.n)]
        for j, a in enumerate(self.owner):
            out[a].append(j)
        return tuple(tuple(b) for b in out)

    def bundle(self, agent: int) -> tuple[int, ...]:
        return tuple(j for j, a in enumerate(self.owner) if a == agent)

    def to_json(self) -> dict:
        return {"owner": [a + 1 for a in self.owner]}

    @classmethod
    def from_json(cls, data: dict | str, n: int) -> "Allocation":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(n, tuple(a - 1 for a in data["owner"]))


class OnlineAllocator(ABC):
    """An irrevocable, item-at-a-time allocation policy.

    Subclasses see ``n`` and ``kind`` at construction and one value vector per
    call to :meth:`decide`; they never learn the number of items.
    """

    kind: Kind

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("need at least one agent")
        self.n = n

    @abstractmethod
    def decide(self, values: Sequence[Fraction]) -> int:
        """Return the 0-based agent receiving the item with these values."""

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n})"


class ScriptedAllocator(OnlineAllocator):
    """Replays a fixed list of decisions, then answers ``default``.

    Every deterministic allocator facing a deterministic adversary is
    equivalent to one script, so enumerating scripts covers all of them.
    """

    def __init__(self, n: int, kind, script: Sequence[int] = (), default: int = 0):
        super().__init__(n)
        self.kind = Kind.parse(kind)
        self.script = list(script)
        self.default = default
        self.calls = 0

    def decide(self, values):
        t = self.calls
        self.calls += 1
        return self.script[t] if t < len(self.script) else self.default


class AdaptiveAdversary(ABC):
    """Item stream that sees every decision before producing the next item."""

    kind: Kind
    #: whether realized instances are promised to be normalized
    normalized: bool = True

    def __init__(self, n: int):
        self.n = n

    @abstractmethod
    def next_item(self, last_decision: int | None) -> Sequence[Fraction] | None:
        """Next value vector, or ``None`` once the stream is over.

        ``last_decision`` is the receiver of the previously emitted item
        (``None`` on the first call).
        """


def bundle_value(instance: Instance, allocation: Allocation, agent: int) -> Fraction:
    """Value (or cost) of ``agent``'s own bundle under its own row."""
    _check_compatible(instance, allocation)
    if not 0 <= agent < instance.n:
        raise DimensionError(f"agent {agent} out of range for n={instance.n}")
    row = instance.values[agent]
    return sum((row[j] for j, a in enumerate(allocation.owner) if a == agent), Fraction(0))


def bundle_values(instance: Instance, allocation: Allocation) -> tuple[Fraction, ...]:
    _check_compatible(instance, allocation)
    totals = [Fraction(0)] * instance.n
    for j, a in enumerate(allocation.owner):
        totals[a] += instance.values[a][j]
    return tuple(totals)


def _check_compatible(instance: Instance, allocation: Allocation) -> None:
    if allocation.n != instance.n or allocation.m != instance.m:
        raise DimensionError(
            f"allocation is {allocation.n}x{allocation.m}, instance is {instance.n}x{instance.m}"
        )


def _check_decision(allocator: OnlineAllocator, choice, item: int) -> int:
    if isinstance(choice, bool) or not isinstance(choice, int) or not 0 <= choice < allocator.n:
        raise DecisionError(f"{allocator!r} chose {choice!r} for item {item}")
    return choice


def _check_kind(allocator: OnlineAllocator, n: int, kind: Kind) -> None:
    if allocator.n != n:
        raise DimensionError(f"{allocator!r} built for n={allocator.n}, instance has n={n}")
    if getattr(allocator, "kind", kind) is not kind:
        raise DimensionError(f"{allocator!r} handles {allocator.kind.value}, not {kind.value}")


def run_stream(allocator: OnlineAllocator, instance: Instance) -> Allocation:
    """Feed the items of ``instance`` to ``allocator`` in arrival order."""
    _check_kind(allocator, instance.n, instance.kind)
    owner = []
    for j in range(instance.m):
        owner.append(_check_decision(allocator, allocator.decide(instance.column(j)), j))
    return Allocation(instance.n, tuple(owner))


def play_match(allocator: OnlineAllocator, adversary: AdaptiveAdversary) -> tuple[Instance, Allocation]:
    """Alternate adversary items and allocator decisions until the stream ends."""
    _check_kind(allocator, adversary.n, adversary.kind)
    columns: list[tuple[Fraction, ...]] = []
    owner: list[int] = []
    last = None
    while True:
        item = adversary.next_item(last)
        if item is None:
            break
        item = tuple(to_scalar(v) for v in item)
        if len(item) != adversary.n:
            raise DimensionError(f"adversary emitted {len(item)} values, expected {adversary.n}")
        columns.append(item)
        last = _check_decision(allocator, allocator.decide(item), len(owner))
        owner.append(last)
    n = adversary.n
    if columns:
        rows = tuple(tuple(col[i] for col in columns) for i in range(n))
    else:
        rows = tuple(() for _ in range(n))
    normalized = adversary.normalized and all(sum(r, Fraction(0)) == n for r in rows)
    return Instance(adversary.kind, rows, normalized), Allocation(n, tuple(owner))


def agent_ratios(instance: Instance, allocation: Allocation, mms: Sequence[Fraction]) -> tuple[Fraction, ...]:
    """Per-agent ``value / MMS``; a zero share counts as ratio 1 (vacuous)."""
    if len(mms) != instance.n:
        raise DimensionError(f"{len(mms)} shares for {instance.n} agents")
    out = []
    for v, share in zip(bundle_values(instance, allocation), mms):
        share = to_scalar(share)
        out.append(Fraction(1) if share == 0 else v / share)
    return tuple(out)


def worst_ratio(instance: Instance, allocation: Allocation, mms: Sequence[Fraction]) -> Fraction:
    """min over agents for goods, max over agents for chores."""
    ratios = agent_ratios(instance, allocation, mms)
    return min(ratios) if instance.kind is Kind.GOODS else max(ratios)


def argmax_first(keys: Iterable) -> int:
    """Index of the first maximum (ties go to the smallest index)."""
    best_i, best = -1, None
    for i, k in enumerate(keys):
        if best_i < 0 or k > best:
            best_i, best = i, k
    return best_i


def argmin_first(keys: Iterable) -> int:
    best_i, best = -1, None
    for i, k in enumerate(keys):
        if best_i < 0 or k < best:
            best_i, best = i, k
    return best_i
