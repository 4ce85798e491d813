"""Adaptive adversaries that force bad ratios on any deterministic allocator.

Each adversary keeps a permutation ``perm`` from *canonical* agents (the
agent names used when reasoning "w.l.o.g. agent 1 receives it") to real
agents.  Canonical labels are fixed as decisions come in.  Item vectors are
built in canonical order and translated to real agents before they are
emitted.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .core import (
    AdaptiveAdversary,
    Allocation,
    Instance,
    Kind,
    OnlineAllocator,
    play_match,
    to_scalar,
    worst_ratio,
)
from .oracle import DEFAULT_CAP, mms_all


class RelabelingAdversary(AdaptiveAdversary):
    """Bookkeeping shared by all constructions."""

    def __init__(self, n: int):
        super().__init__(n)
        self.perm: list[int] = []  # canonical index -> real agent
        self.emitted: list[tuple[Fraction, ...]] = []  # canonical vectors
        self.receivers: list[int] = []  # canonical receiver of every emitted item
        self.branch = "start"
        self.done = False

    def canon(self, real: int) -> int | None:
        try:
            return self.perm.index(real)
        except ValueError:
            return None

    def bind(self, real: int) -> int:
        """Canonical label of ``real``, assigning the next free label if needed."""
        c = self.canon(real)
        if c is None:
            self.perm.append(real)
            c = len(self.perm) - 1
        return c

    def unbound(self) -> list[int]:
        return [a for a in range(self.n) if a not in self.perm]

    def next_item(self, last_decision):
        if last_decision is not None:
            self.receivers.append(self.bind(last_decision))
        if self.done:
            return None
        vec = self.step()
        if vec is None:
            self.done = True
            return None
        vec = tuple(to_scalar(v) for v in vec)
        self.emitted.append(vec)
        return self.to_real(vec)

    def to_real(self, canonical_vec: Sequence[Fraction]) -> tuple[Fraction, ...]:
        # agents that never received anything get the remaining canonical labels in index order
        order = self.perm + [a for a in self.unbound()]
        out = [Fraction(0)] * self.n
        for c, real in enumerate(order):
            out[real] = canonical_vec[c]
        return tuple(out)

    def full_perm(self) -> list[int]:
        return self.perm + self.unbound()

    def canonical_instance(self, normalized: bool | None = None) -> Instance:
        return Instance.from_columns(self.kind, self.emitted, self.n, normalized)

    def canonical_receivers(self) -> list[int]:
        return list(self.receivers)

    def step(self) -> Sequence[Fraction] | None:
        raise NotImplementedError

    def closed_form_mms(self) -> tuple[Fraction, ...] | None:
        """Shares of the realized instance in canonical order, when known in closed form."""
        return None

    def real_mms(self) -> tuple[Fraction, ...] | None:
        canon = self.closed_form_mms()
        if canon is None:
            return None
        order = self.full_perm()
        out = [Fraction(0)] * self.n
        for c, real in enumerate(order):
            out[real] = canon[c]
        return tuple(out)

    def remainder(self, c: int, total) -> Fraction:
        """What canonical agent ``c`` still needs so its row sums to ``total``."""
        return to_scalar(total) - sum((v[c] for v in self.emitted), Fraction(0))

    def bound_description(self) -> str:
        return ""


# -- goods, n = 3 -------------------------------------------------------------


def _check_r_eps(r: int, eps: Fraction) -> None:
    if r < 2:
        raise ValueError("r must be an integer >= 2")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if r ** 4 * eps >= 1:
        raise ValueError(f"need r^3 * eps < 1/r; got r={r}, eps={eps}")


class Goods3Adversary(RelabelingAdversary):
    """Three-agent goods construction forcing a ratio below ``1/r``.

    Canonical agents 0, 1, 2 are the receivers of the first, second and (if
    any) third distinct allocation.  Branches:

    * ``"e2-to-first"``: the second item went to the holder of the first; one
      closing item follows, so some agent ends empty.
    * ``"e3-to-second"``: four items, closing item follows.
    * ``"case1"``: third item to agent 0 (five items).
    * ``"case2a"``: third and fourth items to agent 2 (five items).
    * ``"case2b"``: third item to agent 2, fourth to agent 0 or 1 (six items).
    """

    kind = Kind.GOODS
    normalized = True

    def __init__(self, r: int = 8, eps=Fraction(1, 10000)):
        super().__init__(3)
        self.r = int(r)
        self.eps = to_scalar(eps)
        _check_r_eps(self.r, self.eps)
        self.plan: list[tuple] = []

    def _closer(self):
        return tuple(self.remainder(c, 3) for c in range(3))

    def step(self):
        r, e = self.r, self.eps
        t = len(self.emitted)
        if self.plan:
            item = self.plan.pop(0)
            return self._closer() if item == "close" else item
        last = self.receivers[-1] if self.receivers else None
        if t == 0:
            return (e, e, e)
        if t == 1:
            return (r * r * e, e, e)
        if t == 2:
            if last == 0:
                self.branch = "e2-to-first"
                return self._finish([])
            return (r * e, r * r * e, e)
        if t == 3:
            if last == 1:
                self.branch = "e3-to-second"
                return self._finish([])
            if last == 0:
                self.branch = "case1"
                return self._finish([(r ** 3 * e, r * e, e)])
            self.branch = "case2"
            return (e, r * e, r * r * e)
        if t == 4:
            if last == 2:
                self.branch = "case2a"
                return self._finish([])
            self.branch = "case2b"
            return self._finish([(r * r * e, r ** 3 * e, r * r * e)])
        return None  # pragma: no cover

    def _finish(self, items):
        self.plan = list(items) + ["close"]
        self.plan.append(None)
        item = self.plan.pop(0)
        return self._closer() if item == "close" else item


# -- goods, n >= 4 -------------------------------------------------------------


class GoodsNAdversary(RelabelingAdversary):
    """Construction for ``n >= 4`` goods agents forcing a ratio below ``1/r``.

    The first ``n - 1`` items are worth ``r^3 eps`` to canonical agents that
    already hold an item and ``eps`` to everyone else.  If two of them land on
    the same agent, the pattern continues to ``n - 1`` items and a single
    closing item leaves two empty agents fighting over it.
    """

    kind = Kind.GOODS
    normalized = True

    def __init__(self, n: int = 4, r: int = 8, eps=Fraction(1, 10000)):
        if n < 4:
            raise ValueError("use Goods3Adversary for n = 3")
        super().__init__(n)
        self.r = int(r)
        self.eps = to_scalar(eps)
        _check_r_eps(self.r, self.eps)
        self.plan: list = []
        self.collided = False

    def _closer(self):
        return tuple(self.remainder(c, self.n) for c in range(self.n))

    def _pop(self):
        item = self.plan.pop(0)
        return self._closer() if item == "close" else item

    def _finish(self, items):
        self.plan = list(items) + ["close", None]
        return self._pop()

    def step(self):
        n, r, e = self.n, self.r, self.eps
        big = r ** 3 * e
        t = len(self.emitted)
        if self.plan:
            return self._pop()
        last = self.receivers[-1] if self.receivers else None
        if 1 <= t <= n - 1 and last != t - 1 and not self.collided:
            # a holder got a second pattern item: fewer than t agents are served
            self.collided = True
            self.branch = "collision"
        if t < n - 1:
            held = len(self.perm)
            return tuple(big if c < held else e for c in range(n))
        if self.collided:
            return self._finish([])
        if t == n - 1:
            return tuple(r * e if c == 0 else (e if c == n - 1 else big) for c in range(n))
        if t == n:
            if last not in (0, n - 1):
                self.branch = "case0"
                return self._finish([])
            if last == 0:
                self.branch = "case1"
                return self._finish([tuple(e if c == n - 1 else big for c in range(n))])
            self.branch = "case2"
            return tuple(e if c in (0, n - 1) else (r * e if c == 1 else big) for c in range(n))
        if t == n + 1:
            if last not in (0, 1):
                self.branch = "case2a"
                return self._finish([])
            self.branch = "case2b"
            return self._finish([tuple(e if c == n - 1 else big for c in range(n))])
        return None  # pragma: no cover


# -- goods, n = 2 -------------------------------------------------------------


@functools.lru_cache(maxsize=32)
def goods2_chain_values(delta: Fraction, l: int, k: int) -> tuple[Fraction, tuple[Fraction, ...], tuple[Fraction, ...]]:
    """``eps`` and the canonical values of items ``e_1 .. e_k``."""
    eps = Fraction(1, 10) / ((1 + delta) * (2 + delta) ** (l - 2))
    v1 = [eps] + [(2 + delta) ** (i - 2) * eps / (1 + delta) ** (i - 1) for i in range(2, k + 1)]
    v2 = [eps] + [(2 + delta) ** (min(i, l) - 2) * (1 + delta) * eps for i in range(2, k + 1)]
    return eps, tuple(v1), tuple(v2)


def goods2_final_value(delta: Fraction, l: int) -> Fraction:
    """Value of the last item to canonical agent 0 if every chain item went to it."""
    k = l + 18
    eps = Fraction(1, 10) / ((1 + delta) * (2 + delta) ** (l - 2))
    return 2 - eps * ((2 + delta) / (1 + delta)) ** (k - 1)


@functools.lru_cache(maxsize=32)
def goods2_min_chain(delta) -> int:
    """Smallest admissible chain length ``l`` for a given ``delta``."""
    delta = to_scalar(delta)
    # need (2 + d)^19 < (1 + d)^(l + 18)
    guess = math.ceil(19 * math.log(2 + float(delta)) / math.log(1 + float(delta))) - 18
    l = max(2, guess - 2)
    while goods2_final_value(delta, l) <= Fraction(19, 10):
        l += 1
    return l


def best_subset_sum(chain: Sequence[Fraction], bulk: Sequence[Fraction], cap: Fraction) -> Fraction:
    """Largest subset sum not exceeding ``cap``.

    ``chain`` must be super-increasing once sorted (every element larger than
    the sum of all smaller ones), which makes the greedy fill optimal;
    ``bulk`` is searched over all sub-multisets.
    """
    chain = sorted(chain, reverse=True)
    counts: dict[Fraction, int] = {}
    for v in bulk:
        counts[v] = counts.get(v, 0) + 1
    values = sorted(counts)
    if len(values) > 24:
        raise ValueError(f"{len(values)} distinct non-chain values; too many to enumerate")
    best = Fraction(0)

    def fill(residual: Fraction) -> Fraction:
        taken = Fraction(0)
        for v in chain:
            if v <= residual - taken:
                taken += v
        return taken

    def rec(idx: int, used: Fraction):
        nonlocal best
        if used > cap:
            return
        if idx == len(values):
            best = max(best, used + fill(cap - used))
            return
        v = values[idx]
        for c in range(counts[v] + 1):
            if used + c * v > cap:
                break
            rec(idx + 1, used + c * v)

    rec(0, Fraction(0))
    return best


def two_bundle_goods_share(row: Sequence[Fraction], chain_idx: Sequence[int] = ()) -> Fraction:
    """Maximin share over two bundles, for rows made of a super-increasing chain plus few distinct values."""
    total = sum(row, Fraction(0))
    top = max(row, default=Fraction(0))
    if 2 * top >= total:
        return total - top
    chain_set = set(chain_idx)
    chain = [row[j] for j in chain_set]
    bulk = [row[j] for j in range(len(row)) if j not in chain_set]
    return best_subset_sum(chain, bulk, total / 2)


class Goods2Adversary(RelabelingAdversary):
    """Two-agent goods construction forcing a ratio below ``1/2 + delta``.

    A chain of items, each worth about as much as all earlier items together
    but growing slightly faster for canonical agent 1, is offered.  As soon
    as the allocation becomes even (neither agent values its own bundle more
    than ``1 + delta`` times the other one) or a chain item reaches canonical
    agent 1, a closing item restores both row sums to 2 and ends the stream.
    """

    kind = Kind.GOODS
    normalized = True

    def __init__(self, delta=Fraction(1, 10), l: int | None = None):
        super().__init__(2)
        self.delta = to_scalar(delta)
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        min_l = goods2_min_chain(self.delta)
        if l is None:
            l = min_l
        if l < 2 or goods2_final_value(self.delta, l) <= Fraction(19, 10):
            raise ValueError(
                f"chain length l={l} too short for delta={self.delta}: the last item must be worth "
                f"more than 19/10 to agent 1; use l >= {min_l}"
            )
        self.l = l
        self.k = l + 18
        self.eps, self.v1, self.v2 = goods2_chain_values(self.delta, self.l, self.k)
        self.closing_reason: str | None = None
        self._sums = [[Fraction(0), Fraction(0)], [Fraction(0), Fraction(0)]]
        self._counted = 0

    def _held(self, c: int) -> tuple[Fraction, Fraction]:
        """(value of own bundle, value of the other bundle) for canonical agent ``c``."""
        while self._counted < len(self.receivers):
            vec, rec = self.emitted[self._counted], self.receivers[self._counted]
            for a in range(2):
                self._sums[a][0 if rec == a else 1] += vec[a]
            self._counted += 1
        own, other = self._sums[c]
        return own, other

    def uneven(self) -> bool:
        """Whether some agent values its bundle above ``1 + delta`` times the other one."""
        d = self.delta
        return any(own > (1 + d) * other for own, other in map(self._held, range(2)))

    def step(self):
        t = len(self.emitted)
        if self.closing_reason is not None:
            return None
        if t == 0:
            return (self.v1[0], self.v2[0])
        small = all(sum(self._held(c)) <= 1 for c in range(2))
        if small and not self.uneven():
            self.closing_reason = "even"
        elif self.receivers[-1] == 1:
            self.closing_reason = "chain-to-second"
        elif t == self.k:
            self.closing_reason = "chain-exhausted"
        if self.closing_reason is not None:
            self.branch = self.closing_reason
            return (self.remainder(0, 2), self.remainder(1, 2))
        return (self.v1[t], self.v2[t])

    def closed_form_mms(self):
        inst = self.canonical_instance()
        chain = [j for j in range(min(self.l - 1, inst.m))]
        return (
            two_bundle_goods_share(inst.row(0)),
            two_bundle_goods_share(inst.row(1), chain),
        )


# -- chores, n = 2 ------------------------------------------------------------


class Chores2Adversary(RelabelingAdversary):
    """Two-agent chores construction forcing a ratio of at least 15/11.

    With ``normalize=True`` the punishing branches that leave canonical agent
    1 below total cost 2 get one extra item that costs nothing to canonical
    agent 0 and tops agent 1 up to 2.  Costs only grow, so the forced ratio is
    unaffected, and every share stays exactly 1.
    """

    kind = Kind.CHORES
    normalized = True

    PUNISH = {3: Fraction(1), 4: Fraction(8, 11), 5: Fraction(5, 11), 6: Fraction(2, 11)}

    def __init__(self, normalize: bool = True):
        super().__init__(2)
        self.normalize = normalize
        self.normalized = normalize
        self.plan: list = []

    def step(self):
        u = Fraction(1, 11)
        t = len(self.emitted)
        if self.plan:
            item = self.plan.pop(0)
            if item == "top-up":
                rest = self.remainder(1, 2)
                return (Fraction(0), rest) if rest > 0 else None
            return item
        if self.branch.startswith("closed"):
            return None
        last = self.receivers[-1] if self.receivers else None
        if t == 0:
            return (4 * u, 4 * u)
        if t == 1:
            return (4 * u, 3 * u)
        if t == 2 and last == 0:
            self.branch = "closed:e2-to-first"
            self.plan = [(7 * u, 8 * u), None]
            return (7 * u, 7 * u)
        if 2 <= t <= 6:
            # e_3 .. e_6 are (3/11, 1/11); stop at the first one given to agent 1
            if t >= 3 and last == 1:
                i = t  # 1-based index of that item
                self.branch = f"closed:e{i}-to-second"
                self.plan = (["top-up"] if self.normalize else []) + [None]
                return (self.PUNISH[i], Fraction(1))
            if t == 6:
                self.branch = "closed:all-to-first"
                self.plan = [None]
                return (2 * u, Fraction(1))
            return (3 * u, u)
        return None  # pragma: no cover

    def closed_form_mms(self):
        return (Fraction(1), Fraction(1))


# -- without normalization ---------------------------------------------------


class UnnormalizedGoodsAdversary(RelabelingAdversary):
    """Two agents, three items, no normalization: ratio at most ``1/r``."""

    kind = Kind.GOODS
    normalized = False

    def __init__(self, r: int = 10):
        super().__init__(2)
        if r < 2:
            raise ValueError("r must be at least 2")
        self.r = to_scalar(r)

    def step(self):
        t = len(self.emitted)
        r = self.r
        if t == 0:
            return (1, 1)
        if t == 1:
            return (r, 1 / r)
        if t == 2 and self.receivers[-1] == 1:
            self.branch = "full"
            return (r, 1)
        if t == 2:
            self.branch = "e2-to-first"
        return None

    def closed_form_mms(self):
        if len(self.emitted) == 3:
            return (self.r, Fraction(1))
        return (Fraction(1), 1 / self.r)


class UnnormalizedChoresAdversary(RelabelingAdversary):
    """Chores without normalization: ratio above ``2 - 2 eps`` for two agents.

    Canonical agent 0 (receiver of the unit first item) then sees items of
    cost ``eps``; agents that hold nothing see costs growing by a factor
    ``1/eps`` per item.

    For ``n = 2`` the closing item follows the two-agent proof exactly.  For
    ``n >= 3`` it generalizes the same idea: the stream runs until every agent
    holds an item or some agent has taken ``ceil(1/eps) - 1`` items, and the
    closing item then costs each agent its whole row so far, which makes every
    share equal to that row total.  The two-agent bound is not guaranteed for
    ``n >= 3``; the realized ratio is reported exactly.
    """

    kind = Kind.CHORES
    normalized = False

    def __init__(self, eps=Fraction(1, 10), n: int = 2):
        if n < 2:
            raise ValueError("need at least two agents")
        super().__init__(n)
        self.eps = to_scalar(eps)
        if not 0 < self.eps < 1:
            raise ValueError("eps must lie in (0, 1)")
        self.l = math.ceil(1 / self.eps)
        self.first_cost: dict[int, Fraction] = {}  # canonical agent -> cost of its first item
        self.p: int | None = None

    def _vector(self, t: int) -> tuple[Fraction, ...]:
        """Canonical costs of the ``t``-th item (0-based)."""
        inv = 1 / self.eps
        held = len(self.perm)
        out = []
        for c in range(self.n):
            if c < held:
                out.append(self.eps * self.first_cost[c])
            else:
                out.append(inv ** t)
        return tuple(out)

    def _record_start(self):
        c = self.receivers[-1]
        if c not in self.first_cost:
            self.first_cost[c] = self.emitted[-1][c]

    def step(self):
        t = len(self.emitted)
        if self.branch.startswith("closed"):
            return None
        if t == 0:
            return (Fraction(1),) * self.n
        self._record_start()
        if self.n == 2:
            return self._step_two(t)
        return self._step_many(t)

    def _step_two(self, t: int):
        e = self.eps
        last = self.receivers[-1]
        if last == 1:
            # e_p went to the second agent, p = t (1-based)
            p = t
            self.p = p
            self.branch = "closed:first-to-second"
            return (1 + (p - 1) * e, (1 / e) ** (p - 1))
        if t == self.l:
            self.branch = "closed:all-to-first"
            return None
        return (e, (1 / e) ** t)

    def _step_many(self, t: int):
        counts = [self.receivers.count(c) for c in range(self.n)]
        if len(self.first_cost) == self.n or max(counts) >= self.l - 1:
            self.branch = "closed:row-total"
            return tuple(self.remainder(c, 0) * -1 for c in range(self.n))
        return self._vector(t)

    def closed_form_mms(self):
        inst = self.canonical_instance(False)
        e = self.eps
        if self.n >= 3:
            # the closing item equals the rest of each row
            return tuple(inst.row(c)[-1] for c in range(self.n))
        if self.p is not None:
            p = self.p
            return (1 + (p - 1) * e, (1 / e) ** (p - 1) + (1 / e) ** (p - 2))
        # everything went to agent 0: its share is the unit item, agent 1's the largest item
        row1 = inst.row(1)
        return (Fraction(1), max(max(row1), sum(row1) - max(row1)))


# -- outcomes ----------------------------------------------------------------


@dataclass(frozen=True)
class AdversaryOutcome:
    instance: Instance
    allocation: Allocation
    mms: tuple[Fraction, ...]
    forced_ratio: Fraction
    branch: str
    perm: tuple[int, ...]
    mms_source: str
    oracle_mms: tuple[Fraction, ...] | None = None
    notes: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "instance": self.instance.to_json(),
            "allocation": self.allocation.to_json(),
            "mms": [str(v) for v in self.mms],
            "mms_source": self.mms_source,
            "forced_ratio": str(self.forced_ratio),
            "forced_ratio_float": float(self.forced_ratio),
            "branch": self.branch,
            "perm": [a + 1 for a in self.perm],
        }


def run_adversary(allocator: OnlineAllocator, adversary: RelabelingAdversary, *, cap: int = DEFAULT_CAP, cross_check: bool = True) -> AdversaryOutcome:
    """Play a match and compute the forced ratio exactly.

    Shares come from the construction's closed form when it has one, else
    from the oracle.  With ``cross_check`` both are computed when the
    instance fits under ``cap`` and a mismatch raises ``AssertionError``.
    """
    instance, allocation = play_match(allocator, adversary)
    closed = adversary.real_mms()
    oracle = None
    if (closed is None or cross_check) and instance.m <= cap:
        oracle = mms_all(instance, cap=cap).values
    if closed is not None:
        if oracle is not None and tuple(oracle) != tuple(closed):
            raise AssertionError(f"closed-form shares {closed} disagree with the oracle {oracle}")
        mms, source = tuple(closed), "closed-form"
    elif oracle is not None:
        mms, source = tuple(oracle), "oracle"
    else:
        raise ValueError(f"no closed form and {instance.m} items exceed the cap {cap}")
    return AdversaryOutcome(
        instance=instance,
        allocation=allocation,
        mms=mms,
        forced_ratio=worst_ratio(instance, allocation, mms),
        branch=adversary.branch,
        perm=tuple(adversary.full_perm()),
        mms_source=source,
        oracle_mms=oracle,
    )


def goods3_adversary(r: int = 8, eps=Fraction(1, 10000)) -> Goods3Adversary:
    return Goods3Adversary(r, eps)


def goodsN_adversary(n: int, r: int = 8, eps=Fraction(1, 10000)) -> GoodsNAdversary:
    return GoodsNAdversary(n, r, eps)


def goods2_adversary(delta=Fraction(1, 10), l: int | None = None) -> Goods2Adversary:
    return Goods2Adversary(delta, l)


def chores2_adversary(normalize: bool = True) -> Chores2Adversary:
    return Chores2Adversary(normalize)


def unnormalized_goods_adversary(r: int = 10) -> UnnormalizedGoodsAdversary:
    return UnnormalizedGoodsAdversary(r)


def unnormalized_chores_adversary(eps=Fraction(1, 10), n: int = 2) -> UnnormalizedChoresAdversary:
    return UnnormalizedChoresAdversary(eps, n)
