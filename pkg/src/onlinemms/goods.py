"""Online allocators for goods."""

from __future__ import annotations

import logging
from fractions import Fraction
from typing import Sequence

from .core import (
    GuaranteeViolation,
    Kind,
    OnlineAllocator,
    PreconditionViolation,
    argmax_first,
    argmin_first,
    to_scalar,
)

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)


class GoodsAllocator(OnlineAllocator):
    kind = Kind.GOODS

    def __init__(self, n: int):
        super().__init__(n)
        self.bundle = [Fraction(0)] * n
        self.items_seen = 0

    def _give(self, agent: int, values: Sequence[Fraction]) -> int:
        self.bundle[agent] += values[agent]
        self.items_seen += 1
        return agent


class GreedyGoods(GoodsAllocator):
    """Every item to an agent with the highest value for it."""

    def decide(self, values):
        return self._give(argmax_first(values), values)


class CappedGreedyGoods(GoodsAllocator):
    """Two-agent greedy that stops serving an agent once it holds 1/2."""

    def __init__(self, n: int = 2):
        if n != 2:
            raise ValueError("capped greedy is defined for two agents only")
        super().__init__(n)

    def decide(self, values):
        open_ = [i for i in range(2) if self.bundle[i] < HALF]
        if not open_:
            return self._give(0, values)
        i = max(open_, key=lambda a: (values[a], -a))
        return self._give(i, values)


class TwoAgentGoods(GoodsAllocator):
    """Greedy with special handling of items worth at least 1/2 to both agents.

    Guarantees half of each agent's maximin share on normalized instances.
    """

    def __init__(self, n: int = 2):
        if n != 2:
            raise ValueError("this allocator is defined for two agents only")
        super().__init__(n)
        self.active = [0, 1]
        #: number of items that were large to both agents while both were active
        self.large_to_both = 0

    def decide(self, values):
        if len(self.active) == 1:
            return self._give(self.active[0], values)
        if values[0] >= HALF and values[1] >= HALF:
            i = argmin_first(self.bundle)
            self.active.remove(i)
            self.large_to_both += 1
            return self._give(i, values)
        i = argmax_first(values)
        self._give(i, values)
        if self.bundle[i] >= HALF:
            self.active.remove(i)
        return i


class MonotoneGoods(GoodsAllocator):
    """Two-phase allocator for items arriving in non-increasing value order.

    Phase 1 hands each item that is large relative to the remaining
    value per active agent to one such agent and retires it.  The first item
    that is large to nobody freezes the thresholds ``beta`` and is itself
    allocated by the phase-2 rule: greedy on ``v_j(e) / beta_j`` over active
    agents, retiring an agent once its bundle reaches ``beta``.

    Needs normalized valuations: the remaining value ``v_i(M \\ L)`` is read as
    ``n - v_i(L)``.
    """

    def __init__(self, n: int):
        super().__init__(n)
        self.in_phase1 = True
        self.active = list(range(n))
        self.large_value = [Fraction(0)] * n  # v_i(L)
        self.beta: list[Fraction] | None = None
        self.retired: list[int] = []
        self.retired_in_phase2: list[int] = []
        self.leftovers = 0

    def _retire(self, i: int) -> None:
        self.active.remove(i)
        self.retired.append(i)
        if not self.in_phase1:
            self.retired_in_phase2.append(i)

    def decide(self, values):
        if not self.active:
            # everyone retired in phase 1 and already holds half its share;
            # leftovers cannot hurt anyone
            self.leftovers += 1
            i = self.retired[-1]
            logger.debug("no active agent left; item %d goes to agent %d", self.items_seen, i)
            return self._give(i, values)
        if self.in_phase1:
            size = len(self.active)
            for i in self.active:
                if values[i] * 2 * size >= self.n - self.large_value[i]:
                    for a in range(self.n):
                        self.large_value[a] += values[a]
                    self._give(i, values)
                    self._retire(i)
                    return i
            self.in_phase1 = False
            self.beta = [(self.n - self.large_value[a]) / (2 * size) for a in range(self.n)]
        if len(self.active) == 1:
            return self._give(self.active[0], values)
        i = max(self.active, key=lambda a: (self._score(a, values[a]), -a))
        self._give(i, values)
        if self.bundle[i] >= self.beta[i]:
            self._retire(i)
        return i

    def _score(self, agent: int, value: Fraction):
        b = self.beta[agent]
        if b == 0:
            return (0, Fraction(0))
        return (1, value / b)


class SmallGoods(GoodsAllocator):
    """Greedy over active agents, retiring each at ``1 - alpha``.

    ``alpha`` is the promised upper bound on every single value.  With
    ``check_alpha`` set an item breaking the promise raises
    :class:`PreconditionViolation`.
    """

    def __init__(self, n: int, alpha, check_alpha: bool = True):
        super().__init__(n)
        alpha = to_scalar(alpha)
        if not 0 <= alpha < 1:
            raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
        self.alpha = alpha
        self.check_alpha = check_alpha
        self.threshold = 1 - alpha
        self.active = list(range(n))

    def decide(self, values):
        if self.check_alpha:
            for a, v in enumerate(values):
                if v > self.alpha:
                    raise PreconditionViolation(
                        f"item {self.items_seen} is worth {v} > alpha={self.alpha} to agent {a}"
                    )
        if len(self.active) == 1:
            return self._give(self.active[0], values)
        i = max(self.active, key=lambda a: (values[a], -a))
        before = self.bundle[i]
        self._give(i, values)
        if self.bundle[i] >= self.threshold:
            if self.check_alpha and not (before < self.threshold and self.bundle[i] < 1):
                raise GuaranteeViolation(
                    f"agent {i} retired at {self.bundle[i]}", {"bundle": list(self.bundle), "alpha": self.alpha}
                )
            self.active.remove(i)
        return i


def greedy_goods(n: int) -> GreedyGoods:
    return GreedyGoods(n)


def capped_greedy_goods(n: int = 2) -> CappedGreedyGoods:
    return CappedGreedyGoods(n)


def alg1_two_agent_goods(n: int = 2) -> TwoAgentGoods:
    return TwoAgentGoods(n)


def alg2_monotone_goods(n: int) -> MonotoneGoods:
    return MonotoneGoods(n)


def alg3_small_goods(n: int, alpha, check_alpha: bool = True) -> SmallGoods:
    return SmallGoods(n, alpha, check_alpha)
