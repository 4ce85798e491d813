"""Online allocators for chores.

The two-agent allocators compare costs against irrational thresholds
(``sqrt(2)`` and ``gamma(alpha)``).  Both comparisons are decided exactly on
rationals by squaring after isolating the square root.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

from .core import (
    GuaranteeViolation,
    Kind,
    OnlineAllocator,
    PreconditionViolation,
    argmin_first,
    to_scalar,
)


class ChoresAllocator(OnlineAllocator):
    kind = Kind.CHORES

    def __init__(self, n: int):
        super().__init__(n)
        self.bundle = [Fraction(0)] * n
        self.items_seen = 0

    def _give(self, agent: int, costs: Sequence[Fraction]) -> int:
        self.bundle[agent] += costs[agent]
        self.items_seen += 1
        return agent


class GreedyChores(ChoresAllocator):
    """Every item to an agent with the lowest cost for it."""

    def decide(self, costs):
        return self._give(argmin_first(costs), costs)


class ActiveGreedyChores(ChoresAllocator):
    """Greedy over active agents; an agent retires once its cost reaches ``threshold``.

    The last active agent absorbs everything that is left.
    """

    def __init__(self, n: int, threshold):
        super().__init__(n)
        self.threshold = to_scalar(threshold)
        self.active = list(range(n))

    def decide(self, costs):
        if len(self.active) == 1:
            return self._give(self.active[0], costs)
        i = min(self.active, key=lambda a: (costs[a], a))
        self._give(i, costs)
        if self.bundle[i] >= self.threshold:
            self.active.remove(i)
        return i


class NAgentChores(ActiveGreedyChores):
    """Retires agents at ``1 - 1/n``; (2 - 1/n)-competitive on normalized costs."""

    def __init__(self, n: int):
        super().__init__(n, 1 - Fraction(1, n))


class SmallChores(ActiveGreedyChores):
    """Retires agents at cost 1; (1 + alpha)-competitive when every cost is at most alpha."""

    def __init__(self, n: int, alpha, check_alpha: bool = True):
        super().__init__(n, 1)
        alpha = to_scalar(alpha)
        if not 0 < alpha <= 1:
            raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
        self.alpha = alpha
        self.check_alpha = check_alpha

    def decide(self, costs):
        if self.check_alpha:
            _check_small(costs, self.alpha, self.items_seen)
        return super().decide(costs)


def _check_small(costs, alpha, item):
    for a, c in enumerate(costs):
        if c > alpha:
            raise PreconditionViolation(f"item {item} costs {c} > alpha={alpha} to agent {a}")


def leq_sqrt2_times(x: Fraction, y: Fraction) -> bool:
    """Exact ``x <= sqrt(2) * y`` for ``x, y >= 0``."""
    return x * x <= 2 * y * y


class Sqrt2Chores(ChoresAllocator):
    """Two-agent allocator with ratio sqrt(2) on normalized costs.

    ``lower[i]`` tracks ``max(1, largest cost seen by agent i)``, a lower bound
    on that agent's share.  An item goes to the only agent that can take it
    without exceeding ``sqrt(2) * lower``; when both can, agent 0 takes it
    unless it is more than ``sqrt(2)`` times costlier for agent 0.

    On unnormalized input neither agent may fit.  With ``strict`` set that
    raises :class:`GuaranteeViolation`; otherwise the item goes to the agent
    whose cost grows least relative to its bound.
    """

    def __init__(self, n: int = 2, strict: bool = True):
        if n != 2:
            raise ValueError("this allocator is defined for two agents only")
        super().__init__(n)
        self.lower = [Fraction(1), Fraction(1)]
        self.strict = strict
        self.fallbacks = 0

    def decide(self, costs):
        for i in range(2):
            self.lower[i] = max(self.lower[i], costs[i])
        fits = [i for i in range(2) if leq_sqrt2_times(self.bundle[i] + costs[i], self.lower[i])]
        if not fits:
            if self.strict:
                raise GuaranteeViolation(
                    f"no agent can take item {self.items_seen} within sqrt(2) of its share",
                    {"bundle": list(self.bundle), "lower": list(self.lower), "costs": list(costs)},
                )
            self.fallbacks += 1
            return self._give(argmin_first((self.bundle[i] + costs[i]) / self.lower[i] for i in range(2)), costs)
        if len(fits) == 1:
            return self._give(fits[0], costs)
        return self._give(0 if leq_sqrt2_times(costs[0], costs[1]) else 1, costs)


def gamma_threshold(alpha) -> float:
    """Competitive ratio ``sqrt(alpha^2 - 4 alpha + 5) + alpha - 1`` for small chores."""
    a = float(alpha)
    return math.sqrt(a * a - 4 * a + 5) + a - 1


def rho_threshold(alpha) -> float:
    """Cost-ratio threshold ``(2 gamma - 2) / (2 - gamma)``."""
    g = gamma_threshold(alpha)
    return (2 * g - 2) / (2 - g)


def leq_gamma(x: Fraction, alpha: Fraction) -> bool:
    """Exact ``x <= gamma(alpha)``.

    ``gamma = sqrt(D) + alpha - 1`` with ``D = alpha^2 - 4 alpha + 5 > 0``.
    """
    d = alpha * alpha - 4 * alpha + 5
    y = x - alpha + 1
    return y <= 0 or y * y <= d


def leq_rho_times(x: Fraction, y: Fraction, alpha: Fraction) -> bool:
    """Exact ``x <= rho(alpha) * y`` for ``x, y >= 0``.

    With ``rho = (2g - 2)/(2 - g)`` and ``1 < g < 2`` this is
    ``x (2 - g) <= (2g - 2) y``, i.e. ``2x + 2y <= g (x + 2y)``.
    """
    if x == 0:
        return True
    return leq_gamma((2 * x + 2 * y) / (x + 2 * y), alpha)


class SmallChoresTwo(ChoresAllocator):
    """Two-agent allocator for costs bounded by ``alpha``; ratio ``gamma(alpha)``."""

    def __init__(self, n: int = 2, alpha=1, check_alpha: bool = True):
        if n != 2:
            raise ValueError("this allocator is defined for two agents only")
        super().__init__(n)
        alpha = to_scalar(alpha)
        if not 0 < alpha <= 1:
            raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
        self.alpha = alpha
        self.check_alpha = check_alpha
        self.gamma = gamma_threshold(alpha)
        self.rho = rho_threshold(alpha)

    def decide(self, costs):
        if self.check_alpha:
            _check_small(costs, self.alpha, self.items_seen)
        fits = [i for i in range(2) if leq_gamma(self.bundle[i] + costs[i], self.alpha)]
        if not fits and not self.check_alpha:
            # promise already waived: fall back to the smaller resulting cost
            return self._give(argmin_first(self.bundle[i] + costs[i] for i in range(2)), costs)
        if not fits:
            raise GuaranteeViolation(
                f"no agent can take item {self.items_seen} within gamma={self.gamma:.6f}",
                {"bundle": list(self.bundle), "costs": list(costs), "alpha": self.alpha},
            )
        if len(fits) == 1:
            return self._give(fits[0], costs)
        return self._give(0 if leq_rho_times(costs[0], costs[1], self.alpha) else 1, costs)


def sesqui_period(n: int) -> int:
    return n + (n + 1) // 2


def sesqui_owner(j: int, n: int) -> int:
    """0-based receiver of the ``j``-th item (0-based) under Sesqui-Round Robin.

    Positions ``0..n-1`` of each period go to agents ``0..n-1``; the remaining
    ``ceil(n/2)`` positions go back down from agent ``n-1``.
    """
    q = j % sesqui_period(n)
    # 2 f = 2n + 1 - |2q - (2n - 1)| with 1-based f
    twice = 2 * n + 1 - abs(2 * q - (2 * n - 1))
    return twice // 2 - 1


class SesquiRoundRobin(ChoresAllocator):
    """Purely positional schedule with period ``n + ceil(n/2)``; ignores costs."""

    def decide(self, costs):
        return self._give(sesqui_owner(self.items_seen, self.n), costs)


def greedy_chores(n: int) -> GreedyChores:
    return GreedyChores(n)


def alg4_chores(n: int) -> NAgentChores:
    return NAgentChores(n)


def alg5_sqrt2_chores(n: int = 2, strict: bool = True) -> Sqrt2Chores:
    return Sqrt2Chores(n, strict)


def alg6_sesqui_round_robin(n: int) -> SesquiRoundRobin:
    return SesquiRoundRobin(n)


def alg7_small_chores(n: int, alpha, check_alpha: bool = True) -> SmallChores:
    return SmallChores(n, alpha, check_alpha)


def alg8_small_chores_two(alpha, check_alpha: bool = True, n: int = 2) -> SmallChoresTwo:
    return SmallChoresTwo(n, alpha, check_alpha)
