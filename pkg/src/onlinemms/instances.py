"""Small random normalized instances for testing guarantees against the oracle."""

from __future__ import annotations

import random
from fractions import Fraction

from .core import Instance, Kind, to_scalar


def random_normalized(rng: random.Random, n: int, m: int, kind, *, max_weight: int = 20, zeros: bool = True) -> Instance:
    """Integer weights per agent, rescaled so every row sums to ``n``."""
    rows = []
    low = 0 if zeros else 1
    for _ in range(n):
        w = [rng.randint(low, max_weight) for _ in range(m)]
        if sum(w) == 0:
            w[rng.randrange(m)] = 1
        total = sum(w)
        rows.append([Fraction(n * x, total) for x in w])
    return Instance(Kind.parse(kind), rows, normalized=True)


def random_monotone(rng: random.Random, n: int, m: int, kind, **kw) -> Instance:
    """Like :func:`random_normalized` with every row sorted non-increasing."""
    inst = random_normalized(rng, n, m, kind, **kw)
    rows = [sorted(r, reverse=True) for r in inst.values]
    return Instance(inst.kind, rows, normalized=True)


def random_small(rng: random.Random, n: int, m: int, kind, alpha, *, moves: int = 40, grain: int = 8) -> Instance:
    """Normalized instance with every entry at most ``alpha``.

    Rows start flat at ``n / m`` and drift through random pairwise transfers
    that keep each entry inside ``[0, alpha]``.  Needs ``m * alpha >= n``.
    """
    alpha = to_scalar(alpha)
    if m * alpha < n:
        raise ValueError(f"{m} items of value at most {alpha} cannot sum to {n}")
    rows = []
    for _ in range(n):
        x = [Fraction(n, m)] * m
        for _ in range(moves):
            a, b = rng.sample(range(m), 2)
            room = min(x[a], alpha - x[b])
            if room <= 0:
                continue
            t = room * rng.randint(1, grain) / grain
            x[a] -= t
            x[b] += t
        rows.append(x)
    return Instance(Kind.parse(kind), rows, normalized=True)
