from fractions import Fraction as F

import pytest

from onlinemms.core import Instance, ScriptedAllocator, play_match

EPS = F(1, 100)


def greedy_trap(eps=EPS) -> Instance:
    """Two agents where plain greedy leaves agent 0 with almost nothing."""
    return Instance(
        "goods",
        [[F(1, 2) - 2 * eps, F(3, 2) - eps, 3 * eps], [F(1, 2) - eps, F(3, 2), eps]],
        normalized=True,
    )


@pytest.fixture
def greedy_trap_instance():
    return greedy_trap()


def all_scripts(make_adversary, n, kind, limit=100000):
    """Yield every complete decision script against a deterministic adversary.

    Together the scripts cover every deterministic allocator.
    """
    stack = [[]]
    seen = 0
    while stack:
        script = stack.pop()
        alloc = ScriptedAllocator(n, kind, script)
        _, allocation = play_match(alloc, make_adversary())
        if allocation.m > len(script):
            # the default answer was used: branch on this position
            for c in range(n):
                stack.append(script + [c])
            continue
        seen += 1
        assert seen <= limit
        yield script
