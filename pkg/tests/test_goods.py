import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from onlinemms.core import Instance, PreconditionViolation, run_stream, worst_ratio
from onlinemms.experiments import GeneratorConfig, generate_instance
from onlinemms.goods import (
    CappedGreedyGoods,
    GreedyGoods,
    MonotoneGoods,
    SmallGoods,
    TwoAgentGoods,
    alg3_small_goods,
)
from onlinemms.instances import random_monotone, random_normalized, random_small
from onlinemms.oracle import mms_all

from conftest import greedy_trap


def owners(alloc):
    return list(alloc.owner)


def test_greedy_identical_rows_go_to_first():
    inst = Instance("goods", [[1, 2, 3], [1, 2, 3], [1, 2, 3]])
    assert owners(run_stream(GreedyGoods(3), inst)) == [0, 0, 0]


def test_greedy_greedy_trap():
    assert owners(run_stream(GreedyGoods(2), greedy_trap())) == [1, 1, 0]


def test_capped_greedy():
    assert owners(run_stream(CappedGreedyGoods(), greedy_trap())) == [1, 1, 0]
    inst = Instance("goods", [[1, 1], [1, 1]])
    assert owners(run_stream(CappedGreedyGoods(), inst)) == [0, 1]
    assert owners(run_stream(CappedGreedyGoods(), Instance("goods", [[1], [2]]))) == [1]
    # both capped: fall back to agent 0
    inst = Instance("goods", [[1, 1, 1], [1, 1, 1]])
    assert owners(run_stream(CappedGreedyGoods(), inst)) == [0, 1, 0]
    with pytest.raises(ValueError):
        CappedGreedyGoods(3)


def test_alg1_greedy_trap_trace():
    alg = TwoAgentGoods()
    assert owners(run_stream(alg, greedy_trap())) == [1, 0, 1]
    assert alg.large_to_both == 1


def test_alg1_first_item_large_to_both():
    inst = Instance("goods", [[1, F(1, 2), F(1, 2)], [1, F(1, 2), F(1, 2)]], normalized=True)
    assert owners(run_stream(TwoAgentGoods(), inst)) == [0, 1, 1]


def test_alg2_trace_all_retired_in_phase_one():
    # 1 >= 2/(2*2) retires agent 0; 1/2 >= (2 - 1)/(2*1) retires agent 1
    inst = Instance("goods", [[1, F(1, 2), F(1, 4), F(1, 4)]] * 2, normalized=True)
    alg = MonotoneGoods(2)
    alloc = run_stream(alg, inst)
    assert owners(alloc)[:2] == [0, 1]
    assert alg.active == [] and alg.leftovers == 2
    assert worst_ratio(inst, alloc, mms_all(inst).values) >= F(1, 2)


def test_alg2_phase_two_freezes_beta():
    inst = Instance("goods", [[F(1, 2)] * 4, [F(1, 2)] * 4], normalized=True)
    alg = MonotoneGoods(2)
    alloc = run_stream(alg, inst)
    # e1: 2 * 2 * 1/2 >= 2 retires agent 0; e2: 2 * 1 * 1/2 < 2 - 1/2 ends phase 1
    assert owners(alloc) == [0, 1, 1, 1]
    assert alg.beta == [F(3, 4), F(3, 4)]
    assert not alg.in_phase1


def test_alg2_single_agent():
    inst = Instance("goods", [[F(1, 2), F(1, 4), F(1, 4)]], normalized=True)
    alloc = run_stream(MonotoneGoods(1), inst)
    assert owners(alloc) == [0, 0, 0]


def test_alg2_on_experiment_instance():
    inst = generate_instance(GeneratorConfig(10, 100, "goods", seed=3, order="monotone"))
    assert inst.is_monotone()
    assert worst_ratio(inst, run_stream(MonotoneGoods(10), inst), [1] * 10) >= F(1, 2)


def test_alg3_trace():
    inst = Instance("goods", [[F(1, 3)] * 9] * 3, normalized=True)
    alg = SmallGoods(3, F(1, 2))
    alloc = run_stream(alg, inst)
    assert owners(alloc) == [0, 0, 1, 1, 2, 2, 2, 2, 2]
    assert worst_ratio(inst, alloc, mms_all(inst).values) == F(2, 3)


def test_alg3_tiny_alpha():
    n = 2
    inst = Instance("goods", [[F(1, 100)] * 200] * n, normalized=True)
    alloc = run_stream(SmallGoods(n, F(1, 100)), inst)
    assert worst_ratio(inst, alloc, [1, 1]) >= F(99, 100)


def test_alg3_single_agent_and_checks():
    assert owners(run_stream(SmallGoods(1, F(1, 2)), Instance("goods", [[F(1, 2), F(1, 2)]]))) == [0, 0]
    with pytest.raises(ValueError):
        SmallGoods(2, 1)
    with pytest.raises(PreconditionViolation):
        run_stream(SmallGoods(2, F(1, 4)), greedy_trap())
    # waived promise still runs
    run_stream(alg3_small_goods(2, F(1, 4), check_alpha=False), greedy_trap())


def test_alg3_waived_promise_does_not_alarm():
    alg = SmallGoods(2, F(1, 2), check_alpha=False)
    assert alg.decide((F(2), F(0))) == 0
    assert alg.active == [1]


def test_two_agent_only():
    with pytest.raises(ValueError):
        TwoAgentGoods(3)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2 ** 32), st.integers(1, 10))
def test_alg1_half_guarantee(seed, m):
    inst = random_normalized(random.Random(seed), 2, m, "goods")
    assert worst_ratio(inst, run_stream(TwoAgentGoods(), inst), mms_all(inst).values) >= F(1, 2)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32), st.integers(2, 4), st.integers(1, 10))
def test_alg2_half_guarantee_on_monotone(seed, n, m):
    inst = random_monotone(random.Random(seed), n, m, "goods")
    assert worst_ratio(inst, run_stream(MonotoneGoods(n), inst), mms_all(inst).values) >= F(1, 2)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32), st.sampled_from([F(1, 4), F(1, 2), F(2, 3)]))
def test_alg3_guarantee(seed, alpha):
    rng = random.Random(seed)
    n = rng.choice([2, 3])
    m = rng.randint(math.ceil(n / alpha), 12)
    inst = random_small(rng, n, m, "goods", alpha)
    ratio = worst_ratio(inst, run_stream(SmallGoods(n, alpha), inst), mms_all(inst).values)
    assert ratio >= 1 - alpha
