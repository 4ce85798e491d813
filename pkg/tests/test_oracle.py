import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from onlinemms.core import Allocation, Instance, Kind, run_stream
from onlinemms.experiments import GeneratorConfig, generate_instance
from onlinemms.goods import GreedyGoods, TwoAgentGoods
from onlinemms.instances import random_normalized
from onlinemms.oracle import (
    CapacityError,
    certify,
    mms_all,
    mms_bruteforce,
    mms_exact,
    mms_reduced,
    share_of_row,
    witness_objective,
)

from conftest import greedy_trap


def test_small_goods_example():
    inst = Instance("goods", [[F(1, 2), F(1, 2), 1]])
    assert mms_exact(inst, 0, 2) == 1


def test_greedy_trap_shares():
    inst = greedy_trap()
    assert mms_exact(inst, 0) == F(51, 100)
    assert mms_all(inst).values == (F(51, 100), F(1, 2))


def test_chores_examples():
    inst = Instance("chores", [[1, 1, 1]])
    assert mms_exact(inst, 0, 3) == 1
    row = [F(4, 11), F(4, 11), F(7, 11), F(7, 11)]
    assert share_of_row(row, 2, "chores")[0] == 1


def test_trivial_cases():
    zero = Instance("goods", [[0, 0, 0], [0, 0, 0]])
    assert mms_all(zero).values == (0, 0)
    single = Instance("chores", [[1, 2, 3]])
    assert mms_all(single).values == (6,)
    assert share_of_row([], 3, "goods") == (0, ())
    with pytest.raises(ValueError):
        share_of_row([1], 0, "goods")


def test_generated_instance_has_unit_shares():
    inst = generate_instance(GeneratorConfig(3, 9, "goods", seed=11))
    assert mms_all(inst).values == (1, 1, 1)
    inst = generate_instance(GeneratorConfig(3, 9, "chores", seed=11))
    assert mms_all(inst).values == (1, 1, 1)


def test_cap_is_enforced():
    inst = Instance("goods", [[1] * 17])
    with pytest.raises(CapacityError):
        mms_all(inst)
    assert mms_exact(inst, 0, 2, cap=17) == 8


def test_witness_achieves_share():
    inst = greedy_trap()
    share, part = mms_exact(inst, 1, witness=True)
    assert isinstance(part, Allocation) and part.n == 2
    assert witness_objective(inst, 1, part) == share


def test_mms_reduced_examples():
    inst = Instance("goods", [[1, 1, 1, 1], [1, 1, 1, 1]])
    assert mms_all(inst).values == (2, 2)
    assert mms_reduced(inst, [0], [0]) == {0: 3}
    assert mms_reduced(inst, [0, 1], []) == dict(enumerate(mms_all(inst).values))
    with pytest.raises(ValueError):
        mms_reduced(inst, [0], [])
    with pytest.raises(ValueError):
        mms_reduced(inst, [0], [9])


def test_mms_reduced_drop_largest():
    rng = random.Random(5)
    for _ in range(20):
        inst = random_normalized(rng, 3, 6, "goods")
        for drop_agent in range(3):
            keep = [a for a in range(3) if a != drop_agent]
            for a in keep:
                row = inst.row(a)
                big = max(range(6), key=row.__getitem__)
                assert mms_reduced(inst, keep, [big])[a] >= mms_exact(inst, a)


def test_certify_examples():
    inst = greedy_trap()
    cert = certify(inst, run_stream(TwoAgentGoods(), inst))
    # agent 1 holds 1/2 and its own share is 1/2
    assert cert.mms == (F(51, 100), F(1, 2))
    assert cert.ratios == (F(149, 51), 1)
    assert cert.worst == 1
    cert = certify(inst, run_stream(GreedyGoods(2), inst))
    assert cert.worst == F(3, 51)
    assert cert.to_json()["worst_ratio"] == "1/17"
    known = certify(inst, Allocation(2, (0, 1, 1)), mms=[1, 1])
    assert known.mms == (1, 1)


def test_certify_marks_vacuous_agents():
    inst = Instance("goods", [[0, 0], [1, 1]])
    cert = certify(inst, Allocation(2, (1, 1)))
    assert cert.vacuous == (0,)
    assert cert.to_json()["vacuous_agents"] == [1]


rows = st.lists(st.fractions(min_value=0, max_value=5, max_denominator=7), min_size=0, max_size=7)


@settings(max_examples=300, deadline=None)
@given(rows, st.integers(1, 3), st.sampled_from(list(Kind)))
def test_pruned_search_matches_bruteforce(row, k, kind):
    share, assign = share_of_row(row, k, kind)
    assert share == mms_bruteforce(row, k, kind)
    sums = [F(0)] * k
    for v, b in zip(row, assign):
        sums[b] += v
    assert (min(sums) if kind is Kind.GOODS else max(sums)) == share


@settings(max_examples=200, deadline=None)
@given(rows.filter(bool), st.integers(1, 4))
def test_share_bounds(row, k):
    total = sum(row)
    goods = share_of_row(row, k, Kind.GOODS)[0]
    chores = share_of_row(row, k, Kind.CHORES)[0]
    assert goods <= total / k
    assert chores >= max(max(row), total / k)
    assert goods <= chores


@settings(max_examples=150, deadline=None)
@given(rows.filter(bool), st.integers(1, 3), st.randoms(use_true_random=False), st.fractions(min_value=F(1, 5), max_value=5))
def test_share_invariant_under_order_and_scaling(row, k, rnd, scale):
    for kind in Kind:
        base = share_of_row(row, k, kind)[0]
        shuffled = list(row)
        rnd.shuffle(shuffled)
        assert share_of_row(shuffled, k, kind)[0] == base
        assert share_of_row([scale * v for v in row], k, kind)[0] == scale * base


def test_normalized_goods_share_at_most_one():
    rng = random.Random(2)
    for _ in range(50):
        n = rng.choice([2, 3, 4])
        inst = random_normalized(rng, n, rng.randint(1, 10), "goods")
        assert all(v <= 1 for v in mms_all(inst).values)
        inst = random_normalized(rng, n, rng.randint(1, 10), "chores")
        assert all(v >= 1 for v in mms_all(inst).values)
