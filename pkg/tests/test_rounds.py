import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import load_data, oracle_singular_layers
from ldrncode.flow import find_flow
from ldrncode.gf import field_create, matvec
from ldrncode.multicast import build_code
from ldrncode.network import transfer
from ldrncode.rounds import RoundsError, lift_network, pack, plan_rounds, required_rounds, unpack
from ldrncode.sim import simulate, simulate_rounds, sweep_messages


def test_required_rounds_examples():
    assert required_rounds(2, 1) == 1
    assert required_rounds(2, 3) == 2
    assert required_rounds(5, 4) == 1


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_required_rounds_brute_force(p):
    for g in range(1, 51):
        k = 1
        while p**k < g + 1:
            k += 1
        assert required_rounds(p, g) == k
        assert p ** required_rounds(p, g) > g


def test_exact_powers_match_logarithm():
    for p, g in [(2, 7), (3, 8), (5, 24), (7, 48)]:
        assert required_rounds(p, g) == round(math.log(g + 1, p))


def test_required_rounds_rejects():
    with pytest.raises(RoundsError):
        required_rounds(1, 3)
    with pytest.raises(RoundsError):
        required_rounds(2, 0)


def test_plan():
    plan = plan_rounds(2, 3)
    assert plan.k == 2 and plan.field == field_create(2, 2)
    assert plan_rounds(3, 1, k=3).field.q == 27


def test_lift_identity_for_one_round():
    net = load_data("quickstart")
    assert lift_network(net, 1) is net


def test_lift_keeps_entries():
    net = load_data("quickstart")
    lifted = lift_network(net, 2)
    assert lifted.field == field_create(2, 2)
    assert all(np.array_equal(a, b) for a, b in zip(net.transfer, lifted.transfer))
    assert lifted.layers == net.layers and lifted.destinations == net.destinations
    with pytest.raises(RoundsError):
        lift_network(lifted, 2)


def test_pack_unpack_trivial():
    f = field_create(3)
    v = np.array([[0, 1, 2]])
    assert pack(f, v).tolist() == [0, 1, 2]
    assert unpack(f, [0, 1, 2]).tolist() == [[0, 1, 2]]
    f4 = field_create(2, 2)
    assert pack(f4, np.zeros((2, 3), dtype=np.int64)).tolist() == [0, 0, 0]


def test_pack_rejects():
    f4 = field_create(2, 2)
    with pytest.raises(RoundsError):
        pack(f4, [[0, 1]])
    with pytest.raises(RoundsError):
        pack(f4, [[0, 2], [0, 0]])
    with pytest.raises(RoundsError):
        unpack(f4, [4])


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([(2, 2), (2, 3), (3, 2), (5, 2), (2, 4)]), st.integers(0, 2**32 - 1), st.integers(0, 6))
def test_pack_round_trip(pk, seed, n):
    f = field_create(*pk)
    rng = np.random.default_rng(seed)
    rounds = rng.integers(0, f.p, size=(f.k, n))
    assert np.array_equal(unpack(f, pack(f, rounds)), rounds)
    v = f.random(rng, n)
    assert np.array_equal(pack(f, unpack(f, v)), v)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 3))
def test_transfer_commutes_with_packing(seed, k):
    net = load_data("quickstart")
    lifted = lift_network(net, k)
    rng = np.random.default_rng(seed)
    for i in range(1, net.num_layers):
        rounds = rng.integers(0, 2, size=(k, net.tx_dim(i)))
        lhs = transfer(lifted, i, pack(lifted.field, rounds))
        rhs = pack(lifted.field, np.array([transfer(net, i, x) for x in rounds]))
        assert np.array_equal(lhs, rhs)


def test_flow_existence_transfers():
    for name in ("quickstart", "gf2_two_dest", "gf2_small"):
        net = load_data(name)
        lifted = lift_network(net, 3)
        for t in net.destinations:
            for R in range(0, 5):
                if find_flow(net, t, R) is not None:
                    assert find_flow(lifted, t, R) is not None


def test_quickstart_lifts_and_decodes_both_rounds():
    net = load_data("quickstart")
    assert net.field.q == 2 and net.g == 3
    plan = plan_rounds(net.field.p, net.g)
    assert plan.k == 2
    lifted = lift_network(net, plan.k)
    code, _ = build_code(lifted)
    assert code.rate == 2
    assert oracle_singular_layers(lifted, code) == []
    for flat in sweep_messages(field_create(2), plan.k * code.rate):
        msgs = flat.reshape(plan.k, code.rate)
        decoded = simulate_rounds(net, plan, code, msgs)
        assert len(decoded) == 3
        for d in decoded:
            assert np.array_equal(d, msgs)


def test_simulate_rounds_single_round_matches_simulate():
    base = load_data("gf2_small")
    plan = plan_rounds(2, 1)
    assert plan.k == 1
    code, _ = build_code(base)
    for w in sweep_messages(base.field, code.rate):
        out = simulate_rounds(base, plan, code, w[None, :])
        assert np.array_equal(out[0][0], simulate(base, code, w).decoded[0])


def test_simulate_rounds_zero():
    net = load_data("quickstart")
    plan = plan_rounds(2, 3)
    code, _ = build_code(lift_network(net, plan.k))
    out = simulate_rounds(net, plan, code, np.zeros((2, code.rate), dtype=np.int64))
    assert all(not d.any() for d in out)
