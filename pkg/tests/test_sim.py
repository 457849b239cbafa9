import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import identity_chain, load_data, multicast_instance
from ldrncode.gf import matvec
from ldrncode.multicast import build_code
from ldrncode.sim import DecodeFailure, SimulationError, global_coding_vectors, simulate, sweep_messages, verify_code


@pytest.fixture(scope="module")
def pinned():
    net = load_data("gf4_two_dest")
    return net, build_code(net)[0]


def test_zero_message(pinned):
    net, code = pinned
    tr = simulate(net, code, [0, 0, 0])
    assert all(not v.any() for v in tr.y.values()) and all(not v.any() for v in tr.x.values())
    assert all(not d.any() for d in tr.decoded) and all(tr.ok())


def test_identity_chain_carries_message(gf4):
    net = identity_chain(gf4, 2, M=4)
    code, _ = build_code(net)
    w = np.array([3, 1])
    tr = simulate(net, code, w)
    for i in range(1, 5):
        assert tr.y[i].tolist() == [3, 1]
    assert tr.decoded[0].tolist() == [3, 1]


def test_channel_law_in_trace(pinned):
    net, code = pinned
    tr = simulate(net, code, [1, 2, 3])
    for i in range(1, net.num_layers):
        assert np.array_equal(tr.y[i + 1], matvec(net.field, net.transfer[i - 1], tr.x[i]))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 63), st.integers(0, 63))
def test_trace_is_linear(a, b):
    net = load_data("gf4_two_dest")
    code, _ = build_code(net)
    f = net.field
    w1 = np.array([a % 4, a // 4 % 4, a // 16])
    w2 = np.array([b % 4, b // 4 % 4, b // 16])
    t1, t2, t3 = (simulate(net, code, w) for w in (w1, w2, f.vadd(w1, w2)))
    for i in t3.y:
        assert np.array_equal(t3.y[i], f.vadd(t1.y[i], t2.y[i]))
        assert np.array_equal(t3.x[i], f.vadd(t1.x[i], t2.x[i]))


def test_global_vectors_predict_trace(pinned):
    net, code = pinned
    Y = global_coding_vectors(net, code)
    w = np.array([2, 0, 3])
    tr = simulate(net, code, w)
    for i in Y:
        assert np.array_equal(matvec(net.field, Y[i], w), tr.y[i])


def test_decode_failure_raised(pinned):
    net, code = pinned
    theta = dict(code.theta)
    m = theta[(3, 1)].copy()
    m[0, 0] = net.field.add(int(m[0, 0]), 1)
    theta[(3, 1)] = m
    bad = type(code)(code.field, code.rate, theta, code.decoders, code.flows, code.source_ports)
    with pytest.raises(DecodeFailure) as exc:
        for w in sweep_messages(net.field, 3):
            simulate(net, bad, w)
    assert exc.value.destinations
    failures = verify_code(net, bad)
    assert failures and {f["check"] for f in failures} & {"condition", "decoder", "decode"}


def test_input_checks(pinned):
    net, code = pinned
    with pytest.raises(SimulationError):
        simulate(net, code, [1, 2])
    with pytest.raises(SimulationError):
        simulate(net, code, [1, 2, 4])
    with pytest.raises(SimulationError):
        simulate(load_data("gf2_two_dest"), code, [1, 2, 3])


def test_verify_code_accepts_built_codes():
    for seed in range(10):
        net = multicast_instance(seed, 3)
        for mode in ("deterministic", "randomized"):
            code, _ = build_code(net, mode=mode, seed=seed, max_retries=50)
            assert verify_code(net, code) == []


def test_sweep_messages():
    from ldrncode.gf import field_create

    f = field_create(3)
    assert len(list(sweep_messages(f, 3))) == 27
    assert len(list(sweep_messages(f, 6, limit=256, samples=100))) == 100
    a = [w.tolist() for w in sweep_messages(f, 6, samples=5, seed=1)]
    assert a == [w.tolist() for w in sweep_messages(f, 6, samples=5, seed=1)]
