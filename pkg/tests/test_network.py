import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import load_data, make_net
from ldrncode.capacity import multicast_capacity
from ldrncode.gf import field_create
from ldrncode.network import (
    NetworkFormatError,
    NetworkValidationError,
    from_dict,
    gen_random,
    load,
    save,
    transfer,
    validate,
)


def test_identity_two_layer_is_valid(gf2):
    net = make_net(gf2, [[(2, 2)], [(2, 2)]], [np.eye(2)], [(2, 1)])
    assert validate(net) == []


def test_wrong_row_count(gf2):
    net = make_net(gf2, [[(2, 2)], [(2, 2)]], [np.eye(2)], [(2, 1)])
    bad = type(net)(gf2, net.layers, (np.zeros((3, 2), dtype=np.int64),), net.destinations)
    problems = validate(bad)
    assert any("dimension mismatch at layer 1" in v for v in problems)


def test_duplicate_destination(gf2):
    net = make_net(gf2, [[(2, 2)], [(2, 2)]], [np.eye(2)], [(2, 1), (2, 1)])
    assert any("duplicate destination" in v for v in validate(net))


def test_other_violations(gf2):
    net = make_net(gf2, [[(1, 1)], [(1, 1)]], [[[1]]], [(1, 1), (3, 1)])
    problems = validate(net)
    assert any("is the source" in v for v in problems)
    assert any("does not exist" in v for v in problems)
    net = make_net(gf2, [[(1, 1)], [(1, 1)]], [[[2]]], [(2, 1)])
    assert any("not elements" in v for v in validate(net))


def test_labels_and_blocks(gf2):
    net = load_data("gf2_two_dest")
    assert net.P(2, 1)[0] == ("P", 2, 1, 0)
    assert net.Q(3) == [("Q", 3, j, t) for j in (1, 2) for t in range(net.node(3, j).tx)]
    for lab in net.P(3):
        assert net.G(2).row_index(lab) == net.p_index(lab)
    blk = net.block(2, 2, 1)
    assert np.array_equal(blk, net.transfer[1][net.rx_slice(3, 2), net.tx_slice(2, 1)])


def test_transfer_examples(gf2):
    net = make_net(gf2, [[(2, 2)], [(2, 2)]], [[[1, 1], [0, 1]]], [(2, 1)])
    assert transfer(net, 1, [1, 1]).tolist() == [0, 1]
    assert transfer(net, 1, [0, 0]).tolist() == [0, 0]
    ident = make_net(gf2, [[(3, 3)], [(3, 3)]], [np.eye(3)], [(2, 1)])
    assert transfer(ident, 1, [1, 0, 1]).tolist() == [1, 0, 1]
    with pytest.raises(ValueError):
        transfer(net, 1, [1, 1, 1])
    with pytest.raises(IndexError):
        transfer(net, 2, [1, 1])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([(2, 1), (3, 1), (2, 2), (5, 1), (2, 3)]))
def test_transfer_is_linear(seed, pk):
    f = field_create(*pk)
    net = gen_random(seed, 3, (1, 2, 2), (1, 3), 0.8, f, 1)
    rng = np.random.default_rng(seed)
    for i in (1, 2):
        x, x2 = f.random(rng, net.tx_dim(i)), f.random(rng, net.tx_dim(i))
        c = int(rng.integers(f.q))
        assert np.array_equal(transfer(net, i, f.vadd(x, x2)), f.vadd(transfer(net, i, x), transfer(net, i, x2)))
        assert np.array_equal(transfer(net, i, f.vmul(c, x)), f.vmul(c, transfer(net, i, x)))


def test_round_trip_four_layer_two_destinations():
    net = load_data("gf2_two_dest")
    assert net.num_layers == 4 and net.g == 2 and all(t[0] == 4 for t in net.destinations)
    assert load(save(net)) == net


@settings(max_examples=50, deadline=None)
@given(
    st.integers(0, 10**6),
    st.integers(2, 6),
    st.sampled_from([(2, 1), (3, 1), (2, 2), (7, 1)]),
    st.floats(0, 1),
)
def test_generated_networks_round_trip_and_validate(seed, M, pk, density):
    rng = np.random.default_rng(seed)
    counts = [1] + [int(rng.integers(1, 5)) for _ in range(M - 1)]
    g = min(int(rng.integers(0, 3)), sum(counts[1:]))
    net = gen_random(seed, M, counts, (0, 5), density, field_create(*pk), g)
    assert validate(net) == []
    assert load(save(net)) == net
    assert save(load(save(net))) == save(net)


def test_missing_field_key():
    doc = json.loads(save(load_data("gf2_small")))
    del doc["field"]
    with pytest.raises(NetworkFormatError, match="field"):
        load(json.dumps(doc))


def test_format_error_paths():
    doc = json.loads(save(load_data("gf2_small")))
    doc["layers"][1]["nodes"][0]["rx"] = "3"
    with pytest.raises(NetworkFormatError) as exc:
        from_dict(doc)
    assert exc.value.path == "$.layers[1].nodes[0].rx"
    with pytest.raises(NetworkFormatError):
        load(b"{not json")
    doc = json.loads(save(load_data("gf2_small")))
    doc["field"]["p"] = 4
    with pytest.raises(NetworkFormatError, match="field"):
        from_dict(doc)


def test_negative_dimension():
    doc = json.loads(save(load_data("gf2_small")))
    doc["layers"][1]["nodes"][0]["rx"] = -1
    with pytest.raises(NetworkValidationError) as exc:
        load(json.dumps(doc))
    assert any("negative dimension" in v for v in exc.value.violations)


def test_gen_deterministic():
    f = field_create(3)
    a = gen_random(42, 4, (1, 3, 2, 2), (1, 4), 0.6, f, 2)
    b = gen_random(42, 4, (1, 3, 2, 2), (1, 4), 0.6, f, 2)
    assert save(a) == save(b)
    assert save(gen_random(43, 4, (1, 3, 2, 2), (1, 4), 0.6, f, 2)) != save(a)


def test_gen_density_zero():
    net = gen_random(3, 4, (1, 2, 2, 2), (1, 3), 0.0, field_create(2), 2)
    assert all(not g.any() for g in net.transfer)
    assert multicast_capacity(net) == 0


def test_gen_destination_layers():
    net = gen_random(5, 4, (1, 2, 3, 3), (1, 3), 1.0, field_create(2), (3, [4]))
    assert net.destinations == ((4, 1), (4, 2), (4, 3))
    with pytest.raises(ValueError):
        gen_random(5, 4, (1, 2, 3, 3), (1, 3), 1.0, field_create(2), (4, [4]))


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(M=7),
        dict(node_counts=(2, 1, 1)),
        dict(node_counts=(1, 5, 1)),
        dict(dim_range=(3, 2)),
        dict(density=1.5),
    ],
)
def test_gen_rejects_bad_parameters(kwargs):
    args = dict(seed=0, M=3, node_counts=(1, 2, 1), dim_range=(1, 2), density=0.5, field=field_create(2), dest_spec=1)
    args.update(kwargs)
    if "M" in kwargs:
        args["node_counts"] = (1,) * kwargs["M"]
    with pytest.raises(ValueError):
        gen_random(**args)


def test_gen_pinned_instance_matches_golden_file():
    net = gen_random(1, 3, (1, 2, 1), (2, 3), 1.0, field_create(2), 1)
    assert net == load_data("gf2_small")
