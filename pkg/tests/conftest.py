"""Shared oracles and instance factories.

The oracles here deliberately avoid the package's tables and kernels:
field arithmetic is schoolbook polynomial arithmetic on coefficient lists
and rank is a scalar elimination written from scratch.
"""

import itertools
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from ldrncode.gf import field_create
from ldrncode.network import SOURCE, Network, NodeSpec, gen_random


class OracleField:
    """GF(p^k) over coefficient lists, constant term first."""

    def __init__(self, p, modulus):
        self.p = p
        self.modulus = list(modulus)
        self.k = len(modulus) - 1 if len(modulus) > 1 else 1
        self.q = p**self.k

    def coeffs(self, a):
        out = []
        for _ in range(self.k):
            out.append(a % self.p)
            a //= self.p
        return out

    def value(self, c):
        return sum(x * self.p**t for t, x in enumerate(c))

    def add(self, a, b):
        return self.value([(x + y) % self.p for x, y in zip(self.coeffs(a), self.coeffs(b))])

    def neg(self, a):
        return self.value([(-x) % self.p for x in self.coeffs(a)])

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if self.k == 1:
            return a * b % self.p
        ca, cb = self.coeffs(a), self.coeffs(b)
        prod = [0] * (2 * self.k - 1)
        for s, x in enumerate(ca):
            for t, y in enumerate(cb):
                prod[s + t] = (prod[s + t] + x * y) % self.p
        m = self.modulus  # monic, degree k
        for d in range(len(prod) - 1, self.k - 1, -1):
            c = prod[d]
            if c:
                for t in range(self.k + 1):
                    prod[d - self.k + t] = (prod[d - self.k + t] - c * m[t]) % self.p
        return self.value(prod[: self.k])

    def inv(self, a):
        for b in range(1, self.q):
            if self.mul(a, b) == 1:
                return b
        raise ZeroDivisionError


def oracle_rank(of, rows):
    """Rank by scalar elimination, pivoting from the last column backwards."""
    m = [list(map(int, r)) for r in rows]
    if not m or not m[0]:
        return 0
    ncols = len(m[0])
    rank = 0
    for c in range(ncols - 1, -1, -1):
        piv = next((r for r in range(rank, len(m)) if m[r][c]), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = of.inv(m[rank][c])
        m[rank] = [of.mul(inv, x) for x in m[rank]]
        for r in range(len(m)):
            if r != rank and m[r][c]:
                f = m[r][c]
                m[r] = [of.sub(x, of.mul(f, y)) for x, y in zip(m[r], m[rank])]
        rank += 1
    return rank


def oracle_matmul(of, a, b):
    a = [list(map(int, r)) for r in a]
    b = [list(map(int, r)) for r in b]
    n = len(b[0]) if b else 0
    out = []
    for row in a:
        acc = [0] * n
        for x, brow in zip(row, b):
            if x:
                acc = [of.add(s, of.mul(x, y)) for s, y in zip(acc, brow)]
        out.append(acc)
    return out


def oracle_for(field):
    return OracleField(field.p, field.modulus)


def oracle_cut(net, side_a, dest):
    """Cut capacity: sum over layers of rank G_i(B rows, A cols), assembled port by port."""
    of = oracle_for(net.field)
    side_a = set(side_a)
    total = 0
    for i in range(1, net.num_layers):
        G = net.transfer[i - 1]
        cols = [net.tx_slice(i, j).start + t for j in range(1, net.node_count(i) + 1)
                if (i, j) in side_a for t in range(net.node(i, j).tx)]
        rows = [net.rx_slice(i + 1, k).start + t for k in range(1, net.node_count(i + 1) + 1)
                if (i + 1, k) not in side_a for t in range(net.node(i + 1, k).rx)]
        if rows and cols:
            total += oracle_rank(of, [[G[r, c] for c in cols] for r in rows])
    return total


def oracle_min_cut(net, dest):
    """Brute force over every cut, nodes visited in reverse (layer, node) order."""
    free = [n for n in reversed(net.nodes()) if n != SOURCE and n != tuple(dest)]
    best = None
    for bits in itertools.product((1, 0), repeat=len(free)):
        side_a = {SOURCE} | {n for n, b in zip(free, bits) if b}
        v = oracle_cut(net, side_a, dest)
        best = v if best is None else min(best, v)
    return best


def make_net(field, layers, mats, dests):
    return Network(
        field,
        tuple(tuple(NodeSpec(rx, tx) for rx, tx in layer) for layer in layers),
        tuple(np.asarray(m, dtype=np.int64).reshape(
            sum(rx for rx, _ in layers[i + 1]), sum(tx for _, tx in layers[i])) for i, m in enumerate(mats)),
        tuple(dests),
    )


def identity_chain(field, R, M=2):
    """M layers of single nodes with rx = tx = R joined by identity transfers."""
    layers = [[(R, R)] for _ in range(M)]
    return make_net(field, layers, [np.eye(R, dtype=np.int64)] * (M - 1), [(M, 1)])


FIELDS_SMALL = [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (2, 3)]


def random_instance(seed, max_layers=5, max_nodes=3, max_dim=4, fields=FIELDS_SMALL, g=1, min_q=None):
    rng = np.random.default_rng(seed)
    choices = [f for f in fields if min_q is None or f[0] ** f[1] >= min_q]
    p, k = choices[rng.integers(len(choices))]
    M = int(rng.integers(2, max_layers + 1))
    counts = [1] + [int(rng.integers(1, max_nodes + 1)) for _ in range(M - 1)]
    lo = int(rng.integers(1, 3))
    hi = int(rng.integers(lo, max_dim + 1))
    density = float(rng.choice([0.4, 0.7, 1.0]))
    slots = sum(counts[1:])
    g = min(g, slots)
    return gen_random(int(rng.integers(1 << 30)), M, counts, (lo, hi), density, field_create(p, k), g)


@pytest.fixture
def gf2():
    return field_create(2)


@pytest.fixture
def gf4():
    return field_create(2, 2)


DATA = os.path.join(os.path.dirname(__file__), "data")
QUICKSTART = os.path.join(os.path.dirname(__file__), "..", "data", "quickstart.json")


def load_data(name):
    from ldrncode.network import load

    path = QUICKSTART if name == "quickstart" else os.path.join(DATA, name + ".json")
    with open(path, "rb") as fh:
        return load(fh.read())


def oracle_coding_vectors(net, code):
    """Receive-side global coding vectors per layer, propagated with scalar arithmetic."""
    of = oracle_for(net.field)
    R = code.rate
    Y = {1: [[0] * R for _ in range(net.rx_dim(1))]}
    for r, port in enumerate(code.source_ports):
        Y[1][port][r] = 1
    for i in range(1, net.num_layers):
        X = []
        for j in range(1, net.node_count(i) + 1):
            block = Y[i][net.rx_slice(i, j)]
            theta = code.theta[(i, j)].tolist()
            X.extend(oracle_matmul(of, theta, block) if theta and block else [[0] * R for _ in theta])
        Y[i + 1] = oracle_matmul(of, net.transfer[i - 1].tolist(), X) if X else [[0] * R for _ in range(net.rx_dim(i + 1))]
    return Y


def oracle_singular_layers(net, code):
    """(destination, layer) pairs whose flow rows of Y_i are singular; empty when every layer is full rank."""
    of = oracle_for(net.field)
    Y = oracle_coding_vectors(net, code)
    bad = []
    for t, flow in zip(net.destinations, code.flows):
        for i in range(1, t[0] + 1):
            rows = [Y[i][net.rx_slice(i, k).start + pos] for k, pos in flow.p_ports(i)]
            if oracle_rank(of, rows) != code.rate:
                bad.append((t, i))
    return bad


def oracle_next_products(state, extra=None):
    """For each active destination, the R x R product of the next layer's flow rows of G_i with
    the current layer's coding vectors, rebuilt from the assigned / not-yet-assigned ports.

    ``extra = (q, u)`` pretends port q has been assigned vector u.
    """
    net, i = state.net, state.layer
    G = net.transfer[i - 1]
    X = {q: state.X[i][q] for q in range(net.tx_dim(i)) if state.assigned[q]}
    if extra is not None:
        X[extra[0]] = extra[1]
    out = []
    for ds in state.active:
        flow = state.flows[ds.index]
        matched = {}
        for (j, p), (_, q) in flow.matching(i):
            matched[net.tx_slice(i, j).start + q] = net.rx_slice(i, j).start + p
        cols = sorted(set(matched) | set(X))
        rows = [X[q] if q in X else state.Y[i][matched[q]] for q in cols]
        sub = [[int(G[r, c]) for c in cols] for r in ds.rows_next]
        out.append(oracle_matmul(oracle_for(net.field), sub, rows))
    return out


MULTICAST_FIELDS = [(3, 1), (2, 2), (5, 1), (7, 1), (2, 3)]


def multicast_instance(seed, g, max_layers=5, max_nodes=3, max_dim=3):
    """Random network with g destinations over a field of order > g."""
    rng = np.random.default_rng(seed)
    choices = [pk for pk in MULTICAST_FIELDS if pk[0] ** pk[1] > g]
    p, k = choices[rng.integers(len(choices))]
    M = int(rng.integers(3, max_layers + 1))
    counts = [1] + [int(rng.integers(1, max_nodes + 1)) for _ in range(M - 1)]
    while sum(counts[1:]) < g:
        counts[int(rng.integers(1, M))] = max_nodes
    density = float(rng.choice([0.7, 0.85, 1.0]))
    return gen_random(int(rng.integers(1 << 30)), M, counts, (min(2, max_dim), max_dim), density, field_create(p, k), g)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for num in sorted(results):
            terminalreporter.write_line(results[num])
