"""Cut capacities, unicast min-cuts and multicast capacity by exhaustive enumeration.

Because edges only join consecutive layers, the capacity of a cut is a sum
of one rank term per layer, each depending only on which nodes of layers i
and i+1 sit on the source side. ``min_cut`` tabulates those terms once and
then enumerates every cut against the table.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Iterable

import numpy as np

from .gf import rank_array
from .network import SOURCE, Network, Node

CHUNK = 1 << 14


class CutError(ValueError):
    pass


def _side_rows(net: Network, i: int, nodes_b: Iterable[int]) -> list[int]:
    rows: list[int] = []
    for k in nodes_b:
        sl = net.rx_slice(i, k)
        rows.extend(range(sl.start, sl.stop))
    return rows


def _side_cols(net: Network, i: int, nodes_a: Iterable[int]) -> list[int]:
    cols: list[int] = []
    for j in nodes_a:
        sl = net.tx_slice(i, j)
        cols.extend(range(sl.start, sl.stop))
    return cols


def layer_term(net: Network, i: int, a_nodes: Iterable[int], b_nodes: Iterable[int]) -> int:
    """rank G_i(P-ports of B-side nodes in layer i+1, Q-ports of A-side nodes in layer i)."""
    rows = _side_rows(net, i + 1, b_nodes)
    cols = _side_cols(net, i, a_nodes)
    if not rows or not cols:
        return 0
    return rank_array(net.field, net.transfer[i - 1][np.ix_(rows, cols)])


def cut_capacity(net: Network, side_a: Iterable[Node], dest: Node | None = None) -> int:
    """Capacity of the cut whose source side is ``side_a``; every other node is on the sink side."""
    side_a = set(map(tuple, side_a))
    all_nodes = set(net.nodes())
    if not side_a <= all_nodes:
        raise CutError(f"unknown nodes in cut: {sorted(side_a - all_nodes)}")
    if SOURCE not in side_a:
        raise CutError("the source must lie on the A side of a cut")
    if dest is not None and tuple(dest) in side_a:
        raise CutError(f"destination {tuple(dest)} must lie on the B side of the cut")
    total = 0
    for i in range(1, net.num_layers):
        a_nodes = [j for j in range(1, net.node_count(i) + 1) if (i, j) in side_a]
        b_nodes = [k for k in range(1, net.node_count(i + 1) + 1) if (i + 1, k) not in side_a]
        total += layer_term(net, i, a_nodes, b_nodes)
    return total


def _term_tables(net: Network) -> list[np.ndarray]:
    """tables[i-1][amask, amask_next] = layer-i term with the given A-side bitmasks."""
    tables = []
    for i in range(1, net.num_layers):
        m, m_next = net.node_count(i), net.node_count(i + 1)
        t = np.zeros((1 << m, 1 << m_next), dtype=np.int64)
        for am in range(1 << m):
            a_nodes = [j + 1 for j in range(m) if am >> j & 1]
            for bm in range(1 << m_next):
                b_nodes = [k + 1 for k in range(m_next) if not bm >> k & 1]
                t[am, bm] = layer_term(net, i, a_nodes, b_nodes)
        tables.append(t)
    return tables


def _check_dest(net: Network, dest) -> Node:
    dest = tuple(dest)
    if dest not in net.destinations:
        raise CutError(f"{dest} is not a declared destination")
    return dest


def min_cut(net: Network, dest: Node, jobs: int = 1) -> int:
    """Minimum cut capacity between the source and ``dest`` over all 2^(|V|-2) cuts.

    Cuts are indexed by a binary counter over the non-terminal nodes in
    (layer, node) order, bit set meaning the node is on the source side.
    ``jobs`` partitions the counter range; the result does not depend on it.
    """
    dest = _check_dest(net, dest)
    free = [v for v in net.nodes() if v != SOURCE and v != dest]
    tables = _term_tables(net)
    # fixed bits of each layer's A-mask contributed by the terminals
    base = [0] * net.num_layers
    base[0] = 1
    bit_of = {v: b for b, v in enumerate(free)}

    def chunk_min(start: int, stop: int) -> int:
        counter = np.arange(start, stop, dtype=np.int64)
        masks = []
        for i in range(1, net.num_layers + 1):
            m = np.full(counter.shape, base[i - 1], dtype=np.int64)
            for j in range(1, net.node_count(i) + 1):
                b = bit_of.get((i, j))
                if b is not None:
                    m |= ((counter >> b) & 1) << (j - 1)
            masks.append(m)
        total = np.zeros(counter.shape, dtype=np.int64)
        for i in range(1, net.num_layers):
            total += tables[i - 1][masks[i - 1], masks[i]]
        return int(total.min())

    n_cuts = 1 << len(free)
    bounds = [(s, min(s + CHUNK, n_cuts)) for s in range(0, n_cuts, CHUNK)]
    if jobs > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return min(pool.map(lambda b: chunk_min(*b), bounds))
    return min(chunk_min(s, e) for s, e in bounds)


def min_cuts(net: Network, jobs: int = 1) -> list[int]:
    return [min_cut(net, t, jobs) for t in net.destinations]


def multicast_capacity(net: Network, jobs: int = 1) -> int:
    if not net.destinations:
        raise CutError("multicast capacity needs at least one destination")
    return min(min_cuts(net, jobs))
