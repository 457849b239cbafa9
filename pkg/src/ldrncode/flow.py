"""Rate-R unicast flows: search, verification, and the copy-forward unicast scheme.

A flow to destination ``(K, d)`` picks, per node, receive ports ``p_hat`` and
transmit ports ``q_hat`` of equal size so that every inter-layer submatrix
``G_i(p_hat_{i+1}, q_hat_i)`` is R x R and nonsingular, ending with all R
receive ports on the destination. Ports are matched positionally: the r-th
smallest selected receive position of a node feeds its r-th smallest
selected transmit position.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field

import numpy as np

from .gf import inverse_array, matmul_array, matvec, rank_array
from .network import SOURCE, Network, Node


class FlowError(ValueError):
    pass


@dataclass(frozen=True)
class Flow:
    destination: Node
    rate: int
    # (layer, node) -> sorted positions; p_hat covers layers 1..K, q_hat layers 1..K-1
    p_hat: dict = dc_field(default_factory=dict)
    q_hat: dict = dc_field(default_factory=dict)

    @property
    def K(self) -> int:
        return self.destination[0]

    def p_ports(self, i: int) -> list[tuple[int, int]]:
        """(node, position) of the flow's receive ports in layer i, canonical order."""
        return [(j, pos) for (li, j), ps in sorted(self.p_hat.items()) if li == i for pos in ps]

    def q_ports(self, i: int) -> list[tuple[int, int]]:
        return [(j, pos) for (li, j), qs in sorted(self.q_hat.items()) if li == i for pos in qs]

    def matching(self, i: int) -> list[tuple[tuple[int, int], tuple[int, int]]]:
        """Matched ``((node, p_pos), (node, q_pos))`` pairs at layer i, ordered by q."""
        out = []
        for (li, j), qs in sorted(self.q_hat.items()):
            if li != i:
                continue
            ps = self.p_hat.get((li, j), ())
            out.extend(((j, p), (j, q)) for p, q in zip(ps, qs))
        return out

    def to_dict(self) -> dict:
        layers = []
        for i in range(1, self.K + 1):
            nodes = []
            for (li, j) in sorted(set(self.p_hat) | set(self.q_hat)):
                if li != i:
                    continue
                ps = list(self.p_hat.get((li, j), ()))
                qs = list(self.q_hat.get((li, j), ()))
                nodes.append(
                    {"node": j, "p_hat": ps, "q_hat": qs, "matching": [[p, q] for p, q in zip(ps, qs)] if qs else []}
                )
            layers.append({"layer": i, "nodes": nodes})
        return {
            "destination": {"layer": self.destination[0], "node": self.destination[1]},
            "rate": self.rate,
            "layers": layers,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Flow":
        dest = (int(doc["destination"]["layer"]), int(doc["destination"]["node"]))
        p_hat, q_hat = {}, {}
        for ldoc in doc["layers"]:
            i = int(ldoc["layer"])
            for n in ldoc["nodes"]:
                j = int(n["node"])
                p_hat[(i, j)] = tuple(int(x) for x in n["p_hat"])
                if n.get("q_hat"):
                    q_hat[(i, j)] = tuple(int(x) for x in n["q_hat"])
        return cls(dest, int(doc["rate"]), p_hat, q_hat)


# ---------------------------------------------------------------------------
# search


def _compositions(total: int, caps: list[int]):
    """Count vectors summing to ``total`` with entry-wise caps, lexicographically descending
    in the first coordinate so that early nodes are preferred."""
    if not caps:
        if total == 0:
            yield ()
        return
    for c in range(min(total, caps[0]), -1, -1):
        for rest in _compositions(total - c, caps[1:]):
            yield (c,) + rest


class _Search:
    def __init__(self, net: Network, dest: Node, R: int):
        self.net = net
        self.K, self.d = dest
        self.R = R
        self.dead: set = set()

    def row_caps(self, i: int) -> list[int]:
        """Max receive ports per node of layer i that a flow may use."""
        net = self.net
        caps = []
        for k in range(1, net.node_count(i) + 1):
            n = net.node(i, k)
            if i == self.K:
                caps.append(self.R if k == self.d and n.rx >= self.R else 0)
            else:
                caps.append(min(n.rx, n.tx))
        return caps

    def run(self, i: int, counts: tuple[int, ...]):
        """Choices for layers i..K-1 given per-node flow sizes at layer i, or None."""
        if i == self.K:
            return []
        key = (i, counts)
        if key in self.dead:
            return None
        net, R = self.net, self.R
        G = net.transfer[i - 1]
        caps = self.row_caps(i + 1)
        row_owner = []  # (node, pos) per row of G_i, restricted to usable nodes
        row_index = []
        for k in range(1, net.node_count(i + 1) + 1):
            if caps[k - 1] == 0:
                continue
            sl = net.rx_slice(i + 1, k)
            for pos in range(sl.stop - sl.start):
                row_owner.append((k, pos))
                row_index.append(sl.start + pos)
        if len(row_index) >= R:
            col_choices = [
                itertools.combinations(range(net.node(i, j).tx), c) for j, c in enumerate(counts, start=1)
            ]
            for choice in itertools.product(*col_choices):
                cols = [net.tx_slice(i, j).start + pos for j, sel in enumerate(choice, start=1) for pos in sel]
                sub = G[np.ix_(row_index, cols)] if cols else np.zeros((len(row_index), 0), dtype=np.int64)
                if rank_array(net.field, sub) < R:
                    continue
                found = self._rows(i, sub, row_owner, caps, choice)
                if found is not None:
                    return found
        self.dead.add(key)
        return None

    def _rows(self, i, sub, row_owner, caps, col_choice):
        """Depth-first over independent row subsets in lexicographic order."""
        net, R = self.net, self.R
        n_rows = len(row_owner)
        m_next = net.node_count(i + 1)
        field = net.field
        chosen: list[int] = []
        used = [0] * m_next

        def rec(start):
            if len(chosen) == R:
                counts = tuple(used)
                if (i + 1, counts) in self.dead:
                    return None
                tail = self.run(i + 1, counts)
                if tail is None:
                    return None
                p_next = {}
                for r in chosen:
                    k, pos = row_owner[r]
                    p_next.setdefault(k, []).append(pos)
                return [(col_choice, p_next)] + tail
            need = R - len(chosen)
            for r in range(start, n_rows - need + 1):
                k = row_owner[r][0]
                if used[k - 1] >= caps[k - 1]:
                    continue
                if rank_array(field, sub[chosen + [r]]) < len(chosen) + 1:
                    continue
                chosen.append(r)
                used[k - 1] += 1
                out = rec(r + 1)
                if out is not None:
                    return out
                chosen.pop()
                used[k - 1] -= 1
            return None

        return rec(0)


def find_flow(net: Network, dest: Node, R: int) -> Flow | None:
    """A rate-R flow to ``dest``, or ``None`` when none exists."""
    dest = tuple(dest)
    K, d = dest
    if dest == SOURCE or not (2 <= K <= net.num_layers and 1 <= d <= net.node_count(K)):
        raise FlowError(f"{dest} is not a valid destination")
    if R < 0:
        raise FlowError("rate must be non-negative")
    src = net.node(*SOURCE)
    if R > src.rx or (R > 0 and net.node(K, d).rx < R):
        return None
    if R == 0:
        return Flow(dest, 0, {}, {})
    search = _Search(net, dest, R)
    plan = search.run(1, (R,))
    if plan is None:
        return None
    p_hat = {SOURCE: tuple(range(R))}
    q_hat = {}
    for i, (col_choice, p_next) in enumerate(plan, start=1):
        for j, sel in enumerate(col_choice, start=1):
            if sel:
                q_hat[(i, j)] = tuple(sel)
        for k, ps in p_next.items():
            p_hat[(i + 1, k)] = tuple(sorted(ps))
    return Flow(dest, R, p_hat, q_hat)


# ---------------------------------------------------------------------------
# verification


def _layer_indices(net: Network, flow: Flow, i: int):
    rows = [net.rx_slice(i + 1, k).start + pos for k, pos in flow.p_ports(i + 1)]
    cols = [net.tx_slice(i, j).start + pos for j, pos in flow.q_ports(i)]
    return rows, cols


def verify_flow(net: Network, flow: Flow) -> list[str]:
    """Violated flow properties (empty when the flow is valid)."""
    out = []
    K, d = flow.destination
    R = flow.rate
    if not (2 <= K <= net.num_layers and 1 <= d <= net.node_count(K)):
        return [f"destination {flow.destination} does not exist"]
    for side, table, dim in (("P", flow.p_hat, "rx"), ("Q", flow.q_hat, "tx")):
        for (i, j), ps in table.items():
            limit_layer = K if side == "P" else K - 1
            if not (1 <= i <= limit_layer and 1 <= j <= net.node_count(i)):
                out.append(f"{side}-hat entry for invalid node ({i},{j})")
                continue
            size = getattr(net.node(i, j), dim)
            if len(set(ps)) != len(ps) or any(not 0 <= x < size for x in ps):
                out.append(f"{side}-hat of node ({i},{j}) has invalid positions {list(ps)}")
    if out:
        return out
    if R > 0 and flow.p_hat.get(SOURCE, ()) != tuple(range(R)):
        out.append("source ports must be the first R receive positions")
    for i in range(1, K):
        for j in range(1, net.node_count(i) + 1):
            np_, nq = len(flow.p_hat.get((i, j), ())), len(flow.q_hat.get((i, j), ()))
            if np_ != nq:
                out.append(f"property 1: |P_hat| = {np_} != |Q_hat| = {nq} at node ({i},{j})")
        sp = len(flow.p_ports(i))
        sq = len(flow.q_ports(i))
        if sp != R or sq != R:
            out.append(f"property 2: layer {i} carries |P_hat| = {sp}, |Q_hat| = {sq}, rate {R}")
    if len(flow.p_hat.get((K, d), ())) != R:
        out.append(f"property 3: destination holds {len(flow.p_hat.get((K, d), ()))} ports, rate {R}")
    for k in range(1, net.node_count(K) + 1):
        if k != d and flow.p_hat.get((K, k)):
            out.append(f"property 3: node ({K},{k}) is not the destination but holds flow ports")
    if out:
        return out
    for i in range(1, K):
        rows, cols = _layer_indices(net, flow, i)
        if len(rows) != R or len(cols) != R:
            out.append(f"property 4: layer {i} submatrix is {len(rows)}x{len(cols)}, not {R}x{R}")
            continue
        sub = net.transfer[i - 1][np.ix_(rows, cols)] if R else np.zeros((0, 0), dtype=np.int64)
        if rank_array(net.field, sub) != R and R > 0:
            out.append(f"property 4: G_{i}(P_hat_{i + 1}, Q_hat_{i}) is singular")
    return out


def layer_matrices(net: Network, flow: Flow) -> list[np.ndarray]:
    """The R x R submatrices G_i(P_hat_{i+1}, Q_hat_i), i = 1..K-1."""
    mats = []
    for i in range(1, flow.K):
        rows, cols = _layer_indices(net, flow, i)
        mats.append(net.transfer[i - 1][np.ix_(rows, cols)])
    return mats


def unicast_transmit(net: Network, flow: Flow, w) -> np.ndarray:
    """Send ``w`` with pure port copying along ``flow`` and decode it at the destination."""
    problems = verify_flow(net, flow)
    if problems:
        raise FlowError("invalid flow: " + "; ".join(problems))
    field = net.field
    R = flow.rate
    w = np.asarray(w, dtype=np.int64)
    if w.shape != (R,):
        raise FlowError(f"message must have length {R}")
    K, d = flow.destination
    y = np.zeros(net.rx_dim(1), dtype=np.int64)
    y[:R] = w
    for i in range(1, net.num_layers):
        x = np.zeros(net.tx_dim(i), dtype=np.int64)
        if i < K:
            for (j, p), (_, q) in flow.matching(i):
                x[net.tx_slice(i, j).start + q] = y[net.rx_slice(i, j).start + p]
        y_next = matvec(field, net.transfer[i - 1], x)
        if i + 1 == K:
            received = y_next[[net.rx_slice(K, d).start + pos for pos in flow.p_hat.get((K, d), ())]]
        y = y_next
    if R == 0:
        return w.copy()
    total = np.eye(R, dtype=np.int64)
    for m in layer_matrices(net, flow):
        total = matmul_array(field, m, total)
    inv = inverse_array(field, total)
    if inv is None:  # excluded by verify_flow
        raise FlowError("accumulated transfer matrix is singular")
    return matvec(field, inv, received)
