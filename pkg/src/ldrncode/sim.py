"""End-to-end transmission of a message through a network running a multicast code."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .flow import verify_flow
from .gf import matmul_array, matvec, rank_array
from .multicast import MulticastCode
from .network import Network
from .rounds import RoundPlan, lift_network, pack, unpack


class SimulationError(ValueError):
    pass


class DecodeFailure(SimulationError):
    def __init__(self, destinations):
        super().__init__(f"decoding failed at destinations {destinations}")
        self.destinations = destinations


@dataclass
class Trace:
    message: np.ndarray
    y: dict  # layer -> received vector
    x: dict  # layer -> transmitted vector
    received: list  # per destination
    decoded: list  # per destination

    def ok(self) -> list[bool]:
        return [bool(np.array_equal(d, self.message)) for d in self.decoded]

    def to_dict(self, net: Network) -> dict:
        return {
            "message": self.message.tolist(),
            "layers": [
                {"layer": i, "y": self.y[i].tolist(), "x": self.x[i].tolist()} for i in sorted(self.y)
            ],
            "destinations": [
                {
                    "layer": t[0],
                    "node": t[1],
                    "received": r.tolist(),
                    "decoded": d.tolist(),
                    "ok": bool(np.array_equal(d, self.message)),
                }
                for t, r, d in zip(net.destinations, self.received, self.decoded)
            ],
        }


def check_code_shapes(net: Network, code: MulticastCode) -> list[str]:
    out = []
    if code.field != net.field:
        out.append(f"code is over {code.field!r} but the network is over {net.field!r}")
    if code.rate > net.node(1, 1).rx:
        out.append("rate exceeds the source receive dimension")
    for i in range(1, net.num_layers + 1):
        for j in range(1, net.node_count(i) + 1):
            n = net.node(i, j)
            m = code.theta.get((i, j))
            if m is None:
                out.append(f"no local encoding matrix for node ({i},{j})")
            elif m.shape != (n.tx, n.rx):
                out.append(f"local encoding matrix of node ({i},{j}) has shape {m.shape}, expected {(n.tx, n.rx)}")
            elif m.size and (m.min() < 0 or m.max() >= net.field.q):
                out.append(f"local encoding matrix of node ({i},{j}) has entries outside the field")
    if len(code.decoders) != net.g:
        out.append(f"code has {len(code.decoders)} decoders for {net.g} destinations")
    else:
        for t, d in zip(net.destinations, code.decoders):
            if tuple(d["destination"]) != t:
                out.append(f"decoder for {d['destination']} listed in place of {t}")
                continue
            node = net.node(*t)
            if len(d["ports"]) != code.rate or any(not 0 <= p < node.rx for p in d["ports"]):
                out.append(f"decoder ports of destination {t} are invalid")
            if d["matrix"].shape != (code.rate, code.rate):
                out.append(f"decoder matrix of destination {t} is not {code.rate}x{code.rate}")
    return out


def simulate(net: Network, code: MulticastCode, w, check: bool = True) -> Trace:
    """Run ``w`` through every node map and transfer matrix and decode at each destination.

    With ``check`` a :class:`DecodeFailure` is raised unless every destination
    recovers ``w`` exactly.
    """
    problems = check_code_shapes(net, code)
    if problems:
        raise SimulationError("; ".join(problems))
    field = net.field
    R = code.rate
    w = np.asarray(w, dtype=np.int64)
    if w.shape != (R,):
        raise SimulationError(f"message must have length {R}, got shape {w.shape}")
    if w.size and (w.min() < 0 or w.max() >= field.q):
        raise SimulationError(f"message entries must lie in {field!r}")
    y = {1: np.zeros(net.rx_dim(1), dtype=np.int64)}
    y[1][list(code.source_ports)] = w
    x = {}
    for i in range(1, net.num_layers + 1):
        xi = np.zeros(net.tx_dim(i), dtype=np.int64)
        for j in range(1, net.node_count(i) + 1):
            theta = code.theta[(i, j)]
            if theta.size:
                xi[net.tx_slice(i, j)] = matvec(field, theta, y[i][net.rx_slice(i, j)])
        x[i] = xi
        if i < net.num_layers:
            y[i + 1] = matvec(field, net.transfer[i - 1], xi)
    received, decoded = [], []
    for t, d in zip(net.destinations, code.decoders):
        r = y[t[0]][[net.rx_slice(*t).start + p for p in d["ports"]]]
        received.append(r)
        decoded.append(matvec(field, d["matrix"], r) if R else np.zeros(0, dtype=np.int64))
    trace = Trace(w, y, x, received, decoded)
    if check:
        bad = [t for t, ok in zip(net.destinations, trace.ok()) if not ok]
        if bad:
            raise DecodeFailure(bad)
    return trace


def simulate_rounds(net_base: Network, plan: RoundPlan, code: MulticastCode, messages, check: bool = True):
    """Send k base-field messages in one extension-field use; returns ``decoded[l][t]`` per destination and round."""
    messages = np.asarray(messages, dtype=np.int64)
    if messages.shape != (plan.k, code.rate):
        raise SimulationError(f"expected {plan.k} messages of length {code.rate}")
    lifted = lift_network(net_base, plan.k)
    w = pack(plan.field, messages)
    trace = simulate(lifted, code, w, check=check)
    return [unpack(plan.field, d) for d in trace.decoded]


def global_coding_vectors(net: Network, code: MulticastCode) -> dict:
    """Receive-side global coding matrices Y_i (one row per port) implied by the code's local maps."""
    field = net.field
    R = code.rate
    Y = {1: np.zeros((net.rx_dim(1), R), dtype=np.int64)}
    Y[1][list(code.source_ports), list(range(R))] = 1
    for i in range(1, net.num_layers):
        X = np.zeros((net.tx_dim(i), R), dtype=np.int64)
        for j in range(1, net.node_count(i) + 1):
            theta = code.theta[(i, j)]
            if theta.size:
                X[net.tx_slice(i, j)] = matmul_array(field, theta, Y[i][net.rx_slice(i, j)])
        Y[i + 1] = matmul_array(field, net.transfer[i - 1], X)
    return Y


def sweep_messages(field, R: int, limit: int = 256, samples: int = 100, seed: int = 0):
    """Every message when |F|^R <= limit, else ``samples`` seeded random ones."""
    if field.q**R <= limit:
        for w in itertools.product(range(field.q), repeat=R):
            yield np.array(w, dtype=np.int64)
        return
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        yield field.random(rng, R)


def verify_code(net: Network, code: MulticastCode, limit: int = 256, samples: int = 100) -> list[dict]:
    """Independent audit of a code: flows, per-layer flow-row rank, decoders, and a decode sweep.

    Returns a list of failures, each ``{"destination": (K, d) | None, "check": ..., "detail": ...}``.
    """
    out = []
    problems = check_code_shapes(net, code)
    if problems:
        return [{"destination": None, "check": "shape", "detail": p} for p in problems]
    field = net.field
    R = code.rate
    Y = global_coding_vectors(net, code)
    flows = code.flows if len(code.flows) == net.g else [None] * net.g
    for t, d, flow in zip(net.destinations, code.decoders, flows):
        if flow is not None:
            bad = verify_flow(net, flow)
            if flow.destination != t or flow.rate != R:
                bad = bad + ["flow does not match this destination and rate"]
            for b in bad:
                out.append({"destination": t, "check": "flow", "detail": b})
            if not bad:
                for i in range(1, t[0] + 1):
                    rows = [net.rx_slice(i, k).start + pos for k, pos in flow.p_ports(i)]
                    if rank_array(field, Y[i][rows]) != R and R:
                        out.append({"destination": t, "check": "condition", "detail": f"singular at layer {i}"})
        rx = Y[t[0]][[net.rx_slice(*t).start + p for p in d["ports"]]]
        if R and not np.array_equal(matmul_array(field, d["matrix"], rx), np.eye(R, dtype=np.int64)):
            out.append({"destination": t, "check": "decoder", "detail": "decoder does not invert the received coding vectors"})
    failed = set()
    for w in sweep_messages(field, R, limit, samples):
        trace = simulate(net, code, w, check=False)
        for t, ok in zip(net.destinations, trace.ok()):
            if not ok and t not in failed:
                failed.add(t)
                out.append({"destination": t, "check": "decode", "detail": f"message {w.tolist()} not recovered"})
    return out
