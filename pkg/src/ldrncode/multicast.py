"""Layer-by-layer multicast code construction from per-destination unicast flows.

Global coding vectors are rows over GF^R: ``Y[i]`` holds one row per receive
port of layer i, ``X`` one row per transmit port of the layer being coded.
For every destination still downstream (``K_l >= i + 1``) the state keeps

* ``A``: a stack of coding vectors, initially the destination's flow rows of ``Y[i]``;
* ``F``: the matching columns of ``G_i`` restricted to the destination's next-layer flow rows;
* ``H = F A`` (R x R), kept nonsingular after every assignment, and ``H^-1``.

Row r of ``A`` and column r of ``F`` always belong to the same transmit port
(the ledger). Assigning port q either overwrites the ledger slot of q (q on
the destination's flow) or appends a new slot. By the matrix determinant
lemma the new product stays nonsingular iff a single scalar is nonzero:
``1 + (u - y(p_l)) . gamma_l`` for flow ports, ``1 + u . gamma_l`` otherwise,
with ``gamma_l = H^-1 alpha``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field

import numpy as np

from .capacity import multicast_capacity
from .flow import Flow, FlowError, find_flow
from .gf import Field, det_array, field_create, inverse_array, matmul_array, rank_array
from .network import SOURCE, Network, Node


class MulticastError(RuntimeError):
    pass


class InvariantError(MulticastError):
    """A proven invariant failed; indicates a bug, not bad input."""


class FieldTooSmallError(MulticastError):
    pass


class RandomizedAssignmentError(MulticastError):
    def __init__(self, layer, q, zero_factors):
        super().__init__(
            f"randomized assignment for port {q} of layer {layer} failed; "
            f"zero factors for destinations {zero_factors}"
        )
        self.zero_factors = zero_factors


@dataclass
class DestState:
    index: int  # position of the destination in net.destinations
    ledger: list  # transmit-port index per slot
    A: np.ndarray  # slots x R
    F: np.ndarray  # R x slots
    rows_next: list  # receive-port indices in layer i+1 used by the flow
    match: dict  # q index -> receive-port index it is matched with
    H: np.ndarray = None
    H_inv: np.ndarray = None


@dataclass
class Assignment:
    """One coding decision: local coefficients over the node's receive ports and the vector they give."""

    q: int
    theta: np.ndarray
    u: np.ndarray
    W: list = dc_field(default_factory=list)
    w: np.ndarray | None = None
    sigma: int | None = None
    draws: int = 1


class CodeState:
    def __init__(self, net: Network, flows: list[Flow]):
        if len(flows) != net.g:
            raise MulticastError(f"need one flow per destination ({net.g}), got {len(flows)}")
        rates = {f.rate for f in flows}
        if len(rates) > 1:
            raise MulticastError(f"flows have different rates {sorted(rates)}")
        self.R = rates.pop() if rates else 0
        for f, t in zip(flows, net.destinations):
            if f.destination != t:
                raise MulticastError(f"flow for {f.destination} supplied in place of destination {t}")
        sources = {f.p_hat.get(SOURCE, ()) for f in flows}
        if len(sources) > 1:
            raise MulticastError("flows disagree on the source ports")
        if self.R > net.node(*SOURCE).rx:
            raise MulticastError("rate exceeds the source receive dimension")
        self.net = net
        self.field: Field = net.field
        self.flows = flows
        self.layer = 1
        R = self.R
        Y1 = np.zeros((net.rx_dim(1), R), dtype=np.int64)
        Y1[:R, :R] = np.eye(R, dtype=np.int64)
        self.Y = {1: Y1}
        self.X = {}
        self.theta = {}
        self.decoders: dict[int, dict] = {}
        self._start_layer()

    # bookkeeping ----------------------------------------------------------------

    def _p_rows(self, flow: Flow, i: int) -> list[int]:
        return [self.net.rx_slice(i, k).start + pos for k, pos in flow.p_ports(i)]

    def _start_layer(self):
        i = self.layer
        net = self.net
        self.X[i] = np.zeros((net.tx_dim(i), self.R), dtype=np.int64)
        self.assigned = np.zeros(net.tx_dim(i), dtype=bool)
        for j in range(1, net.node_count(i) + 1):
            n = net.node(i, j)
            self.theta[(i, j)] = np.zeros((n.tx, n.rx), dtype=np.int64)
        self.active: list[DestState] = []
        if i >= net.num_layers:
            return
        G = net.transfer[i - 1]
        for l, flow in enumerate(self.flows):
            if flow.K < i + 1:
                continue
            ledger, match = [], {}
            for (j, p), (_, q) in flow.matching(i):
                qi = net.tx_slice(i, j).start + q
                pi = net.rx_slice(i, j).start + p
                ledger.append(qi)
                match[qi] = pi
            rows_next = self._p_rows(flow, i + 1)
            A = self.Y[i][[match[q] for q in ledger]]
            F = G[np.ix_(rows_next, ledger)] if ledger else np.zeros((self.R, 0), dtype=np.int64)
            ds = DestState(l, ledger, A, F, rows_next, match)
            self._refresh(ds)
            self.active.append(ds)

    def _refresh(self, ds: DestState):
        ds.H = matmul_array(self.field, ds.F, ds.A)
        ds.H_inv = inverse_array(self.field, ds.H)
        if ds.H_inv is None:
            raise InvariantError(
                f"F A became singular for destination {self.net.destinations[ds.index]} at layer {self.layer}"
            )

    def node_of(self, q: int) -> tuple[int, int]:
        """(node, position) owning transmit index q of the current layer."""
        return self.net.q_owner(self.layer)[q]

    def local_rows(self, q: int) -> np.ndarray:
        j, _ = self.node_of(q)
        return self.Y[self.layer][self.net.rx_slice(self.layer, j)]

    # scalar conditions ----------------------------------------------------------

    def gamma(self, ds: DestState, q: int) -> np.ndarray:
        """gamma_l = H^-1 alpha for the column that assigning q changes."""
        if q in ds.match:
            alpha = ds.F[:, ds.ledger.index(q)]
        else:
            alpha = self.net.transfer[self.layer - 1][ds.rows_next, q]
        return matmul_array(self.field, ds.H_inv, alpha.reshape(-1, 1))[:, 0]

    def factors(self, q: int, u) -> list[int]:
        """Per-active-destination scalar whose nonvanishing keeps F_l A_l nonsingular."""
        f = self.field
        out = []
        for ds in self.active:
            gam = self.gamma(ds, q)
            if q in ds.match:
                v = f.vsub(u, self.Y[self.layer][ds.match[q]])
            else:
                v = u
            out.append(f.add(1, f.dot(v, gam)))
        return out

    def tau(self, q: int, u) -> int:
        t = 1
        for x in self.factors(q, u):
            t = self.field.mul(t, x)
        return t

    # assignment strategies ------------------------------------------------------

    def next_port(self) -> int | None:
        free = np.flatnonzero(~self.assigned)
        return int(free[0]) if free.size else None

    def assign_deterministic(self, q: int) -> Assignment:
        f = self.field
        if f.q <= self.net.g:
            raise FieldTooSmallError(
                f"field of order {f.q} is not larger than the {self.net.g} destinations; "
                "lift the network to an extension field (see ldrncode.rounds)"
            )
        j, _ = self.node_of(q)
        base = self.net.rx_slice(self.layer, j).start
        Yi = self.Y[self.layer]
        R = self.R
        gam = {id(ds): self.gamma(ds, q) for ds in self.active}
        W = [
            ds
            for ds in self.active
            if q in ds.match and f.dot(Yi[ds.match[q]], gam[id(ds)]) != 0
        ]
        # combination c of the anchors y(p_l), l in W, with c . gamma_l != 0 for all l in W
        theta = np.zeros(self.net.node(self.layer, j).rx, dtype=np.int64)
        w = np.zeros(R, dtype=np.int64)
        for t, ds in enumerate(W):
            a_t = Yi[ds.match[q]]
            b_t = gam[id(ds)]
            e_t = ds.match[q] - base
            if t == 0:
                w = a_t.copy()
                theta[e_t] = 1
                continue
            if f.dot(w, b_t) != 0:
                continue
            forbidden = set()
            for prev in W[:t]:
                b_s = gam[id(prev)]
                ab = f.dot(a_t, b_s)
                if ab:
                    forbidden.add(f.neg(f.div(f.dot(w, b_s), ab)))
            lam = next(x for x in range(1, f.q) if x not in forbidden)
            w = f.vadd(w, f.vmul(lam, a_t))
            theta[e_t] = f.add(int(theta[e_t]), lam)
        in_w = {id(ds) for ds in W}
        forbidden = set()
        for ds in self.active:
            wg = f.dot(w, gam[id(ds)])
            if id(ds) in in_w:
                yg = f.dot(Yi[ds.match[q]], gam[id(ds)])
                forbidden.add(f.div(f.sub(yg, 1), wg))
            elif wg:
                forbidden.add(f.neg(f.inv(wg)))
        sigma = next((s for s in list(range(1, f.q)) + [0] if s not in forbidden), None)
        if sigma is None:  # at most g < |F| values are excluded
            raise InvariantError(f"no admissible scaling for port {q} at layer {self.layer}")
        u = f.vmul(sigma, w)
        theta = f.vmul(sigma, theta)
        return Assignment(q, theta, u, [ds.index for ds in W], w, sigma)

    def assign_randomized(self, q: int, rng, max_retries: int = 20) -> Assignment:
        rng = np.random.default_rng(rng)
        j, _ = self.node_of(q)
        rows = self.local_rows(q)
        last = None
        for attempt in range(max_retries + 1):
            theta = self.field.random(rng, rows.shape[0])
            u = self.combine(theta, rows)
            factors = self.factors(q, u)
            if all(x != 0 for x in factors):
                return Assignment(q, theta, u, draws=attempt + 1)
            last = factors
        zero = [self.net.destinations[ds.index] for ds, x in zip(self.active, last) if x == 0]
        raise RandomizedAssignmentError(self.layer, q, zero)

    def combine(self, theta, rows) -> np.ndarray:
        return matmul_array(self.field, np.asarray(theta, dtype=np.int64).reshape(1, -1), rows)[0]

    # state transitions ----------------------------------------------------------

    def apply_update(self, q: int, theta) -> np.ndarray:
        """Commit x_i(q) = theta . y_i(P_i[j]) and update every active destination."""
        if self.assigned[q]:
            raise MulticastError(f"port {q} of layer {self.layer} already assigned")
        theta = np.asarray(theta, dtype=np.int64)
        u = self.combine(theta, self.local_rows(q))
        j, pos = self.node_of(q)
        self.X[self.layer][q] = u
        self.theta[(self.layer, j)][pos] = theta
        self.assigned[q] = True
        G = self.net.transfer[self.layer - 1]
        for ds in self.active:
            if q in ds.match:
                ds.A = ds.A.copy()
                ds.A[ds.ledger.index(q)] = u
            else:
                ds.A = np.vstack([ds.A, u[None, :]])
                ds.F = np.hstack([ds.F, G[ds.rows_next, q][:, None]])
                ds.ledger.append(q)
            self._refresh(ds)
        return u

    def advance_layer(self):
        i = self.layer
        if not self.assigned.all():
            raise MulticastError(f"layer {i} still has unassigned transmit ports")
        if i >= self.net.num_layers:
            raise MulticastError("already at the last layer")
        Y_next = matmul_array(self.field, self.net.transfer[i - 1], self.X[i])
        for ds in self.active:
            if sorted(ds.ledger) != list(range(self.net.tx_dim(i))):
                raise InvariantError(f"ledger of destination {ds.index} does not cover layer {i}")
            if not np.array_equal(ds.H, Y_next[ds.rows_next]):
                raise InvariantError(
                    f"F A differs from the propagated coding vectors for destination "
                    f"{self.net.destinations[ds.index]} at layer {i + 1}"
                )
        self.Y[i + 1] = Y_next
        for ds in self.active:
            flow = self.flows[ds.index]
            if flow.K == i + 1:
                rows = Y_next[ds.rows_next]
                dec = inverse_array(self.field, rows)
                if dec is None:
                    raise InvariantError(f"destination {flow.destination} cannot decode")
                self.decoders[ds.index] = {"ports": list(flow.p_hat.get(flow.destination, ())), "matrix": dec}
        self.layer = i + 1
        self._start_layer()

    def flow_rows_full_rank(self, i: int | None = None) -> dict[int, bool]:
        """Nonsingularity of each relevant destination's flow rows of Y_i, recomputed from scratch."""
        i = self.layer if i is None else i
        out = {}
        for l, flow in enumerate(self.flows):
            if flow.K >= i:
                rows = self.Y[i][self._p_rows(flow, i)]
                out[l] = rank_array(self.field, rows) == self.R
        return out


# ---------------------------------------------------------------------------


@dataclass
class MulticastCode:
    field: Field
    rate: int
    theta: dict  # (layer, node) -> |Q| x |P| local encoding matrix
    decoders: list  # per destination: {"destination", "ports", "matrix"}
    flows: list
    source_ports: tuple
    mode: str = "deterministic"
    rounds: int = 1

    def to_dict(self) -> dict:
        return {
            "field": {"p": self.field.p, "k": self.field.k},
            "rate": self.rate,
            "mode": self.mode,
            "rounds": self.rounds,
            "source_ports": list(self.source_ports),
            "theta": [
                {"layer": i, "node": j, "matrix": np.asarray(m).tolist()} for (i, j), m in sorted(self.theta.items())
            ],
            "decoders": [
                {
                    "layer": d["destination"][0],
                    "node": d["destination"][1],
                    "ports": list(d["ports"]),
                    "matrix": np.asarray(d["matrix"]).tolist(),
                }
                for d in self.decoders
            ],
            "flows": [f.to_dict() for f in self.flows],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "MulticastCode":
        field = field_create(int(doc["field"]["p"]), int(doc["field"]["k"]))
        theta = {}
        for t in doc["theta"]:
            m = np.array(t["matrix"], dtype=np.int64)
            if m.ndim != 2:
                m = m.reshape(len(t["matrix"]), 0)
            theta[(int(t["layer"]), int(t["node"]))] = m
        decoders = [
            {
                "destination": (int(d["layer"]), int(d["node"])),
                "ports": [int(x) for x in d["ports"]],
                "matrix": np.array(d["matrix"], dtype=np.int64).reshape(len(d["ports"]), len(d["ports"])),
            }
            for d in doc["decoders"]
        ]
        return cls(
            field,
            int(doc["rate"]),
            theta,
            decoders,
            [Flow.from_dict(f) for f in doc.get("flows", [])],
            tuple(int(x) for x in doc["source_ports"]),
            doc.get("mode", "deterministic"),
            int(doc.get("rounds", 1)),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":")) + "\n"


def init_state(net: Network, flows: list[Flow]) -> CodeState:
    return CodeState(net, flows)


def find_flows(net: Network, R: int, jobs: int = 1) -> list[Flow]:
    def one(t):
        f = find_flow(net, t, R)
        if f is None:
            raise FlowError(f"no rate-{R} flow to destination {t}")
        return f

    if jobs > 1 and net.g > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(one, net.destinations))
    return [one(t) for t in net.destinations]


def build_code(
    net: Network,
    mode: str = "deterministic",
    seed=None,
    rate: int | None = None,
    max_retries: int = 20,
    transcript: bool = False,
    flows: list[Flow] | None = None,
    jobs: int = 1,
    on_port=None,
) -> tuple[MulticastCode, list[dict]]:
    """Construct a multicast code and return it with the (possibly empty) per-port transcript.

    ``on_port(state, q)`` is called before each assignment; it must not
    mutate the state.
    """
    if mode not in ("deterministic", "randomized"):
        raise ValueError(f"unknown mode {mode!r}")
    if not net.destinations:
        raise MulticastError("no destinations")
    if rate is None:
        rate = multicast_capacity(net, jobs)
    if mode == "deterministic" and net.field.q <= net.g and rate > 0:
        raise FieldTooSmallError(
            f"deterministic construction needs |F| > g; {net.field!r} has order {net.field.q} "
            f"for {net.g} destinations. Lift with ldrncode.rounds.lift_network"
        )
    if flows is None:
        flows = find_flows(net, rate, jobs)
    state = CodeState(net, flows)
    rng = np.random.default_rng(seed)
    log: list[dict] = []
    f = net.field
    for _ in range(1, net.num_layers):
        q = state.next_port()
        while q is not None:
            if on_port is not None:
                on_port(state, q)
            if mode == "deterministic":
                a = state.assign_deterministic(q)
            else:
                a = state.assign_randomized(q, rng, max_retries)
            state.apply_update(q, a.theta)
            if transcript:
                j, pos = state.node_of(q)
                entry = {
                    "layer": state.layer,
                    "node": j,
                    "port": pos,
                    "u": a.u.tolist(),
                    "theta": a.theta.tolist(),
                    "det_H": {str(net.destinations[ds.index]): det_array(f, ds.H) for ds in state.active},
                }
                if mode == "deterministic":
                    entry.update(
                        W=[list(net.destinations[l]) for l in a.W], w=a.w.tolist(), sigma=a.sigma
                    )
                else:
                    entry["draws"] = a.draws
                log.append(entry)
            q = state.next_port()
        state.advance_layer()
    decoders = []
    for l, t in enumerate(net.destinations):
        d = state.decoders.get(l)
        if d is None:
            if rate == 0:
                d = {"ports": [], "matrix": np.zeros((0, 0), dtype=np.int64)}
            else:
                raise InvariantError(f"no decoder produced for destination {t}")
        decoders.append({"destination": t, "ports": d["ports"], "matrix": d["matrix"]})
    code = MulticastCode(f, rate, dict(state.theta), decoders, list(flows), tuple(range(rate)), mode)
    return code, log
