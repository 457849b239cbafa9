"""Layered linear deterministic relay networks.

Layers and nodes are 1-based, matching the usual ``v_i(j)`` notation; port
positions inside a node's receive (P) or transmit (Q) block are 0-based.
A port label is the tuple ``(side, layer, node, position)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .gf import Field, Matrix, field_create, matvec
from .gf.field import FieldError

Node = tuple[int, int]
PortLabel = tuple[str, int, int, int]

SOURCE: Node = (1, 1)

# desk-scale bounds for generated instances
MAX_LAYERS = 6
MAX_NODES = 4
MAX_DIM = 5
MAX_DESTS = 6


class NetworkFormatError(ValueError):
    """Malformed network document; ``path`` locates the offending item."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class NetworkValidationError(ValueError):
    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


@dataclass(frozen=True)
class NodeSpec:
    rx: int
    tx: int


@dataclass(frozen=True, eq=False)
class Network:
    field: Field
    layers: tuple[tuple[NodeSpec, ...], ...]
    transfer: tuple[np.ndarray, ...]
    destinations: tuple[Node, ...]

    def __post_init__(self):
        layers = tuple(tuple(NodeSpec(int(n.rx), int(n.tx)) for n in layer) for layer in self.layers)
        mats = []
        for g in self.transfer:
            a = np.array(g, dtype=np.int64)
            if a.ndim != 2:
                a = a.reshape(0, 0) if a.size == 0 else np.atleast_2d(a)
            a.setflags(write=False)
            mats.append(a)
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "transfer", tuple(mats))
        object.__setattr__(self, "destinations", tuple((int(a), int(b)) for a, b in self.destinations))

    def __eq__(self, other):
        return (
            isinstance(other, Network)
            and self.field == other.field
            and self.layers == other.layers
            and self.destinations == other.destinations
            and len(self.transfer) == len(other.transfer)
            and all(a.shape == b.shape and np.array_equal(a, b) for a, b in zip(self.transfer, other.transfer))
        )

    __hash__ = None

    # shape ------------------------------------------------------------------

    @property
    def num_layers(self) -> int:
        return len(self.layers)

    @property
    def g(self) -> int:
        return len(self.destinations)

    def node_count(self, i: int) -> int:
        return len(self.layers[i - 1])

    def node(self, i: int, j: int) -> NodeSpec:
        return self.layers[i - 1][j - 1]

    def nodes(self) -> list[Node]:
        return [(i, j) for i in range(1, self.num_layers + 1) for j in range(1, self.node_count(i) + 1)]

    def rx_dim(self, i: int) -> int:
        return sum(n.rx for n in self.layers[i - 1])

    def tx_dim(self, i: int) -> int:
        return sum(n.tx for n in self.layers[i - 1])

    # labels -----------------------------------------------------------------

    def P(self, i: int, j: int | None = None) -> list[PortLabel]:
        nodes = range(1, self.node_count(i) + 1) if j is None else (j,)
        return [("P", i, jj, pos) for jj in nodes for pos in range(self.node(i, jj).rx)]

    def Q(self, i: int, j: int | None = None) -> list[PortLabel]:
        nodes = range(1, self.node_count(i) + 1) if j is None else (j,)
        return [("Q", i, jj, pos) for jj in nodes for pos in range(self.node(i, jj).tx)]

    @cached_property
    def _rx_offsets(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(np.cumsum([0] + [n.rx for n in layer]).tolist()) for layer in self.layers)

    @cached_property
    def _tx_offsets(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(np.cumsum([0] + [n.tx for n in layer]).tolist()) for layer in self.layers)

    def rx_slice(self, i: int, j: int) -> slice:
        off = self._rx_offsets[i - 1]
        return slice(off[j - 1], off[j])

    def tx_slice(self, i: int, j: int) -> slice:
        off = self._tx_offsets[i - 1]
        return slice(off[j - 1], off[j])

    def p_index(self, label: PortLabel) -> int:
        """Index of a P-port inside its layer's receive vector."""
        side, i, j, pos = label
        if side != "P" or not 0 <= pos < self.node(i, j).rx:
            raise KeyError(label)
        return self._rx_offsets[i - 1][j - 1] + pos

    def q_index(self, label: PortLabel) -> int:
        side, i, j, pos = label
        if side != "Q" or not 0 <= pos < self.node(i, j).tx:
            raise KeyError(label)
        return self._tx_offsets[i - 1][j - 1] + pos

    def q_owner(self, i: int) -> list[tuple[int, int]]:
        """(node, position) for each index of the layer-i transmit vector."""
        return [(j, pos) for j in range(1, self.node_count(i) + 1) for pos in range(self.node(i, j).tx)]

    def G(self, i: int) -> Matrix:
        """Transfer matrix from layer i to layer i+1 with P/Q labels."""
        return Matrix(self.field, self.transfer[i - 1], self.P(i + 1), self.Q(i))

    def block(self, i: int, k: int, j: int) -> np.ndarray:
        """G_i[k, j]: node j of layer i into node k of layer i+1."""
        return self.transfer[i - 1][self.rx_slice(i + 1, k), self.tx_slice(i, j)]

    # serialization -----------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "field": {"p": self.field.p, "k": self.field.k},
            "layers": [{"nodes": [{"rx": n.rx, "tx": n.tx} for n in layer]} for layer in self.layers],
            "transfer": [g.tolist() for g in self.transfer],
            "destinations": [{"layer": i, "node": j} for i, j in self.destinations],
        }


def validate(net: Network) -> list[str]:
    """Every structural violation in ``net`` (empty list when valid)."""
    out: list[str] = []
    M = net.num_layers
    if M < 2:
        out.append(f"network needs at least 2 layers, has {M}")
    if M >= 1 and net.node_count(1) != 1:
        out.append(f"layer 1 must hold exactly the source node, has {net.node_count(1)} nodes")
    dims_ok = True
    for i, layer in enumerate(net.layers, start=1):
        if not layer:
            out.append(f"layer {i} has no nodes")
        for j, n in enumerate(layer, start=1):
            if n.rx < 0 or n.tx < 0:
                out.append(f"negative dimension at node ({i},{j})")
                dims_ok = False
    if len(net.transfer) != max(M - 1, 0):
        out.append(f"expected {max(M - 1, 0)} transfer matrices, got {len(net.transfer)}")
    elif dims_ok:
        for i, g in enumerate(net.transfer, start=1):
            want = (net.rx_dim(i + 1), net.tx_dim(i))
            if g.shape != want:
                out.append(f"dimension mismatch at layer {i}: G has shape {g.shape}, expected {want}")
            elif g.size and (g.min() < 0 or g.max() >= net.field.q):
                out.append(f"entries of G at layer {i} are not elements of {net.field!r}")
    seen = set()
    for l, (i, j) in enumerate(net.destinations, start=1):
        if (i, j) in seen:
            out.append(f"duplicate destination ({i},{j})")
        seen.add((i, j))
        if (i, j) == SOURCE:
            out.append(f"destination {l} is the source")
        elif not (2 <= i <= M and 1 <= j <= net.node_count(i)):
            out.append(f"destination {l} ({i},{j}) does not exist")
    return out


def check(net: Network) -> Network:
    problems = validate(net)
    if problems:
        raise NetworkValidationError(problems)
    return net


def transfer(net: Network, i: int, x) -> np.ndarray:
    """y_{i+1} = G_i x_i."""
    if not 1 <= i <= net.num_layers - 1:
        raise IndexError(f"layer {i} has no outgoing transfer matrix")
    x = np.asarray(x, dtype=np.int64)
    if x.shape != (net.tx_dim(i),):
        raise ValueError(f"x_{i} must have length {net.tx_dim(i)}, got shape {x.shape}")
    return matvec(net.field, net.transfer[i - 1], x)


# ---------------------------------------------------------------------------
# JSON


def _need(obj, key, path, kind):
    if not isinstance(obj, dict):
        raise NetworkFormatError(path, "expected an object")
    if key not in obj:
        raise NetworkFormatError(f"{path}.{key}", f"missing required key {key!r}")
    val = obj[key]
    if kind is int and (isinstance(val, bool) or not isinstance(val, int)):
        raise NetworkFormatError(f"{path}.{key}", "expected an integer")
    if kind is list and not isinstance(val, list):
        raise NetworkFormatError(f"{path}.{key}", "expected an array")
    return val


def from_dict(doc) -> Network:
    if not isinstance(doc, dict):
        raise NetworkFormatError("$", "expected an object")
    fdoc = _need(doc, "field", "$", dict)
    p = _need(fdoc, "p", "$.field", int)
    k = _need(fdoc, "k", "$.field", int)
    try:
        field = field_create(p, k)
    except FieldError as exc:
        raise NetworkFormatError("$.field", str(exc)) from None
    layers = []
    for i, ldoc in enumerate(_need(doc, "layers", "$", list)):
        nodes = _need(ldoc, "nodes", f"$.layers[{i}]", list)
        layers.append(
            tuple(
                NodeSpec(_need(n, "rx", f"$.layers[{i}].nodes[{j}]", int), _need(n, "tx", f"$.layers[{i}].nodes[{j}]", int))
                for j, n in enumerate(nodes)
            )
        )
    mats = []
    for i, g in enumerate(_need(doc, "transfer", "$", list)):
        path = f"$.transfer[{i}]"
        if not isinstance(g, list) or not all(isinstance(r, list) for r in g):
            raise NetworkFormatError(path, "expected an array of rows")
        widths = {len(r) for r in g}
        if len(widths) > 1:
            raise NetworkFormatError(path, "rows have different lengths")
        for r, row in enumerate(g):
            for c, v in enumerate(row):
                if isinstance(v, bool) or not isinstance(v, int):
                    raise NetworkFormatError(f"{path}[{r}][{c}]", "expected an integer")
        if widths:
            cols = widths.pop()
        else:  # a zero-row matrix keeps its width only through the layer dimensions
            cols = sum(n.tx for n in layers[i]) if i < len(layers) and all(n.tx >= 0 for n in layers[i]) else 0
        mats.append(np.array(g, dtype=np.int64).reshape(len(g), cols))
    dests = []
    for l, d in enumerate(_need(doc, "destinations", "$", list)):
        dests.append((_need(d, "layer", f"$.destinations[{l}]", int), _need(d, "node", f"$.destinations[{l}]", int)))
    return Network(field, tuple(layers), tuple(mats), tuple(dests))


def save(net: Network) -> bytes:
    return (json.dumps(net.to_dict(), separators=(",", ":")) + "\n").encode("utf-8")


def load(data: bytes | str) -> Network:
    """Parse and validate a network document."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise NetworkFormatError("$", f"invalid JSON: {exc}") from None
    return check(from_dict(doc))


# ---------------------------------------------------------------------------
# random instances


def _parse_dest_spec(dest_spec, M):
    if isinstance(dest_spec, int):
        return dest_spec, list(range(2, M + 1))
    if isinstance(dest_spec, dict):
        return int(dest_spec["count"]), [int(x) for x in dest_spec.get("layers", range(2, M + 1))]
    count, layers = dest_spec
    return int(count), [int(x) for x in layers]


def gen_random(
    seed: int,
    M: int,
    node_counts: Sequence[int],
    dim_range: tuple[int, int],
    density: float,
    field: Field,
    dest_spec: int | dict | tuple[int, Iterable[int]] = 1,
) -> Network:
    """Random layered network, deterministic in ``seed``.

    ``dest_spec`` is a destination count (sampled from layers 2..M) or
    ``(count, allowed_layers)``. The source's receive dimension equals its
    transmit dimension so its message space never limits the rate below the
    cut capacity.
    """
    if not 2 <= M <= MAX_LAYERS:
        raise ValueError(f"layer count must be in [2, {MAX_LAYERS}], got {M}")
    node_counts = list(node_counts)
    if len(node_counts) != M:
        raise ValueError(f"need {M} node counts, got {len(node_counts)}")
    if node_counts[0] != 1:
        raise ValueError("layer 1 must contain exactly one node (the source)")
    if any(not 1 <= m <= MAX_NODES for m in node_counts):
        raise ValueError(f"node counts must be in [1, {MAX_NODES}]")
    lo, hi = dim_range
    if not 0 <= lo <= hi <= MAX_DIM:
        raise ValueError(f"dimension range must satisfy 0 <= lo <= hi <= {MAX_DIM}")
    if not 0.0 <= density <= 1.0:
        raise ValueError("density must lie in [0, 1]")
    count, allowed = _parse_dest_spec(dest_spec, M)
    if any(not 2 <= i <= M for i in allowed):
        raise ValueError("destination layers must lie in [2, M]")
    candidates = [(i, j) for i in sorted(set(allowed)) for j in range(1, node_counts[i - 1] + 1)]
    if count < 0 or count > MAX_DESTS:
        raise ValueError(f"destination count must be in [0, {MAX_DESTS}]")
    if count > len(candidates):
        raise ValueError(f"cannot place {count} destinations on {len(candidates)} available nodes")

    rng = np.random.default_rng(seed)
    layers = []
    for i, m in enumerate(node_counts, start=1):
        dims = rng.integers(lo, hi + 1, size=(m, 2))
        if i == 1:
            dims[0, 0] = dims[0, 1]
        layers.append(tuple(NodeSpec(int(rx), int(tx)) for rx, tx in dims))
    mats = []
    for i in range(1, M):
        rows = sum(n.rx for n in layers[i])
        cols = sum(n.tx for n in layers[i - 1])
        g = rng.integers(0, field.q, size=(rows, cols), dtype=np.int64)
        keep = rng.random(size=(rows, cols)) < density
        mats.append(np.where(keep, g, 0))
    picks = rng.choice(len(candidates), size=count, replace=False) if count else []
    dests = sorted(candidates[int(c)] for c in picks)
    return check(Network(field, tuple(layers), tuple(mats), tuple(dests)))
