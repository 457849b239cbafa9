"""Running a GF(p) network for k rounds as one use over GF(p^k).

Round t of a symbol is its coefficient of D^t, i.e. the t-th power-basis
digit of the extension-field encoding. Transfer matrices have constant
(prime-subfield) entries, so they act on every round independently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gf import Field, field_create
from .network import Network, check


class RoundsError(ValueError):
    pass


def required_rounds(p: int, g: int) -> int:
    """Smallest k with p^k >= g + 1, in integer arithmetic."""
    if p < 2:
        raise RoundsError("p must be at least 2")
    if g < 1:
        raise RoundsError("need at least one destination")
    k, size = 1, p
    while size < g + 1:
        k += 1
        size *= p
    return k


@dataclass(frozen=True)
class RoundPlan:
    p: int
    g: int
    k: int
    field: Field


def plan_rounds(p: int, g: int, k: int | None = None) -> RoundPlan:
    k = required_rounds(p, g) if k is None else int(k)
    if k < 1:
        raise RoundsError("round count must be positive")
    return RoundPlan(p, g, k, field_create(p, k))


def lift_network(net: Network, k: int) -> Network:
    """Same topology over GF(p^k); every transfer entry becomes its constant polynomial."""
    if not net.field.is_prime_field:
        raise RoundsError(f"can only lift networks over a prime field, not {net.field!r}")
    if k < 1:
        raise RoundsError("round count must be positive")
    if k == 1:
        return net
    field = field_create(net.field.p, k)
    # the encoding of a constant polynomial c is c itself
    return check(Network(field, net.layers, tuple(g.copy() for g in net.transfer), net.destinations))


def pack(field: Field, rounds) -> np.ndarray:
    """Combine k equal-length GF(p) vectors (round 0 first) into one GF(p^k) vector."""
    rounds = np.asarray(rounds, dtype=np.int64)
    if rounds.ndim != 2 or rounds.shape[0] != field.k:
        raise RoundsError(f"expected {field.k} round vectors")
    if rounds.size and (rounds.min() < 0 or rounds.max() >= field.p):
        raise RoundsError(f"round entries must lie in GF({field.p})")
    weights = field.p ** np.arange(field.k, dtype=np.int64)
    return weights @ rounds


def unpack(field: Field, vec) -> np.ndarray:
    """Inverse of :func:`pack`: a (k, n) array of GF(p) round vectors."""
    vec = np.asarray(vec, dtype=np.int64)
    if vec.ndim != 1:
        raise RoundsError("expected a vector")
    if vec.size and (vec.min() < 0 or vec.max() >= field.q):
        raise RoundsError(f"entries must lie in {field!r}")
    out = np.empty((field.k, vec.size), dtype=np.int64)
    v = vec.copy()
    for t in range(field.k):
        out[t] = v % field.p
        v //= field.p
    return out
