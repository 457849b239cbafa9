"""Multicast code construction for layered linear deterministic relay networks."""

from .capacity import cut_capacity, min_cut, min_cuts, multicast_capacity
from .flow import Flow, find_flow, unicast_transmit, verify_flow
from .gf import BACKEND, Field, Matrix, field_create
from .multicast import MulticastCode, build_code, find_flows, init_state
from .network import Network, NodeSpec, gen_random, load, save, transfer, validate
from .rounds import RoundPlan, lift_network, pack, plan_rounds, required_rounds, unpack
from .sim import Trace, simulate, simulate_rounds, verify_code

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Field",
    "Flow",
    "Matrix",
    "MulticastCode",
    "Network",
    "NodeSpec",
    "RoundPlan",
    "Trace",
    "build_code",
    "cut_capacity",
    "field_create",
    "find_flow",
    "find_flows",
    "gen_random",
    "init_state",
    "lift_network",
    "load",
    "min_cut",
    "min_cuts",
    "multicast_capacity",
    "pack",
    "plan_rounds",
    "required_rounds",
    "save",
    "simulate",
    "simulate_rounds",
    "transfer",
    "unicast_transmit",
    "unpack",
    "validate",
    "verify_code",
    "verify_flow",
]
