"""Command-line interface: ``ldrncode {gen,capacity,flow,code,simulate,verify}``.

All results go to stdout as JSON. Exit status is 0 on success, 1 when a
verification (or flow feasibility) check fails, 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import capacity, flow as flowmod, multicast, network, rounds, sim
from .gf import field_create
from .gf.field import FieldError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _emit(obj, out=None):
    text = json.dumps(obj, indent=2, sort_keys=False) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _read(path: str) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _load_net(path: str, validate: bool = True) -> network.Network:
    data = _read(path)
    if validate:
        return network.load(data)
    return network.from_dict(json.loads(data))


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _dim_range(text: str) -> tuple[int, int]:
    for sep in ("..", "-", ":"):
        if sep in text:
            lo, hi = text.split(sep, 1)
            return int(lo), int(hi)
    v = int(text)
    return v, v


def _dest_spec(text: str, M: int):
    if "@" in text:
        count, layers = text.split("@", 1)
        return int(count), _int_list(layers)
    return int(text)


def _net_for_code(net: network.Network, code: multicast.MulticastCode) -> network.Network:
    if code.field == net.field:
        return net
    if net.field.is_prime_field and code.field.p == net.field.p and code.field.k == code.rounds:
        return rounds.lift_network(net, code.rounds)
    raise UsageError(f"code is over {code.field!r}, network over {net.field!r}")


# ---------------------------------------------------------------------------


def cmd_gen(args) -> int:
    nodes = _int_list(args.nodes)
    if len(nodes) == 1 and args.layers > 1:
        nodes = [1] + nodes * (args.layers - 1)
    fvals = _int_list(args.field)
    field = field_create(fvals[0], fvals[1] if len(fvals) > 1 else 1)
    net = network.gen_random(
        args.seed, args.layers, nodes, _dim_range(args.dims), args.density, field, _dest_spec(args.dests, args.layers)
    )
    data = network.save(net)
    summary = {"min_cuts": [], "multicast_capacity": None}
    if net.destinations:
        cuts = capacity.min_cuts(net, args.jobs)
        summary = {
            "min_cuts": [{"layer": t[0], "node": t[1], "min_cut": c} for t, c in zip(net.destinations, cuts)],
            "multicast_capacity": min(cuts),
        }
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(data)
        _emit(summary)
    else:
        sys.stdout.write(data.decode())
        sys.stderr.write(json.dumps(summary) + "\n")
    return EXIT_OK


def cmd_capacity(args) -> int:
    net = _load_net(args.network)
    cuts = capacity.min_cuts(net, args.jobs)
    _emit(
        {
            "min_cuts": [{"layer": t[0], "node": t[1], "min_cut": c} for t, c in zip(net.destinations, cuts)],
            "multicast_capacity": min(cuts) if cuts else None,
        }
    )
    return EXIT_OK


def cmd_flow(args) -> int:
    net = _load_net(args.network)
    if not 1 <= args.dest <= net.g:
        raise UsageError(f"--dest must be in 1..{net.g}")
    t = net.destinations[args.dest - 1]
    R = args.rate if args.rate is not None else capacity.min_cut(net, t, args.jobs)
    fl = flowmod.find_flow(net, t, R)
    if fl is None:
        _emit({"feasible": False, "destination": {"layer": t[0], "node": t[1]}, "rate": R})
        return EXIT_FAIL
    doc = fl.to_dict()
    doc["feasible"] = True
    _emit(doc, args.out)
    if args.out:
        _emit({"feasible": True, "rate": R, "out": args.out})
    return EXIT_OK


def cmd_code(args) -> int:
    net = _load_net(args.network)
    mode = {"det": "deterministic", "rand": "randomized"}.get(args.mode, args.mode)
    k = 1
    if args.rounds == "auto":
        if net.field.q <= net.g:
            if not net.field.is_prime_field:
                raise UsageError(f"{net.field!r} has at most g elements and is not a prime field; cannot lift")
            k = rounds.required_rounds(net.field.p, net.g)
    else:
        k = int(args.rounds)
    work = rounds.lift_network(net, k) if k > 1 else net
    rate = args.rate
    if rate is None:
        rate = capacity.multicast_capacity(net, args.jobs)
    try:
        code, log = multicast.build_code(
            work, mode, seed=args.seed, rate=rate, max_retries=args.max_retries, transcript=bool(args.transcript), jobs=args.jobs
        )
    except flowmod.FlowError as exc:
        raise UsageError(str(exc)) from None
    code.rounds = k
    _emit(code.to_dict(), args.out)
    if args.transcript:
        _emit(log, args.transcript)
    if args.out:
        _emit({"rate": code.rate, "mode": mode, "rounds": k, "field": repr(code.field), "out": args.out})
    return EXIT_OK


def _load_code(path) -> multicast.MulticastCode:
    try:
        return multicast.MulticastCode.from_dict(json.loads(_read(path)))
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{path} is not a valid code file: {exc}") from None


def cmd_simulate(args) -> int:
    base = _load_net(args.network)
    code = _load_code(args.code)
    net = _net_for_code(base, code)
    R = code.rate
    if args.message is not None:
        w = np.array(_int_list(args.message), dtype=np.int64)
        trace = sim.simulate(net, code, w, check=False)
        doc = trace.to_dict(net)
        doc["all_decoded"] = all(trace.ok())
        _emit(doc)
        return EXIT_OK if doc["all_decoded"] else EXIT_FAIL
    if args.sweep:
        if net.field.q**R > args.max_messages:
            raise UsageError(f"{net.field.q}^{R} messages exceed --max-messages {args.max_messages}")
        messages = sim.sweep_messages(net.field, R, limit=args.max_messages)
    else:
        rng = np.random.default_rng(args.seed)
        messages = (net.field.random(rng, R) for _ in range(args.random))
    n, failures = 0, []
    for w in messages:
        n += 1
        trace = sim.simulate(net, code, w, check=False)
        for t, ok in zip(net.destinations, trace.ok()):
            if not ok:
                failures.append({"layer": t[0], "node": t[1], "message": w.tolist()})
    ok = not failures
    _emit(
        {
            "messages": n,
            "destinations": net.g,
            "all_decoded": ok,
            "failures": failures[:20],
            "summary": "all messages decoded at all destinations" if ok else f"{len(failures)} decoding failures",
        }
    )
    return EXIT_OK if ok else EXIT_FAIL


def cmd_verify(args) -> int:
    try:
        net = _load_net(args.network, validate=False)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{args.network}: invalid JSON: {exc}") from None
    problems = network.validate(net)
    if problems or args.artifact is None:
        _emit({"kind": "network", "ok": not problems, "failures": problems})
        return EXIT_FAIL if problems else EXIT_OK
    doc = json.loads(_read(args.artifact))
    if "theta" in doc:
        code = _load_code(args.artifact)
        lifted = _net_for_code(net, code)
        failures = sim.verify_code(lifted, code)
        failed = sorted({tuple(f["destination"]) for f in failures if f["destination"] is not None})
        out = {
            "kind": "code",
            "ok": not failures,
            "failed_destinations": [{"layer": t[0], "node": t[1]} for t in failed],
            "failures": [
                {**f, "destination": list(f["destination"]) if f["destination"] else None} for f in failures
            ],
        }
        _emit(out)
        return EXIT_OK if not failures else EXIT_FAIL
    if "layers" in doc and "rate" in doc:
        fl = flowmod.Flow.from_dict(doc)
        failures = flowmod.verify_flow(net, fl)
        if not failures:
            for w in sim.sweep_messages(net.field, fl.rate):
                if not np.array_equal(flowmod.unicast_transmit(net, fl, w), w):
                    failures.append(f"unicast decoding failed for message {w.tolist()}")
                    break
        _emit(
            {
                "kind": "flow",
                "ok": not failures,
                "destination": {"layer": fl.destination[0], "node": fl.destination[1]},
                "failures": failures,
            }
        )
        return EXIT_OK if not failures else EXIT_FAIL
    raise UsageError(f"{args.artifact} is neither a code nor a flow file")


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ldrncode", description=__doc__.splitlines()[0])
    ap.add_argument("--jobs", type=int, default=1, help="worker threads for cut enumeration and flow search")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a random network")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--layers", type=int, required=True)
    g.add_argument("--nodes", required=True, help="per-layer node counts, e.g. 1,2,2,2 (or one count for layers 2..M)")
    g.add_argument("--dims", default="1..3", help="per-node dimension range lo..hi")
    g.add_argument("--density", type=float, default=1.0)
    g.add_argument("--field", default="2", help="p or p,k")
    g.add_argument("--dests", default="1", help="count, or count@layer[,layer...]")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("capacity", help="per-destination min-cuts and multicast capacity")
    c.add_argument("network")
    c.set_defaults(func=cmd_capacity)

    f = sub.add_parser("flow", help="find a unicast flow to one destination")
    f.add_argument("network")
    f.add_argument("--dest", type=int, default=1, help="1-based destination index")
    f.add_argument("--rate", type=int)
    f.add_argument("--out")
    f.set_defaults(func=cmd_flow)

    k = sub.add_parser("code", help="construct a multicast code")
    k.add_argument("network")
    k.add_argument("--mode", choices=["det", "rand", "deterministic", "randomized"], default="det")
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--rounds", default="auto", help="'auto' or an explicit round count")
    k.add_argument("--rate", type=int)
    k.add_argument("--max-retries", type=int, default=20)
    k.add_argument("--out")
    k.add_argument("--transcript", help="write the per-port construction log to this file")
    k.set_defaults(func=cmd_code)

    s = sub.add_parser("simulate", help="transmit messages with a code")
    s.add_argument("network")
    s.add_argument("code")
    mx = s.add_mutually_exclusive_group(required=True)
    mx.add_argument("--message", help="comma-separated message symbols")
    mx.add_argument("--sweep", action="store_true", help="every message in F^R")
    mx.add_argument("--random", type=int, metavar="N", help="N seeded random messages")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--max-messages", type=int, default=1 << 16)
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify", help="check a network, flow or code file")
    v.add_argument("network")
    v.add_argument("artifact", nargs="?")
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "code" and args.rounds != "auto" and not args.rounds.isdigit():
        sys.stderr.write("ldrncode: --rounds must be 'auto' or a positive integer\n")
        return EXIT_USAGE
    try:
        return args.func(args)
    except multicast.RandomizedAssignmentError as exc:
        sys.stderr.write(f"ldrncode: {exc}\n")
        return EXIT_FAIL
    except (UsageError, network.NetworkFormatError, network.NetworkValidationError, FieldError) as exc:
        sys.stderr.write(f"ldrncode: {exc}\n")
        return EXIT_USAGE
    except (ValueError, multicast.MulticastError, rounds.RoundsError, sim.SimulationError) as exc:
        sys.stderr.write(f"ldrncode: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
