"""``rankstair`` command line.

Exit status is 0 only when every contractual assertion of the command holds,
1 when an assertion fails and 2 for invalid input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import codes, coset, formats, harness, staircase
from .rng import child_seed, stream


def _load_config(args):
    mapping = {}
    if args.config:
        mapping.update(formats.parse_config(formats.read_text(args.config)))
    for item in args.set or ():
        if "=" not in item:
            raise ValueError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        mapping[k.strip()] = v.strip()
    if args.seed is not None:
        mapping["seed"] = args.seed
    if args.out is not None:
        mapping["out"] = args.out
    for key in ("trials", "workers"):
        if getattr(args, key, None) is not None:
            mapping[key] = getattr(args, key)
    cfg = harness.ExperimentConfig.from_mapping(mapping)
    errs = cfg.validate()
    if errs:
        raise ValueError("invalid configuration:\n  " + "\n  ".join(errs))
    return cfg


def _finish(report, out, trace=None):
    report.write(out, trace)
    print(report.to_json(), end="")
    for msg in report.failures:
        print(f"FAIL: {msg}", file=sys.stderr)
    return 0 if report.passed else 1


def cmd_plan(args):
    cfg = _load_config(args)
    setup = harness.build_setup(cfg)
    out = Path(cfg.out)
    if setup.nested:
        info = {"scheme": "nested", "n": cfg.n, "k1": cfg.k1, "k2": cfg.k2, "ell": setup.ell}
    else:
        info = setup.plan.to_dict()
        formats.write_text(out / "plan.stc", formats.dump_plan(setup.tower, setup.plan))
    formats.write_text(out / "plan.json", json.dumps(info, indent=2, sort_keys=True) + "\n")
    print(json.dumps(info, indent=2, sort_keys=True))
    return 0


def cmd_encode(args):
    cfg = _load_config(args)
    setup = harness.build_setup(cfg)
    T = setup.tower
    rng = stream(child_seed(cfg.seed, "encode"), 0)
    if args.secret:
        T2, S = formats.load_matrix(formats.read_text(args.secret))
        if T2.m != T.m or T2.q != T.q:
            raise ValueError("secret file uses a different field")
    else:
        S = T.random(rng, setup.alpha, setup.ell)
    if setup.nested:
        C = coset.nested_encode(setup.scheme, S, rng)
    else:
        C = staircase.staircase_encode(setup.scheme, S, rng)
    out = Path(cfg.out)
    formats.write_text(out / "secret.rmx", formats.dump_matrix(T, S))
    formats.write_text(out / "codeword.rmx", formats.dump_matrix(T, C))
    if not setup.nested:
        formats.write_text(out / "plan.stc", formats.dump_plan(T, setup.plan))
    print(f"wrote {out / 'codeword.rmx'} ({C.shape[0]} x {C.shape[1]})")
    return 0


def cmd_decode(args):
    cfg = _load_config(args)
    setup = harness.build_setup(cfg)
    T = setup.tower
    if not args.matrix:
        raise ValueError("decode needs --matrix (the receiver's A)")
    _, A = formats.load_base_matrix(formats.read_text(args.matrix))
    try:
        if args.responses:
            _, d, j, R = formats.load_responses(formats.read_text(args.responses))
            if setup.nested:
                raise ValueError("nested schemes take --received, not preprocessed responses")
            S = staircase.decode_efficient(setup.scheme, R, A, cfg.t)
        elif args.received:
            _, Y = formats.load_matrix(formats.read_text(args.received))
            if setup.nested:
                S = codes.decode_coherent(setup.scheme.pair, Y, A, cfg.t)
            else:
                S = staircase.decode_full(setup.scheme, Y, A, cfg.t)
        else:
            raise ValueError("decode needs --received or --responses")
    except codes.DecodingFailure as exc:
        print(f"decoding failure (stage {exc.stage}): {exc}", file=sys.stderr)
        return 1
    formats.write_text(Path(cfg.out) / "decoded.rmx", formats.dump_matrix(T, S))
    if args.expect:
        _, S_ref = formats.load_matrix(formats.read_text(args.expect))
        if not np.array_equal(S, S_ref):
            print("FAIL: decoded secret differs from the expected one", file=sys.stderr)
            return 1
        print("decoded secret matches")
    return 0


def cmd_simulate(args):
    cfg = _load_config(args)
    report, recs = harness.cmd_simulate(cfg)
    return _finish(report, cfg.out, recs)


def cmd_security(args):
    cfg = _load_config(args)
    return _finish(harness.cmd_security(cfg), cfg.out)


def cmd_bounds(args):
    cfg = _load_config(args)
    return _finish(harness.cmd_bounds(cfg), cfg.out)


def cmd_example(args):
    report, recs = harness.cmd_example(args.which, trials=args.trials or 100,
                                       seed=args.seed or 0, workers=args.workers or 0)
    return _finish(report, args.out or "out", recs)


def build_parser():
    ap = argparse.ArgumentParser(prog="rankstair", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key = value configuration file")
        p.add_argument("--seed", type=int, help="master seed (u64)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
        p.add_argument("--trials", type=int)
        p.add_argument("--workers", type=int, help="parallel worker processes (0 = all cores)")
        return p

    common(sub.add_parser("plan", help="print the staircase parameters")).set_defaults(func=cmd_plan)
    p = common(sub.add_parser("encode", help="encode a secret to an RMX1 codeword"))
    p.add_argument("--secret", help="RMX1 secret (random when omitted)")
    p.set_defaults(func=cmd_encode)
    p = common(sub.add_parser("decode", help="decode received data back to the secret"))
    p.add_argument("--matrix", help="RMX1 receiver matrix A (m=1)")
    p.add_argument("--received", help="RMX1 full response Y = C A^T + E")
    p.add_argument("--responses", help="RSP1 preprocessed responses")
    p.add_argument("--expect", help="RMX1 secret to compare against")
    p.set_defaults(func=cmd_decode)
    common(sub.add_parser("simulate", help="Monte Carlo trials")).set_defaults(func=cmd_simulate)
    common(sub.add_parser("security", help="leakage checks over observation matrices")).set_defaults(
        func=cmd_security)
    common(sub.add_parser("bounds", help="overheads against the lower bounds")).set_defaults(
        func=cmd_bounds)
    p = common(sub.add_parser("example", help="q=256 reference runs: 1 network, 2 storage"))
    p.add_argument("which", type=int, choices=(1, 2))
    p.set_defaults(func=cmd_example)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, formats.FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
