"""Command-line entry point: ``cqwiretap {bpsk,bound,verify}``.

Exit codes: 0 success, 1 a verification check failed, 2 usage or
parameter error, 3 file I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

from . import bounds, divergences, verify
from .linalg import ValidationError
from .states import BpskParams, ChannelFormatError, load_channel, reduce_wiretap

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
SEED_ENV = "TOOLKIT_SEED"


class UsageError(Exception):
    pass


def _fmt(x: float) -> str:
    return format(x, ".17g")


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def cmd_bpsk(args) -> int:
    try:
        p = BpskParams(args.eta, args.nbar)
        grid = bounds.log_grid(args.n_min, args.n_max, args.points)
        c = bounds.curve(p, grid, args.eps1, args.eps2)
    except ValidationError as exc:
        raise UsageError(str(exc)) from None
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "normal_approx", "asymptote", "capacity"])
    for pt in c.points:
        w.writerow([pt.n, _fmt(pt.rate_per_use_bits), _fmt(c.asymptote), _fmt(c.capacity)])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def _parse_px(text: str | None):
    if text is None:
        return None
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"--p-x must be comma-separated numbers, got {text!r}") from None


def _second_order_report(ch, p_x, args) -> dict:
    if args.n is None:
        raise UsageError("--n is required in second-order mode")
    rho_xb, rho_xe, _, _ = reduce_wiretap(ch, p_x)
    i_b, v_b = divergences.mutual_info(rho_xb)
    i_e, v_e = divergences.mutual_info(rho_xe)
    pt = bounds.second_order_private(i_b, v_b, i_e, v_e, args.n, args.eps1, args.eps2)
    return {
        "kind": "second-order",
        "label": "normal approximation",
        "n": pt.n,
        "rate_per_use_bits": pt.rate_per_use_bits,
        "total_bits": pt.total_bits,
        "terms": [{"name": t.name, "value_bits": t.value_bits} for t in pt.terms],
        "params": {"eps1": args.eps1, "eps2": args.eps2},
        "information": {"I_XB": i_b, "V_XB": v_b, "I_XE": i_e, "V_XE": v_e},
        "valid": True,
    }


def cmd_bound(args) -> int:
    p_x = _parse_px(args.p_x)
    try:
        ch = load_channel(args.channel)
    except ChannelFormatError as exc:
        raise UsageError(f"{args.channel}: {exc}") from None
    try:
        if args.mode == "second-order":
            doc = _second_order_report(ch, p_x, args)
        elif args.mode == "public":
            if args.eta1 is None:
                raise UsageError("--eta1 is required in public mode")
            rho_xb = reduce_wiretap(ch, p_x)[0]
            doc = bounds.oneshot_public_lower(rho_xb, args.eps1, args.eta1, args.maximal_error).to_dict()
        else:
            if args.eta1 is None or args.eta2 is None:
                raise UsageError("--eta1 and --eta2 are required in private mode")
            doc = bounds.oneshot_private_lower(ch, p_x, args.eps1, args.eps2, args.eta1, args.eta2).to_dict()
    except ValidationError as exc:
        raise UsageError(str(exc)) from None
    _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.out)
    if not doc.get("valid", True):
        print(f"error: {doc['reason']}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def cmd_verify(args) -> int:
    seed = args.seed
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            seed = int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    res = verify.run_suite(args.suite, seed, args.trials)
    _emit("\n".join(res.lines()) + "\n" + ("OK\n" if res.ok else "FAILED\n"), args.out)
    return EXIT_OK if res.ok else EXIT_FAIL


def _positive_int(text: str) -> int:
    try:
        v = int(float(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1 or v != float(text):
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cqwiretap", description="Private-rate bounds for cq wiretap channels.")
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bpsk", help="normal-approximation curve for BPSK over the pure-loss channel (CSV)")
    b.add_argument("--eta", type=float, required=True, help="transmissivity in (0, 1)")
    b.add_argument("--nbar", type=float, required=True, help="mean photon number >= 0")
    b.add_argument("--eps1", type=float, default=0.01)
    b.add_argument("--eps2", type=float, default=0.01)
    b.add_argument("--n-min", type=_positive_int, default=1000)
    b.add_argument("--n-max", type=_positive_int, default=10**7)
    b.add_argument("--points", type=_positive_int, default=50)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bpsk)

    d = sub.add_parser("bound", help="rate bound for a channel file (JSON)")
    d.add_argument("channel", help="channel file (.wtc.json)")
    d.add_argument("--mode", choices=["public", "private", "second-order"], default="private")
    d.add_argument("--p-x", help="comma-separated input distribution (default: file's p_x, else uniform)")
    d.add_argument("--eps1", type=float, default=0.01)
    d.add_argument("--eps2", type=float, default=0.01)
    d.add_argument("--eta1", type=float)
    d.add_argument("--eta2", type=float)
    d.add_argument("--n", type=_positive_int, help="block length for second-order mode")
    d.add_argument("--maximal-error", action="store_true", help="public mode: maximal instead of average error")
    d.add_argument("--out")
    d.set_defaults(func=cmd_bound)

    v = sub.add_parser("verify", help="run a randomized verification suite")
    v.add_argument("suite", choices=list(verify.SUITES))
    v.add_argument("--seed", type=int, default=0, help=f"base seed (overridden by ${SEED_ENV})")
    v.add_argument("--trials", type=_positive_int)
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
