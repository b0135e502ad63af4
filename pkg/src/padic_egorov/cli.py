"""Command-line entry point. Every subcommand prints one JSON document."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .constructions import (
    counterexample_family,
    counterexample_report,
    delta_embedding,
    phi_delta,
    separation_report,
    witness_x0,
)
from .egorov import eval_at_gpoint, gf_equal, is_negligible_global, is_negligible_on, point_value
from .exact_numbers import parse_rational
from .generalized import DEFAULT_BOUND, point_family_from_json, scalar_is_zero
from .sequences import IntegerMap, family_from_json, nth
from .spaces import Ball, FiniteDiscreteSpace, QpSpace, Space

FAMILY_BUILTINS = ("builtin:counterexample", "builtin:delta", "builtin:phi-delta")


class InputError(ValueError):
    pass


def parse_phi(text: str) -> IntegerMap:
    """``"t1,t2,...;a,b"``: explicit values for the first indices, then ``a*k + b``."""
    table_text, sep, tail_text = text.partition(";")
    if not sep:
        table_text, tail_text = "", text
    try:
        table = tuple(int(v) for v in table_text.split(",") if v.strip())
        slope, offset = (int(v) for v in tail_text.split(","))
    except ValueError:
        raise InputError(f"cannot parse phi {text!r}; expected 'table;a,b'") from None
    return IntegerMap(table, slope, offset)


def _load_json(text: str):
    if text.lstrip().startswith(("{", "[")):
        return json.loads(text)
    path = Path(text)
    if not path.exists():
        raise InputError(f"no such file: {text}")
    return json.loads(path.read_text())


def _need_p(args) -> int:
    if args.p is None:
        raise InputError("--p is required here")
    return args.p


def load_family(text: str, args):
    if text == "builtin:counterexample":
        return counterexample_family(_need_p(args))
    if text == "builtin:delta":
        return delta_embedding(_need_p(args))
    if text == "builtin:phi-delta":
        return phi_delta(_need_p(args), parse_phi(args.phi))
    if text.startswith("builtin:"):
        raise InputError(f"unknown builtin family {text!r}; choose from {', '.join(FAMILY_BUILTINS)}")
    space = QpSpace(args.p) if args.p is not None else None
    return family_from_json(_load_json(text), space)


def parse_point(space: Space, text: str):
    if isinstance(space, FiniteDiscreteSpace):
        return space.point(text)
    return space.point(tuple(parse_rational(c.strip(), space.p) for c in text.split(",")))


def parse_ball(space: Space, text: str) -> Ball:
    center, sep, gamma = text.rpartition(":")
    if not sep:
        raise InputError(f"cannot parse ball {text!r}; expected 'center:gamma'")
    return Ball(space, parse_point(space, center), int(gamma))


def load_point_family(space: Space, text: str):
    if text == "builtin:x0":
        if not isinstance(space, QpSpace):
            raise InputError("builtin:x0 lives in Q_p")
        return witness_x0(space.p)
    return point_family_from_json(space, _load_json(text))


def _run(args) -> dict:
    cmd = args.command
    if cmd == "eval":
        F = load_family(args.family, args)
        x = parse_point(F.space, args.point)
        return {"k": args.k, "point": args.point, "value": F.ring.format(nth(F, args.k)(x))}
    if cmd == "pointvalue":
        F = load_family(args.family, args)
        value = point_value(F, parse_point(F.space, args.point))
        return {"point": args.point, "value": value.to_json(), "verdict": scalar_is_zero(value).to_json()}
    if cmd == "gpoint-eval":
        F = load_family(args.family, args)
        value = eval_at_gpoint(F, load_point_family(F.space, args.point_family))
        return {"value": value.to_json(), "verdict": scalar_is_zero(value).to_json()}
    if cmd == "negligible":
        F = load_family(args.family, args)
        if args.ball is not None:
            return is_negligible_on(F, parse_ball(F.space, args.ball), args.bound).to_json()
        return is_negligible_global(F, args.bound).to_json()
    if cmd == "equal":
        return gf_equal(load_family(args.left, args), load_family(args.right, args), args.bound).to_json()
    if cmd == "counterexample":
        return counterexample_report(_need_p(args), args.samples, args.seed, args.bound)
    if cmd == "separate":
        return separation_report(_need_p(args), parse_phi(args.phi), args.samples, args.seed, args.bound).to_json()
    raise InputError(f"unknown command {cmd!r}")


def _has_unknown(obj) -> bool:
    if isinstance(obj, dict):
        return obj.get("verdict") == "unknown" or any(_has_unknown(v) for v in obj.values())
    if isinstance(obj, list):
        return any(_has_unknown(v) for v in obj)
    return False


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for key, value in obj.items():
            yield from _flatten(value, f"{prefix}.{key}" if prefix else str(key))
    elif isinstance(obj, list) and any(isinstance(v, (dict, list)) for v in obj):
        for i, value in enumerate(obj):
            yield from _flatten(value, f"{prefix}[{i}]")
    else:
        yield prefix, json.dumps(obj)


def render_pretty(obj) -> str:
    rows = list(_flatten(obj))
    width = max((len(k) for k, _ in rows), default=0)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


def _default_bound() -> int:
    text = os.environ.get("EGOROV_BOUND")
    return int(text) if text else DEFAULT_BOUND


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int, help="prime for builtin families and JSON families without a space")
    common.add_argument("--phi", default=";1,1", help="exponent schedule 'table;a,b' (default k+1)")
    common.add_argument("--bound", type=int, default=None, help="largest index scanned explicitly")
    common.add_argument("--require-decision", action="store_true", help="exit 2 if any verdict is unknown")
    common.add_argument("--pretty", action="store_true", help="aligned key/value rendering instead of JSON")

    parser = argparse.ArgumentParser(prog="padic-egorov", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="value of the k-th term at a point")
    p.add_argument("family")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--point", required=True)

    p = sub.add_parser("pointvalue", parents=[common], help="generalized value at a standard point")
    p.add_argument("family")
    p.add_argument("--point", required=True)

    p = sub.add_parser("gpoint-eval", parents=[common], help="value at a generalized point")
    p.add_argument("family")
    p.add_argument("--point-family", required=True)

    p = sub.add_parser("negligible", parents=[common], help="is the family negligible (on a ball)?")
    p.add_argument("family")
    p.add_argument("--ball")

    p = sub.add_parser("equal", parents=[common], help="do two families define the same class?")
    p.add_argument("left")
    p.add_argument("right")

    for name, default_samples, text in (
        ("counterexample", 200, "report on the family vanishing at every standard point"),
        ("separate", 100, "compare delta with its phi variant"),
    ):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--samples", type=int, default=default_samples)
        p.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.bound is None:
            args.bound = _default_bound()
        if args.bound < 1:
            raise InputError("--bound must be at least 1")
        result = _run(args)
    except (ValueError, TypeError, KeyError, json.JSONDecodeError) as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 1
    if args.pretty:
        sys.stdout.write(render_pretty(result) + "\n")
    else:
        sys.stdout.write(json.dumps(result, sort_keys=True) + "\n")
    if args.require_decision and _has_unknown(result):
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
