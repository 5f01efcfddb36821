"""``rotset`` command line: zoo, estimate, chain, realize, verify-theorem.

Exit codes: 0 success, 1 absent or failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import report, zoo


def _pair(text: str):
    try:
        a, b = text.split(",")
        return [float(a), float(b)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'x,y', got {text!r}") from None


def _int_pair(text: str):
    x, y = _pair(text)
    if x != int(x) or y != int(y):
        raise argparse.ArgumentTypeError(f"expected integers 'm,n', got {text!r}")
    return [int(x), int(y)]


def _common(p: argparse.ArgumentParser, stochastic: bool = False):
    p.add_argument("--map", help="map specification, e.g. 'sine_shear_h(0.25,0.5)'")
    p.add_argument("--config", help="JSON config file; explicit flags override it")
    p.add_argument("--out", dest="output_dir", help="directory for the JSON report (and SVG)")
    p.add_argument("--seed", type=int, help="RNG seed" + (" (required)" if stochastic else ""))


def _graph_flags(p):
    p.add_argument("--grid", dest="N", type=int, help="grid resolution N (cells per side)")
    p.add_argument("--epsilon", type=float, help="chain tolerance epsilon")
    p.add_argument("--directions", type=int, help="number of support directions")


def _sample_flags(p):
    p.add_argument("--n", type=int, help="orbit length")
    p.add_argument("--num-points", dest="num_points", type=int, help="number of seed points")
    p.add_argument("--num-samples", dest="num_samples", type=int, help="Monte-Carlo samples for the mean")


def _realize_flags(p):
    p.add_argument("--vector", help="rational vector 'p/q,r/q'")
    p.add_argument("--depth", type=int, help="quadtree depth")
    p.add_argument("--tol", type=float, help="residual tolerance")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rotset", description="Rotation sets and periodic orbits of torus maps.")
    sub = ap.add_subparsers(dest="command", required=True)

    z = sub.add_parser("zoo", help="list the built-in maps")
    z.add_argument("action", nargs="?", default="list", choices=["list"])

    e = sub.add_parser("estimate", help="inner/outer rotation-set or mean rotation vector estimate")
    _common(e, stochastic=True)
    e.add_argument("--mode", choices=["sample", "graph", "mean"])
    _sample_flags(e)
    _graph_flags(e)
    e.add_argument("--svg", help="write an SVG plot here")

    c = sub.add_parser("chain", help="search an epsilon-chain in the grid digraph")
    _common(c)
    _graph_flags(c)
    c.add_argument("--max-len", dest="max_len", type=int, help="maximum chain length")
    c.add_argument("--periodic", action="store_true", default=None, help="look for any periodic chain")
    c.add_argument("--start", type=_pair, help="start point 'x,y' (its grid cell is used)")
    c.add_argument("--target", dest="target_cell", type=_pair, help="target point 'x,y' (default: start)")
    c.add_argument("--disp", dest="target_disp", type=_int_pair, help="target displacement 'm,n'")

    r = sub.add_parser("realize", help="find a periodic orbit with rotation vector p/q,r/q")
    _common(r)
    _realize_flags(r)

    v = sub.add_parser("verify-theorem", help="rotation-set evidence plus periodic-orbit realization")
    _common(v, stochastic=True)
    _realize_flags(v)
    _sample_flags(v)
    _graph_flags(v)
    v.add_argument("--keps", type=float, help="radius of the ball around the mean rotation vector")
    v.add_argument("--membership-tol", dest="membership_tol", type=float,
                   help="distance to the inner hull still counted as inside")
    v.add_argument("--svg", help="write an SVG plot here")
    return ap


def config_from_args(args: argparse.Namespace) -> report.RunConfig:
    flags = {k: v for k, v in vars(args).items() if k != "config"}
    file_values = {}
    if args.config:
        try:
            with open(args.config) as fh:
                file_values = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise report.ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(file_values, dict):
            raise report.ConfigError("config file must hold a JSON object")
        file_values.pop("command", None)
    return report.RunConfig.merged(file_values, flags)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "zoo":
        for entry in zoo.zoo_list():
            print(json.dumps(entry, sort_keys=True))
        return 0
    try:
        cfg = config_from_args(args)
        rep, code, svg = report.run(cfg)
    except report.ConfigError as exc:
        print(f"rotset: error: {exc}", file=sys.stderr)
        return 2
    report.write_outputs(cfg, rep, svg)
    print(report.dumps(rep))
    return code


if __name__ == "__main__":
    sys.exit(main())
