"""``gcnsmooth`` command line.

Every subcommand writes a CSV of result rows (``generate`` writes data
files instead). Re-running with the same config and seed gives
byte-identical output.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..errors import ConfigError, GraphError
from . import experiments as ex
from .config import load_config
from .io import ParseError, ensure_parent, read_edge_list, read_signal, write_rows


HOLLOW_HELP = (
    "Held-out nodes are predicted from their neighbors with hollow operators "
    "(diagonal zeroed, rows renormalized). The diagonal stays zero at every "
    "application, so for L > 1 the target's own value only returns through "
    "walks that leave it and come back."
)

COMMANDS = {
    "risk": (ex.cmd_risk, "analytic bias/variance/MSE with the matching upper bounds"),
    "sweep-l": (ex.cmd_sweep_L, "optimal number of propagation steps versus signal roughness"),
    "bias-variance": (ex.cmd_bias_variance, "Monte-Carlo bias/variance/MSE per estimator and depth"),
    "variance-decay": (ex.cmd_variance_decay, "root-node variance on trees, with and without attachments"),
    "verify-bounds": (ex.cmd_verify_bounds, "check the variance lower bound and the walk-based propositions"),
}


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    # declared on the main parser and on every subparser, so the flags work on either side
    default = argparse.SUPPRESS if suppress else None
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=default, help="master seed (overrides the config)")
    p.add_argument("--out", default=default, help="output CSV (directory for 'generate')")
    p.add_argument("--config", default=default, help="JSON config with ExperimentConfig fields")
    p.add_argument("--plot", action="store_true", default=argparse.SUPPRESS if suppress else False,
                   help="also write SVG figures next to the CSV")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gcnsmooth", description="Graph-convolution smoothing experiments.",
                                     parents=[_global_flags(False)])
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    shared = _global_flags(True)
    sub.add_parser("generate", parents=[shared], help="write edge list, embedding, true and noisy signal")
    for name, (_, help_) in COMMANDS.items():
        sub.add_parser(name, parents=[shared], help=help_, description=help_)
    for name, help_ in (("predict", "held-out node prediction on a graph/signal pair"),
                        ("denoise", "denoising with neighbor-replaced test nodes")):
        sp = sub.add_parser(name, parents=[shared], help=help_,
                            description=help_ + ". " + (HOLLOW_HELP if name == "predict" else
                                                        "Each test node's value is replaced by a uniformly "
                                                        "chosen neighbor's before smoothing."))
        sp.add_argument("--edges", required=True, help="edge-list file ('n <count>' header)")
        sp.add_argument("--signal", required=True, help="CSV with header node,value")
    return parser


def run(args) -> list[Path]:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.plot:
        cfg.plot = True
    out = args.out or cfg.output
    if args.command == "generate":
        paths = ex.cmd_generate(cfg, out or "data")
        return list(paths.values())
    if args.command in ("predict", "denoise"):
        g = read_edge_list(args.edges)
        Y = read_signal(args.signal, n=g.n)
        fn = ex.cmd_predict if args.command == "predict" else ex.cmd_denoise
        rows = fn(g, Y, cfg, source=Path(args.edges).stem)
    else:
        rows = COMMANDS[args.command][0](cfg)
    out = ensure_parent(out or f"results/{args.command}.csv")
    rows = write_rows(out, rows)
    written = [out]
    if cfg.plot:
        from .plotting import render

        written += render(args.command, rows, out)
    return written


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        for p in run(args):
            print(p)
    except (ConfigError, GraphError, ParseError, OSError) as exc:
        print(f"gcnsmooth: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
