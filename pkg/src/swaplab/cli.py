"""Command-line entry point.

Subcommands: swap-test, pair-map, eq1-audit, bounds, lemma1, scaling,
gatecount, egraph.  All configuration is explicit flags; no environment
variables are consulted.  Reruns with identical flags and seed produce
byte-identical output files.
"""

from __future__ import annotations

import argparse
import sys

from . import harness
from .egraph import EXACT_SHOTS


def _parse_int_list(text: str) -> list[int]:
    """Comma-separated integers; "a..b" expands to the inclusive range."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def _parse_float_list(text: str) -> list[float]:
    return [float(part) for part in text.split(",") if part.strip()]


def _parse_shots(text: str):
    if text.strip().lower() in ("inf", "infinity"):
        return EXACT_SHOTS
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"shots must be >= 1 or 'inf', got {text}")
    return value


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="master RNG seed")
    parser.add_argument("--out", default=None, help="output path (stdout if omitted)")
    parser.add_argument(
        "--format", choices=("csv", "json"), default="csv", help="output format"
    )


def _emit(records, metadata, args) -> None:
    if args.out is None:
        harness.write_records(records, sys.stdout, args.format, metadata)
    else:
        harness.write_records(records, args.out, args.format, metadata)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swaplab",
        description="Swap-test distance estimation lab: circuit audits, "
        "decision-error bounds and epsilon-graph experiments.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("swap-test", help="run one two-state swap test")
    p.add_argument("--theta1", type=float, default=0.0)
    p.add_argument("--phi1", type=float, default=0.0)
    p.add_argument("--theta2", type=float, default=0.0)
    p.add_argument("--phi2", type=float, default=0.0)
    p.add_argument("--vec1", type=_parse_float_list, default=None,
                   help="comma-separated vector (amplitude-encoded)")
    p.add_argument("--vec2", type=_parse_float_list, default=None)
    p.add_argument("--shots", type=_parse_shots, default=EXACT_SHOTS,
                   help="repetitions, or 'inf' for exact decisions")
    _add_common(p)

    p = sub.add_parser("pair-map", help="outcome-to-pair map of the n-state circuit")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--w", type=int, default=1)
    p.add_argument("--dump-circuit", default=None,
                   help="also write the circuit JSON dump to this path")
    _add_common(p)

    p = sub.add_parser("eq1-audit", help="audit the per-pair probability law")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--trials", type=int, default=10)
    _add_common(p)

    p = sub.add_parser("bounds", help="exact tail vs the bound pair on a grid")
    p.add_argument("--n-list", type=_parse_int_list, default=list(range(1, 51)),
                   help="N values, e.g. '1..200' or '10,20,50'")
    p.add_argument("--alpha-grid", type=_parse_float_list, default=None)
    p.add_argument("--p-grid", type=_parse_float_list, default=None)
    _add_common(p)

    p = sub.add_parser("lemma1", help="worked sharpness example at (0.5, 0.9)")
    _add_common(p)

    p = sub.add_parser("scaling", help="repetition-count curves against n")
    p.add_argument("--n-list", type=_parse_int_list,
                   default=[4, 8, 16, 32, 64, 128, 256, 512, 1024])
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--eps", type=float, default=1.0)
    _add_common(p)

    p = sub.add_parser("gatecount", help="resource counts per circuit design")
    p.add_argument("--n-list", type=_parse_int_list, default=[4, 8, 16, 32])
    p.add_argument("--w", type=int, default=1)
    _add_common(p)

    p = sub.add_parser("egraph", help="classical vs quantum epsilon-graph trial")
    p.add_argument("--points", required=True, help="CSV point cloud, one row per point")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument(
        "--mode",
        choices=("brute", "kdtree", "quantum-standard", "quantum-naive", "quantum-multi"),
        default="brute",
    )
    p.add_argument("--shots", type=_parse_shots, default=EXACT_SHOTS)
    _add_common(p)

    return parser


def _config_params(args) -> dict:
    if args.subcommand == "swap-test":
        return {
            "theta1": args.theta1, "phi1": args.phi1,
            "theta2": args.theta2, "phi2": args.phi2,
            "vec1": args.vec1, "vec2": args.vec2,
            "shots": args.shots, "seed": args.seed,
        }
    if args.subcommand == "pair-map":
        return {"n": args.n, "w": args.w}
    if args.subcommand == "eq1-audit":
        return {"n": args.n, "trials": args.trials, "seed": args.seed}
    if args.subcommand == "bounds":
        return {
            "n_values": args.n_list,
            "alphas": args.alpha_grid,
            "ps": args.p_grid,
        }
    if args.subcommand == "lemma1":
        return {}
    if args.subcommand == "scaling":
        return {"n_list": args.n_list, "gamma": args.gamma, "eps": args.eps}
    if args.subcommand == "gatecount":
        return {"n_list": args.n_list, "w": args.w}
    raise ValueError(args.subcommand)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.subcommand == "egraph":
        out_dir = args.out or "egraph-out"
        _, _, diff = harness.run_egraph_trial(
            args.points, args.eps, args.mode, args.shots, args.seed,
            out_dir, args.format,
        )
        print(f"false negatives: {diff.fn_count}, false positives: {diff.fp_count} "
              f"(outputs in {out_dir})")
        return 0

    config = harness.ExperimentConfig(args.subcommand, _config_params(args))
    records, meta = harness.run_config(config)
    if args.subcommand == "pair-map" and args.dump_circuit:
        import json

        from . import circuits

        with open(args.dump_circuit, "w") as fh:
            json.dump(circuits.circuit_to_json(circuits.build_un(args.n, args.w)),
                      fh, indent=2)
            fh.write("\n")
    _emit(records, meta, args)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
