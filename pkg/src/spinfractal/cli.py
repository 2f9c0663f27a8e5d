"""Command-line interface.

Subcommands:
    net      build a network Hamiltonian and write it as CSV + spec JSON
    dist     compute the all-pairs transfer-bound distance matrix
    mfa      run the full multifractal analysis for one network
    sweep    run a batch of analyses (bundled preset or sweep file)
    presets  list bundled sweep presets

Exit codes: 0 success, 2 usage/configuration error, 3 numeric failure,
4 degenerate analysis input (e.g. too few scaling radii).  The default
output directory is taken from SPINFRACTAL_OUTDIR when set.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

from . import __version__
from .box_cover import write_covering_dump
from .errors import (
    DegenerateInputError,
    NumericError,
    ResultFormatError,
    ScalingRangeError,
    SpecError,
)
from .itf_metric import distance_matrix, identify_zero_pairs, write_distances_csv, write_distances_json
from .multifractal import _fmt
from .pipeline import (
    AnalysisOptions,
    SweepSpec,
    SUMMARY_COLUMNS,
    analyze_distance_matrix,
    analyze_network,
    compute_coverings,
    preset_description,
    preset_names,
    preset_sweep,
    run_sweep,
    write_result,
)
from .spin_network import Bias, NetworkSpec, build_network


def _default_out() -> str:
    return os.environ.get("SPINFRACTAL_OUTDIR", ".")


def _print_options_hash(options: dict) -> None:
    digest = hashlib.sha256(
        json.dumps(options, sort_keys=True, default=str).encode("utf-8")
    ).hexdigest()
    print(f"options-hash: {digest[:16]}")


def _load_spec(args) -> NetworkSpec:
    if getattr(args, "spec", None):
        path = Path(args.spec)
        if not path.exists():
            raise FileNotFoundError(f"spec file not found: {path}")
        return NetworkSpec.from_json(path.read_text(encoding="utf-8"))
    if args.topology is None or args.n is None:
        raise SpecError("either --spec FILE or both --topology and --n are required")
    bias = None
    if args.bias is not None or args.bias_node is not None:
        if args.bias is None or args.bias_node is None:
            raise SpecError("--bias and --bias-node must be given together")
        bias = Bias(node=args.bias_node, magnitude=args.bias)
    return NetworkSpec(
        topology=args.topology,
        n=args.n,
        coupling_profile=args.profile,
        coupling_model=args.model,
        bias=bias,
    )


def _analysis_options(args) -> AnalysisOptions:
    return AnalysisOptions(
        degeneracy_tol=args.degeneracy_tol,
        identify=args.identify,
        merge_tol=args.merge_tol,
        max_radii=args.max_radii,
        q_min=args.q_min,
        q_max=args.q_max,
        q_step=args.q_step,
        fit_lo=args.fit_lo,
        fit_hi=args.fit_hi,
        workers=args.workers,
    )


def _add_spec_flags(sub, require_spec_file: bool) -> None:
    if require_spec_file:
        sub.add_argument("--spec", required=True, help="network spec JSON file")
    else:
        sub.add_argument("--spec", help="network spec JSON file (overrides inline flags)")
        sub.add_argument("--topology", choices=("chain", "ring"), help="network topology")
        sub.add_argument("--n", type=int, help="number of spins")
        sub.add_argument(
            "--profile", choices=("uniform", "engineered"), default="uniform",
            help="coupling profile",
        )
        sub.add_argument(
            "--model", choices=("xx", "heisenberg"), default="xx", help="coupling model"
        )
        sub.add_argument("--bias-node", type=int, help="1-based node receiving the bias")
        sub.add_argument("--bias", type=float, help="bias magnitude added to that node's diagonal")


def _add_analysis_flags(sub) -> None:
    defaults = AnalysisOptions()
    sub.add_argument("--degeneracy-tol", type=float, default=defaults.degeneracy_tol,
                     help="relative eigenvalue gap below which eigenvalues merge")
    sub.add_argument("--identify", action="store_true",
                     help="merge zero-distance node pairs before the analysis")
    sub.add_argument("--merge-tol", type=float, default=defaults.merge_tol,
                     help="distance threshold for --identify")
    sub.add_argument("--max-radii", type=int, default=None,
                     help="cap on covering radii (default: auto, 64 when n > 360)")
    sub.add_argument("--q-min", type=float, default=defaults.q_min, help="lowest moment order")
    sub.add_argument("--q-max", type=float, default=defaults.q_max, help="highest moment order")
    sub.add_argument("--q-step", type=float, default=defaults.q_step, help="moment order step")
    sub.add_argument("--fit-lo", type=float, default=defaults.fit_lo,
                     help="lower fit-window quantile of the log-radius range")
    sub.add_argument("--fit-hi", type=float, default=defaults.fit_hi,
                     help="upper fit-window quantile of the log-radius range")
    sub.add_argument("--workers", type=int, default=defaults.workers,
                     help="parallel workers (coverings and sweep entries)")


def cmd_net(args) -> int:
    spec = _load_spec(args)
    _print_options_hash({"command": "net", "spec": spec.to_dict()})
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ham = build_network(spec)
    with open(out / "hamiltonian.csv", "w", encoding="utf-8") as fh:
        for row in ham.matrix:
            fh.write(",".join(_fmt(v) for v in row))
            fh.write("\n")
    (out / "spec.json").write_text(spec.to_json() + "\n", encoding="utf-8")
    print(f"wrote {out / 'hamiltonian.csv'} and {out / 'spec.json'}")
    return 0


def cmd_dist(args) -> int:
    spec = _load_spec(args)
    options = {
        "command": "dist",
        "spec": spec.to_dict(),
        "degeneracy_tol": args.degeneracy_tol,
        "identify": args.identify,
        "merge_tol": args.merge_tol,
    }
    _print_options_hash(options)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dist = distance_matrix(build_network(spec), args.degeneracy_tol)
    if args.identify:
        dist = identify_zero_pairs(dist, args.merge_tol)
    write_distances_csv(dist, out / "distances.csv")
    write_distances_json(dist, out / "distances.json")
    print(f"wrote {out / 'distances.csv'} and {out / 'distances.json'}")
    return 0


def cmd_mfa(args) -> int:
    spec = _load_spec(args)
    opts = _analysis_options(args)
    _print_options_hash({"command": "mfa", "spec": spec.to_dict(), "options": opts.to_dict()})
    out = Path(args.out)
    if args.dump_coverings:
        # re-derive the coverings alongside the analysis for the dump
        dist = distance_matrix(build_network(spec), opts.degeneracy_tol)
        if opts.identify:
            dist = identify_zero_pairs(dist, opts.merge_tol)
        result = analyze_distance_matrix(dist, opts, provenance_spec=spec.to_dict())
        covers = compute_coverings(dist, result.radii, opts.workers)
        write_result(result, out)
        write_covering_dump(covers, out / "coverings.json")
    else:
        result = analyze_network(spec, opts)
        write_result(result, out)
    for warning in result.fit.get("warnings", []):
        print(f"warning: {warning}", file=sys.stderr)
    print(f"wrote {out / 'result.json'} (+ hurst/spectrum/heat/dims/scaling CSVs)")
    return 0


def cmd_sweep(args) -> int:
    out = Path(args.out)
    if args.preset:
        base = AnalysisOptions(workers=args.workers)
        sweep = preset_sweep(args.preset, out, base)
    else:
        path = Path(args.sweep)
        if not path.exists():
            raise FileNotFoundError(f"sweep file not found: {path}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ResultFormatError(
                f"{path}: parse error at line {exc.lineno} column {exc.colno}: {exc.msg}"
            ) from exc
        sweep = SweepSpec.from_dict(data, out)
        if args.workers != 1:
            opts_dict = sweep.options.to_dict()
            opts_dict["workers"] = args.workers
            sweep = SweepSpec(
                entries=sweep.entries,
                options=AnalysisOptions.from_dict(opts_dict),
                out_dir=out,
            )
    _print_options_hash({"command": "sweep", "sweep": sweep.to_dict()})
    rows = run_sweep(sweep)

    widths = {c: max(len(c), max((len(str(r[c])) for r in rows), default=0))
              for c in SUMMARY_COLUMNS}
    print("  ".join(c.ljust(widths[c]) for c in SUMMARY_COLUMNS))
    for row in rows:
        print("  ".join(str(row[c]).ljust(widths[c]) for c in SUMMARY_COLUMNS))
    print(f"wrote {Path(sweep.out_dir) / 'summary.csv'}")
    return 0


def cmd_presets(args) -> int:
    for name in preset_names():
        sweep = preset_sweep(name, ".")
        print(f"{name:8s} {len(sweep.entries):3d} networks  {preset_description(name)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinfractal",
        description="Information-distance geometry and multifractal analysis "
                    "of spin chains and rings.",
        epilog="The default --out directory is $SPINFRACTAL_OUTDIR when set, else '.'",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    p_net = subs.add_parser("net", help="build a Hamiltonian", formatter_class=fmt)
    _add_spec_flags(p_net, require_spec_file=False)
    p_net.add_argument("--out", default=_default_out(), help="output directory")
    p_net.set_defaults(func=cmd_net)

    p_dist = subs.add_parser("dist", help="compute the distance matrix", formatter_class=fmt)
    _add_spec_flags(p_dist, require_spec_file=True)
    defaults = AnalysisOptions()
    p_dist.add_argument("--degeneracy-tol", type=float, default=defaults.degeneracy_tol,
                        help="relative eigenvalue gap below which eigenvalues merge")
    p_dist.add_argument("--identify", action="store_true",
                        help="merge zero-distance node pairs")
    p_dist.add_argument("--merge-tol", type=float, default=defaults.merge_tol,
                        help="distance threshold for --identify")
    p_dist.add_argument("--out", default=_default_out(), help="output directory")
    p_dist.set_defaults(func=cmd_dist)

    p_mfa = subs.add_parser("mfa", help="run the multifractal analysis", formatter_class=fmt)
    _add_spec_flags(p_mfa, require_spec_file=True)
    _add_analysis_flags(p_mfa)
    p_mfa.add_argument("--dump-coverings", action="store_true",
                       help="also write per-radius covering shapes to coverings.json")
    p_mfa.add_argument("--out", default=_default_out(), help="result directory")
    p_mfa.set_defaults(func=cmd_mfa)

    p_sweep = subs.add_parser("sweep", help="run a batch of analyses", formatter_class=fmt)
    group = p_sweep.add_mutually_exclusive_group(required=True)
    group.add_argument("--preset", help="bundled preset name (see 'presets')")
    group.add_argument("--sweep", help="sweep spec JSON file")
    p_sweep.add_argument("--workers", type=int, default=1, help="parallel sweep workers")
    p_sweep.add_argument("--out", default=_default_out(), help="output directory")
    p_sweep.set_defaults(func=cmd_sweep)

    p_presets = subs.add_parser("presets", help="list bundled sweep presets", formatter_class=fmt)
    p_presets.set_defaults(func=cmd_presets)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScalingRangeError, DegenerateInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (SpecError, ResultFormatError, FileNotFoundError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
