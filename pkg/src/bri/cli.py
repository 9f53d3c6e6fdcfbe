"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error. Diagnostics go to
stderr; data goes to files or stdout.
"""
from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .corpus import default_bond_stats, load_corpus
from .dedup import ScanConfig, scan_with_stats, write_pairs
from .errors import BRIError
from .formats import FORMAT_VERSION, fmt, read_bri_csv, write_bri_csv
from .ingest import (
    STEPS,
    ChainRecord,
    RejectionReport,
    clean,
    coords_filename,
    find_structure_files,
    load_chain,
    parse_mmcif,
    write_coords,
    write_manifest,
)
from .invariant import (
    BRI_COLUMNS,
    TRIN_COLUMNS,
    compute_bond_stats,
    compute_brain,
    compute_bri,
    compute_trin,
    corpus_invariant_stats,
    hat_bri,
    linf,
    mirror_bri,
)
from .reconstruct import reconstruct
from .viz import emit_bib, emit_bid, heatmap_counts, parse_eps, perturb_experiment, render_heatmap

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _non_negative(text: str) -> float:
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _pair(text: str) -> tuple[float, float]:
    lo, hi = (float(p) for p in text.split(","))
    if not hi > lo:
        raise argparse.ArgumentTypeError("need lo,hi with hi > lo")
    return lo, hi


def _threads(args) -> int:
    return args.threads or os.cpu_count() or 1


def _out(path):
    return sys.stdout if path in (None, "-") else path


# -- subcommands ---------------------------------------------------------------


def cmd_clean(args) -> int:
    files = find_structure_files(args.in_dir)
    if not files:
        raise BRIError(f"no .cif or .cif.gz files in {args.in_dir}")
    with ThreadPoolExecutor(max_workers=_threads(args)) as pool:
        parsed = list(pool.map(parse_mmcif, files))
    accepted, report = [], RejectionReport()
    for chains in parsed:
        ok, rep = clean(chains)
        accepted.extend(ok)
        report = report.merge(rep)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for chain in accepted:
        write_coords(chain, out / coords_filename(chain.entry_id, chain.chain_id))
    write_manifest(accepted, out / "manifest.tsv")
    report.write_tsv(args.report or out / "rejected.tsv")
    print(f"accepted {report.n_accepted} of {len(report.rows)} chains", file=sys.stderr)
    for step, n in report.counts.items():
        print(f"  step {step} ({STEPS[step - 1]}): {n}", file=sys.stderr)
    return EXIT_OK


def _stats_for(args):
    if getattr(args, "stats_manifest", None):
        return compute_bond_stats(c.backbone for c in load_corpus(manifest=args.stats_manifest))
    return default_bond_stats()


def cmd_invariant(args) -> int:
    chain = load_chain(args.input, args.chain)
    coords = chain.backbone
    if args.kind == "trin":
        trin = compute_trin(coords)
        lines = ["i," + ",".join(TRIN_COLUMNS)]
        lines += [",".join([str(k + 1)] + [fmt(v) for v in row]) for k, row in enumerate(trin)]
        text = "\n".join(lines) + "\n"
        if args.out in (None, "-"):
            sys.stdout.write(text)
        else:
            Path(args.out).write_text(text)
        return EXIT_OK
    if args.kind == "brain":
        brain = compute_brain(compute_bri(coords))
        sys.stdout.write(",".join(BRI_COLUMNS) + "\n" + ",".join(fmt(v) for v in brain) + "\n")
        return EXIT_OK
    bri = compute_bri(coords)
    if args.kind == "mirror":
        bri = mirror_bri(bri)
    elif args.kind == "hat":
        stats = _stats_for(args)
        for k, v in stats.as_dict(len(bri)).items():
            print(f"{k}\t{v}", file=sys.stderr)
        bri = hat_bri(bri, stats)
        if not np.all(np.isfinite(bri)):
            raise BRIError("row weights overflow 64-bit floats for this chain length")
    write_bri_csv(bri, _out(args.out))
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    bri = read_bri_csv(args.input)
    coords = reconstruct(bri)
    chain = ChainRecord.from_backbone(args.entry, args.chain_id, coords, ["UNK"] * len(coords))
    write_coords(chain, _out(args.out))
    return EXIT_OK


def cmd_compare(args) -> int:
    a = load_chain(args.a, args.chain_a).backbone
    b = load_chain(args.b, args.chain_b).backbone
    ba, bb = compute_bri(a), compute_bri(b)
    if ba.shape != bb.shape:
        raise BRIError(f"chains differ in length ({len(a)} vs {len(b)} residues)")
    print(f"m\t{len(a)}")
    print(f"linf_bri\t{fmt(linf(ba, bb))}")
    if args.mirror:
        print(f"linf_bri_mirror\t{fmt(linf(ba, mirror_bri(bb)))}")
    if len(a) >= 2:
        print(f"linf_brain\t{fmt(linf(compute_brain(ba), compute_brain(bb)))}")
    if args.hat:
        stats = compute_bond_stats([a, b]) if args.pair_stats else _stats_for(args)
        ha, hb = hat_bri(ba, stats), hat_bri(bb, stats)
        if np.all(np.isfinite(ha)) and np.all(np.isfinite(hb)):
            print(f"linf_hat\t{fmt(linf(ha, hb))}")
        else:
            print("linf_hat\tinf")
        print(f"lambda\t{fmt(stats.lam)}")
        print(f"mu\t{fmt(stats.mu(len(a)))}")
    return EXIT_OK


def cmd_dedup(args) -> int:
    corpus = load_corpus(manifest=args.manifest)
    cfg = ScanConfig(near_threshold=args.threshold, prefilter=not args.no_prefilter, brain_margin=args.margin)
    pairs, counts = scan_with_stats(corpus, cfg, threads=_threads(args))
    write_pairs(pairs, _out(args.report))
    if args.stats:
        Path(args.stats).write_text(counts.tsv())
    zero = sum(p.zero_distance for p in pairs)
    ident = sum(p.coordinates_identical for p in pairs)
    print(
        f"{len(pairs)} pairs within {args.threshold} A ({zero} at zero distance, {ident} coordinate-identical); "
        f"{counts.pruned} of {counts.considered} pairs pruned",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_bid(args) -> int:
    chain = load_chain(args.input, args.chain)
    if not (args.svg or args.csv):
        raise UsageError("bid: give --svg and/or --csv")
    emit_bid(compute_bri(chain.backbone), svg_out=args.svg, csv_out=args.csv, title=f"{chain.entry_id} {chain.chain_id}")
    return EXIT_OK


def read_ranges(path) -> dict[str, tuple[float, float]]:
    """Per-column ranges from a ``stats`` TSV (columns ``column``, ``min``, ``max``)."""
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise BRIError(f"{path}: empty ranges file")
    header = lines[0].split("\t")
    try:
        ci, lo, hi = header.index("column"), header.index("min"), header.index("max")
    except ValueError:
        raise BRIError(f"{path}: ranges file needs column, min and max headers") from None
    out = {}
    for line in lines[1:]:
        parts = line.split("\t")
        if len(parts) == len(header):
            out[parts[ci]] = (float(parts[lo]), float(parts[hi]))
    missing = [c for c in BRI_COLUMNS if c not in out]
    if missing:
        raise BRIError(f"{path}: no range for {', '.join(missing)}")
    return out


def cmd_bib(args) -> int:
    chain = load_chain(args.input, args.chain)
    ranges = read_ranges(args.ranges) if args.ranges else None
    emit_bib(compute_bri(chain.backbone), ranges, out=_out(args.svg), title=f"{chain.entry_id} {chain.chain_id}")
    return EXIT_OK


def _corpus_backbones(args):
    chains = load_corpus(args.inputs, manifest=args.manifest)
    if not chains:
        raise UsageError("give --manifest and/or input files")
    return [c.backbone for c in chains]


def cmd_heatmap(args) -> int:
    backbones = _corpus_backbones(args)
    hm = heatmap_counts(backbones, args.x, args.y, args.bins, args.xrange, args.yrange)
    render_heatmap(hm, args.out, log=args.log, cmap=args.cmap)
    if args.counts:
        np.savetxt(args.counts, hm.counts, fmt="%d", delimiter=",")
    print(f"binned {hm.total} of {hm.n_values} residues", file=sys.stderr)
    return EXIT_OK


def cmd_perturb(args) -> int:
    chain = load_chain(args.input, args.chain)
    try:
        eps = parse_eps(args.eps)
    except ValueError as exc:
        raise UsageError(f"--eps: {exc}") from None
    curve = perturb_experiment(chain.backbone, eps, trials=args.trials, seed=args.seed)
    text = curve.csv()
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    print(f"slope\t{fmt(curve.slope)}\nlambda_bound\t{fmt(curve.lambda_bound)}", file=sys.stderr)
    return EXIT_OK


def cmd_stats(args) -> int:
    backbones = _corpus_backbones(args)
    bond = compute_bond_stats(backbones)
    for k, v in bond.as_dict(args.m).items():
        print(f"{k}\t{v}", file=sys.stderr)
    lines = ["column\tcount\tmean\tstd\tmin\tmax\tmax_dev"]
    for s in corpus_invariant_stats(backbones):
        lines.append("\t".join([s.column, str(s.count)] + [fmt(v) for v in (s.mean, s.std, s.min, s.max, s.max_dev)]))
    text = "\n".join(lines) + "\n"
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    return EXIT_OK


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bri", description="Complete rigid-motion invariant (BRI) of protein backbones.")
    p.add_argument("--version", action="version", version=f"bri {__version__} (BRI CSV format {FORMAT_VERSION})")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    def chain_input(sp):
        sp.add_argument("input", help="coordinate CSV or mmCIF file")
        sp.add_argument("--chain", help="chain id (mmCIF input; default: first complete protein chain)")

    def threads(sp):
        sp.add_argument("--threads", type=_positive_int, help="worker threads (default: all CPUs)")

    def corpus(sp):
        sp.add_argument("inputs", nargs="*", help="coordinate CSV or mmCIF files")
        sp.add_argument("--manifest", help="manifest.tsv written by 'clean'")

    sp = sub.add_parser("clean", help="parse mmCIF files and apply the six cleaning steps")
    sp.add_argument("--in", dest="in_dir", required=True, help="directory of .cif / .cif.gz files")
    sp.add_argument("--out", required=True, help="output directory for coordinate CSVs and manifest.tsv")
    sp.add_argument("--report", help="rejection report TSV (default: OUT/rejected.tsv)")
    threads(sp)
    sp.set_defaults(func=cmd_clean)

    sp = sub.add_parser("invariant", help="write BRI (or trin, mirror, hat, Brain) of one chain")
    chain_input(sp)
    sp.add_argument("--kind", choices=("bri", "trin", "mirror", "hat", "brain"), default="bri")
    sp.add_argument("--stats-manifest", help="corpus for bond statistics of --kind hat (default: built-in)")
    sp.add_argument("--out", help="output CSV (default: stdout)")
    sp.set_defaults(func=cmd_invariant)

    sp = sub.add_parser("reconstruct", help="rebuild coordinates (canonical pose) from a BRI CSV")
    sp.add_argument("input", help="BRI CSV")
    sp.add_argument("--out", help="coordinate CSV (default: stdout)")
    sp.add_argument("--entry", default="recon")
    sp.add_argument("--chain-id", default="A")
    sp.set_defaults(func=cmd_reconstruct)

    sp = sub.add_parser("compare", help="L-infinity distances between two same-length chains")
    sp.add_argument("a")
    sp.add_argument("b")
    sp.add_argument("--chain-a")
    sp.add_argument("--chain-b")
    sp.add_argument("--mirror", action="store_true", help="also compare against the mirror image of B")
    sp.add_argument("--hat", action="store_true", help="also report the row-weighted distance")
    sp.add_argument("--pair-stats", action="store_true", help="bond statistics from the two chains themselves")
    sp.add_argument("--stats-manifest", help="corpus for bond statistics (default: built-in)")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("dedup", help="all-vs-all duplicate scan over same-length chains")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--threshold", type=_non_negative, default=0.01, help="near-duplicate threshold in A")
    sp.add_argument("--report", help="pairs TSV (default: stdout)")
    sp.add_argument("--no-prefilter", action="store_true", help="compare every pair in full")
    sp.add_argument("--margin", type=_non_negative, default=0.0, help="extra slack on the Brain prefilter")
    sp.add_argument("--stats", help="TSV with pairs considered / pruned / compared per length")
    threads(sp)
    sp.set_defaults(func=cmd_dedup)

    sp = sub.add_parser("bid", help="backbone invariant diagram (SVG + CSV)")
    chain_input(sp)
    sp.add_argument("--svg")
    sp.add_argument("--csv")
    sp.set_defaults(func=cmd_bid)

    sp = sub.add_parser("bib", help="backbone invariant barcode (SVG)")
    chain_input(sp)
    sp.add_argument("--svg", help="output SVG (default: stdout)")
    sp.add_argument("--ranges", help="per-column ranges: a TSV written by 'stats'")
    sp.set_defaults(func=cmd_bib)

    sp = sub.add_parser("heatmap", help="2D histogram of an invariant pair over all residues")
    corpus(sp)
    names = TRIN_COLUMNS + BRI_COLUMNS
    sp.add_argument("--x", required=True, choices=names)
    sp.add_argument("--y", required=True, choices=names)
    sp.add_argument("--bins", type=_positive_int, default=512)
    scale = sp.add_mutually_exclusive_group()
    scale.add_argument("--log", dest="log", action="store_true", default=True, help="log10(1 + count) colours (default)")
    scale.add_argument("--linear", dest="log", action="store_false")
    sp.add_argument("--xrange", type=_pair, help="lo,hi")
    sp.add_argument("--yrange", type=_pair, help="lo,hi")
    sp.add_argument("--cmap", default="rainbow")
    sp.add_argument("--out", required=True, help="output .png or .svg")
    sp.add_argument("--counts", help="also write the raw bin counts as CSV")
    sp.set_defaults(func=cmd_heatmap)

    sp = sub.add_parser("perturb", help="mean BRI distance under uniform coordinate noise")
    chain_input(sp)
    sp.add_argument("--eps", default="0.01:0.1:0.01", help="start:stop:step (inclusive) or a comma list, in A")
    sp.add_argument("--trials", type=_positive_int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", help="curve CSV (default: stdout)")
    sp.set_defaults(func=cmd_perturb)

    sp = sub.add_parser("stats", help="bond statistics and per-column invariant summaries")
    corpus(sp)
    sp.add_argument("--m", type=_positive_int, help="also report the atom-matching constant for this length")
    sp.add_argument("--out", help="column summary TSV (default: stdout)")
    sp.set_defaults(func=cmd_stats)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"bri: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BRIError, OSError, ValueError) as exc:
        print(f"bri: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
