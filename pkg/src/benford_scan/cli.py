"""``benford-scan`` command line.

Exit codes: 0 success, 1 fatal error (including usage errors), 2 partial
success (some inputs skipped).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .benford import DEFAULT_BASE, EPSILON, score_image
from .corruptions import FAMILIES, SEVERITIES, TABLE_ENV, CorruptionSpec, SeverityTable, corrupt
from .errors import BenfordScanError, NoInputError
from .harness import (
    DEFAULT_SEVERITIES,
    expected_groups,
    format_summary_table,
    missing_groups,
    read_scores_csv,
    render_boxplot_svg,
    run_sweep,
    summarize,
    summary_document,
    write_report,
)
from .imaging import CODECS, decode_image, save_png

EXIT_OK, EXIT_FATAL, EXIT_PARTIAL = 0, 1, 2

PIPELINE_NOTE = (
    f"Pipeline defaults: base {DEFAULT_BASE}; coefficients with |c| < {EPSILON:g} are "
    "ignored; the DC coefficient of each block is excluded unless --include-dc is given. "
    "Divergences are Jensen-Shannon in nats (upper bound ln 2)."
)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage errors are fatal, not "partial"
        self.print_usage(sys.stderr)
        self.exit(EXIT_FATAL, f"{self.prog}: error: {message}\n")


def _default_workers() -> int:
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:  # pragma: no cover - non-Linux
        return os.cpu_count() or 1


def _families(text: str) -> list[str]:
    items = [t.strip() for t in text.split(",") if t.strip()]
    bad = [t for t in items if t not in FAMILIES]
    if bad or not items:
        raise argparse.ArgumentTypeError(
            f"unsupported family {', '.join(bad) or text!r}; supported: {', '.join(FAMILIES)}"
        )
    return items


def _severities(text: str) -> list[int]:
    try:
        items = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"severities must be integers 1-5, got {text!r}") from None
    if not items or any(s not in SEVERITIES for s in items):
        raise argparse.ArgumentTypeError(f"severities must be in 1-5, got {text!r}")
    return items


def _base(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"base must be an integer >= 2, got {text!r}") from None
    if value < 2:
        raise argparse.ArgumentTypeError(f"base must be an integer >= 2, got {text!r}")
    return value


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _add_scoring_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--base", type=_base, default=DEFAULT_BASE, help="digit base (default: %(default)s)")
    p.add_argument(
        "--include-dc",
        action="store_true",
        help="also count each block's DC coefficient (default: excluded)",
    )


def _add_table_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--table",
        metavar="PATH",
        help=f"severity-table file (default: ${TABLE_ENV} if set, else built-in ImageNet-C values)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="benford-scan",
        description="Score images by how far their block-DCT leading digits stray from Benford's law.",
        epilog=PIPELINE_NOTE,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser(
        "score",
        help="score individual image files",
        description="Print '<path>\\t<js_divergence>\\t<coefficient_count>' per image.",
        epilog=PIPELINE_NOTE,
    )
    p.add_argument("paths", nargs="+", metavar="IMAGE")
    _add_scoring_args(p)

    p = sub.add_parser(
        "corrupt",
        help="write a corrupted copy of one image as PNG",
        description="Apply one corruption deterministically and write the result as PNG.",
        epilog="Output depends only on the input pixels, family, severity, seed, table and the input's file name.",
    )
    p.add_argument("path", metavar="IMAGE")
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--severity", required=True, type=int, choices=SEVERITIES)
    p.add_argument("--seed", type=_seed, default=0, help="run seed (default: %(default)s)")
    p.add_argument("--out", metavar="PNG", help="output file (default: <stem>__<family>__s<severity>.png)")
    _add_table_arg(p)

    p = sub.add_parser(
        "sweep",
        help="score a corpus clean and under corruptions, then write reports",
        description=(
            "Score every PNG/JPEG in CORPUS as-is and under each family x severity, "
            "then write scores.csv, skips.csv, summary.json and boxplot.svg."
        ),
        epilog=PIPELINE_NOTE,
    )
    p.add_argument("corpus", metavar="CORPUS")
    p.add_argument("--out", default="benford-report", help="report directory (default: %(default)s)")
    p.add_argument(
        "--families", type=_families, default=list(FAMILIES), help="comma-separated (default: all four)"
    )
    p.add_argument(
        "--severities",
        type=_severities,
        default=list(DEFAULT_SEVERITIES),
        help="comma-separated (default: 1,3,5)",
    )
    p.add_argument("--seed", type=_seed, default=0, help="run seed (default: %(default)s)")
    p.add_argument("--workers", type=int, default=_default_workers(), help="worker processes (default: all CPUs)")
    p.add_argument(
        "--codec",
        choices=CODECS,
        default="jpeg",
        help="storage round-trip applied to corrupted variants before scoring (default: %(default)s)",
    )
    p.add_argument("--jpeg-quality", type=int, default=85, help="JPEG quality for --codec jpeg (default: %(default)s)")
    p.add_argument("--save-corrupted", action="store_true", help="also write corrupted variants to OUT/corrupted/")
    _add_scoring_args(p)
    _add_table_arg(p)

    p = sub.add_parser(
        "report",
        help="rebuild summary.json and boxplot.svg from an existing scores.csv",
        description="Regenerate group statistics and the box plot without rescoring.",
    )
    p.add_argument("scores", metavar="SCORES_CSV")
    p.add_argument("--out", help="output directory (default: the CSV's directory)")
    return parser


def cmd_score(args) -> int:
    ok = skipped = 0
    for path in args.paths:
        try:
            score = score_image(decode_image(path), args.base, args.include_dc, image_id=path)
        except BenfordScanError as exc:
            print(f"skip\t{path}\t{exc}", file=sys.stderr)
            skipped += 1
            continue
        print(f"{path}\t{score.js_divergence:.17g}\t{score.coefficient_count}")
        ok += 1
    if ok == 0:
        print("benford-scan: no input could be scored", file=sys.stderr)
        return EXIT_FATAL
    return EXIT_PARTIAL if skipped else EXIT_OK


def cmd_corrupt(args) -> int:
    src = Path(args.path)
    table = SeverityTable.from_env(args.table)
    spec = CorruptionSpec(args.family, args.severity, args.seed)
    out = corrupt(decode_image(src), spec, table, image_id=src.name)
    dest = Path(args.out) if args.out else Path(f"{src.stem}__{args.family}__s{args.severity}.png")
    save_png(out, dest)
    print(dest)
    return EXIT_OK


def cmd_sweep(args) -> int:
    table = SeverityTable.from_env(args.table)
    out_dir = Path(args.out)
    result = run_sweep(
        args.corpus,
        args.families,
        args.severities,
        args.base,
        args.seed,
        include_dc=args.include_dc,
        table=table,
        workers=max(1, args.workers),
        codec=args.codec,
        quality=args.jpeg_quality,
        save_corrupted=out_dir / "corrupted" if args.save_corrupted else None,
    )
    if not result.records:
        for s in result.skips:
            print(f"skip\t{s.image_id}\t{s.family}\t{s.severity}\t{s.reason}", file=sys.stderr)
        raise NoInputError("no image in the corpus could be scored")
    groups = expected_groups(result.metadata["families"], result.metadata["severities"])
    summaries = summarize(result.records)
    write_report(
        summaries,
        result.records,
        out_dir,
        skips=result.skips,
        metadata=result.metadata,
        warnings_=missing_groups(result.records, groups),
    )
    print(format_summary_table(summaries))
    print(f"\n{len(result.records)} scores, {len(result.skips)} skips -> {out_dir}")
    return EXIT_PARTIAL if result.skips else EXIT_OK


def cmd_report(args) -> int:
    scores = Path(args.scores)
    records = read_scores_csv(scores)
    if not records:
        raise NoInputError(f"{scores} has no records")
    out_dir = Path(args.out) if args.out else scores.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    summaries = summarize(records)
    doc = summary_document(summaries, {"source": scores.name})
    (out_dir / "summary.json").write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    (out_dir / "boxplot.svg").write_text(render_boxplot_svg(summaries), encoding="utf-8")
    print(format_summary_table(summaries))
    return EXIT_OK


COMMANDS = {"score": cmd_score, "corrupt": cmd_corrupt, "sweep": cmd_sweep, "report": cmd_report}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (BenfordScanError, OSError, ValueError) as exc:
        print(f"benford-scan {args.command}: {exc}", file=sys.stderr)
        return EXIT_FATAL
