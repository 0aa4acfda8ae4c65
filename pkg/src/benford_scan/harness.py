"""Corpus sweeps, group statistics, anomaly flags and report files.

A sweep scores every image of a corpus once as-is (family ``clean``,
severity 0) and once per requested (family, severity) corruption. Corrupted
variants are produced in memory and passed through a storage codec before
scoring, mimicking a dataset written to disk and read back.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence
from xml.sax.saxutils import escape

from . import __version__
from .benford import DEFAULT_BASE, EPSILON, LN2, score_image
from .corruptions import FAMILIES, CorruptionSpec, SeverityTable, corrupt
from .errors import BenfordScanError, CalibrationError, NoInputError
from .imaging import decode_image, encode_jpeg, encode_png, list_images, storage_roundtrip

logger = logging.getLogger(__name__)

CLEAN = "clean"
DEFAULT_SEVERITIES = (1, 3, 5)
QUANTILE_METHOD = "linear"
WHISKER_IQR = 1.5
SCORE_COLUMNS = ("image_id", "family", "severity", "js_divergence", "coefficient_count", "width", "height")
SKIP_COLUMNS = ("image_id", "family", "severity", "reason")


@dataclass(frozen=True)
class ScoreRecord:
    image_id: str
    family: str
    severity: int
    js_divergence: float
    coefficient_count: int
    width: int
    height: int

    def __post_init__(self) -> None:
        if (self.severity == 0) != (self.family == CLEAN):
            raise ValueError(f"severity 0 must pair with family 'clean': {self.family}/{self.severity}")


@dataclass(frozen=True)
class SkipRecord:
    image_id: str
    family: str
    severity: int
    reason: str


@dataclass(frozen=True)
class GroupSummary:
    family: str
    severity: int
    n: int
    median: float
    q1: float
    q3: float
    min: float
    max: float
    whisker_low: float
    whisker_high: float


@dataclass
class SweepResult:
    records: list[ScoreRecord]
    skips: list[SkipRecord]
    metadata: dict = field(default_factory=dict)


def _format_score(x: float) -> str:
    return format(x, ".17g")


def _record_key(r) -> tuple:
    return (r.image_id, r.family, r.severity)


# --------------------------------------------------------------------------
# sweep
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class _Plan:
    families: tuple[str, ...]
    severities: tuple[int, ...]
    base: int
    seed: int
    include_dc: bool
    table_text: str
    codec: str
    quality: int
    save_dir: str | None


def _variant_name(image_id: str, family: str, severity: int, codec: str) -> str:
    stem = Path(image_id).stem
    return f"{stem}__{family}__s{severity}.{'jpg' if codec == 'jpeg' else 'png'}"


def _process_image(path: str, image_id: str, plan: _Plan) -> tuple[list[ScoreRecord], list[SkipRecord]]:
    records: list[ScoreRecord] = []
    skips: list[SkipRecord] = []
    variants = [(CLEAN, 0)] + [(f, s) for f in plan.families for s in plan.severities]
    try:
        img = decode_image(path)
    except BenfordScanError as exc:
        reason = f"{type(exc).__name__}: {exc}"
        return records, [SkipRecord(image_id, fam, sev, reason) for fam, sev in variants]

    height, width = img.shape[:2]
    table = SeverityTable.parse(plan.table_text)
    for fam, sev in variants:
        try:
            if fam == CLEAN:
                variant = img
            else:
                spec = CorruptionSpec(fam, sev, plan.seed)
                variant = storage_roundtrip(corrupt(img, spec, table, image_id), plan.codec, plan.quality)
                if plan.save_dir is not None:
                    out = Path(plan.save_dir) / _variant_name(image_id, fam, sev, plan.codec)
                    out.write_bytes(encode_jpeg(variant, plan.quality) if plan.codec == "jpeg" else encode_png(variant))
            score = score_image(variant, plan.base, plan.include_dc, image_id, fam, sev)
        except BenfordScanError as exc:
            skips.append(SkipRecord(image_id, fam, sev, f"{type(exc).__name__}: {exc}"))
            continue
        records.append(
            ScoreRecord(image_id, fam, sev, score.js_divergence, score.coefficient_count, width, height)
        )
    return records, skips


def _star_process(args):
    return _process_image(*args)


def run_sweep(
    corpus_dir: str | os.PathLike,
    families: Iterable[str] = FAMILIES,
    severities: Iterable[int] = DEFAULT_SEVERITIES,
    base: int = DEFAULT_BASE,
    seed: int = 0,
    *,
    include_dc: bool = False,
    table: SeverityTable | None = None,
    workers: int = 1,
    codec: str = "jpeg",
    quality: int = 85,
    save_corrupted: str | os.PathLike | None = None,
) -> SweepResult:
    """Score a corpus clean and under every (family, severity) corruption.

    Unusable images or variants never abort the sweep; they become
    :class:`SkipRecord` entries. Output order is sorted by
    ``(image_id, family, severity)`` and independent of ``workers``.

    Raises:
        NoInputError: the directory holds no PNG/JPEG files.
    """
    corpus_dir = Path(corpus_dir)
    paths = list_images(corpus_dir)
    if not paths:
        raise NoInputError(f"no PNG/JPEG files in {corpus_dir}")
    families = tuple(sorted(set(families), key=FAMILIES.index))
    severities = tuple(sorted(set(severities)))
    for fam in families:
        CorruptionSpec(fam, 1, seed)
    for sev in severities:
        CorruptionSpec(FAMILIES[0], sev, seed)
    table = table or SeverityTable.default()
    if save_corrupted is not None:
        Path(save_corrupted).mkdir(parents=True, exist_ok=True)
    plan = _Plan(
        families, severities, base, seed, include_dc, table.dumps(), codec, quality,
        None if save_corrupted is None else str(save_corrupted),
    )
    jobs = [(str(p), p.relative_to(corpus_dir).as_posix(), plan) for p in paths]

    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_star_process, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_star_process(job) for job in jobs]

    records = sorted((r for recs, _ in results for r in recs), key=_record_key)
    skips = sorted((s for _, sk in results for s in sk), key=_record_key)
    metadata = {
        "base": base,
        "seed": seed,
        "include_dc": include_dc,
        "epsilon": EPSILON,
        "codec": codec,
        "jpeg_quality": quality if codec == "jpeg" else None,
        "families": list(families),
        "severities": list(severities),
        "table_checksum": table.checksum(),
        "n_images": len(paths),
    }
    return SweepResult(records, skips, metadata)


# --------------------------------------------------------------------------
# statistics
# --------------------------------------------------------------------------


def quantile(sorted_values: Sequence[float], q: float) -> float:
    """Linear interpolation between order statistics (numpy's default rule)."""
    n = len(sorted_values)
    if n == 0:
        raise ValueError("quantile of an empty sequence")
    if not 0 <= q <= 1:
        raise ValueError(f"q must be in [0, 1], got {q}")
    h = (n - 1) * q
    lo = math.floor(h)
    hi = min(lo + 1, n - 1)
    frac = h - lo
    return sorted_values[lo] + (sorted_values[hi] - sorted_values[lo]) * frac


def summarize_values(family: str, severity: int, values: Iterable[float]) -> GroupSummary:
    v = sorted(values)
    q1, med, q3 = quantile(v, 0.25), quantile(v, 0.5), quantile(v, 0.75)
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - WHISKER_IQR * iqr, q3 + WHISKER_IQR * iqr
    whisker_low = min(x for x in v if x >= lo_fence)
    whisker_high = max(x for x in v if x <= hi_fence)
    return GroupSummary(family, severity, len(v), med, q1, q3, v[0], v[-1], whisker_low, whisker_high)


def _group_order(key: tuple[str, int]) -> tuple:
    family, severity = key
    if family == CLEAN:
        rank = -1
    elif family in FAMILIES:
        rank = FAMILIES.index(family)
    else:
        rank = len(FAMILIES)
    return (rank, family, severity)


def summarize(
    records: Iterable[ScoreRecord],
    groups: Iterable[tuple[str, int]] | None = None,
) -> list[GroupSummary]:
    """Tukey box-plot statistics per (family, severity), clean first.

    When ``groups`` is given, requested groups without any record are left
    out and reported through :func:`warnings.warn`.
    """
    buckets: dict[tuple[str, int], list[float]] = {}
    for r in records:
        buckets.setdefault((r.family, r.severity), []).append(r.js_divergence)
    if groups is not None:
        for key in groups:
            if key not in buckets:
                msg = f"group {key[0]}/{key[1]} has no records; omitted"
                logger.warning(msg)
                warnings.warn(msg, stacklevel=2)
    return [summarize_values(f, s, buckets[(f, s)]) for f, s in sorted(buckets, key=_group_order)]


def expected_groups(families: Iterable[str], severities: Iterable[int]) -> list[tuple[str, int]]:
    return [(CLEAN, 0)] + [(f, s) for f in families for s in severities]


def missing_groups(records: Iterable[ScoreRecord], groups: Iterable[tuple[str, int]]) -> list[str]:
    present = {(r.family, r.severity) for r in records}
    return [f"group {f}/{s} has no records; omitted" for f, s in groups if (f, s) not in present]


def anomaly_threshold(calibration: Iterable[ScoreRecord], q: float = 0.95) -> float:
    """The ``q``-quantile of the clean-group scores in ``calibration``."""
    clean = sorted(r.js_divergence for r in calibration if r.family == CLEAN)
    if not clean:
        raise CalibrationError("quantile rule needs at least one clean record")
    return quantile(clean, q)


def flag_anomalies(
    records: Sequence[ScoreRecord],
    threshold: float | None = None,
    *,
    q: float = 0.95,
    calibration: Sequence[ScoreRecord] | None = None,
) -> list[ScoreRecord]:
    """Records whose divergence is strictly above a threshold.

    With ``threshold=None`` the threshold is the ``q``-quantile of the clean
    records in ``calibration`` (default: ``records`` itself).
    """
    if threshold is None:
        threshold = anomaly_threshold(records if calibration is None else calibration, q)
    return [r for r in records if r.js_divergence > threshold]


# --------------------------------------------------------------------------
# persistence
# --------------------------------------------------------------------------


def write_scores_csv(records: Iterable[ScoreRecord], path: str | os.PathLike) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SCORE_COLUMNS)
        for r in sorted(records, key=_record_key):
            w.writerow([r.image_id, r.family, r.severity, _format_score(r.js_divergence),
                        r.coefficient_count, r.width, r.height])
    return path


def write_skips_csv(skips: Iterable[SkipRecord], path: str | os.PathLike) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SKIP_COLUMNS)
        for s in sorted(skips, key=_record_key):
            w.writerow([s.image_id, s.family, s.severity, s.reason])
    return path


def read_scores_csv(path: str | os.PathLike) -> list[ScoreRecord]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != SCORE_COLUMNS:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return [
            ScoreRecord(
                row["image_id"], row["family"], int(row["severity"]), float(row["js_divergence"]),
                int(row["coefficient_count"]), int(row["width"]), int(row["height"]),
            )
            for row in reader
        ]


_COLOURS = {0: "#1f77b4", 1: "#ff7f0e", 2: "#8c564b", 3: "#2ca02c", 4: "#9467bd", 5: "#d62728"}


def render_boxplot_svg(summaries: Sequence[GroupSummary], title: str = "Jensen-Shannon divergence from Benford's law") -> str:
    """Grouped box plot (one box per family x severity), clean leftmost.

    Output is a pure function of ``summaries``: fixed layout and fixed
    number formatting, no timestamps or random ids.
    """
    box_w, gap, left, right, top, bottom, plot_h = 18, 10, 70, 20, 40, 90, 320
    n = len(summaries)
    width = left + right + n * (box_w + gap) + gap
    height = top + plot_h + bottom
    ymax = max((s.max for s in summaries), default=0.0)
    ymax = ymax * 1.05 if ymax > 0 else 1.0

    def y(v: float) -> str:
        return f"{top + plot_h * (1.0 - v / ymax):.2f}"

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="10">',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + plot_h}" stroke="#000"/>',
        f'<line x1="{left}" y1="{top + plot_h}" x2="{width - right}" y2="{top + plot_h}" stroke="#000"/>',
    ]
    for i in range(6):
        v = ymax * i / 5
        out.append(f'<line x1="{left - 4}" y1="{y(v)}" x2="{left}" y2="{y(v)}" stroke="#000"/>')
        out.append(f'<text x="{left - 6}" y="{y(v)}" text-anchor="end" dominant-baseline="middle">{v:.4f}</text>')
    out.append(
        f'<text x="14" y="{top + plot_h / 2:.1f}" transform="rotate(-90 14 {top + plot_h / 2:.1f})" '
        'text-anchor="middle">D_JS (nats)</text>'
    )
    for i, s in enumerate(summaries):
        x0 = left + gap + i * (box_w + gap)
        xc = x0 + box_w / 2
        colour = _COLOURS.get(s.severity, "#7f7f7f")
        label = escape(s.family if s.family == CLEAN else f"{s.family} s{s.severity}")
        out.append(f'<g class="box" data-family="{escape(s.family)}" data-severity="{s.severity}" data-n="{s.n}">')
        out.append(f'<line x1="{xc:.1f}" y1="{y(s.whisker_low)}" x2="{xc:.1f}" y2="{y(s.q1)}" stroke="#000"/>')
        out.append(f'<line x1="{xc:.1f}" y1="{y(s.q3)}" x2="{xc:.1f}" y2="{y(s.whisker_high)}" stroke="#000"/>')
        for v in (s.whisker_low, s.whisker_high):
            out.append(f'<line x1="{x0 + 4}" y1="{y(v)}" x2="{x0 + box_w - 4}" y2="{y(v)}" stroke="#000"/>')
        top_edge, bottom_edge = float(y(s.q3)), float(y(s.q1))
        out.append(
            f'<rect x="{x0}" y="{top_edge:.2f}" width="{box_w}" height="{bottom_edge - top_edge:.2f}" '
            f'fill="{colour}" fill-opacity="0.7" stroke="#000"/>'
        )
        out.append(f'<line x1="{x0}" y1="{y(s.median)}" x2="{x0 + box_w}" y2="{y(s.median)}" stroke="#000" stroke-width="2"/>')
        ty = top + plot_h + 8
        out.append(
            f'<text x="{xc:.1f}" y="{ty}" transform="rotate(60 {xc:.1f} {ty})">{label}</text>'
        )
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def summary_document(
    summaries: Sequence[GroupSummary],
    metadata: dict | None = None,
    warnings_: Sequence[str] = (),
    timestamp: str | None = None,
) -> dict:
    meta = {
        "tool": "benford-scan",
        "version": __version__,
        "units": "nats",
        "js_upper_bound": LN2,
        "quantile_method": QUANTILE_METHOD,
        "whiskers": f"Tukey, {WHISKER_IQR} x IQR",
    }
    meta.update(metadata or {})
    meta["timestamp"] = timestamp or datetime.now(timezone.utc).isoformat(timespec="seconds")
    groups = []
    for s in summaries:
        entry = asdict(s)
        entry["median_normalized"] = s.median / LN2
        groups.append(entry)
    return {"metadata": meta, "groups": groups, "warnings": list(warnings_)}


def write_report(
    summaries: Sequence[GroupSummary],
    records: Sequence[ScoreRecord],
    out_dir: str | os.PathLike,
    *,
    skips: Sequence[SkipRecord] = (),
    metadata: dict | None = None,
    warnings_: Sequence[str] = (),
) -> dict[str, Path]:
    """Write ``scores.csv``, ``skips.csv``, ``summary.json`` and ``boxplot.svg``.

    Raises:
        NoInputError: nothing to report.
        OSError: ``out_dir`` cannot be created or written.
    """
    if not records or not summaries:
        raise NoInputError("no score records to report")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "scores": write_scores_csv(records, out_dir / "scores.csv"),
        "skips": write_skips_csv(skips, out_dir / "skips.csv"),
    }
    doc = summary_document(summaries, metadata, warnings_)
    paths["summary"] = out_dir / "summary.json"
    paths["summary"].write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    paths["boxplot"] = out_dir / "boxplot.svg"
    paths["boxplot"].write_text(render_boxplot_svg(summaries), encoding="utf-8")
    return paths


def format_summary_table(summaries: Sequence[GroupSummary]) -> str:
    header = f"{'family':<16}{'sev':>4}{'n':>6}{'median':>12}{'q1':>12}{'q3':>12}{'median/ln2':>12}"
    lines = [header, "-" * len(header)]
    for s in summaries:
        lines.append(
            f"{s.family:<16}{s.severity:>4}{s.n:>6}{s.median:>12.6f}{s.q1:>12.6f}{s.q3:>12.6f}{s.median / LN2:>12.6f}"
        )
    return "\n".join(lines)
