"""Assembly of the network report document and its output tree."""

from __future__ import annotations

import hashlib
import html
import json
import os
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from .charts import ChartSpec, render_chart, spec_for
from .distributions import DistributionSummary, format_distribution
from .manifest import MISSING, Manifest, ValidationReport, validate_manifest
from .na import is_na
from .point import STAT_FIELDS, STAT_LABELS, PointStats, StatsAggregate, format_aggregate, format_stats, format_value

MARKDOWN = "markdown"
HTML = "html"
FORMATS = (MARKDOWN, HTML)
NO_CHARTS_NOTICE = "No distributions computed."
ASSORTATIVITY_GAP = 1e-9


class ManifestNotValidated(ValueError):
    """Raised when rendering with a manifest that failed validation and no override."""


@dataclass(frozen=True)
class Chart:
    index: int
    spec: ChartSpec
    svg: str

    @property
    def name(self) -> str:
        return self.spec.source.name

    @property
    def filename(self) -> str:
        return f"{self.index:02d}_{self.name}.svg"


@dataclass(frozen=True)
class GenerationMetadata:
    version: str
    timestamp: str
    config_digest: str


def config_digest(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def build_timestamp() -> str:
    """UTC time from ``SOURCE_DATE_EPOCH``, so reproducible builds stay byte-identical."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is None or not epoch.strip().isdigit():
        return "not recorded"
    return datetime.fromtimestamp(int(epoch), tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def make_charts(distributions: Sequence[DistributionSummary]) -> list[Chart]:
    charts = []
    for i, d in enumerate(distributions, start=1):
        spec = spec_for(d)
        charts.append(Chart(i, spec, render_chart(spec)))
    return charts


# ---- document model ---------------------------------------------------
# A report is a flat list of blocks; the two emitters below turn it into text.


def _field_label(key: str) -> str:
    return key.replace("_", " ").capitalize()


def _scalar(value) -> str:
    if value is MISSING:
        return "MISSING"
    if isinstance(value, bool):
        return "yes" if value else "no"
    return str(value).strip()


def _record_items(value, depth: int = 0) -> list[tuple[int, str, str]]:
    """Flatten a nested manifest value into (depth, label, text) rows."""
    rows = []
    if isinstance(value, (dict, list)) and not value:
        rows.append((depth, "", "(none)"))
    elif isinstance(value, dict):
        for k, v in value.items():
            if isinstance(v, (dict, list)):
                rows.append((depth, _field_label(str(k)), ""))
                rows += _record_items(v, depth + 1)
            else:
                rows.append((depth, _field_label(str(k)), _scalar(v)))
    elif isinstance(value, list):
        for v in value:
            if isinstance(v, (dict, list)):
                rows.append((depth, "", ""))
                rows += _record_items(v, depth + 1)
            else:
                rows.append((depth, "", _scalar(v)))
    else:
        rows.append((depth, "", _scalar(value)))
    return rows


def _section_fields(section, keys_titles: Sequence[tuple[str, str]]) -> list:
    blocks = []
    for key, title in keys_titles:
        value = section.get(key, MISSING) if isinstance(section, dict) else section
        blocks.append(("field", title, value))
    return blocks


def _stats_rows(stats: PointStats) -> tuple[list[list[str]], list[str]]:
    footnotes = []
    rows = []
    std, alt = stats.degree_assortativity, stats.degree_assortativity_paper_variant
    differs = not is_na(std) and not is_na(alt) and abs(float(std) - float(alt)) > ASSORTATIVITY_GAP
    for name in STAT_FIELDS:
        label = STAT_LABELS[name]
        if name == "degree_assortativity_paper_variant" and differs:
            label += " [1]"
        rows.append([label, format_value(getattr(stats, name))])
    if differs:
        footnotes.append(
            "[1] The node-mean form centers endpoint degrees on the mean node degree instead of "
            "the mean over edge ends, so it departs from the Pearson coefficient when degrees vary."
        )
    return rows, footnotes


def _aggregate_rows(agg: StatsAggregate) -> list[list[str]]:
    rows = []
    for name in STAT_FIELDS:
        fa = agg.fields[name]
        rows.append([STAT_LABELS[name], format_value(fa.mean), format_value(fa.std), f"{fa.coverage}/{agg.count}"])
    return rows


def build_blocks(
    title: str,
    manifest: Manifest,
    stats: PointStats | None,
    charts: Sequence[Chart],
    metadata: GenerationMetadata,
    validation: ValidationReport,
    aggregate: StatsAggregate | None = None,
    cross_warnings: Sequence = (),
) -> list:
    b: list = [("h1", f"Network Report: {title}")]
    if not validation.passed:
        b.append(("banner", "Manifest validation failed; this report was generated with the override flag.",
                  [str(f) for f in validation.errors]))
    if cross_warnings:
        b.append(("banner", "Declared network types disagree with the loaded data.",
                  [str(f) for f in cross_warnings]))

    data = manifest.data
    cr = data.get("curation_rationale", MISSING)
    b.append(("h2", "Curation Rationale"))
    b += _section_fields(cr, [
        ("authors_and_reference", "Authors and reference"),
        ("purpose", "Purpose"),
        ("domain", "Domain"),
        ("node_semantics", "What nodes represent"),
        ("edge_semantics", "What edges represent"),
        ("contents", "Contents"),
        ("network_types", "Network types"),
    ])

    b.append(("h2", "Dataset Collection, Preprocessing and Annotation"))
    b.append(("h3", "Collection"))
    b += _section_fields(data.get("collection", MISSING), [
        ("mechanism_and_raw_data", "Collection mechanism and raw data"),
        ("sampling", "Sampling"),
    ])
    b.append(("h3", "Preprocessing"))
    b += _section_fields(data.get("preprocessing", MISSING), [
        ("network_construction", "Network construction"),
        ("data_cleaning", "Data cleaning"),
        ("data_filtering", "Data filtering"),
        ("network_transformation", "Network transformation"),
        ("attribute_transformation", "Attribute transformation"),
        ("data_splits", "Data splits"),
    ])
    b.append(("h3", "Instance Demographics"))
    b.append(("field", "Instance demographics", data.get("instance_demographics", MISSING)))
    b.append(("h3", "Annotation"))
    b += _section_fields(data.get("annotation", MISSING), [
        ("process", "Annotation process"),
        ("annotator_demographics", "Annotator demographics"),
    ])

    b.append(("h2", "Uses"))
    b += _section_fields(data.get("uses", MISSING), [
        ("primary_intended", "Primary intended uses"),
        ("other", "Other uses"),
    ])

    b.append(("h2", "Network Statistics"))
    if aggregate is not None:
        b.append(("p", f"Aggregated over {aggregate.count} networks: mean, population standard deviation, "
                       "and the number of networks where the statistic is defined."))
        b.append(("table", ["Statistic", "Mean", "Std", "Coverage"], _aggregate_rows(aggregate)))
    if stats is not None:
        if aggregate is not None:
            b.append(("p", "Statistics of the union graph (each network is one component):"))
        rows, footnotes = _stats_rows(stats)
        b.append(("table", ["Statistic", "Value"], rows))
        for note in footnotes:
            b.append(("p", note))
        for note in stats.notes:
            b.append(("p", f"Note: {note}"))

    b.append(("h3", "Distributions"))
    if not charts:
        b.append(("notice", NO_CHARTS_NOTICE))
    for chart in charts:
        b.append(("chart", chart))

    b.append(("h2", "Generation Metadata"))
    b.append(("list", [
        f"Tool version: {metadata.version}",
        f"Generated: {metadata.timestamp}",
        f"Configuration digest (SHA-256): {metadata.config_digest}",
    ]))
    return b


# ---- emitters ---------------------------------------------------------


def _md_escape(text: str) -> str:
    return text.replace("|", "\\|").replace("\n", " ")


def _md_field(title: str, value) -> list[str]:
    if isinstance(value, (dict, list)):
        if isinstance(value, list) and all(not isinstance(v, (dict, list)) for v in value):
            return [f"**{title}:** {', '.join(_scalar(v) for v in value) or '(none)'}", ""]
        lines = [f"**{title}:**", ""]
        for depth, label, text in _record_items(value):
            bullet = "  " * depth + "- "
            lines.append(bullet + (f"{label}: {text}" if label and text else label or text))
        return lines + [""]
    return [f"**{title}:** {_scalar(value)}", ""]


def emit_markdown(blocks: list) -> str:
    out: list[str] = []
    for block in blocks:
        kind = block[0]
        if kind == "h1":
            out += [f"# {block[1]}", ""]
        elif kind == "h2":
            out += [f"## {block[1]}", ""]
        elif kind == "h3":
            out += [f"### {block[1]}", ""]
        elif kind == "p":
            out += [block[1], ""]
        elif kind == "notice":
            out += [f"_{block[1]}_", ""]
        elif kind == "banner":
            out += [f"> **Warning:** {block[1]}", ">"] + [f"> - {item}" for item in block[2]] + [""]
        elif kind == "field":
            out += _md_field(block[1], block[2])
        elif kind == "list":
            out += [f"- {item}" for item in block[1]] + [""]
        elif kind == "table":
            header, rows = block[1], block[2]
            out.append("| " + " | ".join(header) + " |")
            out.append("|" + "|".join("---" for _ in header) + "|")
            out += ["| " + " | ".join(_md_escape(c) for c in row) + " |" for row in rows]
            out.append("")
        elif kind == "chart":
            chart: Chart = block[1]
            d = chart.spec.source
            out += [f"![{chart.spec.title}](charts/{chart.filename})", ""]
            out += [f"*{chart.spec.title}.* Data: `distributions/{d.name}.tsv`.", ""]
    return "\n".join(out).rstrip("\n") + "\n"


def _html_value(value) -> str:
    if isinstance(value, list) and all(not isinstance(v, (dict, list)) for v in value):
        return html.escape(", ".join(_scalar(v) for v in value) or "(none)")
    if isinstance(value, (dict, list)):
        items = []
        for depth, label, text in _record_items(value):
            body = f"{label}: {text}" if label and text else label or text
            items.append(f'<li style="margin-left:{depth * 1.5:.1f}em">{html.escape(body)}</li>')
        return "<ul>" + "".join(items) + "</ul>"
    return html.escape(_scalar(value))


STYLE = (
    "body{font-family:sans-serif;max-width:960px;margin:2em auto;padding:0 1em;line-height:1.45}"
    "table{border-collapse:collapse}td,th{border:1px solid #bbb;padding:0.25em 0.6em;text-align:left}"
    ".banner{border:2px solid #b00;background:#fff3f3;padding:0.5em 1em}"
    ".notice{font-style:italic}figure{margin:1.5em 0}"
)


def emit_html(blocks: list, title: str) -> str:
    out = ["<!DOCTYPE html>", '<html lang="en">', "<head>", '<meta charset="utf-8">',
           f"<title>{html.escape(title)}</title>", f"<style>{STYLE}</style>", "</head>", "<body>"]
    for block in blocks:
        kind = block[0]
        if kind in ("h1", "h2", "h3"):
            out.append(f"<{kind}>{html.escape(block[1])}</{kind}>")
        elif kind == "p":
            out.append(f"<p>{html.escape(block[1])}</p>")
        elif kind == "notice":
            out.append(f'<p class="notice">{html.escape(block[1])}</p>')
        elif kind == "banner":
            items = "".join(f"<li>{html.escape(i)}</li>" for i in block[2])
            out.append(f'<div class="banner"><strong>Warning:</strong> {html.escape(block[1])}<ul>{items}</ul></div>')
        elif kind == "field":
            out.append(f"<p><strong>{html.escape(block[1])}:</strong> {_html_value(block[2])}</p>")
        elif kind == "list":
            out.append("<ul>" + "".join(f"<li>{html.escape(i)}</li>" for i in block[1]) + "</ul>")
        elif kind == "table":
            head = "".join(f"<th>{html.escape(h)}</th>" for h in block[1])
            rows = "".join("<tr>" + "".join(f"<td>{html.escape(c)}</td>" for c in r) + "</tr>" for r in block[2])
            out.append(f"<table><thead><tr>{head}</tr></thead><tbody>{rows}</tbody></table>")
        elif kind == "chart":
            chart: Chart = block[1]
            out.append(f'<figure id="chart-{chart.index:02d}">')
            out.append(chart.svg.rstrip("\n"))
            out.append(f"<figcaption>{html.escape(chart.spec.title)}</figcaption>")
            out.append("</figure>")
    out += ["</body>", "</html>"]
    return "\n".join(out) + "\n"


def render_report(
    manifest: Manifest,
    stats: PointStats | None,
    charts: Sequence[Chart],
    fmt: str = MARKDOWN,
    *,
    title: str = "dataset",
    metadata: GenerationMetadata | None = None,
    validation: ValidationReport | None = None,
    allow_invalid: bool = False,
    aggregate: StatsAggregate | None = None,
    cross_warnings: Sequence = (),
) -> bytes:
    """Report document as UTF-8 bytes."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown report format {fmt!r}")
    validation = validation if validation is not None else validate_manifest(manifest)
    if not validation.passed and not allow_invalid:
        raise ManifestNotValidated("manifest failed validation: " + "; ".join(str(e) for e in validation.errors))
    metadata = metadata or GenerationMetadata("unknown", build_timestamp(), "not recorded")
    blocks = build_blocks(title, manifest, stats, charts, metadata, validation, aggregate, cross_warnings)
    text = emit_markdown(blocks) if fmt == MARKDOWN else emit_html(blocks, f"Network Report: {title}")
    return text.encode("utf-8")


def write_report_tree(
    out_dir: Path,
    report: bytes,
    fmt: str,
    charts: Sequence[Chart],
    distributions: Sequence[DistributionSummary],
    stats_text: str,
) -> list[Path]:
    """Write report, charts, stats and distribution tables; returns written paths in order."""
    out_dir = Path(out_dir)
    (out_dir / "distributions").mkdir(parents=True, exist_ok=True)
    written = []
    report_path = out_dir / ("report.md" if fmt == MARKDOWN else "report.html")
    report_path.write_bytes(report)
    written.append(report_path)
    if fmt == MARKDOWN and charts:
        (out_dir / "charts").mkdir(exist_ok=True)
        for chart in charts:
            p = out_dir / "charts" / chart.filename
            p.write_bytes(chart.svg.encode("utf-8"))
            written.append(p)
    stats_path = out_dir / "stats.txt"
    stats_path.write_bytes(stats_text.encode("utf-8"))
    written.append(stats_path)
    for d in distributions:
        p = out_dir / "distributions" / f"{d.name}.tsv"
        p.write_bytes(format_distribution(d).encode("utf-8"))
        written.append(p)
    return written


def stats_text(stats: PointStats | None, members: Sequence[tuple[str, PointStats]] = (),
               aggregate: StatsAggregate | None = None) -> str:
    parts = []
    for name, s in members:
        parts.append(format_stats(s, header=f"point statistics: {name}"))
    if aggregate is not None:
        parts.append(format_aggregate(aggregate))
    if stats is not None and not members:
        parts.append(format_stats(stats))
    return "\n".join(parts)

