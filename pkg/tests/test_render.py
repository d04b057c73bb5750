import math
import re
import xml.etree.ElementTree as ET

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netreport.charts import (
    BAR,
    LINE,
    LOG,
    MAX_LINEAR_TICKS,
    POINT,
    ChartSpec,
    ChartSpecError,
    linear_ticks,
    log_ticks,
    render_chart,
    spec_for,
)
from netreport.distributions import (
    BARS,
    CDF,
    DISCRETE,
    DistributionConfig,
    DistributionSummary,
    compute_distributions,
    degree_distribution,
)
from netreport.graph import load_attributes, load_edge_list
from netreport.manifest import parse_manifest, validate_manifest
from netreport.point import aggregate_multi, point_stats
from netreport.report import (
    HTML,
    MARKDOWN,
    NO_CHARTS_NOTICE,
    GenerationMetadata,
    ManifestNotValidated,
    config_digest,
    make_charts,
    render_report,
    stats_text,
    write_report_tree,
)

from support import SAMPLE, cycle_graph, star_graph

SVG = "{http://www.w3.org/2000/svg}"
META = GenerationMetadata("0.0.test", "not recorded", "0" * 64)


def marks(svg: str):
    root = ET.fromstring(svg)
    return [e for e in root.iter() if e.get("class") == "mark"]


def manifest():
    return parse_manifest((SAMPLE / "manifest.yaml").read_text())


def small_graph():
    g = load_edge_list(b"a b 1\nb c 2\nc a 3\nc d 9\n", timestamp=True)
    return load_attributes(g, b"id,age,team\na,1,x\nb,2,y\nc,NA,x\nd,5,z\n")


# ---- charts -----------------------------------------------------------


def test_triangle_degree_chart_has_one_point():
    d = degree_distribution(cycle_graph(3))
    spec = spec_for(d)
    assert spec.mark == POINT
    assert len(marks(render_chart(spec))) == 1


def test_categorical_data_gets_horizontal_bars():
    d = DistributionSummary("team", BARS, (("a", 5), ("b", 3), ("others", 1)), "team", "frequency")
    spec = spec_for(d)
    assert spec.mark == BAR
    rects = marks(render_chart(spec))
    assert len(rects) == 3
    widths = [float(r.get("width")) for r in rects]
    heights = {r.get("height") for r in rects}
    assert widths == sorted(widths, reverse=True) and len(heights) == 1


def test_log_axis_drops_nonpositive_with_note():
    d = DistributionSummary("deg", DISCRETE, ((0, 4), (1, 3), (2, 2), (10, 1)), "degree", "frequency",
                            x_log=True, y_log=True)
    svg = render_chart(spec_for(d))
    assert len(marks(svg)) == 3
    assert "Note:" in svg and "1 point" in svg


def test_cdf_is_step_line():
    d = DistributionSummary("cc", CDF, ((0.0, 0.5), (0.5, 0.75), (1.0, 1.0)), "cc", "fraction")
    spec = spec_for(d)
    assert spec.mark == LINE
    (line,) = marks(render_chart(spec))
    # a step line repeats each x once more: 3 points become 5 vertices
    assert len(line.get("points").split()) == 5


def test_bad_spec_is_rejected():
    d = DistributionSummary("team", BARS, (("a", 1),), "team", "frequency")
    with pytest.raises(ChartSpecError):
        ChartSpec(d, POINT).check()
    with pytest.raises(ChartSpecError):
        ChartSpec(degree_distribution(cycle_graph(3)), BAR).check()
    with pytest.raises(ChartSpecError):
        ChartSpec(d, BAR, x_scale=LOG).check()


def test_linear_ticks_are_nice():
    lo, hi, ticks = linear_ticks(0, 7.3)
    assert len(ticks) <= MAX_LINEAR_TICKS and lo <= 0 and hi >= 7.3
    steps = {round(b - a, 9) for a, b in zip(ticks, ticks[1:])}
    assert len(steps) == 1
    step = steps.pop()
    mant = step / 10 ** math.floor(math.log10(step))
    assert round(mant, 6) in (1, 2, 5)
    _, _, ints = linear_ticks(0, 3, integer=True)
    assert all(float(t).is_integer() for t in ints)


def test_log_ticks_are_powers_of_ten():
    _, _, ticks = log_ticks(3, 4500)
    assert ticks == [1, 10, 100, 1000, 10000]


@settings(max_examples=150, deadline=None)
@given(st.floats(-1e6, 1e6), st.floats(1e-3, 1e6), st.booleans())
def test_linear_ticks_cover_range(lo, span, integer):
    hi = lo + span
    a, b, ticks = linear_ticks(lo, hi, integer)
    assert a <= lo and b >= hi
    assert 2 <= len(ticks) <= MAX_LINEAR_TICKS
    assert ticks == sorted(ticks)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 500), st.integers(1, 1000)), min_size=1, max_size=40, unique_by=lambda p: p[0]),
       st.booleans())
def test_rendered_marks_stay_inside_frame(pairs, log_scale):
    d = DistributionSummary("deg", DISCRETE, tuple(sorted(pairs)), "degree", "frequency",
                            x_log=log_scale, y_log=log_scale)
    svg = render_chart(spec_for(d))
    root = ET.fromstring(svg)
    w, h = float(root.get("width")), float(root.get("height"))
    for m in marks(svg):
        cx, cy = float(m.get("cx")), float(m.get("cy"))
        assert 0 <= cx <= w and 0 <= cy <= h


def test_every_chart_kind_is_well_formed_xml():
    g = small_graph()
    charts = make_charts(compute_distributions(g, DistributionConfig(top_k_singular=3)))
    assert [c.filename for c in charts][:2] == ["01_degree.svg", "02_pagerank.svg"]
    for c in charts:
        root = ET.fromstring(c.svg)
        assert root.tag == SVG + "svg"
        assert root.find(SVG + "title") is not None
        assert marks(c.svg)


def test_chart_numbers_use_two_decimals():
    svg = render_chart(spec_for(degree_distribution(star_graph(7))))
    for num in re.findall(r'(?:x|y|cx|cy|width|height)="(-?[0-9.]+)"', svg):
        assert re.fullmatch(r"-?\d+(\.\d{2})?", num), num


# ---- report -----------------------------------------------------------


def headings(md: str):
    return [line for line in md.splitlines() if line.startswith("#")]


def test_markdown_section_order():
    g = small_graph()
    dists = compute_distributions(g, DistributionConfig(top_k_singular=3))
    md = render_report(manifest(), point_stats(g), make_charts(dists), title="toy", metadata=META).decode()
    h = headings(md)
    assert h[0] == "# Network Report: toy"
    order = ["## Curation Rationale", "## Dataset Collection, Preprocessing and Annotation", "## Uses",
             "## Network Statistics", "### Distributions", "## Generation Metadata"]
    positions = [h.index(x) for x in order]
    assert positions == sorted(positions)
    assert "![" in md and "charts/01_degree.svg" in md


def test_na_statistics_render_with_reason():
    md = render_report(manifest(), point_stats(cycle_graph(3)), [], metadata=META).decode()
    assert "N/A (zero variance in endpoint degrees)" in md
    assert NO_CHARTS_NOTICE in md


def test_assortativity_footnote_only_when_variants_differ():
    md = render_report(manifest(), point_stats(star_graph(4)), [], metadata=META).decode()
    assert "[1]" in md
    regular = render_report(manifest(), point_stats(cycle_graph(5)), [], metadata=META).decode()
    assert "[1]" not in regular


def test_invalid_manifest_needs_override():
    m = parse_manifest("curation_rationale:\n  purpose: x\n")
    with pytest.raises(ManifestNotValidated):
        render_report(m, None, [], metadata=META)
    md = render_report(m, None, [], metadata=META, allow_invalid=True).decode()
    assert "Manifest validation failed" in md
    assert "MISSING" in md


def test_unknown_manifest_values_show_verbatim():
    md = render_report(manifest(), None, [], metadata=META).decode()
    assert "Unknown" in md
    assert "(none)" in md  # empty data_splits.splits


def test_html_inlines_svg_and_parses():
    g = small_graph()
    charts = make_charts(compute_distributions(g, DistributionConfig(top_k_singular=3)))
    html = render_report(manifest(), point_stats(g), charts, HTML, title="toy", metadata=META).decode()
    assert html.startswith("<!DOCTYPE html>")
    assert html.count("<svg") == len(charts)
    assert "<figure" in html and "<script" not in html


def test_aggregate_table():
    members = [point_stats(cycle_graph(4)), point_stats(star_graph(3))]
    md = render_report(manifest(), None, [], metadata=META, aggregate=aggregate_multi(members)).decode()
    assert "| Statistic | Mean | Std | Coverage |" in md


def test_report_is_deterministic(tmp_path):
    g = small_graph()
    outs = []
    for run in ("a", "b"):
        dists = compute_distributions(g, DistributionConfig(top_k_singular=3))
        charts = make_charts(dists)
        report = render_report(manifest(), point_stats(g), charts, MARKDOWN, title="toy", metadata=META)
        write_report_tree(tmp_path / run, report, MARKDOWN, charts, dists, stats_text(point_stats(g)))
        outs.append({p.relative_to(tmp_path / run): p.read_bytes() for p in (tmp_path / run).rglob("*") if p.is_file()})
    assert outs[0] == outs[1]
    names = sorted(str(p) for p in outs[0])
    assert "report.md" in names and "stats.txt" in names
    assert any(n.startswith("charts/") for n in names) and any(n.startswith("distributions/") for n in names)


def test_config_digest_is_order_independent():
    assert config_digest({"a": 1, "b": [1, 2]}) == config_digest({"b": [1, 2], "a": 1})
    assert config_digest({"a": 1}) != config_digest({"a": 2})


def test_validation_is_passed_through():
    rep = validate_manifest(manifest())
    md = render_report(manifest(), None, [], metadata=META, validation=rep,
                       cross_warnings=["declared temporal but no timestamps"]).decode()
    assert "declared temporal but no timestamps" in md
