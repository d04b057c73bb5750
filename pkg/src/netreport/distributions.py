"""Distributions of node/edge statistics and attributes, with chart hints."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import spectral
from .graph import ORDERED, QUANTITATIVE, AttributeTable, Graph, disjoint_union
from .na import is_na
from .point import local_clustering, power_law_exponent

DISCRETE = "discrete-frequency"
INVERSE_CDF = "inverse-cdf"
CDF = "cdf"
HISTOGRAM = "histogram"
BARS = "categorical-bars"
TIME_SERIES = "time-series"
SEQUENCE = "sequence"
KINDS = (DISCRETE, INVERSE_CDF, CDF, HISTOGRAM, BARS, TIME_SERIES, SEQUENCE)

OTHERS = "others"
DEFAULT_BINS = 30
DEFAULT_TOP_K = 10


@dataclass(frozen=True)
class DistributionSummary:
    name: str
    kind: str
    points: tuple[tuple, ...]
    x_label: str
    y_label: str
    x_log: bool = False
    y_log: bool = False
    provenance: str = ""
    bin_edges: tuple[float, ...] = ()
    notes: tuple[str, ...] = ()
    normalized: bool = False
    population: int | None = None  # total mass for frequency-type kinds
    top_k: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown distribution kind {self.kind!r}")

    @property
    def xs(self) -> list:
        return [p[0] for p in self.points]

    @property
    def ys(self) -> list:
        return [p[1] for p in self.points]

    def check(self) -> None:
        """Raise ValueError if the kind-specific invariants do not hold."""
        ys = self.ys
        if self.kind == DISCRETE:
            if self.normalized:
                if any(y <= 0 for y in ys) or not math.isclose(sum(ys), 1.0, abs_tol=1e-9):
                    raise ValueError("normalized frequencies must be positive and sum to 1")
            elif any(not isinstance(y, int) or y <= 0 for y in ys):
                raise ValueError("frequencies must be positive integers")
            elif self.population is not None and sum(ys) != self.population:
                raise ValueError("frequencies must sum to the population size")
        elif self.kind == CDF:
            if any(b < a for a, b in zip(ys, ys[1:])) or any(not 0 <= y <= 1 for y in ys):
                raise ValueError("cdf values must be nondecreasing within [0, 1]")
        elif self.kind == INVERSE_CDF:
            if any(b > a for a, b in zip(ys, ys[1:])) or any(not 0 <= y <= 1 for y in ys):
                raise ValueError("inverse-cdf values must be nonincreasing within [0, 1]")
        elif self.kind == HISTOGRAM:
            e = self.bin_edges
            if len(e) != len(ys) + 1 or any(b <= a for a, b in zip(e, e[1:])):
                raise ValueError("histogram bin edges must be strictly increasing, one more than bins")
        elif self.kind == BARS:
            if self.top_k is not None and len(ys) > self.top_k + 1:
                raise ValueError("too many bars for top_k")
            labels = self.xs
            if OTHERS in labels[:-1]:
                raise ValueError("'others' may only be the last bar")


def degree_distribution(
    graph: Graph, mode: str = "total", normalize: bool = False, log_scale: bool | None = None
) -> DistributionSummary:
    deg = graph.degrees(mode)
    values, counts = np.unique(deg, return_counts=True)
    n = graph.node_count
    if log_scale is None:
        log_scale = not is_na(power_law_exponent(graph, mode=mode))
    ys = [c / n for c in counts.tolist()] if normalize else counts.tolist()
    label = {"total": "degree", "in": "in-degree", "out": "out-degree"}[mode]
    return DistributionSummary(
        name=f"degree_{mode}" if graph.directed else "degree",
        kind=DISCRETE,
        points=tuple(zip(values.tolist(), ys)),
        x_label=label,
        y_label="probability mass" if normalize else "frequency (number of nodes)",
        x_log=log_scale,
        y_log=log_scale,
        provenance=f"{label} distribution",
        normalized=normalize,
        population=n,
    )


def pagerank_distribution(pr: Sequence[float] | np.ndarray, log_scale: bool = False) -> DistributionSummary:
    """Survival form: for each distinct value x, the fraction of nodes with PageRank > x."""
    x = np.sort(np.asarray(pr, dtype=np.float64))
    if len(x) == 0:
        raise ValueError("empty PageRank vector")
    values, counts = np.unique(x, return_counts=True)
    above = len(x) - np.cumsum(counts)
    return DistributionSummary(
        name="pagerank",
        kind=INVERSE_CDF,
        points=tuple(zip(values.tolist(), (above / len(x)).tolist())),
        x_label="PageRank value (unnormalized)",
        y_label="fraction of nodes with PageRank > x",
        x_log=log_scale,
        y_log=log_scale,
        provenance="PageRank, alpha-damped, all-ones teleport",
        population=len(x),
    )


def clustering_distribution(cc: Sequence[float] | np.ndarray) -> DistributionSummary:
    x = np.asarray(cc, dtype=np.float64)
    if len(x) == 0:
        raise ValueError("empty clustering vector")
    values, counts = np.unique(x, return_counts=True)
    cum = np.cumsum(counts)
    ys = (cum / len(x)).tolist()
    ys[-1] = 1.0
    return DistributionSummary(
        name="clustering",
        kind=CDF,
        points=tuple(zip(values.tolist(), ys)),
        x_label="local clustering coefficient",
        y_label="fraction of nodes with coefficient <= x",
        provenance="local clustering coefficient (degree <= 1 counted as 0)",
        notes=("nodes with degree 0 or 1 are assigned a clustering coefficient of 0",),
        population=len(x),
    )


def local_clustering_all(graph: Graph) -> np.ndarray:
    return local_clustering(graph)


def singular_value_distribution(values: Sequence[float]) -> DistributionSummary:
    vals = [float(v) for v in values]
    if not vals:
        raise ValueError("empty singular value list")
    if any(b > a for a, b in zip(vals, vals[1:])):
        raise ValueError("singular values must be in descending order")
    last = vals[-1]
    y_log = last <= 0 or vals[0] / last > 100
    return DistributionSummary(
        name="singular_values",
        kind=SEQUENCE,
        points=tuple((i + 1, v) for i, v in enumerate(vals)),
        x_label="rank",
        y_label="singular value of A",
        y_log=y_log,
        provenance=f"top-{len(vals)} singular values of the adjacency matrix",
    )


def attribute_distribution(
    table: AttributeTable, column: str, top_k: int = DEFAULT_TOP_K, bins: int = DEFAULT_BINS
) -> DistributionSummary:
    col = table[column]
    notes = []
    if col.masked_count:
        notes.append(f"{col.masked_count} missing value(s) excluded")
    present = col.present_values()
    if len(present) == 0:
        raise ValueError(f"column {column!r} has no unmasked values")
    name = f"{table.target}_attr_{column}"
    prov = f"{table.target} attribute '{column}' ({col.kind})"
    if col.kind == QUANTITATIVE:
        lo, hi = float(present.min()), float(present.max())
        if lo == hi:
            lo, hi = lo - 0.5, hi + 0.5
        edges = np.linspace(lo, hi, bins + 1)
        counts, _ = np.histogram(present, bins=edges)
        return DistributionSummary(
            name, HISTOGRAM, tuple(zip(edges[:-1].tolist(), counts.tolist())), column,
            "frequency", provenance=prov, bin_edges=tuple(edges.tolist()),
            notes=tuple(notes), population=len(present),
        )
    tally = Counter(present.tolist())
    if col.kind == ORDERED:
        bars = [(c, tally.get(c, 0)) for c in col.categories]
        return DistributionSummary(name, BARS, tuple(bars), column, "frequency", provenance=prov,
                                   notes=tuple(notes), population=len(present))
    ranked = sorted(tally.items(), key=lambda kv: (-kv[1], kv[0]))
    bars = ranked[:top_k]
    rest = sum(c for _, c in ranked[top_k:])
    if rest:
        bars.append((OTHERS, rest))
        notes.append(f"{len(ranked) - top_k} categories merged into '{OTHERS}'")
    return DistributionSummary(name, BARS, tuple(bars), column, "frequency", provenance=prov,
                               notes=tuple(notes), population=len(present), top_k=top_k)


def temporal_edge_series(graph: Graph, window: int | None = None) -> DistributionSummary:
    """Edge counts per fixed window ``[start, start + window)`` relative to the first timestamp."""
    if graph.timestamps is None or graph.edge_count == 0:
        raise ValueError("graph has no edge timestamps")
    t = graph.timestamps
    t0, t1 = int(t.min()), int(t.max())
    span = t1 - t0
    if window is None:
        window = max(1, -(-span // 100))
    if window < 1:
        raise ValueError("window must be at least one time unit")
    buckets = span // window + 1
    counts = np.bincount((t - t0) // window, minlength=buckets)
    return DistributionSummary(
        name="temporal_edges",
        kind=TIME_SERIES,
        points=tuple((i * window, c) for i, c in enumerate(counts.tolist())),
        x_label=f"time since first edge (window = {window})",
        y_label="edges in window",
        provenance=f"timestamped edges, window {window}, origin {t0}",
        population=int(graph.edge_count),
    )


@dataclass(frozen=True)
class DistributionConfig:
    alpha: float = spectral.DEFAULT_ALPHA
    pagerank_tol: float = 1e-10
    top_k_singular: int = 100
    svd_tol: float = 1e-6
    bins: int = DEFAULT_BINS
    top_k_categories: int = DEFAULT_TOP_K
    normalize: bool = False
    window: int | None = None
    extras: dict = field(default_factory=dict)


def compute_distributions(
    graph: Graph,
    config: DistributionConfig | None = None,
    pagerank: np.ndarray | None = None,
    singular: spectral.SingularValues | None = None,
) -> list[DistributionSummary]:
    """Every applicable distribution for ``graph``, in report order.

    ``pagerank`` and ``singular`` let a caller that already ran those solvers
    skip recomputing them; they must match ``config``.
    """
    cfg = config or DistributionConfig()
    out: list[DistributionSummary] = []
    if graph.node_count == 0:
        return out
    modes = ("in", "out", "total") if graph.directed else ("total",)
    degree_charts = [degree_distribution(graph, m, cfg.normalize) for m in modes]
    out.extend(degree_charts)
    log_scale = degree_charts[-1].x_log
    pr = pagerank
    if pr is None:
        pr = spectral.pagerank(graph, spectral.PagerankConfig(alpha=cfg.alpha, tol=cfg.pagerank_tol))
    out.append(pagerank_distribution(pr, log_scale))
    sv = singular
    if sv is None:
        sv = spectral.top_k_singular_values(graph, min(cfg.top_k_singular, graph.node_count), cfg.svd_tol)
    if sv.values:
        d = singular_value_distribution(sv.values)
        if sv.warnings:
            d = _with_notes(d, sv.warnings)
        out.append(d)
    out.append(clustering_distribution(local_clustering(graph)))
    for table in (graph.node_attributes, graph.edge_attributes):
        if table is None:
            continue
        for name in table.names:
            if table[name].masked_count < table.row_count:
                out.append(attribute_distribution(table, name, cfg.top_k_categories, cfg.bins))
    if graph.timestamps is not None and graph.edge_count:
        out.append(temporal_edge_series(graph, cfg.window))
    return out


def _with_notes(d: DistributionSummary, notes) -> DistributionSummary:
    return replace(d, notes=d.notes + tuple(notes))


def componentwise_distributions(
    graphs: Sequence[Graph], config: DistributionConfig | None = None
) -> list[DistributionSummary]:
    """Distributions of the disjoint union: each member network is one component."""
    return compute_distributions(disjoint_union(graphs), config)


# ---- tabular text form -------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v).replace("\t", " ").replace("\n", " ")


def format_distribution(d: DistributionSummary) -> str:
    """``# key: value`` header lines, then a ``x<TAB>y`` header and one row per point."""
    lines = [
        f"# name: {d.name}",
        f"# kind: {d.kind}",
        f"# x_label: {d.x_label}",
        f"# y_label: {d.y_label}",
        f"# x_log: {_fmt(d.x_log)}",
        f"# y_log: {_fmt(d.y_log)}",
        f"# normalized: {_fmt(d.normalized)}",
        f"# provenance: {d.provenance}",
    ]
    if d.population is not None:
        lines.append(f"# population: {d.population}")
    if d.top_k is not None:
        lines.append(f"# top_k: {d.top_k}")
    if d.bin_edges:
        lines.append("# bin_edges: " + " ".join(_fmt(e) for e in d.bin_edges))
    lines += [f"# note: {n}" for n in d.notes]
    lines.append("x\ty")
    lines += [f"{_fmt(x)}\t{_fmt(y)}" for x, y in d.points]
    return "\n".join(lines) + "\n"


def _parse_num(s: str):
    try:
        return int(s)
    except ValueError:
        try:
            return float(s)
        except ValueError:
            return s


def parse_distribution(text: str) -> DistributionSummary:
    meta: dict[str, str] = {}
    notes: list[str] = []
    points = []
    header_seen = False
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition(": ")
            if key == "note":
                notes.append(value)
            else:
                meta[key] = value
        elif not header_seen:
            header_seen = True
        elif line:
            x, y = line.split("\t")
            points.append((x if meta.get("kind") == BARS else _parse_num(x), _parse_num(y)))
    return DistributionSummary(
        name=meta["name"],
        kind=meta["kind"],
        points=tuple(points),
        x_label=meta["x_label"],
        y_label=meta["y_label"],
        x_log=meta["x_log"] == "true",
        y_log=meta["y_log"] == "true",
        provenance=meta.get("provenance", ""),
        bin_edges=tuple(float(e) for e in meta["bin_edges"].split()) if "bin_edges" in meta else (),
        notes=tuple(notes),
        normalized=meta.get("normalized") == "true",
        population=int(meta["population"]) if "population" in meta else None,
        top_k=int(meta["top_k"]) if "top_k" in meta else None,
    )
