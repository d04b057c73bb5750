"""Point statistics: scalars summarizing one network, and their aggregation."""

from __future__ import annotations

import logging
import math
import statistics
from dataclasses import dataclass, field, fields
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from . import spectral
from .graph import Graph, connected_components
from .na import NA, is_na

log = logging.getLogger(__name__)

POWER_LAW_MIN_SAMPLES = 10
TRIANGLE_CHUNK = 4096  # rows per sparse product block


@dataclass(frozen=True)
class StatsConfig:
    tol: float = 1e-10
    max_iter: int = 10000
    d_min: int | None = None
    min_samples: int = POWER_LAW_MIN_SAMPLES


@dataclass(frozen=True)
class PointStats:
    # field order mirrors the report's statistics table
    num_nodes: int
    num_edges: int
    num_edges_simplified: int
    lcc_fraction_weak: float | NA
    lcc_fraction_strong: float | NA
    avg_degree: float | NA
    avg_degree_simplified: float | NA
    power_law_exponent: float | NA
    spectral_radius: float | NA
    algebraic_connectivity: float | NA
    total_triangles: int
    avg_triangle_count: float | NA
    global_clustering: float | NA
    mean_local_clustering: float | NA
    degree_assortativity: float | NA
    degree_assortativity_paper_variant: float | NA
    max_k_core: int
    directed: bool = field(default=False, metadata={"meta": True})
    notes: tuple[str, ...] = field(default=(), metadata={"meta": True})


STAT_FIELDS = tuple(f.name for f in fields(PointStats) if not f.metadata.get("meta"))

STAT_LABELS = {
    "num_nodes": "Number of nodes |V|",
    "num_edges": "Number of edges |E|",
    "num_edges_simplified": "Number of edges, parallel edges merged",
    "lcc_fraction_weak": "Proportion of nodes in largest weakly connected component",
    "lcc_fraction_strong": "Proportion of nodes in largest strongly connected component",
    "avg_degree": "Average degree",
    "avg_degree_simplified": "Average degree, parallel edges merged",
    "power_law_exponent": "(Tail) power-law exponent",
    "spectral_radius": "Spectral radius",
    "algebraic_connectivity": "Algebraic connectivity",
    "total_triangles": "Total triangle count",
    "avg_triangle_count": "Average triangles per node",
    "global_clustering": "Average clustering coefficient (transitivity)",
    "mean_local_clustering": "Mean local clustering coefficient",
    "degree_assortativity": "Degree assortativity coefficient",
    "degree_assortativity_paper_variant": "Degree assortativity, node-mean form",
    "max_k_core": "Max k-core",
}


# ---- connectivity and degree ------------------------------------------


def lcc_fraction(graph: Graph, mode: str = "weak") -> float:
    if graph.node_count == 0:
        raise ValueError("lcc_fraction of an empty graph")
    parts = connected_components(graph, mode)
    return len(parts[0]) / graph.node_count


def average_degree(graph: Graph, simplified: bool = False) -> float:
    """2|E|/|V| for undirected graphs, |E|/|V| (= mean in- and out-degree) for directed."""
    n = graph.node_count
    if n == 0:
        raise ValueError("average degree of an empty graph")
    m = graph.simplified_edge_count if simplified else graph.edge_count
    return (m if graph.directed else 2 * m) / n


def power_law_exponent_from_degrees(
    degrees: Sequence[int] | np.ndarray,
    d_min: int | None = None,
    min_samples: int = POWER_LAW_MIN_SAMPLES,
) -> float | NA:
    """Tail exponent ``1 + n·(Σ ln(d/d_min))⁻¹`` over nodes with degree ≥ d_min."""
    deg = np.asarray(degrees, dtype=np.int64)
    positive = deg[deg > 0]
    if len(positive) == 0:
        return NA("no node has positive degree")
    if d_min is None:
        d_min = int(positive.min())
    if d_min < 1:
        raise ValueError("d_min must be a positive integer")
    if d_min > int(deg.max()):
        raise ValueError(f"d_min={d_min} exceeds the maximum degree {int(deg.max())}")
    tail = deg[deg >= d_min]
    if len(tail) < min_samples:
        return NA(f"fewer than {min_samples} nodes with degree >= {d_min}")
    log_sum = math.fsum(math.log(d / d_min) for d in tail.tolist())
    if log_sum == 0.0:
        return NA("zero log-sum: every included degree equals d_min")
    return 1.0 + len(tail) / log_sum


def power_law_exponent(
    graph: Graph,
    d_min: int | None = None,
    min_samples: int = POWER_LAW_MIN_SAMPLES,
    mode: str = "total",
) -> float | NA:
    return power_law_exponent_from_degrees(graph.degrees(mode), d_min, min_samples)


# ---- triangles and clustering -----------------------------------------


def node_triangles(graph: Graph) -> np.ndarray:
    """Number of triangles each node belongs to, on the simplified undirected view.

    Edges are oriented from lower to higher (degree, id) rank so each triangle
    u→v→w with u→w is seen once; ``(L·L)∘L`` credits its endpoints u and w,
    ``(Lᵀ·L)∘L`` credits the middle node v.
    """
    a = graph.simple_undirected.tocoo()
    n = graph.node_count
    out = np.zeros(n, dtype=np.int64)
    if a.nnz == 0:
        return out
    deg = graph.simple_degrees()
    rank = np.empty(n, dtype=np.int64)
    rank[np.lexsort((np.arange(n), deg))] = np.arange(n)
    fwd = rank[a.row] < rank[a.col]
    lo_hi = sp.csr_matrix(
        (np.ones(int(fwd.sum()), dtype=np.int64), (a.row[fwd], a.col[fwd])), shape=(n, n)
    )
    hi_lo = lo_hi.T.tocsr()
    for lo in range(0, n, TRIANGLE_CHUNK):
        hi = min(n, lo + TRIANGLE_CHUNK)
        rows = lo_hi[lo:hi]
        closed = (rows @ lo_hi).multiply(rows).tocsr()
        out[lo:hi] += np.asarray(closed.sum(axis=1)).ravel()
        out += np.asarray(closed.sum(axis=0)).ravel()
        middle = (hi_lo[lo:hi] @ lo_hi).multiply(rows)
        out[lo:hi] += np.asarray(middle.sum(axis=1)).ravel()
    return out


def total_triangles(graph: Graph) -> int:
    return int(node_triangles(graph).sum()) // 3


def avg_triangle_count(graph: Graph) -> float:
    if graph.node_count == 0:
        raise ValueError("average triangle count of an empty graph")
    return 3 * total_triangles(graph) / graph.node_count


def _wedges(deg: np.ndarray) -> int:
    return int((deg * (deg - 1) // 2).sum())


def global_clustering(graph: Graph) -> float:
    """Transitivity ``3T / Σ C(deg, 2)``; 0.0 with a warning when there are no wedges."""
    wedges = _wedges(graph.simple_degrees())
    if wedges == 0:
        log.warning("no node of degree >= 2; clustering coefficient defined as 0")
        return 0.0
    return 3 * total_triangles(graph) / wedges


def local_clustering(graph: Graph) -> np.ndarray:
    """Per-node clustering coefficient; nodes of degree 0 or 1 get 0."""
    deg = graph.simple_degrees()
    tri = node_triangles(graph)
    pairs = deg * (deg - 1) // 2
    cc = np.zeros(graph.node_count)
    ok = pairs > 0
    cc[ok] = tri[ok] / pairs[ok]
    return cc


def mean_local_clustering(graph: Graph) -> float:
    if graph.node_count == 0:
        raise ValueError("mean clustering of an empty graph")
    return math.fsum(local_clustering(graph).tolist()) / graph.node_count


# ---- assortativity ----------------------------------------------------


def degree_assortativity(graph: Graph, variant: str = "standard") -> float | NA:
    """Degree correlation over both orientations of every simplified edge.

    ``standard`` is the Pearson correlation of endpoint degrees; ``paper``
    centers on the node-average degree and normalizes by the source-side
    squared deviation only. Both are evaluated in exact integer/rational
    arithmetic and rounded once.
    """
    if variant not in ("standard", "paper"):
        raise ValueError(f"unknown assortativity variant {variant!r}")
    a = graph.simple_undirected.tocoo()
    pairs = a.nnz
    if pairs == 0:
        raise ValueError("degree assortativity requires at least one non-loop edge")
    deg = graph.simple_degrees().astype(np.int64)
    du = deg[a.row]
    dv = deg[a.col]
    s1 = int(du.sum())
    s2 = int((du * du).sum())
    s11 = int((du * dv).sum())
    if variant == "standard":
        den = pairs * s2 - s1 * s1
        if den == 0:
            return NA("zero variance in endpoint degrees")
        return (pairs * s11 - s1 * s1) / den
    dbar = Fraction(int(deg.sum()), graph.node_count)
    num = s11 - 2 * dbar * s1 + pairs * dbar * dbar
    den = s2 - 2 * dbar * s1 + pairs * dbar * dbar
    if den == 0 or pairs * s2 == s1 * s1:
        return NA("zero variance in endpoint degrees")
    return float(num / den)


# ---- k-core -----------------------------------------------------------


def core_numbers(graph: Graph) -> np.ndarray:
    """Core number of every node by bucket-sorted degree peeling (simplified undirected view)."""
    a = graph.simple_undirected
    n = graph.node_count
    deg = np.diff(a.indptr).tolist()
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    indptr = a.indptr.tolist()
    indices = a.indices.tolist()
    md = max(deg)
    counts = [0] * (md + 1)
    for d in deg:
        counts[d] += 1
    bin_start = [0] * (md + 1)
    s = 0
    for d in range(md + 1):
        bin_start[d] = s
        s += counts[d]
    pos = [0] * n
    vert = [0] * n
    for v in range(n):
        d = deg[v]
        pos[v] = bin_start[d]
        vert[pos[v]] = v
        bin_start[d] += 1
    for d in range(md, 0, -1):
        bin_start[d] = bin_start[d - 1]
    bin_start[0] = 0
    for i in range(n):
        v = vert[i]
        dv = deg[v]
        for j in range(indptr[v], indptr[v + 1]):
            u = indices[j]
            du = deg[u]
            if du > dv:
                pu = pos[u]
                pw = bin_start[du]
                w = vert[pw]
                if u != w:
                    pos[u], pos[w] = pw, pu
                    vert[pu], vert[pw] = w, u
                bin_start[du] += 1
                deg[u] = du - 1
    return np.array(deg, dtype=np.int64)


def max_k_core(graph: Graph) -> int:
    cores = core_numbers(graph)
    return int(cores.max()) if len(cores) else 0


# ---- assembly ---------------------------------------------------------


def point_stats(graph: Graph, config: StatsConfig | None = None) -> PointStats:
    cfg = config or StatsConfig()
    n = graph.node_count
    notes: list[str] = []
    if n == 0:
        empty = NA("empty graph")
        return PointStats(0, 0, 0, *([empty] * 7), 0, *([empty] * 5), 0,
                          directed=graph.directed, notes=("empty graph",))

    lcc_weak = lcc_fraction(graph, "weak")
    lcc_strong = lcc_fraction(graph, "strong") if graph.directed else NA("undirected graph")
    try:
        gamma = power_law_exponent(graph, cfg.d_min, cfg.min_samples)
    except ValueError as exc:
        gamma = NA(str(exc))

    rho_est = spectral.spectral_radius(graph, cfg.tol, cfg.max_iter)
    rho = rho_est.value
    if rho_est.upper_bound:
        notes.append("spectral radius: " + rho_est.note)
    alg = spectral.algebraic_connectivity(graph, cfg.tol, cfg.max_iter).value

    tri = node_triangles(graph)
    total = int(tri.sum()) // 3
    deg_s = graph.simple_degrees()
    wedges = _wedges(deg_s)
    if wedges == 0:
        notes.append("no node of degree >= 2; clustering coefficient defined as 0")
        c = 0.0
    else:
        c = 3 * total / wedges
    pairs = deg_s * (deg_s - 1) // 2
    local = np.zeros(n)
    ok = pairs > 0
    local[ok] = tri[ok] / pairs[ok]
    mean_local = math.fsum(local.tolist()) / n

    if graph.simple_undirected.nnz == 0:
        r_std = r_paper = NA("no edges after removing self-loops")
    else:
        r_std = degree_assortativity(graph, "standard")
        r_paper = degree_assortativity(graph, "paper")
    if graph.directed:
        notes.append("triangles, clustering, assortativity and k-core use the undirected simplification")
    if graph.self_loop_count:
        notes.append(f"{graph.self_loop_count} self-loop(s) excluded from triangle, clustering, "
                     "assortativity and k-core statistics")

    return PointStats(
        num_nodes=n,
        num_edges=graph.edge_count,
        num_edges_simplified=graph.simplified_edge_count,
        lcc_fraction_weak=lcc_weak,
        lcc_fraction_strong=lcc_strong,
        avg_degree=average_degree(graph),
        avg_degree_simplified=average_degree(graph, simplified=True),
        power_law_exponent=gamma,
        spectral_radius=rho,
        algebraic_connectivity=alg,
        total_triangles=total,
        avg_triangle_count=3 * total / n,
        global_clustering=c,
        mean_local_clustering=mean_local,
        degree_assortativity=r_std,
        degree_assortativity_paper_variant=r_paper,
        max_k_core=max_k_core(graph),
        directed=graph.directed,
        notes=tuple(notes),
    )


# ---- aggregation ------------------------------------------------------


@dataclass(frozen=True)
class FieldAggregate:
    mean: float | NA
    std: float | NA
    coverage: int


@dataclass(frozen=True)
class StatsAggregate:
    count: int
    fields: dict[str, FieldAggregate]


def aggregate_multi(stats: Sequence[PointStats]) -> StatsAggregate:
    """Mean and population standard deviation per field over members where it is present."""
    if not stats:
        raise ValueError("aggregate_multi needs at least one PointStats")
    out = {}
    for name in STAT_FIELDS:
        present = [float(getattr(s, name)) for s in stats if not is_na(getattr(s, name))]
        if present:
            out[name] = FieldAggregate(statistics.fmean(present), statistics.pstdev(present), len(present))
        else:
            out[name] = FieldAggregate(NA("absent in every network"), NA("absent in every network"), 0)
    return StatsAggregate(len(stats), out)


# ---- text serialization -----------------------------------------------


def format_value(value) -> str:
    if is_na(value):
        return str(value)
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def parse_value(text: str):
    text = text.strip()
    if text.startswith("N/A"):
        reason = text[3:].strip()
        if reason.startswith("(") and reason.endswith(")"):
            reason = reason[1:-1]
        return NA(reason)
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        return float(text)


def format_stats(stats: PointStats, header: str = "point statistics") -> str:
    """One ``key = value`` line per field; N/A values read ``N/A (reason)``."""
    lines = [f"# {header}", f"directed = {format_value(stats.directed)}"]
    lines += [f"{name} = {format_value(getattr(stats, name))}" for name in STAT_FIELDS]
    lines += [f"# note: {note}" for note in stats.notes]
    return "\n".join(lines) + "\n"


def format_aggregate(agg: StatsAggregate) -> str:
    lines = ["# aggregate over networks (mean, population std, coverage)", f"count = {agg.count}"]
    for name, fa in agg.fields.items():
        lines.append(f"{name}.mean = {format_value(fa.mean)}")
        lines.append(f"{name}.std = {format_value(fa.std)}")
        lines.append(f"{name}.coverage = {fa.coverage}/{agg.count}")
    return "\n".join(lines) + "\n"


def parse_stats(text: str) -> dict:
    """Inverse of :func:`format_stats` / :func:`format_aggregate` (comments skipped)."""
    out = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition(" = ")
        out[key] = value if key.endswith(".coverage") else parse_value(value)
    return out


def stats_from_dict(values: dict) -> PointStats:
    kwargs = {name: values[name] for name in STAT_FIELDS}
    return PointStats(**kwargs, directed=bool(values.get("directed", False)))
