"""Network data model: loading, validation and derived adjacency views.

Node labels from the input are remapped to dense integer ids in order of
first appearance; ``Graph.labels`` keeps the original labels so user-facing
output can be translated back.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components as _cc

log = logging.getLogger(__name__)

QUANTITATIVE = "quantitative"
ORDERED = "ordered-categorical"
CATEGORICAL = "categorical"
ATTRIBUTE_KINDS = (QUANTITATIVE, ORDERED, CATEGORICAL)
KIND_ALIASES = {"ordered": ORDERED, "ordinal": ORDERED, "numeric": QUANTITATIVE, "number": QUANTITATIVE}

MISSING_TOKENS = frozenset({"", "na", "n/a", "nan", "null", "none", "?"})


class GraphFormatError(ValueError):
    """Raised for malformed edge lists or attribute files."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class EdgeRecord:
    src: int
    dst: int
    weight: float | None = None
    timestamp: int | None = None


@dataclass(frozen=True)
class Column:
    """One attribute column aligned to node or edge order."""

    name: str
    kind: str
    values: np.ndarray  # float64 for quantitative, object (str) otherwise
    mask: np.ndarray  # True where the value is missing
    categories: tuple[str, ...] = ()  # category order for ordered-categorical

    def __post_init__(self):
        if self.kind not in ATTRIBUTE_KINDS:
            raise ValueError(f"unknown attribute kind {self.kind!r} for column {self.name!r}")
        if len(self.values) != len(self.mask):
            raise ValueError("values and mask must have the same length")
        if self.kind == QUANTITATIVE:
            present = self.values[~self.mask]
            if not np.all(np.isfinite(present)):
                raise ValueError(f"column {self.name!r} has non-finite unmasked values")

    @property
    def masked_count(self) -> int:
        return int(self.mask.sum())

    def present_values(self) -> np.ndarray:
        return self.values[~self.mask]


@dataclass(frozen=True)
class AttributeTable:
    target: str  # "node" or "edge"
    columns: dict[str, Column]
    row_count: int
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        for col in self.columns.values():
            if len(col.values) != self.row_count:
                raise ValueError(
                    f"column {col.name!r} has {len(col.values)} rows, expected {self.row_count}"
                )

    @property
    def names(self) -> list[str]:
        return list(self.columns)

    def __getitem__(self, name: str) -> Column:
        try:
            return self.columns[name]
        except KeyError:
            raise KeyError(f"unknown attribute column {name!r}") from None


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable network. Edge ``i`` is ``(src[i], dst[i])`` over ids ``0..node_count-1``."""

    node_count: int
    src: np.ndarray
    dst: np.ndarray
    directed: bool = False
    multigraph: bool = False
    weights: np.ndarray | None = None
    timestamps: np.ndarray | None = None
    labels: tuple[str, ...] = ()
    node_attributes: AttributeTable | None = None
    edge_attributes: AttributeTable | None = None
    duplicates_removed: int = 0
    load_warnings: tuple[str, ...] = ()

    def __post_init__(self):
        src = np.ascontiguousarray(self.src, dtype=np.int64)
        dst = np.ascontiguousarray(self.dst, dtype=np.int64)
        object.__setattr__(self, "src", src)
        object.__setattr__(self, "dst", dst)
        n = self.node_count
        if n < 0:
            raise ValueError("node_count must be nonnegative")
        if len(src) != len(dst):
            raise ValueError("src and dst must have equal length")
        if len(src) and (src.min() < 0 or dst.min() < 0 or src.max() >= n or dst.max() >= n):
            raise ValueError("edge endpoint out of range")
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=np.float64)
            if len(w) != len(src) or not np.all(np.isfinite(w)):
                raise ValueError("weights must be finite and one per edge")
            object.__setattr__(self, "weights", w)
        if self.timestamps is not None:
            t = np.asarray(self.timestamps, dtype=np.int64)
            if len(t) != len(src):
                raise ValueError("timestamps must be one per edge")
            object.__setattr__(self, "timestamps", t)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(i) for i in range(n)))
        elif len(self.labels) != n:
            raise ValueError("labels must have one entry per node")
        if not self.multigraph and len(src):
            keys = self._pair_keys(src, dst)
            if len(np.unique(keys)) != len(keys):
                raise ValueError("duplicate edges in a simple graph")
        if self.node_attributes is not None and self.node_attributes.row_count != n:
            raise ValueError("node attribute table must have one row per node")
        if self.edge_attributes is not None and self.edge_attributes.row_count != len(src):
            raise ValueError("edge attribute table must have one row per edge")

    @classmethod
    def from_edges(
        cls,
        node_count: int,
        edges: Iterable[tuple[int, int]],
        directed: bool = False,
        multigraph: bool = False,
        **kwargs,
    ) -> "Graph":
        pairs = np.array(list(edges), dtype=np.int64).reshape(-1, 2)
        return cls(node_count, pairs[:, 0], pairs[:, 1], directed=directed, multigraph=multigraph, **kwargs)

    def _pair_keys(self, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
        if not self.directed:
            src, dst = np.minimum(src, dst), np.maximum(src, dst)
        return src * max(self.node_count, 1) + dst

    # ---- basic facts -------------------------------------------------

    @property
    def edge_count(self) -> int:
        return len(self.src)

    @property
    def weighted(self) -> bool:
        return self.weights is not None

    @property
    def temporal(self) -> bool:
        return self.timestamps is not None

    @property
    def edges(self) -> Iterator[EdgeRecord]:
        for i in range(self.edge_count):
            yield EdgeRecord(
                int(self.src[i]),
                int(self.dst[i]),
                None if self.weights is None else float(self.weights[i]),
                None if self.timestamps is None else int(self.timestamps[i]),
            )

    @cached_property
    def self_loop_count(self) -> int:
        return int(np.count_nonzero(self.src == self.dst))

    @cached_property
    def simplified_edge_count(self) -> int:
        """Edges after dropping parallel copies (self-loops kept)."""
        if not self.multigraph:
            return self.edge_count
        return len(np.unique(self._pair_keys(self.src, self.dst)))

    # ---- degrees -----------------------------------------------------

    @cached_property
    def out_degrees(self) -> np.ndarray:
        if not self.directed:
            return self.total_degrees
        return np.bincount(self.src, minlength=self.node_count)

    @cached_property
    def in_degrees(self) -> np.ndarray:
        if not self.directed:
            return self.total_degrees
        return np.bincount(self.dst, minlength=self.node_count)

    @cached_property
    def total_degrees(self) -> np.ndarray:
        # an undirected self-loop lands in both bincounts, contributing 2
        return np.bincount(self.src, minlength=self.node_count) + np.bincount(
            self.dst, minlength=self.node_count
        )

    def degrees(self, mode: str = "total") -> np.ndarray:
        if mode == "total":
            return self.total_degrees
        if mode == "out":
            return self.out_degrees
        if mode == "in":
            return self.in_degrees
        raise ValueError(f"unknown degree mode {mode!r}")

    def degree(self, node: int, mode: str = "total") -> int:
        if not 0 <= node < self.node_count:
            raise IndexError(f"node id {node} out of range [0, {self.node_count})")
        return int(self.degrees(mode)[node])

    # ---- adjacency views ---------------------------------------------

    @cached_property
    def _out_csr(self) -> sp.csr_matrix:
        """Raw neighbor lists (multiplicities kept); undirected edges stored both ways."""
        n = self.node_count
        if self.directed:
            rows, cols = self.src, self.dst
        else:
            rows = np.concatenate([self.src, self.dst])
            cols = np.concatenate([self.dst, self.src])
        data = np.ones(len(rows), dtype=np.int64)
        m = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
        m.sort_indices()
        return m

    def neighbors(self, node: int, mode: str = "out") -> list[int]:
        """Neighbor multiset of ``node``; ``mode="in"`` gives predecessors on directed graphs."""
        if not 0 <= node < self.node_count:
            raise IndexError(f"node id {node} out of range [0, {self.node_count})")
        if self.directed and mode == "in":
            mask = self.dst == node
            return sorted(self.src[mask].tolist())
        if self.directed and mode == "total":
            return sorted(self.neighbors(node, "out") + self.neighbors(node, "in"))
        m = self._out_csr
        lo, hi = m.indptr[node], m.indptr[node + 1]
        out: list[int] = []
        for v, c in zip(m.indices[lo:hi].tolist(), m.data[lo:hi].tolist()):
            out.extend([v] * c)
        return out

    @cached_property
    def simple_undirected(self) -> sp.csr_matrix:
        """Symmetric 0/1 adjacency with direction, self-loops and parallel edges removed."""
        n = self.node_count
        keep = self.src != self.dst
        s, d = self.src[keep], self.dst[keep]
        rows = np.concatenate([s, d])
        cols = np.concatenate([d, s])
        m = sp.csr_matrix((np.ones(len(rows), dtype=np.int64), (rows, cols)), shape=(n, n))
        m.sum_duplicates()
        m.data[:] = 1
        m.sort_indices()
        return m

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """0/1 adjacency ``A[u, v] = 1`` for each edge u→v, parallel edges merged, self-loops kept."""
        n = self.node_count
        if self.directed:
            rows, cols = self.src, self.dst
        else:
            rows = np.concatenate([self.src, self.dst])
            cols = np.concatenate([self.dst, self.src])
        m = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
        m.sum_duplicates()
        m.data[:] = 1.0
        m.sort_indices()
        return m

    @cached_property
    def laplacian(self) -> sp.csr_matrix:
        """L = D − A on the simplified undirected view (self-loops cancel out of L)."""
        if self.directed:
            raise ValueError("Laplacian is only defined here for undirected graphs")
        a = self.simple_undirected.astype(np.float64)
        deg = np.asarray(a.sum(axis=1)).ravel()
        return (sp.diags(deg) - a).tocsr()

    def simple_degrees(self) -> np.ndarray:
        """Degrees in the simplified undirected view."""
        m = self.simple_undirected
        return np.diff(m.indptr)

    def with_attributes(self, table: AttributeTable) -> "Graph":
        if table.target == "node":
            return replace(self, node_attributes=table)
        return replace(self, edge_attributes=table)


# ---- components -------------------------------------------------------


def connected_components(graph: Graph, mode: str = "weak") -> list[list[int]]:
    """Partition of node ids into components, largest first (ties by smallest id)."""
    if mode not in ("weak", "strong"):
        raise ValueError(f"unknown component mode {mode!r}")
    if mode == "strong" and not graph.directed:
        raise ValueError("strong components require a directed graph")
    n = graph.node_count
    if n == 0:
        return []
    a = graph._out_csr
    count, labels = _cc(a, directed=graph.directed, connection=mode)
    order = np.argsort(labels, kind="stable")
    bounds = np.searchsorted(labels[order], np.arange(count + 1))
    parts = [order[bounds[i] : bounds[i + 1]].tolist() for i in range(count)]
    parts.sort(key=lambda p: (-len(p), p[0]))
    return parts


def component_labels(graph: Graph, mode: str = "weak") -> tuple[int, np.ndarray]:
    if graph.node_count == 0:
        return 0, np.zeros(0, dtype=np.int64)
    return _cc(graph._out_csr, directed=graph.directed, connection=mode)


# ---- loading ----------------------------------------------------------


@dataclass
class LoadOptions:
    directed: bool = False
    multigraph: bool = False
    delimiter: str | None = None  # None: any run of spaces/tabs
    weight: bool | None = None  # None: infer from the column count
    timestamp: bool | None = None


def _read_text(source) -> str:
    if isinstance(source, (bytes, bytearray)):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def load_edge_list(source, options: LoadOptions | None = None, **kwargs) -> Graph:
    """Parse a text edge list into a Graph.

    ``source`` may be bytes, str, or a readable (binary or text) stream.
    Keyword arguments override fields of ``options``.
    """
    opts = replace(options or LoadOptions(), **kwargs)
    text = _read_text(source)

    index: dict[str, int] = {}
    labels: list[str] = []
    srcs: list[int] = []
    dsts: list[int] = []
    weights: list[float] = []
    times: list[int] = []
    ncols: int | None = None
    has_w = has_t = False

    def node_id(label: str) -> int:
        i = index.get(label)
        if i is None:
            i = index[label] = len(labels)
            labels.append(label)
        return i

    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = stripped.split() if opts.delimiter is None else [f.strip() for f in stripped.split(opts.delimiter)]
        if ncols is None:
            ncols = len(fields)
            if ncols < 2 or ncols > 4:
                raise GraphFormatError(f"expected 2 to 4 fields, found {ncols}", lineno)
            has_w, has_t = _column_layout(ncols, opts, lineno)
        elif len(fields) != ncols:
            raise GraphFormatError(
                f"inconsistent column count: expected {ncols}, found {len(fields)}", lineno
            )
        if not fields[0] or not fields[1]:
            raise GraphFormatError("empty node label", lineno)
        srcs.append(node_id(fields[0]))
        dsts.append(node_id(fields[1]))
        pos = 2
        if has_w:
            try:
                w = float(fields[pos])
            except ValueError:
                raise GraphFormatError(f"bad weight {fields[pos]!r}", lineno) from None
            if not math.isfinite(w):
                raise GraphFormatError(f"non-finite weight {fields[pos]!r}", lineno)
            weights.append(w)
            pos += 1
        if has_t:
            try:
                times.append(int(fields[pos]))
            except ValueError:
                raise GraphFormatError(f"bad timestamp {fields[pos]!r}", lineno) from None

    if not srcs:
        raise GraphFormatError("empty input: no edges found")

    src = np.array(srcs, dtype=np.int64)
    dst = np.array(dsts, dtype=np.int64)
    w_arr = np.array(weights) if has_w else None
    t_arr = np.array(times, dtype=np.int64) if has_t else None
    n = len(labels)
    warnings: list[str] = []
    removed = 0
    if not opts.multigraph:
        a, b = (src, dst) if opts.directed else (np.minimum(src, dst), np.maximum(src, dst))
        keys = a * n + b
        _, first = np.unique(keys, return_index=True)
        if len(first) < len(keys):
            keep = np.sort(first)
            removed = len(keys) - len(keep)
            src, dst = src[keep], dst[keep]
            if w_arr is not None:
                w_arr = w_arr[keep]
            if t_arr is not None:
                t_arr = t_arr[keep]
            msg = f"removed {removed} duplicate edge(s) from simple graph"
            warnings.append(msg)
            log.warning(msg)

    return Graph(
        n,
        src,
        dst,
        directed=opts.directed,
        multigraph=opts.multigraph,
        weights=w_arr,
        timestamps=t_arr,
        labels=tuple(labels),
        duplicates_removed=removed,
        load_warnings=tuple(warnings),
    )


def _column_layout(ncols: int, opts: LoadOptions, lineno: int) -> tuple[bool, bool]:
    extra = ncols - 2
    if opts.weight is None and opts.timestamp is None:
        return extra >= 1, extra == 2
    has_w = bool(opts.weight)
    has_t = bool(opts.timestamp) if opts.timestamp is not None else extra - has_w == 1
    if opts.weight is None:
        has_w = extra - has_t == 1
    if has_w + has_t != extra:
        raise GraphFormatError(
            f"inconsistent column count: {ncols} fields but weight={has_w}, timestamp={has_t}", lineno
        )
    return has_w, has_t


def write_edge_list(graph: Graph, delimiter: str = " ") -> str:
    """Serialize back to the edge-list format using original labels."""
    lines = []
    for i in range(graph.edge_count):
        fields = [graph.labels[graph.src[i]], graph.labels[graph.dst[i]]]
        if graph.weights is not None:
            fields.append(repr(float(graph.weights[i])))
        if graph.timestamps is not None:
            fields.append(str(int(graph.timestamps[i])))
        lines.append(delimiter.join(fields))
    return "\n".join(lines) + ("\n" if lines else "")


# ---- attributes -------------------------------------------------------


def _is_missing(token: str) -> bool:
    return token.strip().lower() in MISSING_TOKENS


def _parse_float(token: str) -> float | None:
    try:
        v = float(token)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def _natural_key(value: str):
    v = _parse_float(value)
    return (0, v, "") if v is not None else (1, 0.0, value)


def _split_header(name: str) -> tuple[str, str | None]:
    if ":" in name:
        base, kind = name.rsplit(":", 1)
        kind = KIND_ALIASES.get(kind, kind)
        if kind in ATTRIBUTE_KINDS:
            return base, kind
    return name, None


def load_attributes(
    graph: Graph,
    source,
    target: str = "node",
    schema: dict[str, str | tuple[str, Sequence[str]]] | None = None,
) -> Graph:
    """Attach a CSV attribute table to ``graph`` and return the new Graph.

    Node tables need an ``id`` column matched against original labels; edge
    tables are aligned by row order. Column kinds come from ``schema``
    (``name -> kind`` or ``name -> (kind, category_order)``), a ``name:kind``
    header suffix, or inference (quantitative when every present value parses
    as a number). Unparseable quantitative cells are masked with a warning.
    """
    if target not in ("node", "edge"):
        raise ValueError("target must be 'node' or 'edge'")
    reader = csv.reader(io.StringIO(_read_text(source)))
    try:
        header = next(reader)
    except StopIteration:
        raise GraphFormatError("empty attribute file") from None
    header = [h.strip() for h in header]
    rows = [r for r in reader if any(c.strip() for c in r)]
    for i, r in enumerate(rows, start=2):
        if len(r) != len(header):
            raise GraphFormatError(f"expected {len(header)} fields, found {len(r)}", i)

    warnings: list[str] = []
    if target == "node":
        if "id" not in header:
            raise GraphFormatError("node attribute table requires an 'id' column")
        key_col = header.index("id")
        label_index = {lab: i for i, lab in enumerate(graph.labels)}
        n_rows = graph.node_count
        row_of = np.full(n_rows, -1, dtype=np.int64)
        unmatched = []
        for j, r in enumerate(rows):
            key = r[key_col].strip()
            node = label_index.get(key)
            if node is None:
                unmatched.append(key)
            elif row_of[node] >= 0:
                warnings.append(f"duplicate row for node {key!r}; first row kept")
            else:
                row_of[node] = j
        if unmatched:
            preview = ", ".join(unmatched[:5]) + (" ..." if len(unmatched) > 5 else "")
            warnings.append(f"{len(unmatched)} attribute key(s) match no node: {preview}")
        value_cols = [c for c in range(len(header)) if c != key_col]
    else:
        n_rows = graph.edge_count
        if len(rows) != n_rows:
            raise GraphFormatError(f"edge attribute table has {len(rows)} rows, graph has {n_rows} edges")
        row_of = np.arange(n_rows)
        value_cols = list(range(len(header)))

    schema = dict(schema or {})
    columns: dict[str, Column] = {}
    for c in value_cols:
        name, header_kind = _split_header(header[c])
        spec = schema.get(name, schema.get(header[c], header_kind))
        order: Sequence[str] = ()
        if isinstance(spec, tuple):
            spec, order = spec
        raw = [rows[j][c].strip() if j >= 0 else "" for j in row_of.tolist()]
        kind = spec or _infer_kind(raw)
        columns[name] = _build_column(name, kind, raw, order, warnings)

    for w in warnings:
        log.warning(w)
    table = AttributeTable(target, columns, n_rows, tuple(warnings))
    return graph.with_attributes(table)


def _infer_kind(raw: list[str]) -> str:
    present = [v for v in raw if not _is_missing(v)]
    if present and all(_parse_float(v) is not None for v in present):
        return QUANTITATIVE
    return CATEGORICAL


def _build_column(name: str, kind: str, raw: list[str], order: Sequence[str], warnings: list[str]) -> Column:
    if kind not in ATTRIBUTE_KINDS:
        raise GraphFormatError(f"unknown kind {kind!r} for column {name!r}")
    mask = np.array([_is_missing(v) for v in raw], dtype=bool)
    if kind == QUANTITATIVE:
        values = np.zeros(len(raw))
        bad = 0
        for i, v in enumerate(raw):
            if mask[i]:
                continue
            f = _parse_float(v)
            if f is None:
                mask[i] = True
                bad += 1
            else:
                values[i] = f
        if bad:
            warnings.append(f"column {name!r}: {bad} non-numeric value(s) masked")
        return Column(name, kind, values, mask)
    values = np.array([None if m else v for v, m in zip(raw, mask)], dtype=object)
    categories: tuple[str, ...] = ()
    if kind == ORDERED:
        seen = {v for v, m in zip(raw, mask) if not m}
        categories = tuple(order) if order else tuple(sorted(seen, key=_natural_key))
        extra = seen - set(categories)
        if extra:
            categories += tuple(sorted(extra, key=_natural_key))
    return Column(name, kind, values, mask, categories)


def disjoint_union(graphs: Sequence[Graph]) -> Graph:
    """One graph whose components are the members; labels become ``"<i>:<label>"``."""
    if not graphs:
        raise ValueError("disjoint_union needs at least one graph")
    directed = {g.directed for g in graphs}
    if len(directed) > 1:
        raise ValueError("cannot combine directed and undirected networks")
    offsets = np.cumsum([0] + [g.node_count for g in graphs])
    src = np.concatenate([g.src + off for g, off in zip(graphs, offsets)])
    dst = np.concatenate([g.dst + off for g, off in zip(graphs, offsets)])
    temporal = all(g.timestamps is not None for g in graphs)
    weighted = all(g.weights is not None for g in graphs)
    labels = tuple(f"{i}:{lab}" for i, g in enumerate(graphs) for lab in g.labels)
    return Graph(
        int(offsets[-1]),
        src,
        dst,
        directed=directed.pop(),
        multigraph=any(g.multigraph for g in graphs),
        weights=np.concatenate([g.weights for g in graphs]) if weighted else None,
        timestamps=np.concatenate([g.timestamps for g in graphs]) if temporal else None,
        labels=labels,
        duplicates_removed=sum(g.duplicates_removed for g in graphs),
    )
