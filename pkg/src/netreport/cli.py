"""Command-line entry point: ``netreport generate | stats | validate``.

Exit codes: 0 success, 1 I/O or parse failure, 2 manifest validation
failure, 3 internal error.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__, spectral
from .distributions import DistributionConfig, compute_distributions
from .graph import Graph, GraphFormatError, LoadOptions, disjoint_union, load_attributes, load_edge_list
from .manifest import (
    Manifest,
    ManifestParseError,
    ValidationReport,
    cross_check,
    parse_manifest,
    validate_manifest,
)
from .point import StatsConfig, aggregate_multi, format_value, point_stats
from .report import (
    FORMATS,
    MARKDOWN,
    GenerationMetadata,
    build_timestamp,
    config_digest,
    make_charts,
    render_report,
    stats_text,
    write_report_tree,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_MANIFEST = 2
EXIT_INTERNAL = 3

EDGE_SUFFIXES = (".txt", ".edges", ".edgelist", ".el", ".tsv")


class InputError(Exception):
    """Unreadable or malformed input; maps to exit status 1."""


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors, not manifest failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    edges: Path | None = None
    directory: Path | None = None
    manifest: Path | None = None
    node_attrs: Path | None = None
    edge_attrs: Path | None = None
    directed: bool = False
    multigraph: bool = False
    delimiter: str | None = None
    weighted: bool = False
    timestamped: bool = False
    out: Path | None = None
    fmt: str = MARKDOWN
    alpha: float = spectral.DEFAULT_ALPHA
    top_k: int = 100
    bins: int = 30
    tol: float = 1e-10
    allow_invalid_manifest: bool = False
    seedless: bool = False
    inputs: list[tuple[str, str]] = field(default_factory=list)  # (name, sha256) for the digest

    def effective(self) -> dict:
        """Settings that determine the output, independent of where files live."""
        return {
            "version": __version__,
            "inputs": self.inputs,
            "directed": self.directed,
            "multigraph": self.multigraph,
            "delimiter": self.delimiter,
            "weighted": self.weighted,
            "timestamped": self.timestamped,
            "format": self.fmt,
            "alpha": self.alpha,
            "top_k": self.top_k,
            "bins": self.bins,
            "tol": self.tol,
            "allow_invalid_manifest": self.allow_invalid_manifest,
            "seedless": self.seedless,
            "solver_seed": None if self.seedless else spectral.START_SEED,
        }


def _read(path: Path, cfg: RunConfig) -> bytes:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    cfg.inputs.append((Path(path).name, hashlib.sha256(data).hexdigest()))
    return data


def _load_graph(path: Path, cfg: RunConfig) -> Graph:
    data = _read(path, cfg)
    try:
        opts = LoadOptions(
            cfg.directed,
            cfg.multigraph,
            cfg.delimiter,
            weight=True if cfg.weighted else None,
            timestamp=True if cfg.timestamped else None,
        )
        return load_edge_list(data, opts)
    except GraphFormatError as exc:
        raise InputError(f"{path}: {exc}") from None
    except (UnicodeDecodeError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _attach(graph: Graph, path: Path | None, target: str, cfg: RunConfig) -> Graph:
    if path is None:
        return graph
    data = _read(path, cfg)
    try:
        return load_attributes(graph, data, target)
    except (GraphFormatError, UnicodeDecodeError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from None


def load_inputs(cfg: RunConfig) -> list[tuple[str, Graph]]:
    """Named graphs: one for ``--edges``, one per edge-list file for ``--dir``."""
    if (cfg.edges is None) == (cfg.directory is None):
        raise InputError("give exactly one of --edges or --dir")
    if cfg.edges is not None:
        g = _load_graph(cfg.edges, cfg)
        g = _attach(g, cfg.node_attrs, "node", cfg)
        g = _attach(g, cfg.edge_attrs, "edge", cfg)
        return [(Path(cfg.edges).stem, g)]
    if cfg.node_attrs or cfg.edge_attrs:
        raise InputError("attribute files are only supported with --edges")
    directory = Path(cfg.directory)
    if not directory.is_dir():
        raise InputError(f"not a directory: {directory}")
    files = sorted(p for p in directory.iterdir() if p.is_file() and p.suffix in EDGE_SUFFIXES)
    if not files:
        raise InputError(f"no edge-list files ({', '.join(EDGE_SUFFIXES)}) in {directory}")
    return [(p.stem, _load_graph(p, cfg)) for p in files]


def _load_manifest(path: Path | None, cfg: RunConfig) -> Manifest:
    if path is None:
        return parse_manifest("{}")
    try:
        return parse_manifest(_read(path, cfg))
    except ManifestParseError as exc:
        raise InputError(f"{path}: {exc}") from None
    except UnicodeDecodeError as exc:
        raise InputError(f"{path}: {exc}") from None


def _print_findings(report: ValidationReport, stream) -> None:
    for finding in report.findings():
        print(str(finding), file=stream)


def _spectral_extras(pr: np.ndarray, sv: spectral.SingularValues) -> str:
    lines = ["# spectral extras"]
    if len(pr):
        lines += [
            f"pagerank_min = {format_value(float(pr.min()))}",
            f"pagerank_max = {format_value(float(pr.max()))}",
            f"pagerank_sum = {format_value(float(np.sum(pr)))}",
        ]
    lines.append(f"singular_values_computed = {len(sv.values)}")
    if sv.values:
        lines.append(f"sigma_1 = {format_value(float(sv.values[0]))}")
        lines.append(f"sigma_last = {format_value(float(sv.values[-1]))}")
    lines += [f"# note: {w}" for w in sv.warnings]
    return "\n".join(lines) + "\n"


def _solve(graph: Graph, cfg: RunConfig):
    stats = point_stats(graph, StatsConfig(tol=cfg.tol))
    if graph.node_count == 0:
        return stats, np.zeros(0), spectral.SingularValues((), 0, True, 0, ())
    pr = spectral.pagerank(graph, spectral.PagerankConfig(alpha=cfg.alpha, tol=cfg.tol))
    sv = spectral.top_k_singular_values(graph, min(cfg.top_k, graph.node_count))
    return stats, pr, sv


# ---- subcommands ------------------------------------------------------


def cmd_stats(cfg: RunConfig) -> int:
    graphs = load_inputs(cfg)
    if len(graphs) == 1 and cfg.directory is None:
        stats, pr, sv = _solve(graphs[0][1], cfg)
        text = stats_text(stats) + "\n" + _spectral_extras(pr, sv)
    else:
        members = [(name, point_stats(g, StatsConfig(tol=cfg.tol))) for name, g in graphs]
        text = stats_text(None, members, aggregate_multi([s for _, s in members]))
    if cfg.out is not None:
        Path(cfg.out).mkdir(parents=True, exist_ok=True)
        (Path(cfg.out) / "stats.txt").write_bytes(text.encode("utf-8"))
    sys.stdout.write(text)
    return EXIT_OK


def cmd_validate(cfg: RunConfig) -> int:
    if cfg.manifest is None:
        raise InputError("validate needs --manifest")
    manifest = _load_manifest(cfg.manifest, cfg)
    report = validate_manifest(manifest)
    if cfg.edges is not None or cfg.directory is not None:
        graphs = load_inputs(cfg)
        graph = graphs[0][1] if len(graphs) == 1 else disjoint_union([g for _, g in graphs])
        report.extend(cross_check(manifest, graph))
    _print_findings(report, sys.stdout)
    return EXIT_OK if report.passed else EXIT_MANIFEST


def cmd_generate(cfg: RunConfig) -> int:
    if cfg.out is None:
        raise InputError("generate needs --out")
    graphs = load_inputs(cfg)
    manifest = _load_manifest(cfg.manifest, cfg)
    validation = validate_manifest(manifest)
    if not validation.passed and not cfg.allow_invalid_manifest:
        print("manifest validation failed:", file=sys.stderr)
        _print_findings(ValidationReport(errors=validation.errors), sys.stderr)
        return EXIT_MANIFEST

    multi = cfg.directory is not None
    dist_cfg = DistributionConfig(alpha=cfg.alpha, pagerank_tol=cfg.tol, top_k_singular=cfg.top_k, bins=cfg.bins)
    if multi:
        members = [(name, point_stats(g, StatsConfig(tol=cfg.tol))) for name, g in graphs]
        aggregate = aggregate_multi([s for _, s in members])
        union = disjoint_union([g for _, g in graphs])
        distributions = compute_distributions(union, dist_cfg)
        stats, text = None, stats_text(None, members, aggregate)
        graph = union
    else:
        graph = graphs[0][1]
        stats, pr, sv = _solve(graph, cfg)
        aggregate = None
        distributions = compute_distributions(graph, dist_cfg, pr, sv) if graph.node_count else []
        text = stats_text(stats) + "\n" + _spectral_extras(pr, sv)

    cross = cross_check(manifest, graph)
    charts = make_charts(distributions)
    meta = GenerationMetadata(__version__, build_timestamp(), config_digest(cfg.effective()))
    title = Path(cfg.directory).name if multi else graphs[0][0]
    document = render_report(
        manifest, stats, charts, cfg.fmt, title=title, metadata=meta, validation=validation,
        allow_invalid=cfg.allow_invalid_manifest, aggregate=aggregate, cross_warnings=cross.warnings,
    )
    write_report_tree(Path(cfg.out), document, cfg.fmt, charts, distributions, text)
    for finding in cross.warnings + validation.warnings:
        print(str(finding), file=sys.stderr)
    return EXIT_OK


# ---- argument parsing -------------------------------------------------


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _alpha(text: str) -> float:
    value = float(text)
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError("must lie strictly between 0 and 1")
    return value


def _tol(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _delimiter(text: str) -> str:
    return {"tab": "\t", "\\t": "\t", "space": " ", "comma": ","}.get(text, text)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="netreport", description="Build a documented network report from an edge list.")
    parser.add_argument("--version", action="version", version=f"netreport {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--edges", type=Path, help="edge list: src dst [weight] [timestamp] per line")
        p.add_argument("--dir", dest="directory", type=Path, help="directory of edge lists forming one dataset")
        p.add_argument("--node-attrs", type=Path, help="node attribute CSV with an id column")
        p.add_argument("--edge-attrs", type=Path, help="edge attribute CSV aligned with edge-list rows")
        p.add_argument("--directed", action="store_true")
        p.add_argument("--multigraph", action="store_true", help="keep parallel edges")
        p.add_argument("--delimiter", type=_delimiter, help="field separator (default: whitespace)")
        p.add_argument("--weighted", action="store_true", help="third column is an edge weight")
        p.add_argument("--timestamped", action="store_true",
                       help="last column is an integer timestamp (with 3 columns: src dst time)")
        p.add_argument("--tol", type=_tol, default=1e-10, help="solver tolerance (default 1e-10)")
        p.add_argument("--seedless", action="store_true",
                       help="refuse any nondeterministic code path (all solvers here are deterministic)")

    gen = sub.add_parser("generate", help="full report: manifest, statistics, charts")
    common(gen)
    gen.add_argument("--manifest", type=Path)
    gen.add_argument("--out", type=Path, required=True)
    gen.add_argument("--format", dest="fmt", choices=FORMATS, default=MARKDOWN)
    gen.add_argument("--alpha", type=_alpha, default=spectral.DEFAULT_ALPHA, help="PageRank damping (default 0.85)")
    gen.add_argument("--top-k", type=_positive_int, default=100, help="singular values to compute (default 100)")
    gen.add_argument("--bins", type=_positive_int, default=30, help="histogram bins (default 30)")
    gen.add_argument("--allow-invalid-manifest", action="store_true")

    st = sub.add_parser("stats", help="point statistics only")
    common(st)
    st.add_argument("--out", type=Path, help="also write stats.txt into this directory")
    st.add_argument("--alpha", type=_alpha, default=spectral.DEFAULT_ALPHA)
    st.add_argument("--top-k", type=_positive_int, default=100)

    val = sub.add_parser("validate", help="check a manifest, optionally against a graph")
    common(val)
    val.add_argument("--manifest", type=Path, required=True)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    for name in ("edges", "directory", "manifest", "node_attrs", "edge_attrs", "directed", "multigraph",
                 "delimiter", "weighted", "timestamped", "out", "fmt", "alpha", "top_k", "bins", "tol", "allow_invalid_manifest", "seedless"):
        if getattr(args, name, None) is not None:
            setattr(cfg, name, getattr(args, name))
    return cfg


COMMANDS = {"generate": cmd_generate, "stats": cmd_stats, "validate": cmd_validate}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = config_from_args(args)
    try:
        return COMMANDS[args.command](cfg)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001 - last-resort mapping to the documented exit code
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
