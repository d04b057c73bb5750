"""Dataset metadata manifest: schema, YAML parsing, validation, graph cross-check.

A manifest field holds text, a structured subrecord, or the literal
``"Unknown"``. A field that is absent from the document is ``MISSING``,
which validation treats as an error: providers must say "Unknown"
explicitly rather than skip a field.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Any

import yaml

from .graph import Graph

UNKNOWN = "Unknown"


class _Missing:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "MISSING"

    def __str__(self) -> str:
        return "MISSING"

    def __deepcopy__(self, memo):
        return self


MISSING = _Missing()


class ManifestParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)


# ---- schema -----------------------------------------------------------

TEXT = "text"
CHOICE = "choice"
TAGS = "tags"
STEP = "step"  # free text, or {description, operations}
SPLITS = "splits"  # free text, or {strategy, splits: {name: count}}
RECORD = "record"  # free text or any mapping
OPTIONAL_TEXT = "optional-text"  # may be empty (warned)

YES_NO_UNKNOWN = ("yes", "no", UNKNOWN)

TYPE_TAGS = (
    "directed",
    "undirected",
    "simple",
    "multigraph",
    "weighted",
    "unweighted",
    "signed",
    "temporal",
    "homogeneous",
    "heterogeneous",
    "knowledge-graph",
    "bipartite",
    "multilayer",
)
EXCLUSIVE_TAGS = (
    ("directed", "undirected"),
    ("simple", "multigraph"),
    ("weighted", "unweighted"),
    ("homogeneous", "heterogeneous"),
)

SCHEMA: dict[str, Any] = {
    "curation_rationale": {
        "authors_and_reference": TEXT,
        "purpose": TEXT,
        "domain": TEXT,
        "node_semantics": TEXT,
        "edge_semantics": TEXT,
        "contents": {"description": TEXT, "is_snapshot": (CHOICE, YES_NO_UNKNOWN)},
        "network_types": TAGS,
    },
    "collection": {
        "mechanism_and_raw_data": TEXT,
        "sampling": {"used": (CHOICE, YES_NO_UNKNOWN), "strategy": TEXT, "reason": TEXT},
    },
    "preprocessing": {
        "network_construction": STEP,
        "data_cleaning": STEP,
        "data_filtering": STEP,
        "network_transformation": STEP,
        "attribute_transformation": STEP,
        "data_splits": SPLITS,
    },
    "instance_demographics": RECORD,
    "annotation": {"process": TEXT, "annotator_demographics": RECORD},
    "uses": {"primary_intended": TEXT, "other": OPTIONAL_TEXT},
}

SECTION_TITLES = {
    "curation_rationale": "Curation Rationale",
    "collection": "Dataset Collection, Preprocessing and Annotation",
    "uses": "Uses",
}


def schema_paths(schema: dict = SCHEMA, prefix: str = "") -> list[str]:
    """Every section and leaf path in schema order."""
    out = []
    for key, spec in schema.items():
        path = f"{prefix}{key}"
        if isinstance(spec, dict):
            out.append(path)
            out.extend(schema_paths(spec, path + "."))
        else:
            out.append(path)
    return out


# ---- manifest ---------------------------------------------------------


@dataclass
class Manifest:
    data: dict
    extra_paths: list[str] = field(default_factory=list)

    def get(self, path: str):
        node: Any = self.data
        for part in path.split("."):
            if not isinstance(node, dict):
                return node  # a whole section given as text, e.g. "Unknown"
            node = node.get(part, MISSING)
        return node

    def missing_paths(self) -> list[str]:
        return [p for p in schema_paths() if self.get(p) is MISSING]

    @property
    def network_types(self) -> list[str]:
        tags = self.get("curation_rationale.network_types")
        return [str(t) for t in tags] if isinstance(tags, list) else []


def _normalize(value, spec):
    # YAML 1.1 reads bare yes/no as booleans
    if isinstance(spec, tuple) and spec[0] == CHOICE and isinstance(value, bool):
        return "yes" if value else "no"
    return value


def _fill(raw: Any, schema: dict, prefix: str, extras: list[str]) -> dict | str:
    if isinstance(raw, str):
        return raw  # section given wholesale as text (typically "Unknown")
    out: dict = {}
    raw = raw if isinstance(raw, dict) else {}
    for key, spec in schema.items():
        path = f"{prefix}{key}"
        if key not in raw or raw[key] is None:
            out[key] = _fill({}, spec, path + ".", extras) if isinstance(spec, dict) else MISSING
        elif isinstance(spec, dict):
            out[key] = _fill(raw[key], spec, path + ".", extras) if isinstance(raw[key], (dict, str)) else raw[key]
        else:
            out[key] = _normalize(raw[key], spec)
    for key in raw:
        if key not in schema:
            extras.append(f"{prefix}{key}")
            out[key] = raw[key]
    return out


def parse_manifest(source) -> Manifest:
    """Parse a YAML manifest from bytes, str or a stream."""
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, (bytes, bytearray)):
        source = source.decode("utf-8")
    try:
        raw = yaml.safe_load(source)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        line = mark.line + 1 if mark else None
        col = mark.column + 1 if mark else None
        raise ManifestParseError(str(exc.problem or exc), line, col) from None
    except yaml.YAMLError as exc:
        raise ManifestParseError(str(exc)) from None
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ManifestParseError("top level of a manifest must be a mapping")
    extras: list[str] = []
    data = _fill(raw, SCHEMA, "", extras)
    return Manifest(data, sorted(extras))


def _strip_missing(node):
    if isinstance(node, dict):
        return {k: _strip_missing(v) for k, v in node.items() if v is not MISSING}
    return node


def dump_manifest(m: Manifest) -> str:
    """YAML text; MISSING fields are omitted so re-parsing restores them as MISSING."""
    return yaml.safe_dump(_strip_missing(copy.deepcopy(m.data)), sort_keys=False, allow_unicode=True)


def template_manifest() -> str:
    """A blank manifest with every field set to ``Unknown``."""

    def build(schema):
        out = {}
        for key, spec in schema.items():
            if isinstance(spec, dict):
                out[key] = build(spec)
            elif spec == TAGS:
                out[key] = [UNKNOWN]
            else:
                out[key] = UNKNOWN
        return out

    return yaml.safe_dump(build(SCHEMA), sort_keys=False)


# ---- validation -------------------------------------------------------


@dataclass(frozen=True)
class Finding:
    level: str  # "ERROR" or "WARNING"
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.level} {self.path}: {self.message}"


@dataclass
class ValidationReport:
    errors: list[Finding] = field(default_factory=list)
    warnings: list[Finding] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.errors

    def error(self, path: str, message: str) -> None:
        self.errors.append(Finding("ERROR", path, message))

    def warn(self, path: str, message: str) -> None:
        self.warnings.append(Finding("WARNING", path, message))

    def findings(self) -> list[Finding]:
        return self.errors + self.warnings

    def extend(self, other: "ValidationReport") -> None:
        self.errors += other.errors
        self.warnings += other.warnings


def _is_unknown(value) -> bool:
    return isinstance(value, str) and value.strip() == UNKNOWN


def _check_text(rep: ValidationReport, path: str, value, allow_empty: bool = False) -> None:
    if isinstance(value, (dict, list)):
        rep.error(path, "expected free text")
    elif not str(value).strip():
        if allow_empty:
            rep.warn(path, "empty value")
        else:
            rep.error(path, "empty value; write \"Unknown\" if the information is not available")


def _check_tags(rep: ValidationReport, path: str, value) -> None:
    if not isinstance(value, list):
        rep.error(path, "expected a list of network type tags")
        return
    tags = [str(t) for t in value]
    if not tags:
        rep.error(path, "at least one network type tag is required")
        return
    if tags == [UNKNOWN]:
        rep.warn(path, "value is Unknown")
        return
    for t in tags:
        if t not in TYPE_TAGS:
            rep.error(path, f"unknown network type tag {t!r}")
    for a, b in EXCLUSIVE_TAGS:
        if a in tags and b in tags:
            rep.error(path, f"contradictory type tags: {a!r} and {b!r}")


def _check_leaf(rep: ValidationReport, path: str, spec, value) -> None:
    if value is MISSING:
        rep.error(path, "required field is missing; write \"Unknown\" if the information is not available")
        return
    if _is_unknown(value):
        rep.warn(path, "value is Unknown")
        return
    if isinstance(spec, tuple) and spec[0] == CHOICE:
        if str(value) not in spec[1]:
            rep.error(path, f"must be one of {', '.join(spec[1])}")
    elif spec == TEXT:
        _check_text(rep, path, value)
    elif spec == OPTIONAL_TEXT:
        _check_text(rep, path, value, allow_empty=True)
    elif spec == TAGS:
        _check_tags(rep, path, value)
    elif spec == STEP:
        if isinstance(value, dict):
            if "description" not in value:
                rep.error(path + ".description", "structured step needs a description")
            else:
                _check_text(rep, path + ".description", value["description"])
            ops = value.get("operations", [])
            if not isinstance(ops, list):
                rep.error(path + ".operations", "expected a list of operations")
        else:
            _check_text(rep, path, value)
    elif spec == SPLITS:
        if isinstance(value, dict):
            if "strategy" in value:
                _check_text(rep, path + ".strategy", value["strategy"])
            splits = value.get("splits", {})
            if not isinstance(splits, dict):
                rep.error(path + ".splits", "expected a mapping of split name to count")
            else:
                for name, count in splits.items():
                    if not isinstance(count, int) or isinstance(count, bool) or count < 0:
                        rep.error(f"{path}.splits.{name}", "split size must be a nonnegative integer")
        else:
            _check_text(rep, path, value)
    elif spec == RECORD:
        if not isinstance(value, dict):
            _check_text(rep, path, value)


def _validate(rep: ValidationReport, schema: dict, node, prefix: str) -> None:
    for key, spec in schema.items():
        path = f"{prefix}{key}"
        value = node.get(key, MISSING) if isinstance(node, dict) else node
        if isinstance(spec, dict):
            if _is_unknown(value):
                rep.warn(path, "whole section is Unknown")
            elif isinstance(value, dict):
                _validate(rep, spec, value, path + ".")
            elif value is MISSING:
                _validate(rep, spec, {}, path + ".")
            else:
                rep.error(path, "expected a mapping")
        else:
            _check_leaf(rep, path, spec, value)


def validate_manifest(m: Manifest) -> ValidationReport:
    rep = ValidationReport()
    _validate(rep, SCHEMA, m.data, "")
    for path in m.extra_paths:
        rep.warn(path, "field is not part of the manifest schema (kept as-is)")
    return rep


def cross_check(m: Manifest, g: Graph) -> ValidationReport:
    """Warnings where declared network types disagree with the loaded data."""
    rep = ValidationReport()
    tags = set(m.network_types)
    path = "curation_rationale.network_types"
    if "undirected" in tags and g.directed:
        rep.warn(path, "declared undirected but the graph was loaded as directed")
    if "directed" in tags and not g.directed:
        rep.warn(path, "declared directed but the graph was loaded as undirected")
    if "temporal" in tags and g.timestamps is None:
        rep.warn(path, "declared temporal but the edge list has no timestamps")
    if "weighted" in tags and g.weights is None:
        rep.warn(path, "declared weighted but the edge list has no weights")
    if "unweighted" in tags and g.weights is not None:
        rep.warn(path, "declared unweighted but the edge list carries weights")
    if "simple" in tags and g.duplicates_removed:
        rep.warn(path, f"declared simple but {g.duplicates_removed} duplicate edge(s) were removed while loading")
    if "multigraph" in tags and not g.multigraph and g.duplicates_removed:
        rep.warn(path, f"declared multigraph but {g.duplicates_removed} parallel edge(s) were merged "
                       "(load with multigraph enabled to keep them)")
    return rep


# ---- JSON schema ------------------------------------------------------


def json_schema() -> dict:
    """Machine-readable schema (JSON Schema 2020-12) for the manifest document."""
    unknown = {"const": UNKNOWN}
    text = {"type": "string"}

    def leaf(spec):
        if isinstance(spec, tuple):
            return {"enum": list(spec[1])}
        if spec in (TEXT, OPTIONAL_TEXT):
            return text
        if spec == TAGS:
            return {"type": "array", "minItems": 1, "items": {"enum": list(TYPE_TAGS) + [UNKNOWN]}}
        if spec == STEP:
            return {"anyOf": [text, {
                "type": "object",
                "required": ["description"],
                "properties": {"description": text, "operations": {"type": "array"}},
            }]}
        if spec == SPLITS:
            return {"anyOf": [text, {
                "type": "object",
                "properties": {
                    "strategy": text,
                    "splits": {"type": "object", "additionalProperties": {"type": "integer", "minimum": 0}},
                },
            }]}
        return {"anyOf": [text, {"type": "object"}]}

    def node(schema):
        return {
            "anyOf": [unknown, {
                "type": "object",
                "required": list(schema),
                "properties": {k: node(v) if isinstance(v, dict) else leaf(v) for k, v in schema.items()},
            }],
        }

    top = node(SCHEMA)["anyOf"][1]
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "Network report manifest",
        **top,
    }


def load_json_schema() -> dict:
    return json.loads(resources.files(__package__).joinpath("manifest.schema.json").read_text("utf-8"))
