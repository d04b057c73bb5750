import json
import random
from importlib import resources

import jsonschema
import pytest
import yaml
from hypothesis import given, settings
from hypothesis import strategies as st

from netreport.graph import load_edge_list
from netreport.manifest import (
    EXCLUSIVE_TAGS,
    MISSING,
    TYPE_TAGS,
    UNKNOWN,
    ManifestParseError,
    cross_check,
    dump_manifest,
    json_schema,
    load_json_schema,
    parse_manifest,
    schema_paths,
    template_manifest,
    validate_manifest,
)

from support import SAMPLE

SAMPLE_TEXT = (SAMPLE / "manifest.yaml").read_text()


def sample_dict():
    return yaml.safe_load(SAMPLE_TEXT)


def from_dict(d):
    return parse_manifest(yaml.safe_dump(d, sort_keys=False))


def complete_dict():
    d = sample_dict()
    d["preprocessing"]["data_filtering"] = "No nodes or edges were filtered."
    return d


# ---- parsing ----------------------------------------------------------


def test_sample_parses_without_missing():
    m = parse_manifest(SAMPLE_TEXT.encode())
    assert m.missing_paths() == []
    assert m.extra_paths == []
    assert m.get("curation_rationale.contents.is_snapshot") == "no"


def test_omitted_purpose_is_missing():
    d = sample_dict()
    del d["curation_rationale"]["purpose"]
    m = from_dict(d)
    assert m.get("curation_rationale.purpose") is MISSING
    assert m.missing_paths() == ["curation_rationale.purpose"]


def test_unknown_is_kept_verbatim():
    d = sample_dict()
    d["curation_rationale"]["purpose"] = UNKNOWN
    m = from_dict(d)
    assert m.get("curation_rationale.purpose") == "Unknown"
    assert m.get("curation_rationale.purpose") is not MISSING


def test_bare_yes_no_read_as_choice_values():
    text = SAMPLE_TEXT.replace('is_snapshot: "no"', "is_snapshot: yes")
    assert parse_manifest(text).get("curation_rationale.contents.is_snapshot") == "yes"


def test_syntax_error_reports_position():
    with pytest.raises(ManifestParseError) as exc:
        parse_manifest("curation_rationale:\n  purpose: [unclosed\n")
    assert exc.value.line is not None and exc.value.column is not None


def test_top_level_must_be_mapping():
    with pytest.raises(ManifestParseError):
        parse_manifest("- a\n- b\n")


def test_extra_fields_are_preserved_and_warned():
    d = complete_dict()
    d["license"] = "CC-BY"
    d["uses"]["funding"] = "none"
    m = from_dict(d)
    assert m.extra_paths == ["license", "uses.funding"]
    rep = validate_manifest(m)
    assert rep.passed
    assert {w.path for w in rep.warnings} == {"license", "uses.funding"}
    assert "license: CC-BY" in dump_manifest(m)


# ---- validation -------------------------------------------------------


def test_three_way_policy():
    assert validate_manifest(from_dict(complete_dict())).findings() == []

    d = complete_dict()
    d["curation_rationale"]["purpose"] = UNKNOWN
    rep = validate_manifest(from_dict(d))
    assert rep.passed and len(rep.warnings) == 1
    assert rep.warnings[0].path == "curation_rationale.purpose"

    del d["curation_rationale"]["purpose"]
    rep = validate_manifest(from_dict(d))
    assert not rep.passed
    assert [e.path for e in rep.errors] == ["curation_rationale.purpose"]


def test_sample_has_one_unknown_warning():
    rep = validate_manifest(parse_manifest(SAMPLE_TEXT))
    assert rep.passed
    assert [str(w) for w in rep.warnings] == ["WARNING preprocessing.data_filtering: value is Unknown"]


def test_contradictory_tags():
    d = complete_dict()
    d["curation_rationale"]["network_types"] = ["directed", "undirected"]
    rep = validate_manifest(from_dict(d))
    assert not rep.passed
    assert "contradictory type tags" in rep.errors[0].message


@pytest.mark.parametrize(
    "tags, message",
    [([], "at least one"), (["sideways"], "unknown network type tag"), ("undirected", "expected a list")],
)
def test_bad_tag_lists(tags, message):
    d = complete_dict()
    d["curation_rationale"]["network_types"] = tags
    rep = validate_manifest(from_dict(d))
    assert any(message in e.message for e in rep.errors)


def test_invalid_choice_value():
    d = complete_dict()
    d["collection"]["sampling"]["used"] = "sometimes"
    rep = validate_manifest(from_dict(d))
    assert [e.path for e in rep.errors] == ["collection.sampling.used"]


def test_whole_section_unknown_is_one_warning():
    d = complete_dict()
    d["annotation"] = UNKNOWN
    rep = validate_manifest(from_dict(d))
    assert rep.passed
    assert [(w.path, w.message) for w in rep.warnings] == [("annotation", "whole section is Unknown")]


def test_empty_text_versus_empty_other_uses():
    d = complete_dict()
    d["uses"]["other"] = ""
    rep = validate_manifest(from_dict(d))
    assert rep.passed and [w.path for w in rep.warnings] == ["uses.other"]
    d["uses"]["primary_intended"] = "  "
    assert not validate_manifest(from_dict(d)).passed


def test_split_counts_must_be_integers():
    d = complete_dict()
    d["preprocessing"]["data_splits"] = {"strategy": "random", "splits": {"train": 80, "test": -1}}
    rep = validate_manifest(from_dict(d))
    assert [e.path for e in rep.errors] == ["preprocessing.data_splits.splits.test"]


def leaf_paths():
    paths = schema_paths()
    return [p for p in paths if not any(q.startswith(p + ".") for q in paths)]


def test_template_is_all_unknown():
    m = parse_manifest(template_manifest())
    assert m.missing_paths() == []
    rep = validate_manifest(m)
    assert rep.passed
    assert [w.path for w in rep.warnings] == leaf_paths()


def test_empty_document_lists_every_leaf_as_missing():
    rep = validate_manifest(parse_manifest(""))
    assert [e.path for e in rep.errors] == leaf_paths()


def test_finding_paths_resolve_to_schema():
    known = set(schema_paths())
    d = {"curation_rationale": {"network_types": ["directed", "undirected"]}, "uses": UNKNOWN}
    rep = validate_manifest(from_dict(d))
    for f in rep.findings():
        assert f.path in known or any(p.startswith(f.path + ".") for p in known)


# ---- cross-check ------------------------------------------------------


def test_cross_check_examples():
    m = parse_manifest(SAMPLE_TEXT)
    consistent = load_edge_list(b"a b 1\nb c 2\n", timestamp=True)
    assert cross_check(m, consistent).findings() == []

    plain = load_edge_list(b"a b\nb c\n")
    rep = cross_check(m, plain)
    assert len(rep.warnings) == 1 and "temporal" in rep.warnings[0].message
    assert rep.passed


def test_cross_check_cites_dedup_count():
    m = parse_manifest(SAMPLE_TEXT)
    g = load_edge_list(b"a b 1\nb a 2\nb c 3\nc b 4\na b 5\nc a 6\n", timestamp=True)
    assert g.duplicates_removed == 3
    rep = cross_check(m, g)
    assert any("3 duplicate" in w.message for w in rep.warnings)


def test_cross_check_direction_and_weights():
    m = parse_manifest(SAMPLE_TEXT)
    g = load_edge_list(b"a b 0.5 1\n", directed=True)
    messages = " ".join(w.message for w in cross_check(m, g).warnings)
    assert "declared undirected" in messages and "carries weights" in messages


# ---- schema file ------------------------------------------------------


def test_shipped_schema_matches_code():
    shipped = json.loads(resources.files("netreport").joinpath("manifest.schema.json").read_text())
    assert shipped == json_schema() == load_json_schema()


def test_sample_validates_against_json_schema():
    jsonschema.Draft202012Validator(json_schema()).validate(sample_dict())


def test_json_schema_rejects_bad_tag():
    d = sample_dict()
    d["curation_rationale"]["network_types"] = ["sideways"]
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.Draft202012Validator(json_schema()).validate(d)


# ---- properties -------------------------------------------------------


texts = st.text(st.characters(blacklist_categories=("Cs", "Cc")), min_size=1, max_size=30).filter(str.strip)
leaf_values = st.one_of(st.just(UNKNOWN), texts)


@st.composite
def manifests(draw):
    d = complete_dict()
    for path in leaf_paths():
        if path == "curation_rationale.network_types":
            continue
        *parents, key = path.split(".")
        node = d
        for part in parents:
            node = node.get(part) if isinstance(node, dict) else None
        if not isinstance(node, dict):
            continue  # an ancestor was already dropped or replaced
        roll = draw(st.integers(0, 3))
        if roll == 0:
            node.pop(key, None)
        elif roll == 1 and not path.endswith(("is_snapshot", "used")):
            node[key] = draw(leaf_values)
    tags = draw(st.lists(st.sampled_from(TYPE_TAGS), min_size=1, max_size=4, unique=True))
    d["curation_rationale"]["network_types"] = tags
    return d


@settings(max_examples=100, deadline=None)
@given(manifests())
def test_round_trip_is_fixed_point(d):
    m1 = from_dict(d)
    m2 = parse_manifest(dump_manifest(m1))
    assert m2.data == m1.data
    assert dump_manifest(m2) == dump_manifest(m1)


@settings(max_examples=100, deadline=None)
@given(manifests(), st.integers(0, 2**32 - 1))
def test_validation_ignores_key_order(d, seed):
    rng = random.Random(seed)

    def shuffle(node):
        if not isinstance(node, dict):
            return node
        items = list(node.items())
        rng.shuffle(items)
        return {k: shuffle(v) for k, v in items}

    a = validate_manifest(from_dict(d))
    b = validate_manifest(from_dict(shuffle(d)))
    assert sorted(map(str, a.findings())) == sorted(map(str, b.findings()))
    tags = set(d["curation_rationale"]["network_types"])
    contradictions = sum(1 for x, y in EXCLUSIVE_TAGS if x in tags and y in tags)
    assert sum("contradictory" in e.message for e in a.errors) == contradictions
    assert a.passed == (not a.errors)
