"""Reading and writing specification documents."""

import json

import pytest
from support import mobius_bundle, plane_rotation_bundle

from vbx.bundles import make_frame, make_section
from vbx.constructions import make_field
from vbx.errors import FileError, ParseError, SpecError
from vbx.specio import (
    bundle_to_dict,
    document_to_dict,
    gallery_path,
    list_gallery,
    load_spec,
    save_spec,
)


def write_doc(tmp_path, doc, name="spec.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return p


# --------------------------------------------------------------------------
# Round trips.


def test_bundle_round_trip(tmp_path):
    B = mobius_bundle()
    p = tmp_path / "mobius.json"
    save_spec(B, p)
    doc = load_spec(p)
    assert doc.bundle == B
    assert doc.base == B.base
    assert not doc.is_atlas_only
    assert doc.sections == {} and doc.frames == {} and doc.fields == {}


def test_full_document_round_trip(tmp_path):
    B = plane_rotation_bundle()
    S = make_section(B, {"left": ["x1", "x2"], "right": ["x1", "x2"]})
    F = make_frame(B, "left", [["cos(x1)", "sin(x1)"], ["-sin(x1)", "cos(x1)"]])
    A = make_field(B, 0, 2, {"left": ["1", "0", "0", "1"],
                             "right": ["1", "0", "0", "1"]})
    p = tmp_path / "plane.json"
    save_spec(B, p, sections={"diag": S}, frames={"rot": F}, fields={"metric": A})
    doc = load_spec(p)
    assert doc.bundle == B
    assert doc.sections == {"diag": S}
    assert doc.frames == {"rot": F}
    assert doc.fields == {"metric": A}


def test_save_then_save_again_is_stable(tmp_path):
    # serialization is canonical: a load/save cycle reproduces the bytes
    B = mobius_bundle()
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    save_spec(B, p1)
    save_spec(load_spec(p1).bundle, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_derivation_metadata_survives(tmp_path):
    from vbx.constructions import dual_bundle

    D = dual_bundle(mobius_bundle())
    p = tmp_path / "dual.json"
    save_spec(D, p)
    loaded = load_spec(p).bundle
    assert loaded.derivation == {"construction": "dual"}


# --------------------------------------------------------------------------
# Atlas-only documents.


def test_atlas_only_document(tmp_path):
    doc = {"base": bundle_to_dict(mobius_bundle())["base"]}
    p = write_doc(tmp_path, doc)
    loaded = load_spec(p)
    assert loaded.is_atlas_only
    assert loaded.bundle is None
    assert [c.name for c in loaded.base.charts] == ["east", "west"]


def test_gallery_has_atlas_only_entries():
    doc = load_spec(gallery_path("circle_base"))
    assert doc.is_atlas_only


def test_sections_require_a_fiber(tmp_path):
    doc = {"base": bundle_to_dict(mobius_bundle())["base"],
           "sections": [{"name": "z", "components": {"east": ["0"]}}]}
    with pytest.raises(SpecError) as err:
        load_spec(write_doc(tmp_path, doc))
    assert "/sections" in str(err.value)


def test_fiber_and_transitions_come_together(tmp_path):
    full = bundle_to_dict(mobius_bundle())
    no_transitions = {k: v for k, v in full.items() if k != "transitions"}
    with pytest.raises(SpecError) as err:
        load_spec(write_doc(tmp_path, no_transitions, "a.json"))
    assert "transitions" in str(err.value)
    no_fiber = {k: v for k, v in full.items() if k != "fiber"}
    with pytest.raises(SpecError) as err:
        load_spec(write_doc(tmp_path, no_fiber, "b.json"))
    assert "fiber" in str(err.value)


# --------------------------------------------------------------------------
# Structural errors carry JSON-pointer locations.


def test_unknown_top_level_key(tmp_path):
    doc = bundle_to_dict(mobius_bundle())
    doc["bogus"] = 1
    with pytest.raises(SpecError) as err:
        load_spec(write_doc(tmp_path, doc))
    assert "/bogus" in str(err.value)


def test_unknown_nested_key(tmp_path):
    doc = bundle_to_dict(mobius_bundle())
    doc["base"]["overlaps"][1]["smooth"] = True
    with pytest.raises(SpecError) as err:
        load_spec(write_doc(tmp_path, doc))
    assert "/base/overlaps/1/smooth" in str(err.value)


def test_missing_required_key(tmp_path):
    doc = bundle_to_dict(mobius_bundle())
    del doc["base"]["charts"][0]["box"]
    with pytest.raises(SpecError) as err:
        load_spec(write_doc(tmp_path, doc))
    assert "/base/charts/0/box" in str(err.value)


def test_box_must_be_pairs(tmp_path):
    doc = bundle_to_dict(mobius_bundle())
    doc["base"]["charts"][0]["box"] = [[0.0]]
    with pytest.raises(SpecError) as err:
        load_spec(write_doc(tmp_path, doc))
    assert "/base/charts/0/box/0" in str(err.value)
    assert "pair" in str(err.value)


def test_booleans_are_not_numbers(tmp_path):
    doc = bundle_to_dict(mobius_bundle())
    doc["base"]["dim"] = True
    with pytest.raises(SpecError) as err:
        load_spec(write_doc(tmp_path, doc))
    assert "integer" in str(err.value)


def test_bad_field_tag(tmp_path):
    doc = bundle_to_dict(mobius_bundle())
    doc["fiber"]["field"] = "quaternionic"
    with pytest.raises(SpecError) as err:
        load_spec(write_doc(tmp_path, doc))
    assert "/fiber/field" in str(err.value)


def test_expression_errors_name_the_entry(tmp_path):
    doc = bundle_to_dict(mobius_bundle())
    doc["transitions"][0]["g"] = [["2 ** 3"]]
    with pytest.raises(ParseError) as err:
        load_spec(write_doc(tmp_path, doc))
    assert "/transitions/0/g/0/0" in str(err.value)


def test_tau_expression_errors_name_the_entry(tmp_path):
    doc = bundle_to_dict(mobius_bundle())
    doc["base"]["overlaps"][0]["tau"] = ["x1 +"]
    with pytest.raises(ParseError) as err:
        load_spec(write_doc(tmp_path, doc))
    assert "/base/overlaps/0/tau/0" in str(err.value)


def test_duplicate_section_names(tmp_path):
    doc = bundle_to_dict(mobius_bundle())
    entry = {"name": "z", "components": {"east": ["0"], "west": ["0"]}}
    doc["sections"] = [entry, dict(entry)]
    with pytest.raises(SpecError) as err:
        load_spec(write_doc(tmp_path, doc))
    assert "duplicate section" in str(err.value)


def test_section_shape_errors_point_at_the_entry(tmp_path):
    doc = bundle_to_dict(mobius_bundle())
    doc["sections"] = [{"name": "bad", "components": {"east": ["0", "0"]}}]
    with pytest.raises(SpecError) as err:
        load_spec(write_doc(tmp_path, doc))
    assert "/sections/0" in str(err.value)


def test_top_level_must_be_an_object(tmp_path):
    p = tmp_path / "arr.json"
    p.write_text("[1, 2]")
    with pytest.raises(SpecError):
        load_spec(p)


# --------------------------------------------------------------------------
# File-level errors.


def test_missing_file_raises_file_error(tmp_path):
    with pytest.raises(FileError):
        load_spec(tmp_path / "nope.json")


def test_invalid_json_raises_file_error(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{\"base\": ")
    with pytest.raises(FileError):
        load_spec(p)


def test_save_into_missing_directory_raises_file_error(tmp_path):
    with pytest.raises(FileError):
        save_spec(mobius_bundle(), tmp_path / "no" / "such" / "dir.json")


# --------------------------------------------------------------------------
# Gallery.


def test_gallery_listing():
    names = list_gallery()
    assert names == sorted(names)
    for expected in ("mobius", "mobius_tampered", "projective_tangent", "trivial"):
        assert expected in names


def test_every_gallery_file_loads():
    for name in list_gallery():
        doc = load_spec(gallery_path(name))
        assert doc.base.charts


def test_document_to_dict_orders_names():
    B = plane_rotation_bundle()
    S1 = make_section(B, {"left": ["1", "0"], "right": ["1", "0"]})
    S2 = make_section(B, {"left": ["0", "1"], "right": ["0", "1"]})
    doc = document_to_dict(B, sections={"zeta": S1, "alpha": S2})
    assert [s["name"] for s in doc["sections"]] == ["alpha", "zeta"]
