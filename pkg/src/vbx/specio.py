"""Reading and writing bundle specification documents.

A specification is a single JSON object. Top-level keys:

    base         required; {"dim", "charts", "overlaps"}
    fiber        {"dim", "field"}; optional only for atlas-only documents
    transitions  required whenever fiber is present
    sections     optional; [{"name", "components": {chart: [exprs]}}]
    frames       optional; [{"name", "chart", "columns": [[exprs], ...]}]
    fields       optional; [{"name", "r", "s", "components": {chart: [exprs]}}]
    derivation   optional free-form metadata written by the constructors

Expressions are DSL strings. Unknown keys are rejected with a
JSON-pointer-style location; expression syntax errors keep their own error
type but gain the offending entry's location in the message.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .bundles import (
    BaseAtlasSpec,
    VectorBundleSpec,
    make_atlas,
    make_bundle,
    make_frame,
    make_section,
)
from .constructions import make_field
from .errors import FileError, ParseError, SpecError, UnknownSymbol
from .expr import parse_expr, to_string
from .linalg import FieldTag

_TOP_KEYS = {"base", "fiber", "transitions", "sections", "frames", "fields", "derivation"}
_BASE_KEYS = {"dim", "charts", "overlaps"}
_CHART_KEYS = {"name", "box"}
_OVERLAP_KEYS = {"from", "to", "region", "tau"}
_FIBER_KEYS = {"dim", "field"}
_TRANSITION_KEYS = {"from", "to", "g"}
_SECTION_KEYS = {"name", "components"}
_FRAME_KEYS = {"name", "chart", "columns"}
_FIELD_KEYS = {"name", "r", "s", "components"}


@dataclass(frozen=True)
class SpecDocument:
    """Everything one file describes: the bundle (or bare atlas) plus any
    named sections, frames, and tensor fields."""

    base: BaseAtlasSpec
    bundle: VectorBundleSpec | None
    sections: dict
    frames: dict
    fields: dict

    @property
    def is_atlas_only(self) -> bool:
        return self.bundle is None


def _check_keys(obj: dict, allowed: set, loc: str) -> None:
    for key in obj:
        if key not in allowed:
            raise SpecError(f"unknown key '{key}'", f"{loc}/{key}")


def _need(obj: dict, key: str, loc: str):
    if key not in obj:
        raise SpecError(f"missing required key '{key}'", f"{loc}/{key}")
    return obj[key]


def _as_dict(value, loc: str) -> dict:
    if not isinstance(value, dict):
        raise SpecError("expected an object", loc)
    return value


def _as_list(value, loc: str) -> list:
    if not isinstance(value, list):
        raise SpecError("expected an array", loc)
    return value


def _as_str(value, loc: str) -> str:
    if not isinstance(value, str):
        raise SpecError("expected a string", loc)
    return value


def _as_int(value, loc: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SpecError("expected an integer", loc)
    return value


def _as_number(value, loc: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SpecError("expected a number", loc)
    return float(value)


def _parse_entry(text, loc: str):
    """Parse one expression string, tagging grammar errors with the entry's
    location."""
    text = _as_str(text, loc)
    try:
        return parse_expr(text)
    except ParseError as exc:
        raise ParseError(f"{loc}: {exc.args[0].rsplit(' (column', 1)[0]}",
                         exc.position) from exc
    except UnknownSymbol as exc:
        raise UnknownSymbol(f"{loc}: {exc.args[0].rsplit(' (column', 1)[0]}",
                            exc.position) from exc


def _parse_box(value, loc: str) -> list:
    bounds = _as_list(value, loc)
    out = []
    for k, pair in enumerate(bounds):
        pair = _as_list(pair, f"{loc}/{k}")
        if len(pair) != 2:
            raise SpecError("expected a [lo, hi] pair", f"{loc}/{k}")
        out.append((_as_number(pair[0], f"{loc}/{k}/0"),
                    _as_number(pair[1], f"{loc}/{k}/1")))
    return out


def load_json(path) -> dict:
    """Read one JSON object from disk; I/O and syntax problems raise FileError."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise FileError(f"cannot read '{p}': {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileError(f"'{p}' is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SpecError("top level must be an object")
    return doc


def atlas_from_document(doc: dict) -> BaseAtlasSpec:
    base = _as_dict(_need(doc, "base", ""), "/base")
    _check_keys(base, _BASE_KEYS, "/base")
    dim = _as_int(_need(base, "dim", "/base"), "/base/dim")

    charts = []
    for k, entry in enumerate(_as_list(_need(base, "charts", "/base"), "/base/charts")):
        loc = f"/base/charts/{k}"
        entry = _as_dict(entry, loc)
        _check_keys(entry, _CHART_KEYS, loc)
        name = _as_str(_need(entry, "name", loc), f"{loc}/name")
        box = _parse_box(_need(entry, "box", loc), f"{loc}/box")
        charts.append((name, box))

    overlaps = []
    raw_overlaps = base.get("overlaps", [])
    for k, entry in enumerate(_as_list(raw_overlaps, "/base/overlaps")):
        loc = f"/base/overlaps/{k}"
        entry = _as_dict(entry, loc)
        _check_keys(entry, _OVERLAP_KEYS, loc)
        frm = _as_str(_need(entry, "from", loc), f"{loc}/from")
        to = _as_str(_need(entry, "to", loc), f"{loc}/to")
        region = [_parse_box(b, f"{loc}/region/{i}")
                  for i, b in enumerate(_as_list(_need(entry, "region", loc), f"{loc}/region"))]
        tau = [_parse_entry(t, f"{loc}/tau/{i}")
               for i, t in enumerate(_as_list(_need(entry, "tau", loc), f"{loc}/tau"))]
        overlaps.append((frm, to, region, tau))

    try:
        return make_atlas(dim, charts, overlaps)
    except SpecError:
        raise
    except Exception as exc:  # shape problems from box/map construction
        raise SpecError(str(exc), "/base") from exc


def _load_bundle(doc: dict, base: BaseAtlasSpec) -> VectorBundleSpec:
    fiber = _as_dict(_need(doc, "fiber", ""), "/fiber")
    _check_keys(fiber, _FIBER_KEYS, "/fiber")
    fdim = _as_int(_need(fiber, "dim", "/fiber"), "/fiber/dim")
    fname = _as_str(_need(fiber, "field", "/fiber"), "/fiber/field")
    try:
        field = FieldTag(fname)
    except ValueError:
        raise SpecError(f"field must be 'real' or 'complex', got '{fname}'",
                        "/fiber/field") from None

    transitions = []
    for k, entry in enumerate(_as_list(_need(doc, "transitions", ""), "/transitions")):
        loc = f"/transitions/{k}"
        entry = _as_dict(entry, loc)
        _check_keys(entry, _TRANSITION_KEYS, loc)
        frm = _as_str(_need(entry, "from", loc), f"{loc}/from")
        to = _as_str(_need(entry, "to", loc), f"{loc}/to")
        g = []
        for i, row in enumerate(_as_list(_need(entry, "g", loc), f"{loc}/g")):
            row = _as_list(row, f"{loc}/g/{i}")
            g.append(tuple(_parse_entry(c, f"{loc}/g/{i}/{j}") for j, c in enumerate(row)))
        transitions.append((frm, to, tuple(g)))

    derivation = doc.get("derivation")
    if derivation is not None:
        derivation = _as_dict(derivation, "/derivation")
    return make_bundle(base, fdim, field, transitions, derivation)


def _load_named_components(doc: dict, key: str, allowed: set, loc_root: str):
    """Shared shape handling for the sections and fields arrays."""
    out = []
    for k, entry in enumerate(_as_list(doc.get(key, []), loc_root)):
        loc = f"{loc_root}/{k}"
        entry = _as_dict(entry, loc)
        _check_keys(entry, allowed, loc)
        name = _as_str(_need(entry, "name", loc), f"{loc}/name")
        comps = _as_dict(_need(entry, "components", loc), f"{loc}/components")
        parsed = {}
        for chart, exprs in comps.items():
            exprs = _as_list(exprs, f"{loc}/components/{chart}")
            parsed[chart] = tuple(_parse_entry(e, f"{loc}/components/{chart}/{i}")
                                  for i, e in enumerate(exprs))
        out.append((k, loc, name, entry, parsed))
    return out


def load_spec(path) -> SpecDocument:
    """Load and structurally validate one specification file."""
    doc = load_json(path)
    _check_keys(doc, _TOP_KEYS, "")

    base = atlas_from_document(doc)

    has_fiber = "fiber" in doc
    has_transitions = "transitions" in doc
    if not has_fiber and not has_transitions:
        for key in ("sections", "frames", "fields"):
            if key in doc:
                raise SpecError(f"'{key}' requires a fiber", f"/{key}")
        return SpecDocument(base, None, {}, {}, {})
    if not has_fiber:
        raise SpecError("missing required key 'fiber'", "/fiber")
    if not has_transitions:
        raise SpecError("missing required key 'transitions'", "/transitions")
    bundle = _load_bundle(doc, base)

    sections = {}
    for k, loc, name, entry, parsed in _load_named_components(
            doc, "sections", _SECTION_KEYS, "/sections"):
        if name in sections:
            raise SpecError(f"duplicate section name '{name}'", f"{loc}/name")
        try:
            sections[name] = make_section(bundle, parsed)
        except SpecError as exc:
            raise SpecError(str(exc), loc) from exc

    frames = {}
    for k, entry in enumerate(_as_list(doc.get("frames", []), "/frames")):
        loc = f"/frames/{k}"
        entry = _as_dict(entry, loc)
        _check_keys(entry, _FRAME_KEYS, loc)
        name = _as_str(_need(entry, "name", loc), f"{loc}/name")
        if name in frames:
            raise SpecError(f"duplicate frame name '{name}'", f"{loc}/name")
        chart = _as_str(_need(entry, "chart", loc), f"{loc}/chart")
        columns = []
        for i, col in enumerate(_as_list(_need(entry, "columns", loc), f"{loc}/columns")):
            col = _as_list(col, f"{loc}/columns/{i}")
            columns.append(tuple(_parse_entry(e, f"{loc}/columns/{i}/{j}")
                                 for j, e in enumerate(col)))
        try:
            frames[name] = make_frame(bundle, chart, tuple(columns))
        except SpecError as exc:
            raise SpecError(str(exc), loc) from exc

    fields = {}
    for k, loc, name, entry, parsed in _load_named_components(
            doc, "fields", _FIELD_KEYS, "/fields"):
        if name in fields:
            raise SpecError(f"duplicate field name '{name}'", f"{loc}/name")
        r = _as_int(_need(entry, "r", loc), f"{loc}/r")
        s = _as_int(_need(entry, "s", loc), f"{loc}/s")
        try:
            fields[name] = make_field(bundle, r, s, parsed)
        except SpecError as exc:
            raise SpecError(str(exc), loc) from exc

    return SpecDocument(base, bundle, sections, frames, fields)


# ---------------------------------------------------------------------------
# Writing.


def _num_out(v: float):
    return int(v) if float(v).is_integer() and abs(v) < 1e15 and math.isfinite(v) else v


def _box_out(box) -> list:
    return [[_num_out(lo), _num_out(hi)] for lo, hi in zip(box.lo, box.hi)]


def base_to_dict(base: BaseAtlasSpec) -> dict:
    return {
        "dim": base.dim,
        "charts": [{"name": c.name, "box": _box_out(c.box)} for c in base.charts],
        "overlaps": [
            {
                "from": o.frm,
                "to": o.to,
                "region": [_box_out(b) for b in o.region],
                "tau": [to_string(e) for e in o.tau.components],
            }
            for o in base.overlaps
        ],
    }


def bundle_to_dict(B: VectorBundleSpec) -> dict:
    doc = {
        "base": base_to_dict(B.base),
        "fiber": {"dim": B.fiber_dim, "field": B.field.value},
        "transitions": [
            {
                "from": e.overlap.frm,
                "to": e.overlap.to,
                "g": [[to_string(c) for c in row] for row in e.g],
            }
            for e in B.edges
        ],
    }
    if B.derivation is not None:
        doc["derivation"] = B.derivation
    return doc


def document_to_dict(bundle: VectorBundleSpec, sections: dict | None = None,
                     frames: dict | None = None, fields: dict | None = None) -> dict:
    doc = bundle_to_dict(bundle)
    if sections:
        doc["sections"] = [
            {"name": name,
             "components": {c: [to_string(e) for e in exprs]
                            for c, exprs in sorted(S.per_chart.items())}}
            for name, S in sorted(sections.items())
        ]
    if frames:
        doc["frames"] = [
            {"name": name, "chart": F.chart,
             "columns": [[to_string(e) for e in col] for col in F.columns]}
            for name, F in sorted(frames.items())
        ]
    if fields:
        doc["fields"] = [
            {"name": name, "r": A.r, "s": A.s,
             "components": {c: [to_string(e) for e in exprs]
                            for c, exprs in sorted(A.per_chart.items())}}
            for name, A in sorted(fields.items())
        ]
    return doc


def save_spec(bundle: VectorBundleSpec, path, sections: dict | None = None,
              frames: dict | None = None, fields: dict | None = None) -> None:
    doc = document_to_dict(bundle, sections, frames, fields)
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise FileError(f"cannot write '{path}': {exc}") from exc


def gallery_dir() -> Path:
    return Path(__file__).parent / "gallery"


def gallery_path(name: str) -> Path:
    return gallery_dir() / f"{name}.json"


def list_gallery() -> list:
    return sorted(p.stem for p in gallery_dir().glob("*.json"))
