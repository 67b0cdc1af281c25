"""Command-line front end.

    vbx check <spec> [--samples N] [--tol T] [--seed S] [--out REPORT]
    vbx construct <kind> [kind flags] <inputs...> -o <out>
    vbx eval <spec> --target <name> --chart <name> --point <csv>

Exit codes: 0 everything verified, 1 usage or specification problem,
2 verification failure (a check failed, or a construction rejected its
inputs on mathematical grounds).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .bundles import (
    check_base_atlas,
    check_frame,
    check_section,
    check_vb,
    section_eval,
)
from .constructions import (
    base_restriction,
    check_tensor_field,
    direct_product,
    dual_bundle,
    field_eval,
    hom_bundle,
    induced_bundle,
    tangent_bundle,
    tensor_bundle,
    whitney_sum,
)
from .errors import (
    BaseMismatch,
    ChartAssignmentError,
    CocycleViolation,
    DomainViolation,
    NotAnIsomorphism,
    SingularFrame,
    VbxError,
)
from .report import CheckReport, format_report, make_report, merge_reports, report_to_json
from .specio import atlas_from_document, load_json, load_spec, save_spec

_VERIFY_ERRORS = (BaseMismatch, ChartAssignmentError, CocycleViolation,
                  DomainViolation, NotAnIsomorphism, SingularFrame)


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as exit code 1, not 2."""

    def error(self, message):
        raise _Usage(f"{self.format_usage().rstrip()}\n{self.prog}: error: {message}")


def _build_parser() -> _Parser:
    p = _Parser(prog="vbx", description="Verify and construct smooth vector bundle specs.")
    sub = p.add_subparsers(dest="command", required=True)

    def add_run_config(sp):
        sp.add_argument("--samples", type=int, default=200,
                        help="sample points per overlap region (default 200)")
        sp.add_argument("--tol", type=float, default=1e-9,
                        help="residual tolerance (default 1e-9)")
        sp.add_argument("--seed", type=int, default=42,
                        help="sampling seed (default 42)")

    c = sub.add_parser("check", help="run every verification suite a file supports")
    c.add_argument("spec", help="specification file")
    add_run_config(c)
    c.add_argument("--out", help="write the JSON report here")

    k = sub.add_parser("construct", help="build a derived bundle and save it")
    k.add_argument("kind", choices=["tensor", "dual", "hom", "sum", "product",
                                    "induced", "restrict", "tangent"])
    k.add_argument("inputs", nargs="+", help="input files (count depends on kind)")
    k.add_argument("-o", "--out", required=True, help="output specification file")
    k.add_argument("--r", type=int, default=None, help="vector slots (tensor kind)")
    k.add_argument("--s", type=int, default=None, help="covector slots (tensor kind)")

    e = sub.add_parser("eval", help="evaluate a named section or field at a point")
    e.add_argument("spec", help="specification file")
    e.add_argument("--target", required=True, help="section or field name")
    e.add_argument("--chart", required=True, help="chart the point is given in")
    e.add_argument("--point", required=True, help="comma-separated coordinates")
    return p


def _tagged(report: CheckReport, prefix: str) -> CheckReport:
    return make_report(report.suite,
                       [replace(r, subject=f"{prefix} {r.subject}") for r in report.records])


def cmd_check(args) -> int:
    if args.samples < 1:
        raise _Usage("--samples must be at least 1")
    if not args.tol > 0:
        raise _Usage("--tol must be positive")
    doc = load_spec(args.spec)

    reports = [check_base_atlas(doc.base, args.samples, args.tol, args.seed)]
    if doc.bundle is not None:
        reports.append(check_vb(doc.bundle, args.samples, args.tol, args.seed))
        for name, S in sorted(doc.sections.items()):
            reports.append(_tagged(check_section(S, args.samples, args.tol, args.seed),
                                   f"section '{name}'"))
        for name, F in sorted(doc.frames.items()):
            reports.append(_tagged(check_frame(F, args.samples, seed=args.seed),
                                   f"frame '{name}'"))
        for name, A in sorted(doc.fields.items()):
            reports.append(_tagged(check_tensor_field(A, args.samples, args.tol, args.seed),
                                   f"field '{name}'"))
    merged = merge_reports("check", reports)
    print(format_report(merged))
    if args.out:
        Path(args.out).write_text(report_to_json(merged))
    return 0 if merged.passed else 2


def _need_inputs(args, n: int) -> None:
    if len(args.inputs) != n:
        raise _Usage(f"construct {args.kind} takes exactly {n} input file(s), "
                     f"got {len(args.inputs)}")


def cmd_construct(args) -> int:
    kind = args.kind
    if kind == "tensor":
        _need_inputs(args, 1)
        if args.r is None or args.s is None:
            raise _Usage("construct tensor needs --r and --s")
        B = _bundle_input(args.inputs[0])
        out = tensor_bundle(B, args.r, args.s)
    elif kind == "dual":
        _need_inputs(args, 1)
        out = dual_bundle(_bundle_input(args.inputs[0]))
    elif kind == "hom":
        _need_inputs(args, 2)
        out = hom_bundle(_bundle_input(args.inputs[0]), _bundle_input(args.inputs[1]))
    elif kind == "sum":
        _need_inputs(args, 2)
        out = whitney_sum(_bundle_input(args.inputs[0]), _bundle_input(args.inputs[1]))
    elif kind == "product":
        _need_inputs(args, 2)
        out = direct_product(_bundle_input(args.inputs[0]), _bundle_input(args.inputs[1]))
    elif kind == "induced":
        _need_inputs(args, 2)
        B = _bundle_input(args.inputs[0])
        pull = load_json(args.inputs[1])
        for key in pull:
            if key not in {"base", "assignment", "map"}:
                raise _Usage(f"unknown key '{key}' in the induced-map file")
        for key in ("base", "assignment", "map"):
            if key not in pull:
                raise _Usage(f"the induced-map file needs a '{key}' key")
        out = induced_bundle(B, atlas_from_document(pull), pull["assignment"], pull["map"])
    elif kind == "restrict":
        _need_inputs(args, 2)
        B = _bundle_input(args.inputs[0])
        reg = load_json(args.inputs[1])
        if set(reg) != {"regions"}:
            raise _Usage("the restriction file must have exactly one key, 'regions'")
        out = base_restriction(B, reg["regions"])
    else:  # tangent
        _need_inputs(args, 1)
        doc = load_spec(args.inputs[0])
        out = tangent_bundle(doc.base)
    save_spec(out, args.out)
    print(f"wrote {args.out}")
    return 0


def _bundle_input(path: str):
    doc = load_spec(path)
    if doc.bundle is None:
        raise _Usage(f"'{path}' is an atlas-only file; this construction needs a bundle")
    return doc.bundle


def _fmt(v) -> str:
    if np.iscomplexobj(v):
        return f"{v.real:.17g}{v.imag:+.17g}j"
    return f"{float(v):.17g}"


def cmd_eval(args) -> int:
    doc = load_spec(args.spec)
    try:
        point = [float(t) for t in args.point.split(",")]
    except ValueError:
        raise _Usage(f"cannot parse point '{args.point}'") from None
    if args.target in doc.sections:
        values = section_eval(doc.sections[args.target], args.chart, point)
    elif args.target in doc.fields:
        values = field_eval(doc.fields[args.target], args.chart, point).coeffs
    else:
        raise _Usage(f"no section or field named '{args.target}' in '{args.spec}'")
    print(f"chart {args.chart}")
    print("point " + " ".join(_fmt(x) for x in point))
    print("value " + " ".join(_fmt(v) for v in np.atleast_1d(values)))
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "check":
            return cmd_check(args)
        if args.command == "construct":
            return cmd_construct(args)
        return cmd_eval(args)
    except _Usage as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except _VERIFY_ERRORS as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return 2
    except VbxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
