"""Desk-scale smooth vector bundles: atlases, transitions, sections, frames.

A bundle is specified by a base atlas (named charts with open box images,
overlaps with coordinate changes) plus a fiber dimension and one transition
matrix of expressions per overlap component.

Transition Convention, used uniformly by every operation and construction:
the stored matrix g_ij converts chart-j fiber coordinates to chart-i fiber
coordinates and is evaluated at chart-i base coordinates,

    v_i = g_ij(x_i) * v_j        where x_j = tau_ij(x_i).

Overlaps may be declared in several components per ordered chart pair (a
disconnected overlap cannot carry one smooth formula when the transition
differs per component, as on the Mobius band). Transition entries attach to
the overlap components of their (from, to) pair in declaration order, and
the counts must agree.

All verification is by sampling at low-discrepancy points with an explicit
seed; reports are deterministic given (spec, samples, seed, tol).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .calculus import SmoothMap, eval_map, jacobian, make_smooth_map
from .errors import (
    CocycleViolation,
    DomainViolation,
    ShapeMismatch,
    SingularFrame,
    SpecError,
    UnsupportedField,
    VbxError,
)
from .expr import Expr, eval_expr, fold_add, fold_mul, max_var_index, num_literal, parse_expr
from .geometry import Box, box_inside, make_box, region_contains, sample_region, sample_box
from .linalg import (
    DEFAULT_TOL,
    FieldTag,
    LinearMap,
    OrderedBasis,
    VectorSpace,
    is_gl,
    make_linear,
    scaled_abs_det,
)
from .report import (
    CheckReport,
    det_record,
    failed_record,
    make_report,
    residual_record,
    vacuous_record,
)
from . import symmat

DEFAULT_SAMPLES = 200
DEFAULT_SEED = 42
DEFAULT_CHECK_TOL = 1e-9


@dataclass(frozen=True)
class ChartSpec:
    name: str
    box: Box


@dataclass(frozen=True)
class OverlapSpec:
    """One component of the overlap of two charts, in from-chart coordinates."""

    frm: str
    to: str
    region: tuple  # tuple of Box, a finite union
    tau: SmoothMap  # from-chart coords -> to-chart coords


@dataclass(frozen=True)
class BaseAtlasSpec:
    dim: int
    charts: tuple
    overlaps: tuple

    def chart(self, name: str) -> ChartSpec:
        for c in self.charts:
            if c.name == name:
                return c
        raise SpecError(f"unknown chart '{name}'")

    def overlaps_between(self, i: str, j: str) -> list:
        return [o for o in self.overlaps if o.frm == i and o.to == j]


@dataclass(frozen=True)
class BundleEdge:
    """An overlap component together with its transition matrix."""

    overlap: OverlapSpec
    g: tuple  # d x d tuple-of-tuples of Expr, in from-chart coordinates
    component: int  # index among the (from, to) components, declaration order


@dataclass(frozen=True)
class VectorBundleSpec:
    base: BaseAtlasSpec
    fiber_dim: int
    field: FieldTag
    edges: tuple
    derivation: dict | None = dc_field(default=None, compare=False)

    @property
    def fiber_space(self) -> VectorSpace:
        return VectorSpace(self.fiber_dim, self.field)

    def edges_between(self, i: str, j: str) -> list:
        return [e for e in self.edges if e.overlap.frm == i and e.overlap.to == j]


@dataclass(frozen=True)
class TotalPoint:
    chart: str
    x: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class LocalSectionSpec:
    bundle: VectorBundleSpec
    per_chart: dict  # chart name -> tuple of d Expr

    @property
    def charts(self) -> list:
        return sorted(self.per_chart)


@dataclass(frozen=True)
class FrameFieldSpec:
    bundle: VectorBundleSpec
    chart: str
    columns: tuple  # d columns, each a tuple of d Expr


def _as_expr(c) -> Expr:
    return c if isinstance(c, Expr) else parse_expr(c)


def _edge_subject(e: BundleEdge) -> str:
    return f"{e.overlap.frm}->{e.overlap.to}#{e.component}"


def _overlap_subject(o: OverlapSpec, comp: int) -> str:
    return f"{o.frm}->{o.to}#{comp}"


# ---------------------------------------------------------------------------
# Construction and validation.


def make_atlas(dim: int, charts, overlaps) -> BaseAtlasSpec:
    """Assemble and statically validate a base atlas.

    charts: iterable of (name, box-like); overlaps: iterable of
    (from, to, [boxes], [tau exprs]). Sampled identities are the job of
    check_base_atlas; this checks everything decidable without evaluation.
    """
    if dim < 1:
        raise SpecError("base dimension must be positive", "/base/dim")
    chart_list = []
    seen = set()
    for name, box in charts:
        if not isinstance(name, str) or not name:
            raise SpecError("chart name must be a non-empty string", "/base/charts")
        if name in seen:
            raise SpecError(f"duplicate chart name '{name}'", "/base/charts")
        seen.add(name)
        b = box if isinstance(box, Box) else make_box(box)
        if b.dim != dim:
            raise SpecError(f"chart '{name}' box has dim {b.dim}, base dim is {dim}",
                            "/base/charts")
        chart_list.append(ChartSpec(name, b))
    atlas_charts = tuple(chart_list)

    def chart_box(name: str) -> Box:
        for c in atlas_charts:
            if c.name == name:
                return c.box
        raise SpecError(f"overlap references unknown chart '{name}'", "/base/overlaps")

    overlap_list = []
    for k, (frm, to, region, tau) in enumerate(overlaps):
        loc = f"/base/overlaps/{k}"
        if frm == to:
            raise SpecError("self-overlaps are implicit and must not be declared", loc)
        frm_box = chart_box(frm)
        chart_box(to)
        boxes = tuple(b if isinstance(b, Box) else make_box(b) for b in region)
        if not boxes:
            raise SpecError("overlap region must contain at least one box", loc)
        for b in boxes:
            if b.dim != dim:
                raise SpecError(f"region box has dim {b.dim}, base dim is {dim}", loc)
            if not box_inside(b, frm_box):
                raise SpecError(
                    f"region box {list(zip(b.lo, b.hi))} is not inside chart '{frm}'", loc)
        try:
            tau_map = tau if isinstance(tau, SmoothMap) else make_smooth_map(tau, frm_box)
        except ShapeMismatch as exc:
            raise SpecError(f"bad coordinate change: {exc}", loc) from exc
        tau_map = SmoothMap(tau_map.components, frm_box)
        if tau_map.out_dim != dim:
            raise SpecError(
                f"coordinate change has {tau_map.out_dim} components, base dim is {dim}", loc)
        overlap_list.append(OverlapSpec(frm, to, boxes, tau_map))

    atlas = BaseAtlasSpec(dim, atlas_charts, tuple(overlap_list))
    for o in atlas.overlaps:
        if not atlas.overlaps_between(o.to, o.frm):
            raise SpecError(
                f"overlap {o.frm}->{o.to} has no declared reverse", "/base/overlaps")
    return atlas


def make_bundle(base: BaseAtlasSpec, fiber_dim: int, field: FieldTag, transitions,
                derivation: dict | None = None) -> VectorBundleSpec:
    """Pair transition matrices with overlap components and validate shapes.

    transitions: iterable of (from, to, g) with g a d x d matrix of
    expressions; entries for one (from, to) pair attach to that pair's
    overlap components in declaration order, and every component needs
    exactly one entry.
    """
    if fiber_dim < 1:
        raise SpecError("fiber dimension must be positive", "/fiber/dim")
    parsed = []
    for k, (frm, to, g) in enumerate(transitions):
        loc = f"/transitions/{k}"
        rows = []
        for row in g:
            rows.append(tuple(_as_expr(c) for c in row))
        gmat = tuple(rows)
        if len(gmat) != fiber_dim or any(len(r) != fiber_dim for r in gmat):
            raise SpecError(f"transition matrix must be {fiber_dim}x{fiber_dim}", loc)
        for row in gmat:
            for e in row:
                if max_var_index(e) > base.dim:
                    raise SpecError(
                        f"transition entry references x{max_var_index(e)}, base dim is {base.dim}",
                        loc)
        parsed.append((frm, to, gmat, loc))

    edges = []
    used = [False] * len(parsed)
    for frm, to in sorted({(o.frm, o.to) for o in base.overlaps}):
        comps = base.overlaps_between(frm, to)
        matching = [k for k, p in enumerate(parsed) if p[0] == frm and p[1] == to]
        if len(matching) != len(comps):
            raise SpecError(
                f"overlap {frm}->{to} has {len(comps)} component(s) but "
                f"{len(matching)} transition entr{'y' if len(matching) == 1 else 'ies'}",
                "/transitions")
        for comp_idx, (o, k) in enumerate(zip(comps, matching)):
            edges.append(BundleEdge(o, parsed[k][2], comp_idx))
            used[k] = True
    for k, u in enumerate(used):
        if not u:
            frm, to = parsed[k][0], parsed[k][1]
            raise SpecError(f"transition {frm}->{to} has no declared overlap", parsed[k][3])
    return VectorBundleSpec(base, fiber_dim, field, tuple(edges), derivation)


# ---------------------------------------------------------------------------
# Evaluation.


def _eval_matrix(g, x, dtype) -> np.ndarray:
    env = list(np.asarray(x, dtype=float))
    out = np.array([[eval_expr(e, env) for e in row] for row in g], dtype=dtype)
    return out


def find_edge(B: VectorBundleSpec, i: str, j: str, x) -> BundleEdge | None:
    for e in B.edges_between(i, j):
        if region_contains(e.overlap.region, x):
            return e
    return None


def transition_eval(B: VectorBundleSpec, i: str, j: str, x,
                    tol: float = DEFAULT_TOL) -> LinearMap:
    """Evaluate the transition matrix converting chart-j fiber coordinates
    to chart-i fiber coordinates, at chart-i base coordinates x."""
    fiber = B.fiber_space
    if i == j:
        B.base.chart(i)
        return make_linear(fiber, fiber, np.eye(B.fiber_dim, dtype=B.field.dtype))
    edge = find_edge(B, i, j, x)
    if edge is None:
        raise DomainViolation(
            f"point {np.asarray(x).tolist()} is not in any declared {i}->{j} overlap region")
    mat = _eval_matrix(edge.g, x, B.field.dtype)
    L = make_linear(fiber, fiber, mat)
    if not is_gl(L, tol):
        raise CocycleViolation(
            f"transition {i}->{j} is singular at {np.asarray(x).tolist()}")
    return L


def change_chart(B: VectorBundleSpec, p: TotalPoint, j: str,
                 tol: float = DEFAULT_TOL) -> TotalPoint:
    """Rewrite a total-space point in another chart's coordinates."""
    if j == p.chart:
        return p
    i = p.chart
    edge = find_edge(B, i, j, p.x)
    if edge is None:
        raise DomainViolation(
            f"point {np.asarray(p.x).tolist()} is not in any declared {i}->{j} overlap region")
    y = eval_map(edge.overlap.tau, p.x)
    # Per the Transition Convention, v_j = g_ji(x_j) v_i.
    L = transition_eval(B, j, i, y, tol)
    return TotalPoint(j, y, L.matrix @ np.asarray(p.v, dtype=B.field.dtype))


def make_total_point(B: VectorBundleSpec, chart: str, x, v) -> TotalPoint:
    c = B.base.chart(chart)
    pt = np.asarray(x, dtype=float)
    if pt.shape != (B.base.dim,):
        raise ShapeMismatch(f"base point shape {pt.shape} does not match dim {B.base.dim}")
    if not c.box.contains(pt):
        raise DomainViolation(f"point {pt.tolist()} outside chart '{chart}'")
    vec = np.asarray(v, dtype=B.field.dtype)
    if vec.shape != (B.fiber_dim,):
        raise ShapeMismatch(f"fiber vector shape {vec.shape} does not match dim {B.fiber_dim}")
    return TotalPoint(chart, pt, vec)


# ---------------------------------------------------------------------------
# Atlas and bundle check suites.


def check_base_atlas(spec: BaseAtlasSpec, samples: int = DEFAULT_SAMPLES,
                     tol: float = DEFAULT_CHECK_TOL, seed: int = DEFAULT_SEED) -> CheckReport:
    """Sampled verification of the atlas identities.

    Per overlap component: tau lands in the reverse region, tau_ji(tau_ij(x))
    returns x, and the Jacobian of tau is invertible. Per chart triple with
    the needed overlaps: tau_jk(tau_ij(x)) = tau_ik(x) where memberships
    allow.
    """
    records = []
    for frm, to in sorted({(o.frm, o.to) for o in spec.overlaps}):
        for comp, o in enumerate(spec.overlaps_between(frm, to)):
            subject = _overlap_subject(o, comp)
            pts = sample_region(o.region, samples, seed)
            reverse = spec.overlaps_between(to, frm)
            worst_inv = 0.0
            worst_det = float("inf")
            trouble = None
            for x in pts:
                try:
                    y = eval_map(o.tau, x)
                    worst_det = min(worst_det, scaled_abs_det(jacobian(o.tau, x).matrix))
                    back = None
                    for rev in reverse:
                        if region_contains(rev.region, y):
                            back = eval_map(rev.tau, y)
                            break
                    if back is None:
                        trouble = (f"tau image {y.tolist()} escapes every declared "
                                   f"{to}->{frm} region")
                        break
                    worst_inv = max(worst_inv, float(np.max(np.abs(back - x))))
                except VbxError as exc:
                    trouble = f"evaluation failed at {np.asarray(x).tolist()}: {exc}"
                    break
            if trouble is not None:
                records.append(failed_record("tau_inverse", subject, len(pts), seed, tol, trouble))
            else:
                records.append(residual_record("tau_inverse", subject, len(pts), seed, tol, worst_inv))
                records.append(det_record("tau_jacobian", subject, len(pts), seed, DEFAULT_TOL,
                                          worst_det))

    names = [c.name for c in spec.charts]
    for i in names:
        for j in names:
            for k in names:
                if len({i, j, k}) != 3:
                    continue
                ij = spec.overlaps_between(i, j)
                jk = spec.overlaps_between(j, k)
                ik = spec.overlaps_between(i, k)
                if not ij or not jk or not ik:
                    continue
                subject = f"{i}->{j}->{k}"
                worst = 0.0
                hits = 0
                trouble = None
                for o in ij:
                    pts = sample_region(o.region, samples, seed)
                    for x in pts:
                        try:
                            y = eval_map(o.tau, x)
                            step2 = next((p for p in jk if region_contains(p.region, y)), None)
                            direct = next((p for p in ik if region_contains(p.region, x)), None)
                            if step2 is None or direct is None:
                                continue
                            z = eval_map(step2.tau, y)
                            z_direct = eval_map(direct.tau, x)
                        except VbxError as exc:
                            trouble = f"evaluation failed at {np.asarray(x).tolist()}: {exc}"
                            break
                        worst = max(worst, float(np.max(np.abs(z - z_direct))))
                        hits += 1
                    if trouble is not None:
                        break
                if trouble is not None:
                    records.append(failed_record("tau_triple", subject, samples, seed, tol, trouble))
                elif hits == 0:
                    records.append(vacuous_record("tau_triple", subject, seed, tol))
                else:
                    records.append(residual_record("tau_triple", subject, hits, seed, tol, worst))
    return make_report("base_atlas", records)


def check_vb(B: VectorBundleSpec, samples: int = DEFAULT_SAMPLES,
             tol: float = DEFAULT_CHECK_TOL, seed: int = DEFAULT_SEED) -> CheckReport:
    """Sampled verification of VB structure: GL values, pair and triple cocycles."""
    records = []
    d = B.fiber_dim
    eye = np.eye(d, dtype=B.field.dtype)
    for frm, to in sorted({(e.overlap.frm, e.overlap.to) for e in B.edges}):
        for e in B.edges_between(frm, to):
            subject = _edge_subject(e)
            pts = sample_region(e.overlap.region, samples, seed)
            worst_det = float("inf")
            worst_pair = 0.0
            trouble = None
            for x in pts:
                try:
                    g_here = _eval_matrix(e.g, x, B.field.dtype)
                    worst_det = min(worst_det, scaled_abs_det(g_here))
                    y = eval_map(e.overlap.tau, x)
                    back = find_edge(B, to, frm, y)
                    if back is None:
                        trouble = (f"tau image {y.tolist()} is in no declared "
                                   f"{to}->{frm} region")
                        break
                    g_back = _eval_matrix(back.g, y, B.field.dtype)
                    worst_pair = max(worst_pair, float(np.max(np.abs(g_here @ g_back - eye))))
                except VbxError as exc:
                    trouble = f"evaluation failed at {np.asarray(x).tolist()}: {exc}"
                    break
            if trouble is not None:
                records.append(failed_record("pair_cocycle", subject, len(pts), seed, tol, trouble))
            else:
                records.append(det_record("transition_gl", subject, len(pts), seed, DEFAULT_TOL,
                                          worst_det))
                records.append(residual_record("pair_cocycle", subject, len(pts), seed, tol,
                                               worst_pair))

    names = [c.name for c in B.base.charts]
    for i in names:
        for j in names:
            for k in names:
                if len({i, j, k}) != 3:
                    continue
                ij = B.edges_between(i, j)
                jk = B.edges_between(j, k)
                ki = B.edges_between(k, i)
                if not ij or not jk or not ki:
                    continue
                subject = f"{i}->{j}->{k}"
                worst = 0.0
                hits = 0
                trouble = None
                for e in ij:
                    pts = sample_region(e.overlap.region, samples, seed)
                    for x in pts:
                        try:
                            g1 = _eval_matrix(e.g, x, B.field.dtype)
                            y = eval_map(e.overlap.tau, x)
                            e2 = find_edge(B, j, k, y)
                            if e2 is None:
                                continue
                            g2 = _eval_matrix(e2.g, y, B.field.dtype)
                            z = eval_map(e2.overlap.tau, y)
                            e3 = find_edge(B, k, i, z)
                            if e3 is None:
                                continue
                            g3 = _eval_matrix(e3.g, z, B.field.dtype)
                        except VbxError as exc:
                            trouble = f"evaluation failed at {np.asarray(x).tolist()}: {exc}"
                            break
                        worst = max(worst, float(np.max(np.abs(g1 @ g2 @ g3 - eye))))
                        hits += 1
                    if trouble is not None:
                        break
                if trouble is not None:
                    records.append(failed_record("triple_cocycle", subject, samples, seed, tol,
                                                 trouble))
                elif hits == 0:
                    records.append(vacuous_record("triple_cocycle", subject, seed, tol))
                else:
                    records.append(residual_record("triple_cocycle", subject, hits, seed, tol,
                                                   worst))
    return make_report("vector_bundle", records)


# ---------------------------------------------------------------------------
# Sections.


def make_section(B: VectorBundleSpec, per_chart: dict) -> LocalSectionSpec:
    if not per_chart:
        raise SpecError("a section needs components on at least one chart")
    comp = {}
    for name in sorted(per_chart):
        B.base.chart(name)
        exprs = tuple(_as_expr(c) for c in per_chart[name])
        if len(exprs) != B.fiber_dim:
            raise SpecError(
                f"section on chart '{name}' has {len(exprs)} components, fiber dim is {B.fiber_dim}")
        for e in exprs:
            if max_var_index(e) > B.base.dim:
                raise SpecError(
                    f"section component on '{name}' references x{max_var_index(e)}")
        comp[name] = exprs
    return LocalSectionSpec(B, comp)


def zero_section(B: VectorBundleSpec) -> LocalSectionSpec:
    zero = tuple(num_literal(0.0) for _ in range(B.fiber_dim))
    return LocalSectionSpec(B, {c.name: zero for c in B.base.charts})


def section_eval(S: LocalSectionSpec, chart: str, x) -> np.ndarray:
    if chart not in S.per_chart:
        raise DomainViolation(f"section has no components on chart '{chart}'")
    c = S.bundle.base.chart(chart)
    pt = np.asarray(x, dtype=float)
    if not c.box.contains(pt):
        raise DomainViolation(f"point {pt.tolist()} outside chart '{chart}'")
    env = list(pt)
    return np.array([eval_expr(e, env) for e in S.per_chart[chart]],
                    dtype=S.bundle.field.dtype)


def check_section(S: LocalSectionSpec, samples: int = DEFAULT_SAMPLES,
                  tol: float = DEFAULT_CHECK_TOL, seed: int = DEFAULT_SEED) -> CheckReport:
    """Cross-chart compatibility: S_i(x) = g_ij(x) S_j(tau_ij(x)) at samples."""
    B = S.bundle
    records = []
    found_overlap = False
    for e in B.edges:
        i, j = e.overlap.frm, e.overlap.to
        if i not in S.per_chart or j not in S.per_chart:
            continue
        found_overlap = True
        subject = _edge_subject(e)
        pts = sample_region(e.overlap.region, samples, seed)
        worst = 0.0
        trouble = None
        for x in pts:
            try:
                lhs = section_eval(S, i, x)
                y = eval_map(e.overlap.tau, x)
                rhs = _eval_matrix(e.g, x, B.field.dtype) @ section_eval(S, j, y)
                worst = max(worst, float(np.max(np.abs(lhs - rhs))))
            except VbxError as exc:
                trouble = f"evaluation failed at {np.asarray(x).tolist()}: {exc}"
                break
        if trouble is not None:
            records.append(failed_record("section_compat", subject, len(pts), seed, tol, trouble))
        else:
            records.append(residual_record("section_compat", subject, len(pts), seed, tol, worst))
    if not records and not found_overlap:
        records.append(vacuous_record("section_compat", "no shared overlaps", seed, tol))
    return make_report("section", records)


def _same_bundle(a: VectorBundleSpec, b: VectorBundleSpec, op: str) -> None:
    if a != b:
        raise ShapeMismatch(f"{op}: sections live on different bundles")


def section_add(S1: LocalSectionSpec, S2: LocalSectionSpec) -> LocalSectionSpec:
    _same_bundle(S1.bundle, S2.bundle, "section_add")
    if set(S1.per_chart) != set(S2.per_chart):
        raise ShapeMismatch("section_add: sections cover different charts")
    out = {
        name: tuple(fold_add(a, b) for a, b in zip(S1.per_chart[name], S2.per_chart[name]))
        for name in sorted(S1.per_chart)
    }
    return LocalSectionSpec(S1.bundle, out)


def section_smul(c, S: LocalSectionSpec) -> LocalSectionSpec:
    if S.bundle.field is FieldTag.REAL and isinstance(c, complex):
        raise ShapeMismatch("complex scalar on a real bundle's section")
    lit = num_literal(float(c))
    out = {
        name: tuple(fold_mul(lit, e) for e in comps)
        for name, comps in sorted(S.per_chart.items())
    }
    return LocalSectionSpec(S.bundle, out)


def section_fmul(f: dict, S: LocalSectionSpec) -> LocalSectionSpec:
    """Multiply by a scalar function given per chart (an Expr for each chart)."""
    if set(f) != set(S.per_chart):
        raise ShapeMismatch("section_fmul: function charts do not match section charts")
    out = {}
    for name in sorted(S.per_chart):
        scalar = _as_expr(f[name])
        if max_var_index(scalar) > S.bundle.base.dim:
            raise ShapeMismatch(f"scalar on '{name}' references x{max_var_index(scalar)}")
        out[name] = tuple(fold_mul(scalar, e) for e in S.per_chart[name])
    return LocalSectionSpec(S.bundle, out)


# ---------------------------------------------------------------------------
# Frames.


def make_frame(B: VectorBundleSpec, chart: str, columns) -> FrameFieldSpec:
    B.base.chart(chart)
    cols = tuple(tuple(_as_expr(c) for c in col) for col in columns)
    if len(cols) != B.fiber_dim or any(len(c) != B.fiber_dim for c in cols):
        raise SpecError(f"a frame needs {B.fiber_dim} columns of {B.fiber_dim} components")
    for col in cols:
        for e in col:
            if max_var_index(e) > B.base.dim:
                raise SpecError(f"frame entry references x{max_var_index(e)}")
    return FrameFieldSpec(B, chart, cols)


def frame_from_trivialization(B: VectorBundleSpec, chart: str,
                              basis: OrderedBasis) -> FrameFieldSpec:
    """The frame of constant sections whose fiber values are the basis vectors."""
    if basis.space.dim != B.fiber_dim:
        raise ShapeMismatch(
            f"basis dim {basis.space.dim} does not match fiber dim {B.fiber_dim}")
    cols = []
    for vec in basis.vectors:
        entries = []
        for value in vec:
            if isinstance(value, complex) or np.iscomplexobj(vec):
                if np.imag(value) != 0:
                    raise UnsupportedField(
                        "constant frames are stored as expressions, which are real-valued")
                value = float(np.real(value))
            entries.append(num_literal(float(value)))
        cols.append(tuple(entries))
    return FrameFieldSpec(B, chart, tuple(cols))


def frame_matrix_at(F: FrameFieldSpec, x) -> np.ndarray:
    """The d x d matrix whose columns are the frame sections at x."""
    c = F.bundle.base.chart(F.chart)
    pt = np.asarray(x, dtype=float)
    if not c.box.contains(pt):
        raise DomainViolation(f"point {pt.tolist()} outside chart '{F.chart}'")
    env = list(pt)
    cols = [[eval_expr(e, env) for e in col] for col in F.columns]
    return np.array(cols, dtype=F.bundle.field.dtype).T


def check_frame(F: FrameFieldSpec, samples: int = DEFAULT_SAMPLES,
                tol: float = DEFAULT_TOL, seed: int = DEFAULT_SEED) -> CheckReport:
    """Invertibility of the assembled frame matrix across the chart."""
    box = F.bundle.base.chart(F.chart).box
    pts = sample_box(box, samples, seed)
    worst = float("inf")
    for x in pts:
        worst = min(worst, scaled_abs_det(frame_matrix_at(F, x)))
    rec = det_record("frame_gl", f"{F.chart}", len(pts), seed, tol, worst)
    return make_report("frame", [rec])


def dual_frame(F: FrameFieldSpec, samples: int = 25, tol: float = DEFAULT_TOL,
               seed: int = DEFAULT_SEED) -> FrameFieldSpec:
    """Dual frame: column i of the result is row i of the pointwise inverse.

    The inverse is taken symbolically (adjugate over determinant), so the
    dual frame is again an expression-backed frame, on the dual bundle.
    Pairing dual column i against frame column j gives the Kronecker delta.
    """
    from .constructions import dual_bundle

    box = F.bundle.base.chart(F.chart).box
    for x in sample_box(box, samples, seed):
        if scaled_abs_det(frame_matrix_at(F, x)) <= tol:
            raise SingularFrame(
                f"frame matrix singular at {np.asarray(x).tolist()}")
    matrix = symmat.mat_from_rows(
        tuple(tuple(F.columns[j][i] for j in range(F.bundle.fiber_dim))
              for i in range(F.bundle.fiber_dim)))
    inv = symmat.mat_inverse(matrix)
    dual_cols = tuple(tuple(inv[i][j] for j in range(F.bundle.fiber_dim))
                      for i in range(F.bundle.fiber_dim))
    return FrameFieldSpec(dual_bundle(F.bundle), F.chart, dual_cols)
