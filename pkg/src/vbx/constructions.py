"""Bundles built from bundles: tensor, dual, Hom, sums, products, pullbacks.

Every constructor returns an ordinary VectorBundleSpec whose transition
matrices are expression matrices derived symbolically from the inputs, so
the output serializes and re-checks like a hand-written spec. A derivation
note (construction name and parameters) rides along for provenance when
saved to disk.

Transition matrices follow the Transition Convention of the bundle core
throughout; flattened fibers (tensor and Hom bundles) use the same radix
layout as the tensor algebra, row-major over the leading index first.
"""

from __future__ import annotations

import math

from dataclasses import dataclass, replace

import numpy as np

from .bundles import (
    DEFAULT_CHECK_TOL,
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    BaseAtlasSpec,
    FrameFieldSpec,
    VectorBundleSpec,
    _as_expr,
    _eval_matrix,
    check_section,
    find_edge,
    frame_matrix_at,
    make_atlas,
    make_bundle,
    make_section,
)
from .calculus import eval_map, make_smooth_map, product_component_exprs
from .errors import (
    BaseMismatch,
    ChartAssignmentError,
    DomainViolation,
    EvalError,
    NotAnIsomorphism,
    ShapeMismatch,
    SingularFrame,
    SpecError,
    UnsupportedField,
    VbxError,
)
from .expr import Var, diff, eval_expr, fold_add, fold_mul, max_var_index, num_literal, subst
from .geometry import (
    Box,
    box_covered,
    box_inside,
    intersect_boxes,
    make_box,
    region_contains,
    sample_box,
    sample_region,
)
from .intervals import interval_eval
from .linalg import DEFAULT_TOL, FieldTag, make_linear, scaled_abs_det
from .pullbacks import rs_pullback
from .report import (
    det_record,
    failed_record,
    make_report,
    residual_record,
    vacuous_record,
)
from .tensors import make_tensor
from . import symmat


def _require_same_base(B1: VectorBundleSpec, B2: VectorBundleSpec, op: str) -> None:
    if B1.base != B2.base:
        raise BaseMismatch(f"{op} needs structurally equal base atlases")
    if B1.field is not B2.field:
        raise UnsupportedField(f"{op} needs a common scalar field")


# ---------------------------------------------------------------------------
# Algebraic constructions over a fixed base.


def tensor_bundle(B: VectorBundleSpec, r: int, s: int) -> VectorBundleSpec:
    """Bundle of (r,s)-tensors on the fibers of B.

    The transition over each overlap is the matrix, in the radix basis, of
    the change of tensor components from the to-chart to the from-chart:
    the pullback along the inverse transition, which works out to the
    Kronecker product of r copies of the inverse-transpose followed by s
    copies of the transition itself.
    """
    if r < 0 or s < 0:
        raise SpecError("tensor valence must be non-negative")
    transitions = []
    for e in B.edges:
        try:
            g_inv_t = symmat.mat_transpose(symmat.mat_inverse(e.g)) if r else None
        except EvalError as exc:
            raise SpecError(
                f"transition {e.overlap.frm}->{e.overlap.to} is not invertible: {exc}") from exc
        vec_part = symmat.mat_kron_power(g_inv_t, r) if r else symmat.mat_identity(1)
        cov_part = symmat.mat_kron_power(e.g, s) if s else symmat.mat_identity(1)
        transitions.append((e.overlap.frm, e.overlap.to, symmat.mat_kron(vec_part, cov_part)))
    return make_bundle(B.base, B.fiber_dim ** (r + s), B.field, transitions,
                       derivation={"construction": "tensor", "r": r, "s": s})


def dual_bundle(B: VectorBundleSpec) -> VectorBundleSpec:
    out = tensor_bundle(B, 1, 0)
    return replace(out, derivation={"construction": "dual"})


def hom_bundle(B1: VectorBundleSpec, B2: VectorBundleSpec) -> VectorBundleSpec:
    """Bundle of fiberwise linear maps from B1 to B2 over the same base.

    A fiber element is a d2 x d1 matrix flattened row-major (target row
    first); the transition conjugates, alpha -> G2 alpha G1^(-1), which
    flattens to kron(G2, inverse-transpose of G1).
    """
    _require_same_base(B1, B2, "hom_bundle")
    transitions = []
    for e1, e2 in zip(B1.edges, B2.edges):
        if e1.overlap != e2.overlap:
            raise BaseMismatch("hom_bundle: overlap structures disagree")
        try:
            g1_inv_t = symmat.mat_transpose(symmat.mat_inverse(e1.g))
        except EvalError as exc:
            raise SpecError(
                f"transition {e1.overlap.frm}->{e1.overlap.to} is not invertible: {exc}") from exc
        transitions.append((e1.overlap.frm, e1.overlap.to, symmat.mat_kron(e2.g, g1_inv_t)))
    return make_bundle(B1.base, B1.fiber_dim * B2.fiber_dim, B1.field, transitions,
                       derivation={"construction": "hom"})


def whitney_sum(B1: VectorBundleSpec, B2: VectorBundleSpec) -> VectorBundleSpec:
    """Fiberwise direct sum over a shared base; transitions are block-diagonal."""
    _require_same_base(B1, B2, "whitney_sum")
    transitions = []
    for e1, e2 in zip(B1.edges, B2.edges):
        if e1.overlap != e2.overlap:
            raise BaseMismatch("whitney_sum: overlap structures disagree")
        transitions.append((e1.overlap.frm, e1.overlap.to,
                            symmat.mat_block_diag(e1.g, e2.g)))
    return make_bundle(B1.base, B1.fiber_dim + B2.fiber_dim, B1.field, transitions,
                       derivation={"construction": "whitney_sum"})


# ---------------------------------------------------------------------------
# Products and induced bundles: new bases.


def _shift_exprs(exprs, offset: int, count: int):
    env = tuple(Var(k + offset) for k in range(1, count + 1))
    return tuple(subst(e, env) for e in exprs)


def _shift_matrix(m, offset: int, count: int):
    env = tuple(Var(k + offset) for k in range(1, count + 1))
    return tuple(tuple(subst(c, env) for c in row) for row in m)


def direct_product(B1: VectorBundleSpec, B2: VectorBundleSpec) -> VectorBundleSpec:
    """Bundle over the product base with fiberwise direct-sum fibers.

    Product charts pair the factor charts; a product overlap combines an
    overlap (or the identity, when the factor chart repeats) from each
    side, so its transition is block-diagonal in the factor transitions.
    """
    if B1.field is not B2.field:
        raise UnsupportedField("direct_product needs a common scalar field")
    m1, m2 = B1.base.dim, B2.base.dim
    for c in list(B1.base.charts) + list(B2.base.charts):
        if "|" in c.name:
            raise SpecError(f"chart name '{c.name}' contains '|', reserved for product charts")

    charts = []
    for c1 in B1.base.charts:
        for c2 in B2.base.charts:
            charts.append((f"{c1.name}|{c2.name}",
                           Box(c1.box.lo + c2.box.lo, c1.box.hi + c2.box.hi)))

    def factor_options(B: VectorBundleSpec, i: str, j: str, dim: int):
        if i == j:
            box = B.base.chart(i).box
            ident = tuple(Var(k) for k in range(1, dim + 1))
            return [((box,), ident, symmat.mat_identity(B.fiber_dim))]
        return [(e.overlap.region, e.overlap.tau.components, e.g)
                for e in B.edges_between(i, j)]

    overlaps = []
    transitions = []
    for c1 in B1.base.charts:
        for c2 in B2.base.charts:
            for d1 in B1.base.charts:
                for d2 in B2.base.charts:
                    if c1.name == d1.name and c2.name == d2.name:
                        continue
                    opts1 = factor_options(B1, c1.name, d1.name, m1)
                    opts2 = factor_options(B2, c2.name, d2.name, m2)
                    for region1, tau1, g1 in opts1:
                        for region2, tau2, g2 in opts2:
                            frm = f"{c1.name}|{c2.name}"
                            to = f"{d1.name}|{d2.name}"
                            region = tuple(Box(b1.lo + b2.lo, b1.hi + b2.hi)
                                           for b1 in region1 for b2 in region2)
                            tau = tuple(tau1) + _shift_exprs(tau2, m1, m2)
                            overlaps.append((frm, to, region, tau))
                            transitions.append(
                                (frm, to,
                                 symmat.mat_block_diag(g1, _shift_matrix(g2, m1, m2))))
    base = make_atlas(m1 + m2, charts, overlaps)
    return make_bundle(base, B1.fiber_dim + B2.fiber_dim, B1.field, transitions,
                       derivation={"construction": "direct_product"})


def induced_bundle(B: VectorBundleSpec, base: BaseAtlasSpec, assignment: dict,
                   maps: dict, samples: int = 50,
                   seed: int = DEFAULT_SEED) -> VectorBundleSpec:
    """Pull the bundle back along a smooth map of bases.

    The map is given per chart of the new base: assignment names the chart
    of B's base that the image lies in, and maps gives the coordinate
    expressions of the map into that chart. Transitions of the result are
    B's transitions with the map substituted in; over an overlap whose two
    charts share an assigned target chart the transition is the identity.
    """
    for c in base.charts:
        if c.name not in assignment:
            raise SpecError(f"chart '{c.name}' has no assigned target chart")
        if c.name not in maps:
            raise SpecError(f"chart '{c.name}' has no map components")
    smooth = {}
    for c in base.charts:
        target_chart = B.base.chart(assignment[c.name])
        comps = tuple(_as_expr(e) for e in maps[c.name])
        if len(comps) != B.base.dim:
            raise SpecError(
                f"map on '{c.name}' has {len(comps)} components, target base dim is {B.base.dim}")
        f = make_smooth_map(comps, c.box)
        for x in sample_box(c.box, samples, seed):
            y = eval_map(f, x)
            if not target_chart.box.contains(y):
                raise ChartAssignmentError(
                    f"image {y.tolist()} of chart '{c.name}' point {x.tolist()} "
                    f"escapes assigned chart '{target_chart.name}'")
        smooth[c.name] = f

    transitions = []
    for o in base.overlaps:
        ci, cj = assignment[o.frm], assignment[o.to]
        if ci == cj:
            transitions.append((o.frm, o.to, symmat.mat_identity(B.fiber_dim)))
            continue
        f_i = smooth[o.frm]
        pts = sample_region(o.region, samples, seed)
        images = [eval_map(f_i, x) for x in pts]
        edge = find_edge(B, ci, cj, images[0])
        if edge is None:
            raise ChartAssignmentError(
                f"image {images[0].tolist()} of overlap {o.frm}->{o.to} lies in no "
                f"declared {ci}->{cj} overlap region")
        for y in images[1:]:
            if not region_contains(edge.overlap.region, y):
                raise ChartAssignmentError(
                    f"overlap {o.frm}->{o.to} maps into more than one {ci}->{cj} "
                    "component; split the overlap")
        transitions.append((o.frm, o.to, symmat.mat_subst(edge.g, f_i.components)))
    return make_bundle(base, B.fiber_dim, B.field, transitions,
                       derivation={"construction": "induced",
                                   "assignment": {k: assignment[k] for k in sorted(assignment)}})


# ---------------------------------------------------------------------------
# Base restriction.


def _tau_enclosure(tau_comps, box: Box) -> Box | None:
    bounds = list(zip(box.lo, box.hi))
    try:
        ivs = [interval_eval(c, bounds) for c in tau_comps]
    except EvalError:
        return None
    return Box(tuple(iv[0] for iv in ivs), tuple(iv[1] for iv in ivs))


def _certified_into(tau_comps, box: Box, target: Box, depth: int) -> list:
    """Sub-boxes of box whose tau image provably sits inside target."""
    enc = _tau_enclosure(tau_comps, box)
    if enc is not None and box_inside(enc, target):
        return [box]
    if depth == 0:
        return []
    widths = [h - l for l, h in zip(box.lo, box.hi)]
    ax = widths.index(max(widths))
    mid = 0.5 * (box.lo[ax] + box.hi[ax])
    if not box.lo[ax] < mid < box.hi[ax]:
        return []
    left_hi = list(box.hi)
    left_hi[ax] = mid
    right_lo = list(box.lo)
    right_lo[ax] = mid
    return (_certified_into(tau_comps, Box(box.lo, tuple(left_hi)), target, depth - 1)
            + _certified_into(tau_comps, Box(tuple(right_lo), box.hi), target, depth - 1))


def _pair_box(tau_comps, b: Box, reverse, target: Box):
    """Match one region box with a reverse overlap component.

    Succeeds when the interval image of the box sits inside the reverse
    component's declared region and the round trip through the reverse
    coordinate change lands back inside the box, so the pair (box, image)
    is mutually consistent under both coordinate changes. The box may be
    nudged inward by an ulp per round to absorb rounding in the round
    trip. Returns (box, reverse index, image) or None.
    """
    for ridx, r in reverse:
        cand = b
        for _ in range(4):
            enc = _tau_enclosure(tau_comps, cand)
            if (enc is None
                    or not all(l < h for l, h in zip(enc.lo, enc.hi))
                    or not box_inside(enc, target)
                    or not box_covered(enc, list(r.region))):
                break
            rt = _tau_enclosure(r.tau.components, enc)
            if rt is None:
                break
            if box_inside(rt, cand):
                return cand, ridx, enc
            lo = tuple(math.nextafter(cl, ch) if rl < cl else cl
                       for cl, ch, rl in zip(cand.lo, cand.hi, rt.lo))
            hi = tuple(math.nextafter(ch, cl) if rh > ch else ch
                       for cl, ch, rh in zip(cand.lo, cand.hi, rt.hi))
            if any(l >= h for l, h in zip(lo, hi)):
                break
            cand = Box(lo, hi)
    return None


def _paired_images(tau_comps, b: Box, reverse, target: Box, split_depth: int) -> list:
    """Pair a box with reverse components, bisecting when its image straddles."""
    got = _pair_box(tau_comps, b, reverse, target)
    if got is not None:
        return [got]
    if split_depth == 0:
        return []
    widths = [h - l for l, h in zip(b.lo, b.hi)]
    ax = widths.index(max(widths))
    mid = 0.5 * (b.lo[ax] + b.hi[ax])
    if not b.lo[ax] < mid < b.hi[ax]:
        return []
    left_hi = list(b.hi)
    left_hi[ax] = mid
    right_lo = list(b.lo)
    right_lo[ax] = mid
    return (_paired_images(tau_comps, Box(b.lo, tuple(left_hi)), reverse, target,
                           split_depth - 1)
            + _paired_images(tau_comps, Box(tuple(right_lo), b.hi), reverse, target,
                             split_depth - 1))


def base_restriction(B: VectorBundleSpec, regions: dict,
                     depth: int = 6) -> VectorBundleSpec:
    """Restrict the base to sub-boxes of (a subset of) the charts.

    Charts absent from regions are dropped. Each surviving overlap region
    is shrunk to a certified union of boxes: interval evaluation of the
    coordinate change proves the image stays inside the other restricted
    chart and inside the reverse overlap's surviving region, bisecting up
    to the given depth where a whole box cannot be certified. The result
    under-approximates the true restricted overlap but is always sound.
    """
    chart_names = {c.name for c in B.base.charts}
    for name in regions:
        if name not in chart_names:
            raise SpecError(f"restriction names unknown chart '{name}'")
    if not regions:
        raise SpecError("restriction must keep at least one chart")

    sub = {}
    kept_charts = []
    for c in B.base.charts:
        if c.name not in regions:
            continue
        r = regions[c.name]
        try:
            box = r if isinstance(r, Box) else make_box(r)
        except ShapeMismatch as exc:
            raise SpecError(f"restriction region for '{c.name}' is empty: {exc}") from exc
        if not box_inside(box, c.box):
            raise SpecError(f"restriction region for '{c.name}' is not inside the chart")
        sub[c.name] = box
        kept_charts.append((c.name, box))

    # Only one direction of each overlap pair is certified directly; the
    # reverse regions are the interval images of the surviving boxes, so
    # the two directions map into each other exactly by construction and
    # no mutual-consistency fixpoint is needed.
    rev_of: dict = {}
    for idx, o in enumerate(B.base.overlaps):
        rev_of.setdefault((o.frm, o.to), []).append(idx)

    kept: dict = {}
    derived: dict = {}
    for idx, o in enumerate(B.base.overlaps):
        if o.frm not in sub or o.to not in sub or o.frm > o.to:
            continue
        reverse = [(r, B.base.overlaps[r]) for r in rev_of[(o.to, o.frm)]]
        boxes = []
        for b in o.region:
            clipped = intersect_boxes(b, sub[o.frm])
            if clipped is not None:
                boxes.extend(_certified_into(o.tau.components, clipped, sub[o.to], depth))
        final = []
        for b in boxes:
            for cand, ridx, image in _paired_images(o.tau.components, b, reverse,
                                                    sub[o.to], 3):
                final.append(cand)
                derived.setdefault(ridx, []).append(image)
        kept[idx] = final

    g_of = {id(e.overlap): e.g for e in B.edges}
    overlaps = []
    transitions = []
    for idx, o in enumerate(B.base.overlaps):
        boxes = kept.get(idx) or derived.get(idx)
        if not boxes:
            continue
        overlaps.append((o.frm, o.to, tuple(boxes), o.tau.components))
        transitions.append((o.frm, o.to, g_of[id(o)]))

    base = make_atlas(B.base.dim, kept_charts, overlaps)
    meta = {"construction": "restriction",
            "regions": {name: [[lo, hi] for lo, hi in zip(box.lo, box.hi)]
                        for name, box in sorted(sub.items())}}
    return make_bundle(base, B.fiber_dim, B.field, transitions, derivation=meta)


# ---------------------------------------------------------------------------
# Tangent bundle of a base atlas.


def tangent_bundle(base: BaseAtlasSpec, samples: int = 25,
                   seed: int = DEFAULT_SEED) -> VectorBundleSpec:
    """Tangent bundle: fiber dimension equals the base dimension.

    Under the Transition Convention the from-chart transition is the
    Jacobian of the reverse coordinate change evaluated at the image
    point, so each entry is a symbolic derivative with the forward change
    substituted in. The chain rule then gives the cocycle identities.
    """
    transitions = []
    for o in base.overlaps:
        candidates = base.overlaps_between(o.to, o.frm)
        pts = sample_region(o.region, samples, seed)
        images = [eval_map(o.tau, x) for x in pts]
        rev = next((c for c in candidates if region_contains(c.region, images[0])), None)
        if rev is None:
            raise SpecError(
                f"overlap {o.frm}->{o.to}: image of sampled point lies in no declared "
                f"{o.to}->{o.frm} region")
        for y in images[1:]:
            if not region_contains(rev.region, y):
                raise SpecError(
                    f"overlap {o.frm}->{o.to} maps into more than one reverse component")
        env = o.tau.components
        rows = []
        for a in range(base.dim):
            rows.append(tuple(subst(diff(rev.tau.components[a], b + 1), env)
                              for b in range(base.dim)))
        transitions.append((o.frm, o.to, tuple(rows)))
    return make_bundle(base, base.dim, FieldTag.REAL, transitions,
                       derivation={"construction": "tangent"})


# ---------------------------------------------------------------------------
# Tensor fields on a bundle.


@dataclass(frozen=True)
class TensorFieldSpec:
    bundle: VectorBundleSpec
    r: int
    s: int
    per_chart: dict  # chart name -> tuple of fiber_dim^(r+s) Expr, radix order


def make_field(B: VectorBundleSpec, r: int, s: int, per_chart: dict) -> TensorFieldSpec:
    if r < 0 or s < 0:
        raise SpecError("field valence must be non-negative")
    if not per_chart:
        raise SpecError("a field needs components on at least one chart")
    want = B.fiber_dim ** (r + s)
    comp = {}
    for name in sorted(per_chart):
        B.base.chart(name)
        exprs = tuple(_as_expr(c) for c in per_chart[name])
        if len(exprs) != want:
            raise SpecError(
                f"field on chart '{name}' has {len(exprs)} components, expected {want}")
        for e in exprs:
            if max_var_index(e) > B.base.dim:
                raise SpecError(f"field component on '{name}' references x{max_var_index(e)}")
        comp[name] = exprs
    return TensorFieldSpec(B, r, s, comp)


def check_tensor_field(A: TensorFieldSpec, samples: int = DEFAULT_SAMPLES,
                       tol: float = DEFAULT_CHECK_TOL, seed: int = DEFAULT_SEED):
    """Compatibility of an (r,s)-field is section compatibility in the
    bundle of (r,s)-tensors, so delegate to that check wholesale."""
    TB = tensor_bundle(A.bundle, A.r, A.s)
    return check_section(make_section(TB, A.per_chart), samples, tol, seed)


def field_eval(A: TensorFieldSpec, chart: str, x):
    """The field's value at a point of one chart, as a tensor on the fiber."""
    if chart not in A.per_chart:
        raise DomainViolation(f"field has no components on chart '{chart}'")
    c = A.bundle.base.chart(chart)
    pt = np.asarray(x, dtype=float)
    if not c.box.contains(pt):
        raise DomainViolation(f"point {pt.tolist()} outside chart '{chart}'")
    env = list(pt)
    coeffs = np.array([eval_expr(e, env) for e in A.per_chart[chart]],
                      dtype=A.bundle.field.dtype)
    return make_tensor(A.bundle.fiber_space, A.r, A.s, coeffs)


def _check_field_pair(A: TensorFieldSpec, B: TensorFieldSpec, op: str,
                      same_valence: bool) -> None:
    if A.bundle != B.bundle:
        raise ShapeMismatch(f"{op}: fields live on different bundles")
    if set(A.per_chart) != set(B.per_chart):
        raise ShapeMismatch(f"{op}: fields cover different charts")
    if same_valence and (A.r, A.s) != (B.r, B.s):
        raise ShapeMismatch(f"{op}: valences differ (({A.r},{A.s}) vs ({B.r},{B.s}))")


def field_add(A: TensorFieldSpec, B: TensorFieldSpec) -> TensorFieldSpec:
    _check_field_pair(A, B, "field_add", same_valence=True)
    out = {name: tuple(fold_add(a, b)
                       for a, b in zip(A.per_chart[name], B.per_chart[name]))
           for name in sorted(A.per_chart)}
    return TensorFieldSpec(A.bundle, A.r, A.s, out)


def field_smul(c, A: TensorFieldSpec) -> TensorFieldSpec:
    lit = num_literal(float(c))
    out = {name: tuple(fold_mul(lit, e) for e in comps)
           for name, comps in sorted(A.per_chart.items())}
    return TensorFieldSpec(A.bundle, A.r, A.s, out)


def field_fmul(f: dict, A: TensorFieldSpec) -> TensorFieldSpec:
    """Multiply by a scalar function given as one expression per chart."""
    if set(f) != set(A.per_chart):
        raise ShapeMismatch("field_fmul: function charts do not match field charts")
    out = {}
    for name in sorted(A.per_chart):
        scalar = _as_expr(f[name])
        if max_var_index(scalar) > A.bundle.base.dim:
            raise ShapeMismatch(f"scalar on '{name}' references x{max_var_index(scalar)}")
        out[name] = tuple(fold_mul(scalar, e) for e in A.per_chart[name])
    return TensorFieldSpec(A.bundle, A.r, A.s, out)


def field_product(A: TensorFieldSpec, B: TensorFieldSpec) -> TensorFieldSpec:
    """Pointwise tensor product per chart; A takes the leading slots."""
    _check_field_pair(A, B, "field_product", same_valence=False)
    d = A.bundle.fiber_dim
    out = {name: product_component_exprs(A.per_chart[name], B.per_chart[name],
                                         d, A.r, A.s, B.r, B.s)
           for name in sorted(A.per_chart)}
    return TensorFieldSpec(A.bundle, A.r + B.r, A.s + B.s, out)


def local_expression(A: TensorFieldSpec, F: FrameFieldSpec, points,
                     tol: float = DEFAULT_TOL) -> np.ndarray:
    """Numeric components of the field in a frame, at the query points.

    Component (j1..jr, k1..ks) at p is the field evaluated on the frame
    columns in the vector slots and the dual-frame rows in the covector
    slots; computationally this is the tensor pullback along the linear
    map whose matrix is the frame matrix at p. The returned table has one
    row per point, radix-ordered.
    """
    if F.bundle != A.bundle:
        raise ShapeMismatch("frame and field live on different bundles")
    if F.chart not in A.per_chart:
        raise DomainViolation(f"field has no components on chart '{F.chart}'")
    space = A.bundle.fiber_space
    rows = []
    for p in points:
        P = frame_matrix_at(F, p)
        if scaled_abs_det(P) <= tol:
            raise SingularFrame(f"frame matrix singular at {np.asarray(p).tolist()}")
        T = field_eval(A, F.chart, p)
        L = make_linear(space, space, P)
        rows.append(rs_pullback(L, A.r, A.s, T, tol).coeffs)
    return np.array(rows, dtype=A.bundle.field.dtype)


# ---------------------------------------------------------------------------
# Bundle morphisms.


@dataclass(frozen=True)
class BundleMorphismSpec:
    source: VectorBundleSpec
    target: VectorBundleSpec
    assignment: dict  # source chart -> target chart the image lies in
    base_map: dict  # source chart -> tuple of target-base-dim Expr
    fiber_map: dict  # source chart -> d2 x d1 matrix of Expr
    inverse: dict | None = None  # target chart -> (source chart, Expr tuple)


def make_morphism(source: VectorBundleSpec, target: VectorBundleSpec,
                  assignment: dict, base_map: dict, fiber_map: dict,
                  inverse: dict | None = None) -> BundleMorphismSpec:
    if source.field is not target.field:
        raise UnsupportedField("make_morphism needs a common scalar field")
    d1, d2 = source.fiber_dim, target.fiber_dim
    asg, bm, fm = {}, {}, {}
    for c in source.base.charts:
        name = c.name
        if name not in assignment or name not in base_map or name not in fiber_map:
            raise SpecError(f"morphism is missing data on chart '{name}'")
        target.base.chart(assignment[name])
        comps = tuple(_as_expr(e) for e in base_map[name])
        if len(comps) != target.base.dim:
            raise SpecError(
                f"base map on '{name}' has {len(comps)} components, "
                f"target base dim is {target.base.dim}")
        mat = tuple(tuple(_as_expr(e) for e in row) for row in fiber_map[name])
        if len(mat) != d2 or any(len(row) != d1 for row in mat):
            raise SpecError(f"fiber map on '{name}' must be {d2}x{d1}")
        for e in comps + tuple(x for row in mat for x in row):
            if max_var_index(e) > source.base.dim:
                raise SpecError(
                    f"morphism data on '{name}' references x{max_var_index(e)}")
        asg[name], bm[name], fm[name] = assignment[name], comps, mat
    inv = None
    if inverse is not None:
        inv = {}
        for c in target.base.charts:
            if c.name not in inverse:
                raise SpecError(f"declared inverse is missing chart '{c.name}'")
            src_chart, comps = inverse[c.name]
            source.base.chart(src_chart)
            comps = tuple(_as_expr(e) for e in comps)
            if len(comps) != source.base.dim:
                raise SpecError(
                    f"inverse on '{c.name}' has {len(comps)} components, "
                    f"source base dim is {source.base.dim}")
            for e in comps:
                if max_var_index(e) > target.base.dim:
                    raise SpecError(
                        f"inverse on '{c.name}' references x{max_var_index(e)}")
            inv[c.name] = (src_chart, comps)
    return BundleMorphismSpec(source, target, asg, bm, fm, inv)


def identity_morphism(B: VectorBundleSpec) -> BundleMorphismSpec:
    ident_base = tuple(Var(k) for k in range(1, B.base.dim + 1))
    ident_fiber = symmat.mat_identity(B.fiber_dim)
    names = [c.name for c in B.base.charts]
    return make_morphism(B, B,
                         {n: n for n in names},
                         {n: ident_base for n in names},
                         {n: ident_fiber for n in names},
                         inverse={n: (n, ident_base) for n in names})


def compose_morphism(M2: BundleMorphismSpec, M1: BundleMorphismSpec) -> BundleMorphismSpec:
    """The morphism applying M1 first, then M2."""
    if M1.target != M2.source:
        raise ShapeMismatch("compose_morphism: M1's target is not M2's source")
    asg, bm, fm = {}, {}, {}
    for c in M1.source.base.charts:
        name = c.name
        mid = M1.assignment[name]
        env = M1.base_map[name]
        asg[name] = M2.assignment[mid]
        bm[name] = tuple(subst(e, env) for e in M2.base_map[mid])
        fm[name] = symmat.mat_mul(symmat.mat_subst(M2.fiber_map[mid], env),
                                  M1.fiber_map[name])
    inv = None
    if M1.inverse is not None and M2.inverse is not None:
        inv = {}
        for c in M2.target.base.charts:
            mid_chart, h2 = M2.inverse[c.name]
            src_chart, h1 = M1.inverse[mid_chart]
            inv[c.name] = (src_chart, tuple(subst(e, h2) for e in h1))
    return make_morphism(M1.source, M2.target, asg, bm, fm, inv)


def check_morphism(M: BundleMorphismSpec, samples: int = DEFAULT_SAMPLES,
                   tol: float = DEFAULT_CHECK_TOL, seed: int = DEFAULT_SEED):
    """Chart compatibility of a morphism at sampled overlap points.

    Two records per source overlap component: the intertwining identity
    fiberMap_i(x) G1_ij(x) = G2(f_i(x)) fiberMap_j(tau_ij(x)), and
    coherence of the base map representations f_j(tau_ij(x)) = tau2(f_i(x)).
    """
    src, tgt = M.source, M.target
    smooth = {c.name: make_smooth_map(M.base_map[c.name], c.box)
              for c in src.base.charts}
    records = []
    for e in src.edges:
        i, j = e.overlap.frm, e.overlap.to
        ci, cj = M.assignment[i], M.assignment[j]
        subject = f"{i}->{j}#{e.component}"
        pts = sample_region(e.overlap.region, samples, seed)
        worst_tw = 0.0
        worst_base = 0.0
        trouble = None
        for x in pts:
            try:
                phi_i = _eval_matrix(M.fiber_map[i], x, src.field.dtype)
                g1 = _eval_matrix(e.g, x, src.field.dtype)
                y = eval_map(e.overlap.tau, x)
                phi_j = _eval_matrix(M.fiber_map[j], y, src.field.dtype)
                fi_x = eval_map(smooth[i], x)
                fj_y = eval_map(smooth[j], y)
                if not tgt.base.chart(ci).box.contains(fi_x):
                    trouble = f"base image {fi_x.tolist()} escapes target chart '{ci}'"
                    break
                if ci == cj:
                    g2 = np.eye(tgt.fiber_dim, dtype=tgt.field.dtype)
                    tau2_fi = fi_x
                else:
                    edge2 = find_edge(tgt, ci, cj, fi_x)
                    if edge2 is None:
                        trouble = (f"base image {fi_x.tolist()} lies in no declared "
                                   f"{ci}->{cj} overlap region")
                        break
                    g2 = _eval_matrix(edge2.g, fi_x, tgt.field.dtype)
                    tau2_fi = eval_map(edge2.overlap.tau, fi_x)
                worst_tw = max(worst_tw, float(np.max(np.abs(phi_i @ g1 - g2 @ phi_j))))
                worst_base = max(worst_base, float(np.max(np.abs(fj_y - tau2_fi))))
            except VbxError as exc:
                trouble = f"evaluation failed at {np.asarray(x).tolist()}: {exc}"
                break
        if trouble is not None:
            records.append(failed_record("morphism_intertwine", subject, len(pts), seed,
                                         tol, trouble))
        else:
            records.append(residual_record("morphism_intertwine", subject, len(pts), seed,
                                           tol, worst_tw))
            records.append(residual_record("base_map_coherence", subject, len(pts), seed,
                                           tol, worst_base))
    if not records:
        records.append(vacuous_record("morphism_intertwine", "no overlaps", seed, tol))
    return make_report("morphism", records)


# ---------------------------------------------------------------------------
# Pullback of tensor fields along morphisms.


def _substituted_components(A: TensorFieldSpec, chart: str, base_exprs):
    if chart not in A.per_chart:
        raise SpecError(f"field has no components on chart '{chart}'")
    env = tuple(base_exprs)
    return tuple(subst(e, env) for e in A.per_chart[chart])


def vb_pullback_rs(M: BundleMorphismSpec, A: TensorFieldSpec, samples: int = 25,
                   tol: float = DEFAULT_TOL, seed: int = DEFAULT_SEED,
                   roundtrip_tol: float = 1e-8) -> TensorFieldSpec:
    """Pull an (r,s)-field on the target back through an isomorphism.

    Componentwise this is the tensor pullback of the pointwise fiber map
    applied to the field at the mapped base point, materialized
    symbolically (the fiber map's inverse enters through the adjugate).
    The isomorphism preconditions are enforced by sampling.
    """
    if A.bundle != M.target:
        raise ShapeMismatch("vb_pullback_rs: field does not live on the morphism's target")
    if M.source.fiber_dim != M.target.fiber_dim:
        raise NotAnIsomorphism("fiber dimensions differ")
    if M.inverse is None:
        raise NotAnIsomorphism("pullback of mixed tensors needs a declared inverse")
    for c in M.source.base.charts:
        for x in sample_box(c.box, samples, seed):
            phi = _eval_matrix(M.fiber_map[c.name], x, M.source.field.dtype)
            if scaled_abs_det(phi) <= tol:
                raise NotAnIsomorphism(
                    f"fiber map singular at {x.tolist()} on chart '{c.name}'")
    smooth = {c.name: make_smooth_map(M.base_map[c.name], c.box)
              for c in M.source.base.charts}
    for c in M.target.base.charts:
        src_chart, comps = M.inverse[c.name]
        if M.assignment[src_chart] != c.name:
            raise NotAnIsomorphism(
                f"inverse of chart '{c.name}' lands on chart '{src_chart}', whose image "
                f"is assigned to '{M.assignment[src_chart]}'")
        h = make_smooth_map(comps, c.box)
        src_box = M.source.base.chart(src_chart).box
        for y in sample_box(c.box, samples, seed):
            x = eval_map(h, y)
            if not src_box.contains(x):
                raise NotAnIsomorphism(
                    f"declared inverse leaves chart '{src_chart}' at {y.tolist()}")
            back = eval_map(smooth[src_chart], x)
            if float(np.max(np.abs(back - y))) > roundtrip_tol:
                raise NotAnIsomorphism(
                    f"declared inverse fails the round trip at {y.tolist()}")

    out = {}
    for c in M.source.base.charts:
        name = c.name
        phi = M.fiber_map[name]
        try:
            phi_inv = symmat.mat_inverse(phi) if A.s else None
        except EvalError as exc:
            raise NotAnIsomorphism(f"fiber map on '{name}' is not invertible: {exc}") from exc
        vec_part = (symmat.mat_kron_power(symmat.mat_transpose(phi), A.r)
                    if A.r else symmat.mat_identity(1))
        cov_part = symmat.mat_kron_power(phi_inv, A.s) if A.s else symmat.mat_identity(1)
        K = symmat.mat_kron(vec_part, cov_part)
        subbed = _substituted_components(A, M.assignment[name], M.base_map[name])
        out[name] = symmat.mat_vec(K, subbed)
    return TensorFieldSpec(M.source, A.r, A.s, out)


def vb_pullback_cov(M: BundleMorphismSpec, A: TensorFieldSpec) -> TensorFieldSpec:
    """Pull a purely covariant field back through any morphism."""
    if A.bundle != M.target:
        raise ShapeMismatch("vb_pullback_cov: field does not live on the morphism's target")
    if A.s > 0:
        raise ShapeMismatch(
            f"vb_pullback_cov handles purely covariant fields, got valence ({A.r},{A.s})")
    out = {}
    for c in M.source.base.charts:
        name = c.name
        K = (symmat.mat_kron_power(symmat.mat_transpose(M.fiber_map[name]), A.r)
             if A.r else symmat.mat_identity(1))
        subbed = _substituted_components(A, M.assignment[name], M.base_map[name])
        out[name] = symmat.mat_vec(K, subbed)
    return TensorFieldSpec(M.source, A.r, 0, out)


# ---------------------------------------------------------------------------
# Sub-bundle criterion.


def subbundle_check(B: VectorBundleSpec, W: dict, samples: int = DEFAULT_SAMPLES,
                    tol: float = DEFAULT_CHECK_TOL, seed: int = DEFAULT_SEED):
    """Sampled criterion for a rank-l sub-bundle given by local sections.

    W maps chart names to l columns of fiber components. Per chart, the
    columns must stay pointwise independent (smallest scaled singular
    value of the d x l matrix); per overlap with both charts present, the
    transported span must match: the transition applied to the to-chart
    columns must be annihilated by the projector complement of the
    from-chart span.
    """
    if not W:
        raise SpecError("subbundle_check needs sections on at least one chart")
    d = B.fiber_dim
    cols_of = {}
    rank = None
    for name in sorted(W):
        B.base.chart(name)
        cols = tuple(tuple(_as_expr(e) for e in col) for col in W[name])
        if rank is None:
            rank = len(cols)
            if not 1 <= rank <= d:
                raise SpecError(f"sub-bundle rank must be between 1 and {d}, got {rank}")
        if len(cols) != rank:
            raise SpecError(f"chart '{name}' declares {len(cols)} sections, expected {rank}")
        for col in cols:
            if len(col) != d:
                raise SpecError(f"section on '{name}' has {len(col)} components, fiber dim is {d}")
            for e in col:
                if max_var_index(e) > B.base.dim:
                    raise SpecError(f"section on '{name}' references x{max_var_index(e)}")
        cols_of[name] = cols

    def matrix_at(name, x):
        env = list(np.asarray(x, dtype=float))
        cols = [[eval_expr(e, env) for e in col] for col in cols_of[name]]
        return np.array(cols, dtype=B.field.dtype).T

    records = []
    for name in sorted(cols_of):
        box = B.base.chart(name).box
        worst = float("inf")
        pts = sample_box(box, samples, seed)
        for x in pts:
            sv = np.linalg.svd(matrix_at(name, x), compute_uv=False)
            worst = min(worst, float(sv[-1] / sv[0]) if sv[0] > 0 else 0.0)
        records.append(det_record("subbundle_rank", name, len(pts), seed, DEFAULT_TOL, worst))

    checked_overlap = False
    for e in B.edges:
        i, j = e.overlap.frm, e.overlap.to
        if i not in cols_of or j not in cols_of:
            continue
        checked_overlap = True
        subject = f"{i}->{j}#{e.component}"
        pts = sample_region(e.overlap.region, samples, seed)
        worst = 0.0
        trouble = None
        for x in pts:
            try:
                Wi = matrix_at(i, x)
                y = eval_map(e.overlap.tau, x)
                moved = _eval_matrix(e.g, x, B.field.dtype) @ matrix_at(j, y)
                Q, _ = np.linalg.qr(Wi)
                off = moved - Q @ (Q.conj().T @ moved)
                for col in range(moved.shape[1]):
                    scale = max(float(np.linalg.norm(moved[:, col])), 1e-300)
                    worst = max(worst, float(np.linalg.norm(off[:, col])) / scale)
            except VbxError as exc:
                trouble = f"evaluation failed at {np.asarray(x).tolist()}: {exc}"
                break
        if trouble is not None:
            records.append(failed_record("subbundle_span", subject, len(pts), seed, tol, trouble))
        else:
            records.append(residual_record("subbundle_span", subject, len(pts), seed, tol, worst))
    if not checked_overlap and len(cols_of) > 1:
        records.append(vacuous_record("subbundle_span", "no shared overlaps", seed, tol))
    return make_report("subbundle", records)
