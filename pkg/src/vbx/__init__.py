"""Finite-dimensional multilinear algebra and smooth vector bundles in charts.

Everything is local and concrete: a base manifold is an atlas of open
boxes glued by transition maps, a bundle is a matrix-valued cocycle on
the overlaps, and all claims about them are checked numerically at
sampled points with the results collected into reports.
"""

from .bundles import (
    BaseAtlasSpec,
    BundleEdge,
    ChartSpec,
    FrameFieldSpec,
    LocalSectionSpec,
    OverlapSpec,
    TotalPoint,
    VectorBundleSpec,
    change_chart,
    check_base_atlas,
    check_frame,
    check_section,
    check_vb,
    dual_frame,
    frame_from_trivialization,
    frame_matrix_at,
    make_atlas,
    make_bundle,
    make_frame,
    make_section,
    make_total_point,
    section_add,
    section_eval,
    section_fmul,
    section_smul,
    transition_eval,
    zero_section,
)
from .calculus import (
    SmoothMap,
    TensorFieldLocal,
    compose_maps,
    eval_map,
    jacobian,
    make_smooth_map,
)
from .constructions import (
    BundleMorphismSpec,
    TensorFieldSpec,
    base_restriction,
    check_morphism,
    check_tensor_field,
    compose_morphism,
    direct_product,
    dual_bundle,
    field_add,
    field_eval,
    field_fmul,
    field_product,
    field_smul,
    hom_bundle,
    identity_morphism,
    induced_bundle,
    local_expression,
    make_field,
    make_morphism,
    subbundle_check,
    tangent_bundle,
    tensor_bundle,
    vb_pullback_cov,
    vb_pullback_rs,
    whitney_sum,
)
from .errors import (
    BaseMismatch,
    ChartAssignmentError,
    CocycleViolation,
    DomainViolation,
    EvalError,
    FileError,
    NotAnIsomorphism,
    ParseError,
    ShapeMismatch,
    SingularFrame,
    SpecError,
    UnknownSymbol,
    UnsupportedField,
    VbxError,
)
from .expr import eval_expr, parse_expr, to_string
from .geometry import Box, make_box, sample_box, sample_region
from .linalg import (
    FieldTag,
    LinearMap,
    OrderedBasis,
    VectorSpace,
    compose_linear,
    dual_basis,
    invert_linear,
    make_basis,
    make_linear,
    make_space,
)
from .pullbacks import rs_pullback
from .report import (
    CheckRecord,
    CheckReport,
    format_report,
    make_report,
    merge_reports,
    report_to_json,
)
from .specio import gallery_path, list_gallery, load_spec, save_spec
from .tensors import (
    Tensor,
    basis_tensor,
    digits_to_index,
    index_to_digits,
    make_tensor,
    scalar_mul,
    tensor_add,
    tensor_eval,
    tensor_product,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
