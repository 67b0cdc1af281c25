"""Scalars, finite-dimensional spaces, linear maps, and ordered bases.

Everything downstream (tensors, pullbacks, bundles) consumes these types.
Values are immutable after construction and all operations are pure, so
instances may be shared freely across threads.

Conventions fixed here once and relied on everywhere:

* matrices are stored in the standard basis, column j = image of the j-th
  standard basis vector; changes of basis are explicit operations;
* the complex field uses ordinary bilinear arithmetic, never implicit
  conjugation;
* singularity is decided on |det| after row-max scaling, so the test does
  not punish badly scaled but perfectly invertible inputs.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InvalidDimension, ShapeMismatch, Singular, SingularBasis

DEFAULT_TOL = 1e-10


class FieldTag(enum.Enum):
    """Ground field marker. The value doubles as the JSON spelling."""

    REAL = "real"
    COMPLEX = "complex"

    @property
    def dtype(self) -> type:
        return np.complex128 if self is FieldTag.COMPLEX else np.float64


@dataclass(frozen=True)
class VectorSpace:
    """A finite-dimensional coordinate space over a fixed field."""

    dim: int
    field: FieldTag


@dataclass(frozen=True)
class LinearMap:
    """Linear map between coordinate spaces, stored as a dense matrix.

    Attributes:
        domain: source space.
        codomain: target space.
        matrix: codomain.dim x domain.dim array; column j is the image of
            the j-th standard basis vector of the domain.
    """

    domain: VectorSpace
    codomain: VectorSpace
    matrix: np.ndarray


@dataclass(frozen=True)
class OrderedBasis:
    """An ordered basis given by the coordinate vectors of its members.

    Attributes:
        space: the space the basis spans.
        vectors: array of shape (dim, dim); vectors[i] is basis vector i.
    """

    space: VectorSpace
    vectors: np.ndarray


def _freeze(a: np.ndarray) -> np.ndarray:
    out = np.array(a, copy=True)
    out.setflags(write=False)
    return out


def make_space(dim: int, field: FieldTag = FieldTag.REAL) -> VectorSpace:
    """Build a VectorSpace, rejecting non-positive dimensions."""
    if not isinstance(dim, (int, np.integer)) or dim < 1:
        raise InvalidDimension(f"space dimension must be a positive integer, got {dim!r}")
    return VectorSpace(int(dim), field)


def make_linear(domain: VectorSpace, codomain: VectorSpace, matrix) -> LinearMap:
    """Build a LinearMap after checking shape and field agreement."""
    if domain.field is not codomain.field:
        raise ShapeMismatch(
            f"domain field {domain.field.value} != codomain field {codomain.field.value}"
        )
    m = np.asarray(matrix, dtype=domain.field.dtype)
    if m.shape != (codomain.dim, domain.dim):
        raise ShapeMismatch(
            f"matrix shape {m.shape} does not match map "
            f"{domain.dim} -> {codomain.dim}"
        )
    return LinearMap(domain, codomain, _freeze(m))


def identity_linear(space: VectorSpace) -> LinearMap:
    return make_linear(space, space, np.eye(space.dim, dtype=space.field.dtype))


def apply_linear(L: LinearMap, v) -> np.ndarray:
    """Apply L to a coordinate vector of the domain."""
    vec = np.asarray(v, dtype=L.domain.field.dtype)
    if vec.shape != (L.domain.dim,):
        raise ShapeMismatch(f"vector shape {vec.shape} does not match domain dim {L.domain.dim}")
    return L.matrix @ vec


def scaled_abs_det(matrix: np.ndarray) -> float:
    """|det| after dividing each row by its largest absolute entry.

    A zero row makes the answer 0. The scaling makes the singularity
    threshold meaningful for matrices whose entries live on wildly
    different scales.
    """
    m = np.asarray(matrix)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return 0.0
    row_max = np.max(np.abs(m), axis=1)
    if np.any(row_max == 0.0):
        return 0.0
    return float(abs(np.linalg.det(m / row_max[:, None])))


def make_basis(space: VectorSpace, vectors, tol: float = DEFAULT_TOL) -> OrderedBasis:
    """Build an OrderedBasis, rejecting dependent vector lists.

    Args:
        space: the space being spanned.
        vectors: dim-length list of dim-length coordinate vectors.
        tol: threshold on the row-max-scaled |det| of the assembled matrix.

    Raises:
        ShapeMismatch: wrong count or length.
        SingularBasis: vectors dependent at the tolerance.
    """
    arr = np.asarray(vectors, dtype=space.field.dtype)
    if arr.shape != (space.dim, space.dim):
        raise ShapeMismatch(
            f"expected {space.dim} vectors of length {space.dim}, got shape {arr.shape}"
        )
    if scaled_abs_det(arr.T) <= tol:
        raise SingularBasis("basis vectors are linearly dependent at the working tolerance")
    return OrderedBasis(space, _freeze(arr))


def standard_basis(space: VectorSpace) -> OrderedBasis:
    return OrderedBasis(space, _freeze(np.eye(space.dim, dtype=space.field.dtype)))


def dual_basis(b: OrderedBasis, tol: float = DEFAULT_TOL) -> OrderedBasis:
    """Dual basis of b, as covector coordinates in the standard dual basis.

    Row i of the result pairs to 1 with b.vectors[i] and to 0 with every
    other member. Concretely the rows are the rows of the inverse of the
    matrix whose columns are the basis vectors.
    """
    cols = b.vectors.T
    if scaled_abs_det(cols) <= tol:
        raise SingularBasis("basis matrix is numerically singular")
    dual_rows = np.linalg.inv(cols)
    return OrderedBasis(VectorSpace(b.space.dim, b.space.field), _freeze(dual_rows))


def compose_linear(T: LinearMap, L: LinearMap) -> LinearMap:
    """The composite T after L (apply L first)."""
    if L.codomain != T.domain:
        raise ShapeMismatch(
            f"cannot compose: inner codomain {L.codomain} != outer domain {T.domain}"
        )
    return LinearMap(L.domain, T.codomain, _freeze(T.matrix @ L.matrix))


def invert_linear(L: LinearMap, tol: float = DEFAULT_TOL) -> LinearMap:
    """Inverse map, or Singular if the scaled |det| is at or below tol."""
    if L.domain.dim != L.codomain.dim:
        raise ShapeMismatch(f"cannot invert a {L.codomain.dim} x {L.domain.dim} map")
    if scaled_abs_det(L.matrix) <= tol:
        raise Singular("matrix is singular at the working tolerance")
    return LinearMap(L.codomain, L.domain, _freeze(np.linalg.inv(L.matrix)))


def is_gl(L: LinearMap, tol: float = DEFAULT_TOL) -> bool:
    """True iff L is square and invertible at the tolerance.

    Complex matrices are judged by the modulus of their determinant.
    Non-square maps simply return False.
    """
    if L.domain.dim != L.codomain.dim:
        return False
    return scaled_abs_det(L.matrix) > tol
