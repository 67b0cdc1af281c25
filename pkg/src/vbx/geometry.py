"""Open boxes, finite unions of boxes, and deterministic sampling.

Sampling uses a plain Halton sequence (prime bases, seed folded into the
start index) rather than a library generator: report bytes must be
reproducible from (inputs, seed) alone, independent of any dependency
version. Points are kept a small margin away from box faces so open-box
membership and nearby compositions are never decided by a coin flip at the
boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .errors import DomainViolation, ShapeMismatch

SAMPLE_MARGIN = 1e-6

# Window substituted for an infinite box end. Desk-scale charts are small;
# anything that truly needs far-field samples should say so with a finite box.
INF_CLAMP = 10.0

_PRIMES = (
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61,
    67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131, 137,
    139, 149, 151, 157, 163, 167, 173,
)


@dataclass(frozen=True)
class Box:
    """Open axis-aligned box: the product of open intervals (lo_i, hi_i).

    Ends may be infinite. Construction is via make_box, which validates.
    """

    lo: tuple
    hi: tuple

    @property
    def dim(self) -> int:
        return len(self.lo)

    def contains(self, x) -> bool:
        """Strict interior membership."""
        pt = np.asarray(x, dtype=float)
        if pt.shape != (self.dim,):
            return False
        for v, a, b in zip(pt, self.lo, self.hi):
            if not (a < v < b):
                return False
        return True


def make_box(bounds) -> Box:
    """Build a Box from [(lo, hi), ...]; every interval must be nonempty."""
    lo, hi = [], []
    for k, pair in enumerate(bounds):
        if len(pair) != 2:
            raise ShapeMismatch(f"box bound {k} must be a (lo, hi) pair")
        a, b = float(pair[0]), float(pair[1])
        if math.isnan(a) or math.isnan(b) or not a < b:
            raise ShapeMismatch(f"box bound {k} is empty or invalid: ({a}, {b})")
        lo.append(a)
        hi.append(b)
    if not lo:
        raise ShapeMismatch("box must have at least one coordinate")
    return Box(tuple(lo), tuple(hi))


def box_bounds(box: Box) -> list:
    return [[a, b] for a, b in zip(box.lo, box.hi)]


def intersect_boxes(a: Box, b: Box) -> Box | None:
    """Intersection of two open boxes, or None when empty."""
    if a.dim != b.dim:
        raise ShapeMismatch(f"box dims differ: {a.dim} vs {b.dim}")
    lo = tuple(max(x, y) for x, y in zip(a.lo, b.lo))
    hi = tuple(min(x, y) for x, y in zip(a.hi, b.hi))
    if any(not l < h for l, h in zip(lo, hi)):
        return None
    return Box(lo, hi)


def box_inside(inner: Box, outer: Box) -> bool:
    """True when the closure of inner sits inside the closure of outer."""
    return all(a >= c and b <= d for a, b, c, d in zip(inner.lo, inner.hi, outer.lo, outer.hi))


def region_contains(boxes, x) -> bool:
    """Membership in a finite union of open boxes."""
    return any(b.contains(x) for b in boxes)


def box_minus(e: Box, u: Box) -> list:
    """The part of e outside u, as disjoint boxes (axis-aligned sweep)."""
    out = []
    lo, hi = list(e.lo), list(e.hi)
    for ax in range(e.dim):
        if lo[ax] < u.lo[ax]:
            cap = min(hi[ax], u.lo[ax])
            if lo[ax] < cap:
                phi = list(hi)
                phi[ax] = cap
                out.append(Box(tuple(lo), tuple(phi)))
            lo[ax] = max(lo[ax], u.lo[ax])
        if hi[ax] > u.hi[ax]:
            cap = max(lo[ax], u.hi[ax])
            if cap < hi[ax]:
                plo = list(lo)
                plo[ax] = cap
                out.append(Box(tuple(plo), tuple(hi)))
            hi[ax] = min(hi[ax], u.hi[ax])
        if not lo[ax] < hi[ax]:
            return out
    return out


def box_covered(e: Box, boxes) -> bool:
    """Closure containment of e in the union of the closures of boxes.

    Exact for positive-width e: peels one strictly overlapping box at a
    time and recurses on the remainder. Degenerate remainder slices lie
    on the face of the box just removed, hence inside the union.
    """
    if any(not a < b for a, b in zip(e.lo, e.hi)):
        return True
    for k, u in enumerate(boxes):
        if box_inside(e, u):
            return True
        if all(max(a, c) < min(b, d)
               for a, b, c, d in zip(e.lo, e.hi, u.lo, u.hi)):
            rest = list(boxes[:k]) + list(boxes[k + 1:])
            return all(box_covered(p, rest) for p in box_minus(e, u))
    return False


def halton(n: int, dims: int, seed: int = 0) -> np.ndarray:
    """n points of the Halton sequence in (0,1)^dims.

    The seed shifts the start index, so distinct seeds give distinct but
    equally well-spread point sets and equal seeds give identical bytes.
    """
    if dims > len(_PRIMES):
        raise ShapeMismatch(f"halton sampler supports up to {len(_PRIMES)} dimensions")
    start = 1 + (int(seed) % 100_003)
    out = np.empty((n, dims), dtype=float)
    for k in range(dims):
        base = _PRIMES[k]
        for row in range(n):
            i = start + row
            f, x = 1.0, 0.0
            while i > 0:
                f /= base
                x += f * (i % base)
                i //= base
            out[row, k] = x
    return out


def _sampling_interval(lo: float, hi: float) -> tuple:
    a = lo if math.isfinite(lo) else -INF_CLAMP
    b = hi if math.isfinite(hi) else INF_CLAMP
    a, b = a + SAMPLE_MARGIN, b - SAMPLE_MARGIN
    if not a < b:
        raise DomainViolation(f"interval ({lo}, {hi}) too thin to sample")
    return a, b


def sample_box(box: Box, n: int, seed: int = 0) -> np.ndarray:
    """n low-discrepancy points strictly inside the box, margin off the faces."""
    u = halton(n, box.dim, seed)
    out = np.empty_like(u)
    for k in range(box.dim):
        a, b = _sampling_interval(box.lo[k], box.hi[k])
        out[:, k] = a + (b - a) * u[:, k]
    return out


def sample_region(boxes, n: int, seed: int = 0) -> np.ndarray:
    """n points spread over a finite union of boxes, split evenly by count."""
    boxes = list(boxes)
    if not boxes:
        raise DomainViolation("cannot sample an empty region")
    k = len(boxes)
    counts = [n // k + (1 if i < n % k else 0) for i in range(k)]
    parts = [
        sample_box(b, c, seed + 7919 * i)
        for i, (b, c) in enumerate(zip(boxes, counts))
        if c > 0
    ]
    return np.vstack(parts)


def sample_unit_vectors(n: int, d: int, seed: int = 0) -> np.ndarray:
    """n quasi-random points on the Euclidean unit sphere in R^d.

    Halton points are pushed through the inverse normal CDF and normalized;
    the isotropy of the Gaussian makes the directions evenly spread.
    """
    u = halton(n, d, seed)
    z = ndtri(np.clip(u, 1e-12, 1.0 - 1e-12))
    norms = np.linalg.norm(z, axis=1)
    degenerate = norms < 1e-12
    if np.any(degenerate):
        z[degenerate] = 0.0
        z[degenerate, 0] = 1.0
        norms = np.linalg.norm(z, axis=1)
    return z / norms[:, None]


def sample_argument_tuples(n: int, d: int, slots: int, seed: int = 0) -> np.ndarray:
    """n tuples of `slots` unit vectors each, shape (n, slots, d).

    One Halton stream of dimension slots*d feeds the whole tuple, so the
    joint set is low-discrepancy rather than merely marginally so.
    """
    if slots == 0:
        return np.empty((n, 0, d))
    u = halton(n, slots * d, seed).reshape(n * slots, d)
    z = ndtri(np.clip(u, 1e-12, 1.0 - 1e-12))
    norms = np.linalg.norm(z, axis=1)
    degenerate = norms < 1e-12
    if np.any(degenerate):
        z[degenerate] = 0.0
        z[degenerate, 0] = 1.0
        norms = np.linalg.norm(z, axis=1)
    return (z / norms[:, None]).reshape(n, slots, d)
