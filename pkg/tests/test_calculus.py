"""Smooth maps, exact derivatives, and local tensor fields."""

import math

import numpy as np
import pytest

from vbx.calculus import (
    chain_defect,
    closure_field,
    compose_maps,
    directional_derivative,
    eval_map,
    identity_map,
    jacobian,
    leibniz_defect,
    make_smooth_map,
    make_tensor_field,
    product_partials,
    tf_add,
    tf_eval,
    tf_product,
    tf_pullback_cov,
    tf_pullback_diffeo,
    tf_smul,
)
from vbx.errors import DomainViolation, NotADiffeomorphism, ShapeMismatch
from vbx.geometry import make_box, sample_box
from vbx.tensors import tensor_eval

AD_VS_FD_TOL = 1e-6
DEFECT_TOL = 1e-10

BOX2 = make_box([(-4, 4), (-4, 4)])


def test_eval_and_jacobian_frozen_case():
    F = make_smooth_map(["x1*x2", "x1 + x2"], BOX2)
    assert np.allclose(eval_map(F, [2.0, 3.0]), [6.0, 5.0], atol=0)
    J = jacobian(F, [2.0, 3.0]).matrix
    assert np.allclose(J, [[3.0, 2.0], [1.0, 1.0]], atol=0)


def test_eval_rejects_points_outside_the_box():
    F = make_smooth_map(["x1*x2", "x1 + x2"], BOX2)
    with pytest.raises(DomainViolation):
        eval_map(F, [5.0, 0.0])
    with pytest.raises(DomainViolation):
        jacobian(F, [0.0, -4.0])  # boundary is outside an open box


def test_make_smooth_map_validates():
    with pytest.raises(ShapeMismatch):
        make_smooth_map(["x3"], BOX2)  # more variables than the box has axes
    with pytest.raises(ShapeMismatch):
        make_smooth_map([], BOX2)


def test_jacobian_matches_central_differences():
    F = make_smooth_map(["sin(x1)*exp(x2)", "x1^2 - x2^3", "x1/(4 + x2)"], BOX2)
    pts = sample_box(make_box([(-2, 2), (-2, 2)]), 100, seed=0)
    h = 1e-6
    for x in pts:
        J = jacobian(F, x).matrix
        for k in range(2):
            step = np.zeros(2)
            step[k] = h
            fd = (eval_map(F, x + step) - eval_map(F, x - step)) / (2 * h)
            scale = np.maximum(1.0, np.abs(J[:, k]))
            assert np.max(np.abs(J[:, k] - fd) / scale) < AD_VS_FD_TOL


def test_directional_derivative():
    f = make_smooth_map(["x1^2*x2"], BOX2)
    got = directional_derivative(f, [1.0, 2.0], [1.0, -1.0])
    # gradient is (2*x1*x2, x1^2) = (4, 1); dot with (1,-1) gives 3
    assert got == pytest.approx(3.0, abs=1e-14)


def test_compose_maps_and_identity():
    f = make_smooth_map(["x1 + 1", "2*x1"], make_box([(0, 1)]))
    g = make_smooth_map(["x1*x2"], BOX2)
    gf = compose_maps(g, f)
    assert gf.in_dim == 1 and gf.out_dim == 1
    assert eval_map(gf, [0.5])[0] == pytest.approx(1.5, abs=1e-15)
    ident = identity_map(BOX2)
    assert np.allclose(eval_map(ident, [0.3, -0.4]), [0.3, -0.4], atol=0)


def test_leibniz_defect_vanishes():
    f = make_smooth_map(["sin(x1)*x2"], BOX2)
    g = make_smooth_map(["exp(x1 - x2)"], BOX2)
    for x, v in [([0.5, 1.0], [1.0, 0.0]), ([-1.0, 2.0], [0.3, -0.7])]:
        assert abs(leibniz_defect(f, g, x, v)) < DEFECT_TOL


def test_chain_defect_vanishes():
    f = make_smooth_map(["x1/2", "x2/2"], BOX2)
    g = make_smooth_map(["sin(x1 + x2)", "x1*x2"], BOX2)
    for x in ([0.4, 0.8], [-1.2, 2.0]):
        assert chain_defect(g, f, x) < DEFECT_TOL


def test_chain_defect_guards_codomain():
    f = make_smooth_map(["10*x1", "x2"], BOX2)
    g = make_smooth_map(["x1 + x2"], BOX2)
    with pytest.raises(DomainViolation):
        chain_defect(g, f, [1.0, 0.0])


def test_product_partials_frozen_case():
    F = make_smooth_map(["x1*x2"], BOX2)
    got = product_partials(F, [2.0], [3.0], [1.0], [1.0])
    # slotwise: d/dt F(2+t, 3) + d/dt F(2, 3+t) = 3 + 2 = 5
    assert got.shape == (1,)
    assert got[0] == pytest.approx(5.0, abs=1e-14)


def test_product_partials_match_full_jacobian():
    F = make_smooth_map(["sin(x1)*x2 + x1*x3", "x2*x3"], make_box([(-2, 2)] * 3))
    p1, p2 = [0.7], [1.1, -0.4]
    v1, v2 = [0.9], [-0.2, 0.5]
    got = product_partials(F, p1, p2, v1, v2)
    full = jacobian(F, p1 + p2).matrix @ np.concatenate([v1, v2])
    assert np.allclose(got, full, atol=1e-12)


def test_tensor_field_eval_and_arithmetic():
    box = make_box([(-1, 1), (-1, 1)])
    A = make_tensor_field(box, 2, 1, 0, ["x1", "x2"])
    B = make_tensor_field(box, 2, 1, 0, ["1", "x2^2"])
    x = [0.25, -0.5]
    TA = tf_eval(A, x)
    assert TA.valence == (1, 0)
    assert np.allclose(TA.coeffs, [0.25, -0.5], atol=0)
    S = tf_add(A, B)
    assert np.allclose(tf_eval(S, x).coeffs, [1.25, -0.25], atol=0)
    H = tf_smul(2.0, A)
    assert np.allclose(tf_eval(H, x).coeffs, 2 * TA.coeffs, atol=0)
    with pytest.raises(DomainViolation):
        tf_eval(A, [2.0, 0.0])


def test_tf_product_matches_pointwise_tensor_product():
    box = make_box([(-1, 1)])
    A = make_tensor_field(box, 2, 1, 0, ["x1", "1 - x1"])
    B = make_tensor_field(box, 2, 0, 1, ["2", "x1^2"])
    P = tf_product(A, B)
    assert (P.r, P.s) == (1, 1)
    for x in ([0.3], [-0.8]):
        want = np.outer(tf_eval(A, x).coeffs, tf_eval(B, x).coeffs).reshape(-1)
        assert np.allclose(tf_eval(P, x).coeffs, want, atol=1e-14)


def test_tf_pullback_diffeo_defining_property():
    # f(x) = (x1 + x2, x1 - x2) is linear with constant Jacobian M, so the
    # pulled field at x must be the linear pullback of the field at f(x).
    box = make_box([(-1, 1), (-1, 1)])
    f = make_smooth_map(["x1 + x2", "x1 - x2"], box)
    M = np.array([[1.0, 1.0], [1.0, -1.0]])
    A = make_tensor_field(make_box([(-2.5, 2.5)] * 2), 2, 1, 1, ["x1", "0", "x2", "1"])
    pulled = tf_pullback_diffeo(f, A, 1, 1)
    rng = np.random.default_rng(0)
    for _ in range(5):
        x = rng.uniform(-0.9, 0.9, size=2)
        v = rng.normal(size=2)
        u = rng.normal(size=2)
        target = tf_eval(A, M @ x)
        want = tensor_eval(target, [M @ v], [np.linalg.inv(M).T @ u])
        got = tensor_eval(tf_eval(pulled, x), [v], [u])
        assert got == pytest.approx(want, abs=1e-10 * max(1.0, abs(want)))


def test_tf_pullback_diffeo_rejects_folds():
    box = make_box([(-1, 1)])
    f = make_smooth_map(["x1^2"], box)  # Jacobian vanishes at the origin
    A = make_tensor_field(make_box([(-2, 2)]), 1, 0, 1, ["1"])
    pulled = tf_pullback_diffeo(f, A, 0, 1)
    with pytest.raises(NotADiffeomorphism):
        tf_eval(pulled, [0.0])


def test_tf_pullback_cov_works_across_dimensions():
    f = make_smooth_map(["x1", "x1^2"], make_box([(-1, 1)]))
    A = make_tensor_field(make_box([(-2, 2), (-2, 2)]), 2, 1, 0, ["x2", "1"])
    pulled = tf_pullback_cov(f, A, 1)
    assert pulled.fiber_dim == 1
    for x in ([0.5], [-0.3]):
        J = jacobian(f, x).matrix
        want = tensor_eval(tf_eval(A, eval_map(f, x)), [J @ np.array([1.0])], [])
        got = tensor_eval(tf_eval(pulled, x), [np.array([1.0])], [])
        assert got == pytest.approx(want, abs=1e-12)


def test_closure_field_evaluates_lazily():
    box = make_box([(0, 1)])
    calls = []

    def ev(x):
        calls.append(tuple(x))
        return np.array([x[0] * 2])

    A = closure_field(box, 1, 1, 0, ev)
    assert tf_eval(A, [0.25]).coeffs[0] == 0.5
    assert calls == [(0.25,)]
