import numpy as np
import pytest

from oracles import fd_cov_sphere, ode_transport_sphere
from postlie.geometry import (
    BackendMismatch,
    DomainError,
    EuclideanFlat,
    RotationGroupFlat,
    Sphere,
    affine_field,
    backend_from_spec,
    compressed_skew,
    conn_exp,
    conn_log,
    constant_field,
    cov_deriv_endo,
    cov_deriv_vec,
    curvature,
    field_from_spec,
    frozen,
    hat,
    linear_function,
    parallel_transport,
    projected_affine,
    quadratic_function,
    random_skew,
    rotation_field,
    so3_field,
    torsion,
    validate_field,
    vee,
)


@pytest.fixture(params=[2, 3])
def sphere(request):
    return Sphere(request.param)


def _fields(S, rng, k):
    n = S.rep_dim
    return [projected_affine(S, rng.standard_normal((n, n)), rng.standard_normal(n)) for _ in range(k)]


# -- sphere -------------------------------------------------------------------------


def test_exp_log_roundtrip(sphere, rng):
    S = sphere
    for _ in range(200):
        p, q = S.random_point(rng), S.random_point(rng)
        if np.dot(p, q) < -0.99:
            continue
        assert np.linalg.norm(conn_exp(S, p, conn_log(S, p, q)) - q) < 1e-10


def test_exp_stays_on_sphere_for_long_vectors(sphere, rng):
    p = sphere.random_point(rng)
    v = sphere.random_tangent(rng, p, 10.0)
    assert sphere.point_residual(sphere.exp(p, v)) < 1e-12


def test_exp_of_zero(sphere, rng):
    p = sphere.random_point(rng)
    assert np.array_equal(sphere.exp(p, np.zeros_like(p)), p)


def test_log_cut_locus(sphere, rng):
    p = sphere.random_point(rng)
    with pytest.raises(DomainError):
        sphere.log(p, -p)


def test_transport_matches_ode(sphere, rng):
    S = sphere
    for _ in range(20):
        p, q = S.random_point(rng), S.random_point(rng)
        if np.dot(p, q) <= 0.05:
            continue
        v = S.random_tangent(rng, p)
        assert np.linalg.norm(parallel_transport(S, p, q, v) - ode_transport_sphere(p, q, v)) < 1e-8


def test_transport_forms_agree(sphere, rng):
    S = sphere
    p = S.random_point(rng)
    q = S.exp(p, S.random_tangent(rng, p, 0.5))
    v = S.random_tangent(rng, p)
    assert np.linalg.norm(S.transport(p, q, v) - S.transport_direction_form(p, q, v)) < 1e-12


def test_transport_is_isometric_and_invertible(sphere, rng):
    S = sphere
    p = S.random_point(rng)
    q = S.exp(p, S.random_tangent(rng, p, 0.8))
    a, b = S.random_tangent(rng, p), S.random_tangent(rng, p)
    ta, tb = S.transport(p, q, a), S.transport(p, q, b)
    assert abs(np.dot(ta, tb) - np.dot(a, b)) < 1e-12
    assert S.tangent_residual(q, ta) < 1e-12
    assert np.linalg.norm(S.transport(q, p, ta) - a) < 1e-12


def test_transport_domain(sphere, rng):
    p = sphere.random_point(rng)
    with pytest.raises(DomainError):
        sphere.transport(p, -p, sphere.random_tangent(rng, p))


def test_covariant_derivative_matches_finite_differences(sphere, rng):
    S = sphere
    x, y = _fields(S, rng, 2)
    for _ in range(5):
        p = S.random_point(rng)
        exact = cov_deriv_vec(S, x, y).at(p)
        assert np.linalg.norm(exact - fd_cov_sphere(x.at, y.at, p)) < 1e-8


def test_rotation_field_covariant_derivative_closed_form(rng):
    S = Sphere(2)
    A, B = random_skew(rng, 3), random_skew(rng, 3)
    p = S.random_point(rng)
    got = S.cov(rotation_field(S, A), rotation_field(S, B)).at(p)
    bap = B @ A @ p
    assert np.linalg.norm(got - (bap - np.dot(bap, p) * p)) < 1e-12


def test_sphere_curvature_closed_form(sphere, rng):
    S = sphere
    x, y, z = _fields(S, rng, 3)
    p = S.random_point(rng)
    xv, yv, zv = x.at(p), y.at(p), z.at(p)
    expected = np.dot(yv, zv) * xv - np.dot(xv, zv) * yv
    assert np.linalg.norm(S.curvature_apply(x, y, z).at(p) - expected) < 1e-10
    assert np.linalg.norm(curvature(S, x, y, p) @ zv - expected) < 1e-10


def test_sphere_is_torsion_free(sphere, rng):
    x, y = _fields(sphere, rng, 2)
    assert np.linalg.norm(torsion(sphere, x, y, sphere.random_point(rng))) < 1e-12


def test_endomorphism_derivative_is_compatible_with_vectors(sphere, rng):
    S = sphere
    x, z = _fields(S, rng, 2)
    E = compressed_skew(S, random_skew(rng, S.rep_dim))
    p = S.random_point(rng)
    lhs = cov_deriv_endo(S, x, E).at(p) @ z.at(p)
    rhs = S.cov(x, E.apply(z)).at(p) - E.at(p) @ S.cov(x, z).at(p)
    assert np.linalg.norm(lhs - rhs) < 1e-12


def test_pointwise_tensors_match_field_versions(rng):
    S = Sphere(2)
    p = S.random_point(rng)
    v, w = S.random_tangent(rng, p), S.random_tangent(rng, p)
    R = S.curvature_at(p, v, w)
    z = S.random_tangent(rng, p)
    assert np.linalg.norm(R @ z - (np.dot(w, z) * v - np.dot(v, z) * w)) < 1e-12


def test_frozen_field(rng):
    S = Sphere(2)
    (f,) = _fields(S, rng, 1)
    p = S.random_point(rng)
    g = frozen(f, p)
    assert np.linalg.norm(g.at(p) - f.at(p)) < 1e-14
    q = S.exp(p, S.random_tangent(rng, p, 0.3))
    assert abs(np.linalg.norm(g.at(q)) - np.linalg.norm(f.at(p))) < 1e-12
    with pytest.raises(DomainError):
        g.at(-p)


def test_scalar_derivative_is_directional(rng):
    S = Sphere(2)
    (x,) = _fields(S, rng, 1)
    c = rng.standard_normal(3)
    phi = linear_function(c)
    p = S.random_point(rng)
    assert abs(S.cov_scalar(x, phi).at(p) - np.dot(c, x.at(p))) < 1e-14


def test_projection_and_basis(sphere, rng):
    S = sphere
    p = S.random_point(rng) * 1.3
    q = S.project_point(p)
    assert S.point_residual(q) < 1e-15
    B = S.tangent_basis(q)
    assert B.shape == (S.rep_dim, S.dim)
    assert np.allclose(B.T @ B, np.eye(S.dim)) and np.allclose(B.T @ q, 0)


# -- flat backends -----------------------------------------------------------------------


def test_euclidean_flat_is_trivial(rng):
    F = EuclideanFlat(3)
    A, B = rng.standard_normal((3, 3)), rng.standard_normal((3, 3))
    x, y = affine_field(F, A), affine_field(F, B)
    p = rng.standard_normal(3)
    assert np.allclose(F.cov(x, y).at(p), B @ A @ p)
    assert np.allclose(F.exp(p, np.ones(3)), p + 1)
    assert np.linalg.norm(torsion(F, x, y, p)) < 1e-12
    assert np.linalg.norm(curvature(F, x, y, p)) < 1e-12


def test_hat_vee():
    v = np.array([1.0, -2.0, 0.5])
    assert np.allclose(vee(hat(v)), v)
    assert np.allclose(hat(v) @ np.array([0.3, 0.1, 2.0]), np.cross(v, [0.3, 0.1, 2.0]))


def test_rotation_group_invariant_fields(rng):
    G = RotationGroupFlat()
    a, b = rng.standard_normal(3), rng.standard_normal(3)
    x, y = so3_field(G, a), so3_field(G, b)
    g = G.random_point(rng)
    assert np.linalg.norm(G.cov(x, y).at(g)) < 1e-14
    assert np.allclose(torsion(G, x, y, g), -np.cross(a, b))
    assert np.linalg.norm(curvature(G, x, y, g)) < 1e-12


def test_rotation_group_torsion_general_fields(rng):
    G = RotationGroupFlat()
    x = so3_field(G, rng.standard_normal(3), rng.standard_normal(3))
    y = so3_field(G, rng.standard_normal(3), rng.standard_normal(3))
    g = G.random_point(rng)
    assert np.allclose(torsion(G, x, y, g), -np.cross(x.at(g), y.at(g)), atol=1e-12)


def test_rotation_group_exp_log(rng):
    G = RotationGroupFlat()
    g = G.random_point(rng)
    v = rng.standard_normal(3)
    v *= 2.0 / np.linalg.norm(v)
    h = G.exp(g, v)
    assert G.point_residual(h) < 1e-12
    assert np.allclose(G.log(g, h), v)


def test_right_invariant_flow_is_left_multiplication(rng):
    G = RotationGroupFlat()
    b = rng.standard_normal(3)
    f = so3_field(G, right=b)
    g = G.random_point(rng)
    # ξ(g) = gᵀb means the ambient velocity g·hat(gᵀb) = hat(b)·g
    assert np.allclose(G.velocity(g, f.at(g)), hat(b) @ g)


# -- specs and validation ------------------------------------------------------------------------


def test_field_from_spec_roundtrip(rng):
    A = rng.standard_normal((3, 3)).tolist()
    f = field_from_spec({"backend": "sphere", "m": 2, "A": A, "c": [0, 0, 1]})
    p = np.array([1.0, 0, 0])
    g = projected_affine(Sphere(2), np.array(A), np.array([0, 0, 1.0]))
    assert np.allclose(f.at(p), g.at(p))


@pytest.mark.parametrize("spec", [{"backend": "torus"}, {"backend": "sphere", "m": 2, "A": [[1]]},
                                  {"backend": "so3"}])
def test_bad_specs(spec):
    with pytest.raises(ValueError):
        field_from_spec(spec)


def test_backend_from_spec():
    assert backend_from_spec({"backend": "sphere", "m": 3}) == Sphere(3)
    assert backend_from_spec({"backend": "so3"}) == RotationGroupFlat()


def test_rotation_field_requires_skew():
    with pytest.raises(ValueError):
        rotation_field(Sphere(2), np.eye(3))


def test_backend_mismatch(rng):
    x = constant_field(EuclideanFlat(3), np.ones(3))
    y = projected_affine(Sphere(2), np.eye(3))
    with pytest.raises(BackendMismatch):
        Sphere(2).cov(x, y)


def test_validate_field_accepts_presets_and_rejects_non_tangent(rng):
    S = Sphere(2)
    pts = [S.random_point(rng) for _ in range(3)]
    validate_field(projected_affine(S, rng.standard_normal((3, 3))), pts)
    with pytest.raises(ValueError):
        validate_field(constant_field(S, np.ones(3)), pts)


def test_quadratic_function_gradient(rng):
    Q = rng.standard_normal((3, 3))
    phi = quadratic_function(Q)
    F = EuclideanFlat(3)
    x = constant_field(F, np.array([1.0, 0, 0]))
    p = rng.standard_normal(3)
    assert np.isclose(F.cov_scalar(x, phi).at(p), ((Q + Q.T) @ p)[0])
