import itertools
import sys
import os

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

# Add parent directory to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.czset.constrained_zonotope import ConstrainedZonotope, Zonotope
from src.czset.reduction import zonotope_reduce_to_parallelotope
from src.czset.operations import contains_point, interval_hull, sample_point
from src.dcprog.dc_bounds import (convexify, dc_bounds, eig_lower_bound, linear_minorant,
                                  linearization_enclosure)
from src.dcprog.differentiable_map import (DcDecomposition, DifferentiableMap, Provenance,
                                           affine_map_fn, restrict_map)
from src.dcprog.enclosure import (EnclosureKind, PolytopeEnclosure, enclose, tighten_parallelotope,
                                  vertices)
from src.interval.interval import IntervalMatrix, IntervalVector
from src.lp.simplex import SimplexSolver
from src.models.attitude import build_attitude
from src.models.common import quadratic_map
from src.models.quad2d import build_quad2d
from src.utils.errors import DimensionMismatchError, VertexBudgetError

UNIT_1D = PolytopeEnclosure(EnclosureKind.BOX, Zonotope([[1.0]], [0.0]))


def scalar_map(fn, grad, hess=None, name="s"):
    return DifferentiableMap(
        1, 1,
        lambda z: [fn(z[0])],
        lambda z: [[grad(z[0])]],
        (lambda i, box: hess(box)) if hess else None,
        name,
    )


SQUARE = scalar_map(lambda t: t * t, lambda t: 2.0 * t, lambda box: IntervalMatrix.from_point([[2.0]]), "sq")
ZERO = scalar_map(lambda t: 0.0, lambda t: 0.0, lambda box: IntervalMatrix.from_point([[0.0]]), "zero")


def saddle_map():
    """rho(z) = -z1^2 + z1 z2, Hessian [[-2, 1], [1, 0]]."""
    H = np.array([[-2.0, 1.0], [1.0, 0.0]])
    return DifferentiableMap(
        2, 1,
        lambda z: [-z[0] ** 2 + z[0] * z[1]],
        lambda z: [[-2.0 * z[0] + z[1], z[0]]],
        lambda i, box: IntervalMatrix.from_point(H),
        "saddle",
    )


def second_difference(f, z, d, h=1e-3):
    return f(z + h * d) - 2.0 * f(z) + f(z - h * d)


def test_minorant_of_square_at_minimum_is_zero():
    m = linear_minorant(SQUARE, [0.0])
    assert np.allclose(m(np.array([[-2.0], [0.5], [2.0]])), 0.0)


def test_minorant_of_affine_map_is_exact():
    rho = affine_map_fn([[2.0, -1.0]], [0.5])
    m = linear_minorant(rho, [0.3, 0.7])
    pts = np.random.default_rng(0).normal(size=(20, 2))
    assert np.allclose(m(pts), rho.eval_many(pts))


def test_minorant_under_square():
    m = linear_minorant(SQUARE, [1.0])
    grid = np.linspace(-2.0, 2.0, 41)
    values = m(grid.reshape(-1, 1))[:, 0]
    assert np.allclose(values, 2.0 * grid - 1.0)
    assert np.all(grid ** 2 >= values - 1e-12)


def test_dc_bounds_square():
    dc = DcDecomposition(SQUARE, ZERO)
    b = dc_bounds(dc, UNIT_1D, 0, zbar=[0.0])
    assert b.lo == pytest.approx(0.0, abs=1e-9) and b.hi == pytest.approx(1.0, abs=1e-9)


def test_dc_bounds_affine_exact():
    rho = affine_map_fn([[1.0, 2.0]], [0.0])
    zero = affine_map_fn([[0.0, 0.0]], [0.0])
    P = PolytopeEnclosure(EnclosureKind.BOX, Zonotope(np.eye(2), np.zeros(2)))
    b = dc_bounds(DcDecomposition(rho, zero), P, 0)
    assert b.lo == pytest.approx(-3.0, abs=1e-9) and b.hi == pytest.approx(3.0, abs=1e-9)


def test_dc_bounds_component_range():
    with pytest.raises(IndexError):
        dc_bounds(DcDecomposition(SQUARE, ZERO), UNIT_1D, 1)


def test_eig_lower_bound_cases():
    assert eig_lower_bound(IntervalMatrix([[-2.0]], [[-2.0]])) == -2.0
    H = IntervalMatrix([[2.0, -1.0], [-1.0, 2.0]], [[4.0, 1.0], [1.0, 4.0]])
    assert eig_lower_bound(H) == pytest.approx(1.0)
    assert eig_lower_bound(IntervalMatrix.from_point(np.diag([3.0, 5.0]))) <= 3.0


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1), st.integers(min_value=1, max_value=4))
def test_eig_lower_bound_is_sound(seed, n):
    rng = np.random.default_rng(seed)
    mid = rng.normal(size=(n, n))
    mid = 0.5 * (mid + mid.T)
    rad = np.abs(rng.normal(scale=0.3, size=(n, n)))
    rad = 0.5 * (rad + rad.T)
    H = IntervalMatrix(mid - rad, mid + rad)
    bound = eig_lower_bound(H)
    for _ in range(20):
        pick = rng.uniform(0.0, 1.0, size=(n, n)) > 0.5
        M = np.where(pick, H.upper, H.lower)
        M = np.triu(M) + np.triu(M, 1).T
        assert np.linalg.eigvalsh(M).min() >= bound - 1e-9


def test_linearization_of_square():
    R = linearization_enclosure(DcDecomposition(SQUARE, ZERO), SQUARE, UNIT_1D, zbar=[0.0])
    assert R.G[0, 0] == pytest.approx(0.5, abs=1e-9) and R.c[0] == pytest.approx(0.5, abs=1e-9)


def test_linearization_of_affine_map_has_zero_width():
    rho = affine_map_fn([[1.0, -3.0]], [2.0])
    zero = affine_map_fn([[0.0, 0.0]], [0.0])
    P = PolytopeEnclosure(EnclosureKind.BOX, Zonotope(np.eye(2), np.zeros(2)))
    R = linearization_enclosure(DcDecomposition(rho, zero), rho, P)
    assert np.allclose(R.G, 0.0, atol=1e-9) and np.allclose(R.c, 0.0, atol=1e-9)


def test_linearization_of_exponential_contains_grid_errors():
    rho = scalar_map(lambda t: 0.1 * np.exp(t), lambda t: 0.1 * np.exp(t), name="exp")
    R = linearization_enclosure(DcDecomposition(rho, ZERO), rho, UNIT_1D, zbar=[0.0])
    grid = np.linspace(-1.0, 1.0, 10_001)
    errors = 0.1 * np.exp(grid) - 0.1 * (1.0 + grid)
    lo, hi = R.c[0] - R.G[0, 0], R.c[0] + R.G[0, 0]
    assert np.all(errors >= lo - 1e-9) and np.all(errors <= hi + 1e-9)
    assert hi == pytest.approx(0.1 * (np.e - 2.0), abs=1e-9)


def product_map_and_dc():
    """z1 z2 = (z1 + z2)^2 / 4 - (z1 - z2)^2 / 4."""
    rho = DifferentiableMap(2, 1, lambda z: [z[0] * z[1]], lambda z: [[z[1], z[0]]], name="prod")
    dc = DcDecomposition(quadratic_map([0.25 * np.array([[1.0, 1.0], [1.0, 1.0]])], name="prod^a"),
                         quadratic_map([0.25 * np.array([[1.0, -1.0], [-1.0, 1.0]])], name="prod^b"))
    return rho, dc


def random_enclosure(rng, center, radius, rotated):
    center = np.asarray(center, dtype=float)
    radius = np.asarray(radius, dtype=float)
    if rotated:
        G = np.diag(radius) @ (np.eye(len(center)) + 0.3 * rng.normal(size=(len(center), len(center))))
        return PolytopeEnclosure(EnclosureKind.PARALLELOTOPE, Zonotope(G, center))
    return PolytopeEnclosure(EnclosureKind.BOX, Zonotope(np.diag(radius), center))


def assert_remainder_enclosed(dc, rho, P, rng, count=500):
    Z = P.as_zonotope
    zbar = Z.c + Z.G @ rng.uniform(-0.5, 0.5, Z.n)
    R = linearization_enclosure(dc, rho, P, zbar)
    rad = np.abs(np.diag(R.G))
    f0, J = np.asarray(rho.eval(zbar)), np.asarray(rho.jacobian(zbar))
    for _ in range(count):
        z = Z.c + Z.G @ rng.uniform(-1.0, 1.0, Z.n)
        err = np.asarray(rho.eval(z)) - f0 - J @ (z - zbar)
        tol = 1e-9 * (1.0 + np.max(np.abs(err)))
        assert np.all(err >= R.c - rad - tol) and np.all(err <= R.c + rad + tol)


@settings(max_examples=10, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1), st.booleans())
def test_negated_square_remainder_is_enclosed(seed, rotated):
    rng = np.random.default_rng(seed)
    rho = scalar_map(lambda t: -t * t, lambda t: -2.0 * t, name="negsq")
    P = random_enclosure(rng, rng.uniform(-2.0, 2.0, 1), rng.uniform(0.1, 1.5, 1), rotated)
    assert_remainder_enclosed(DcDecomposition(ZERO, SQUARE), rho, P, rng)


@settings(max_examples=10, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1), st.booleans())
def test_product_remainder_is_enclosed(seed, rotated):
    rng = np.random.default_rng(seed)
    rho, dc = product_map_and_dc()
    P = random_enclosure(rng, rng.uniform(-2.0, 2.0, 2), rng.uniform(0.1, 1.0, 2), rotated)
    assert_remainder_enclosed(dc, rho, P, rng)


@settings(max_examples=10, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1), st.booleans())
def test_quad2d_process_remainder_is_enclosed(seed, rotated):
    rng = np.random.default_rng(seed)
    model = build_quad2d()
    center = np.concatenate([rng.uniform(-2.0, 2.0, 2), np.zeros(2)])
    P = random_enclosure(rng, center, [*rng.uniform(0.1, 0.8, 2), 0.1, 0.1], rotated)
    assert_remainder_enclosed(model.f_dc, model.f, P, rng)


def random_unit_quaternion(rng):
    q = rng.normal(size=4)
    return q / np.linalg.norm(q)


@settings(max_examples=10, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1), st.booleans())
def test_attitude_measurement_remainder_is_enclosed(seed, rotated):
    rng = np.random.default_rng(seed)
    model = build_attitude()
    # additive noise frozen at zero, as in the assimilation stage
    free, base = list(range(4)), np.zeros(10)
    rho, dc = restrict_map(model.h, free, base), model.h_dc.restrict(free, base)
    P = random_enclosure(rng, random_unit_quaternion(rng), rng.uniform(0.01, 0.08, 4), rotated)
    assert_remainder_enclosed(dc, rho, P, rng)


@settings(max_examples=10, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1), st.booleans())
def test_attitude_invariant_remainder_is_enclosed(seed, rotated):
    rng = np.random.default_rng(seed)
    model = build_attitude()
    P = random_enclosure(rng, random_unit_quaternion(rng), rng.uniform(0.01, 0.08, 4), rotated)
    assert_remainder_enclosed(model.g_dc, model.g, P, rng)


def test_convexify_positive_makes_a_convex():
    rho = saddle_map()
    box = IntervalVector.from_bounds([-1.0, -1.0], [1.0, 1.0])
    dc = convexify(rho, box)
    assert dc.provenance == Provenance.CONVEXIFIED
    assert dc.lam[0] == pytest.approx(3.0)
    rng = np.random.default_rng(0)
    for _ in range(100):
        z = rng.uniform(-1.0, 1.0, 2)
        d = rng.normal(size=2)
        d /= np.linalg.norm(d)
        assert second_difference(lambda p: dc.a.eval(p)[0], z, d) >= -1e-6
        assert second_difference(lambda p: dc.b.eval(p)[0], z, d) >= -1e-6
        assert dc.a.eval(z) - dc.b.eval(z) == pytest.approx(rho.eval(z), abs=1e-12)


def test_convexify_best_negates_when_cheaper():
    rho = saddle_map()
    box = IntervalVector.from_bounds([-1.0, -1.0], [1.0, 1.0])
    dc = convexify(rho, box, strategy="best")
    assert bool(dc.negated[0])
    assert dc.lam[0] == pytest.approx(1.0)
    rng = np.random.default_rng(1)
    for _ in range(100):
        z = rng.uniform(-1.0, 1.0, 2)
        d = rng.normal(size=2)
        assert second_difference(lambda p: dc.b.eval(p)[0], z, d) >= -1e-6
        assert dc.a.eval(z) - dc.b.eval(z) == pytest.approx(rho.eval(z), abs=1e-12)


def test_convexify_rejects_unknown_strategy():
    with pytest.raises(ValueError):
        convexify(SQUARE, IntervalVector.from_bounds([-1.0], [1.0]), strategy="cheapest")


def test_convexified_bounds_contain_true_range():
    rho = saddle_map()
    P = PolytopeEnclosure(EnclosureKind.BOX, Zonotope(np.eye(2), np.zeros(2)))
    dc = convexify(rho, P.box())
    b = dc_bounds(dc, P, 0)
    grid = np.linspace(-1.0, 1.0, 41)
    values = [rho.eval([x, y])[0] for x in grid for y in grid]
    assert b.lo <= min(values) + 1e-12 and b.hi >= max(values) - 1e-12


def test_restrict_map_freezes_coordinates():
    prod = DifferentiableMap(2, 1, lambda z: [z[0] * z[1]], lambda z: [[z[1], z[0]]],
                             lambda i, box: IntervalMatrix.from_point([[0.0, 1.0], [1.0, 0.0]]), "prod")
    r = restrict_map(prod, [0], [0.0, 2.0])
    assert r.dim_in == 1
    assert r.eval([3.0])[0] == 6.0
    assert np.allclose(r.jacobian([3.0]), [[2.0]])
    assert np.allclose(r.interval_hessian(0, IntervalVector.from_bounds([-1.0], [1.0])).lower, [[0.0]])
    with pytest.raises(DimensionMismatchError):
        restrict_map(prod, [0], [0.0])


def test_jacobian_shape_checked():
    bad = DifferentiableMap(2, 1, lambda z: [0.0], lambda z: np.zeros(3))
    with pytest.raises(DimensionMismatchError):
        bad.jacobian([0.0, 0.0])


def test_vertices_cases():
    V = vertices(Zonotope(np.eye(2), np.zeros(2)))
    assert np.allclose(V, [[-1, -1], [-1, 1], [1, -1], [1, 1]])
    assert np.allclose(vertices(Zonotope([[2.0]], [5.0])), [[3.0], [7.0]])
    V = vertices(Zonotope([[1.0, 1.0], [0.0, 1.0]], np.zeros(2)))
    assert np.allclose(V, [[-2, -1], [0, 1], [0, -1], [2, 1]])
    with pytest.raises(VertexBudgetError):
        vertices(Zonotope(np.eye(3), np.zeros(3)), cap=2)


def test_box_enclosure_must_be_diagonal():
    with pytest.raises(ValueError):
        PolytopeEnclosure(EnclosureKind.BOX, Zonotope([[1.0, 1.0], [0.0, 1.0]], np.zeros(2)))
    with pytest.raises(ValueError):
        PolytopeEnclosure(EnclosureKind.PARALLELOTOPE, Zonotope([[1.0, 1.0, 0.0], [0.0, 1.0, 1.0]], np.zeros(2)))


def test_enclosure_kind_aliases():
    assert EnclosureKind.parse("partope") == EnclosureKind.PARALLELOTOPE
    assert EnclosureKind.parse("BOX") == EnclosureKind.BOX
    with pytest.raises(ValueError):
        EnclosureKind.parse("ellipsoid")


def test_tighten_shrinks_loose_candidate():
    T = tighten_parallelotope(Zonotope(2.0 * np.eye(2), np.zeros(2)), Zonotope(np.eye(2), np.zeros(2)))
    assert np.allclose(T.G, np.eye(2), atol=1e-7) and np.allclose(T.c, 0.0, atol=1e-7)


def test_tighten_is_fixed_point_on_tight_candidate():
    C = Zonotope([[1.0, 0.5], [0.0, 1.0]], [0.2, -0.1])
    T = tighten_parallelotope(C, C)
    assert np.allclose(T.G, C.G, atol=1e-7) and np.allclose(T.c, C.c, atol=1e-7)


def test_box_shaped_set_encloses_to_itself():
    Z = Zonotope(np.diag([1.0, 2.0]), [0.5, 0.5])
    for kind in (EnclosureKind.BOX, EnclosureKind.PARALLELOTOPE):
        P = enclose(Z, kind)
        h = interval_hull(P.as_zonotope)
        assert np.allclose(h.lower, [-0.5, -1.5], atol=1e-7) and np.allclose(h.upper, [1.5, 2.5], atol=1e-7)


def test_parallelotope_thinner_on_rotated_segment():
    Z = Zonotope([[1.0, 0.01, 0.02], [1.0, -0.01, 0.0]], np.zeros(2))
    box = enclose(Z, EnclosureKind.BOX)
    par = enclose(Z, EnclosureKind.PARALLELOTOPE)
    assert abs(np.linalg.det(par.as_zonotope.G)) < 0.2 * abs(np.linalg.det(box.as_zonotope.G))


@settings(max_examples=8, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_parallelotope_enclosure_contains_samples(seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(1, 4))
    X = ConstrainedZonotope(rng.normal(size=(2, 4)), rng.normal(size=2), A, A @ rng.uniform(-0.6, 0.6, 4))
    P = enclose(X, EnclosureKind.PARALLELOTOPE)
    solver = SimplexSolver()
    for _ in range(100):
        assert contains_point(P.as_zonotope, sample_point(X, rng, solver=solver), solver)


def one_constraint_cz(rng, n_g=4):
    A = rng.normal(size=(1, n_g))
    return ConstrainedZonotope(rng.normal(size=(2, n_g)), rng.normal(size=2), A, A @ rng.uniform(-0.6, 0.6, n_g))


def bounded_set_vertices(X):
    """Vertices of {xi in [-1,1]^n_g : a xi = b} mapped into X; one free coordinate each."""
    a, b = X.A[0], X.b[0]
    points = []
    for j in range(X.n_g):
        others = [k for k in range(X.n_g) if k != j]
        for signs in itertools.product((-1.0, 1.0), repeat=X.n_g - 1):
            xi = np.zeros(X.n_g)
            xi[others] = signs
            xi[j] = (b - a[others] @ xi[others]) / a[j]
            if abs(xi[j]) <= 1.0:
                points.append(X.G @ xi + X.c)
    return np.array(points)


def uniform_members(X, rng, count=100_000):
    """Members of X from xi uniform in the box, solved for the largest constraint coefficient."""
    a, b = X.A[0], X.b[0]
    j = int(np.argmax(np.abs(a)))
    others = [k for k in range(X.n_g) if k != j]
    xi = rng.uniform(-1.0, 1.0, size=(count, X.n_g))
    xi[:, j] = (b - xi[:, others] @ a[others]) / a[j]
    xi = xi[np.abs(xi[:, j]) <= 1.0]
    return xi @ X.G.T + X.c


@settings(max_examples=5, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_hull_is_tight_against_brute_force(seed):
    rng = np.random.default_rng(seed)
    X = one_constraint_cz(rng)
    h = interval_hull(X)
    pts = uniform_members(X, rng)
    assert len(pts) > 1000
    assert np.all(pts >= h.lower - 1e-9) and np.all(pts <= h.upper + 1e-9)
    verts = bounded_set_vertices(X)
    assert np.all(np.abs(verts.min(axis=0) - h.lower) <= 1e-6)
    assert np.all(np.abs(verts.max(axis=0) - h.upper) <= 1e-6)


@settings(max_examples=5, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_tightened_parallelotope_sits_between_set_and_candidate(seed):
    rng = np.random.default_rng(seed)
    P = one_constraint_cz(rng)
    C = zonotope_reduce_to_parallelotope(Zonotope(P.G, P.c))
    T = tighten_parallelotope(C, P)

    hc, ht = interval_hull(C), interval_hull(T)
    assert np.all(ht.lower >= hc.lower - 1e-9) and np.all(ht.upper <= hc.upper + 1e-9)

    pts = uniform_members(P, rng)
    coords = np.linalg.solve(T.G, (pts - T.c).T)
    assert np.all(np.abs(coords) <= 1.0 + 1e-7)

    # facets of T touch P: in C's frame the vertex extremes meet T's range
    to_c = np.linalg.inv(C.G)
    mid, rad = to_c @ (T.c - C.c), np.diag(to_c @ T.G)
    zeta = (bounded_set_vertices(P) - C.c) @ to_c.T
    assert np.all(np.abs(zeta.max(axis=0) - (mid + rad)) <= 1e-6)
    assert np.all(np.abs(zeta.min(axis=0) - (mid - rad)) <= 1e-6)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
