"""
Set operations on constrained zonotopes.

Affine map, Minkowski sum, generalized intersection and Cartesian product are
exact block constructions. Hulls, membership, emptiness and sampling go
through the LP solver; pass a solver instance to reuse one per caller.
"""
import logging

import numpy as np

from ..interval.interval import IntervalVector, rad_mid
from ..lp.simplex import LinearProgram, LpStatus, SimplexSolver
from ..utils.errors import DimensionMismatchError, EmptySetError, SolverError
from .constrained_zonotope import ConstrainedZonotope, Zonotope

logger = logging.getLogger("CzSet")


def block_diag(*mats):
    rows = sum(M.shape[0] for M in mats)
    cols = sum(M.shape[1] for M in mats)
    out = np.zeros((rows, cols))
    r = c = 0
    for M in mats:
        out[r:r + M.shape[0], c:c + M.shape[1]] = M
        r += M.shape[0]
        c += M.shape[1]
    return out


def _solver(solver):
    return solver if solver is not None else SimplexSolver()


def affine_map(L, X, m=None):
    """Image {L x + m : x in X}; exact."""
    L = np.atleast_2d(np.asarray(L, dtype=float))
    if L.shape[1] != X.n:
        raise DimensionMismatchError(f"L has {L.shape[1]} columns, set dimension is {X.n}")
    m = np.zeros(L.shape[0]) if m is None else np.atleast_1d(np.asarray(m, dtype=float))
    if m.shape[0] != L.shape[0]:
        raise DimensionMismatchError(f"Offset has {m.shape[0]} entries, L has {L.shape[0]} rows")
    return ConstrainedZonotope(L @ X.G, L @ X.c + m, X.A, X.b)


def translate(X, p):
    p = np.atleast_1d(np.asarray(p, dtype=float))
    if p.shape[0] != X.n:
        raise DimensionMismatchError(f"Offset has {p.shape[0]} entries, set dimension is {X.n}")
    return ConstrainedZonotope(X.G, X.c + p, X.A, X.b)


def minkowski_sum(X, Y):
    if X.n != Y.n:
        raise DimensionMismatchError(f"Cannot add sets of dimension {X.n} and {Y.n}")
    G = np.hstack([X.G, Y.G])
    A = block_diag(X.A, Y.A)
    return ConstrainedZonotope(G, X.c + Y.c, A, np.concatenate([X.b, Y.b]))


def generalized_intersection(X, W, M):
    """The set {x in X : M x in W}; exact."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape != (W.n, X.n):
        raise DimensionMismatchError(f"M must be {W.n}x{X.n}, got {M.shape[0]}x{M.shape[1]}")
    G = np.hstack([X.G, np.zeros((X.n, W.n_g))])
    A = np.vstack([
        block_diag(X.A, W.A),
        np.hstack([M @ X.G, -W.G]),
    ])
    b = np.concatenate([X.b, W.b, W.c - M @ X.c])
    return ConstrainedZonotope(G, X.c, A, b)


def cartesian_product(X, W):
    G = block_diag(X.G, W.G)
    A = block_diag(X.A, W.A)
    return ConstrainedZonotope(G, np.concatenate([X.c, W.c]), A, np.concatenate([X.b, W.b]))


def _box_program(X, objective, sense):
    return LinearProgram(objective, X.A, X.b, -np.ones(X.n_g), np.ones(X.n_g), sense)


def interval_hull(X, solver=None):
    """
    Axis-aligned hull of X from 2n LPs over B(A, b).

    Plain zonotopes use the closed form c +- sum |G|. Raises EmptySetError
    when the constraints admit no xi.
    """
    if X.n_h == 0 or X.n_g == 0:
        if is_empty(X, solver):
            raise EmptySetError("Interval hull of an empty constrained zonotope")
        rad = np.sum(np.abs(X.G), axis=1)
        return IntervalVector.from_bounds(X.c - rad, X.c + rad)

    solver = _solver(solver)
    lower = np.empty(X.n)
    upper = np.empty(X.n)
    for i in range(X.n):
        for sense, out in (("minimize", lower), ("maximize", upper)):
            sol = solver.solve(_box_program(X, X.G[i], sense))
            if sol.status == LpStatus.INFEASIBLE:
                raise EmptySetError("Interval hull of an empty constrained zonotope")
            if sol.status != LpStatus.OPTIMAL:
                raise SolverError(f"Hull LP for axis {i} ended with status {sol.status.value}", sol.status)
            out[i] = sol.objective_value + X.c[i]

    # LP optimality is only tol_opt-accurate; pad so the hull stays an outer bound
    pad = solver.tol_opt * np.maximum(1.0, np.maximum(np.abs(lower), np.abs(upper)))
    return IntervalVector.from_bounds(lower - pad, np.maximum(upper, lower) + pad)


def box_to_zonotope(h):
    rad, mid = rad_mid(h)
    return Zonotope(np.diag(rad), mid)


def contains_point(X, x, solver=None):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape[0] != X.n:
        raise DimensionMismatchError(f"Point has {x.shape[0]} entries, set dimension is {X.n}")
    solver = _solver(solver)
    if X.n_g == 0:
        scale = max(1.0, float(np.max(np.abs(X.c), initial=0.0)))
        return _near_zero(x - X.c, scale, solver) and _near_zero(X.b, 1.0, solver)
    A = np.vstack([X.G, X.A])
    b = np.concatenate([x - X.c, X.b])
    lp = LinearProgram(np.zeros(X.n_g), A, b, -np.ones(X.n_g), np.ones(X.n_g))
    return solver.solve(lp).status == LpStatus.OPTIMAL


def _near_zero(r, scale, solver):
    return bool(np.all(np.abs(r) <= solver.tol_feas * scale))


def is_empty(X, solver=None):
    if X.n_h == 0:
        return False
    if X.n_g == 0:
        # constraints read 0 = b
        return not _near_zero(X.b, 1.0, _solver(solver))
    sol = _solver(solver).solve(_box_program(X, np.zeros(X.n_g), "minimize"))
    if sol.status == LpStatus.SOLVER_ERROR:
        raise SolverError("Emptiness LP broke down", sol.status)
    return sol.status == LpStatus.INFEASIBLE


def sample_point(X, rng, k=3, solver=None):
    """
    Returns a member of X.

    Zonotopes draw xi uniformly from the unit box. With constraints, k
    vertices of B(A, b) are found from random objectives and mixed with
    Dirichlet weights, which stays inside B(A, b) by convexity.
    """
    if X.n_g == 0:
        if is_empty(X, solver):
            raise EmptySetError("Cannot sample from an empty constrained zonotope")
        return X.c.copy()
    if X.n_h == 0:
        return X.G @ rng.uniform(-1.0, 1.0, X.n_g) + X.c

    solver = _solver(solver)
    vertices = []
    for _ in range(max(2, k)):
        direction = rng.standard_normal(X.n_g)
        sol = solver.solve(_box_program(X, direction, "minimize"))
        if sol.status == LpStatus.INFEASIBLE:
            raise EmptySetError("Cannot sample from an empty constrained zonotope")
        if sol.status != LpStatus.OPTIMAL:
            raise SolverError(f"Sampling LP ended with status {sol.status.value}", sol.status)
        vertices.append(sol.point)
    weights = rng.dirichlet(np.ones(len(vertices)))
    xi = np.clip(weights @ np.array(vertices), -1.0, 1.0)
    return X.G @ xi + X.c
