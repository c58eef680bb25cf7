"""
Order reduction for constrained zonotopes.

Constraint elimination first: rescale the unit box to an interval enclosure
of B(A, b) found by constraint propagation, bring [A | b] to reduced row
echelon form, then solve one constraint for one xi-variable and substitute
it out, picking the pivot whose implied range overshoots [-1, 1] least
(weighted by the lifted column norm). Generators are then reduced on the
lifted zonotope [G; A] by boxing the lowest scoring ones.

When the result's interval hull grows past the input's, the reduction is
redone with room for n more constraints and generators and the result is
intersected with the input's hull box on the axes that grew.
"""
import logging

import numpy as np

from ..utils.errors import EmptySetError
from .constrained_zonotope import ConstrainedZonotope, ReductionTargets, Zonotope
from .operations import generalized_intersection, interval_hull

logger = logging.getLogger("CzSet.reduce")

ZERO_TOL = 1e-12
PIVOT_REL_TOL = 1e-10
# relative per-axis hull growth tolerated before the hull box is imposed
HULL_GROWTH_TOL = 1e-2


def contract_box(A, b, passes=1):
    """Interval enclosure [lo, hi] of {xi in [-1,1]^n_g : A xi = b}."""
    n_g = A.shape[1]
    lo = -np.ones(n_g)
    hi = np.ones(n_g)
    for _ in range(passes):
        for i in range(A.shape[0]):
            row = A[i]
            terms_lo = np.minimum(row * lo, row * hi)
            terms_hi = np.maximum(row * lo, row * hi)
            sum_lo, sum_hi = terms_lo.sum(), terms_hi.sum()
            for j in np.flatnonzero(np.abs(row) > ZERO_TOL):
                rest_lo = sum_lo - terms_lo[j]
                rest_hi = sum_hi - terms_hi[j]
                a = row[j]
                bounds = ((b[i] - rest_hi) / a, (b[i] - rest_lo) / a)
                slack = 1e-12 * (1.0 + abs(bounds[0]) + abs(bounds[1]))
                new_lo = max(lo[j], min(bounds) - slack)
                new_hi = min(hi[j], max(bounds) + slack)
                if new_lo > new_hi:
                    if new_lo - new_hi > 1e-9:
                        raise EmptySetError("Constraint propagation found B(A, b) empty")
                    new_lo = new_hi = 0.5 * (new_lo + new_hi)
                # Keep the running row sums in step with the tightened bound
                lo[j], hi[j] = new_lo, new_hi
                sum_lo -= terms_lo[j]
                sum_hi -= terms_hi[j]
                terms_lo[j] = min(a * new_lo, a * new_hi)
                terms_hi[j] = max(a * new_lo, a * new_hi)
                sum_lo += terms_lo[j]
                sum_hi += terms_hi[j]
    return lo, hi


def rescale(X, lo, hi):
    """Same set, re-parameterized so that xi_j in [lo_j, hi_j] maps onto [-1, 1]."""
    mid = 0.5 * (lo + hi)
    rad = 0.5 * (hi - lo)
    return ConstrainedZonotope(X.G * rad, X.c + X.G @ mid, X.A * rad, X.b - X.A @ mid)


def prune(X):
    """Drops all-zero lifted columns and trivially satisfied constraint rows."""
    lifted = X.lifted()
    keep_cols = np.flatnonzero(np.any(np.abs(lifted) > ZERO_TOL, axis=0))
    G, A = X.G[:, keep_cols], X.A[:, keep_cols]
    if A.shape[0]:
        zero_rows = np.all(np.abs(A) <= ZERO_TOL, axis=1)
        if np.any(zero_rows & (np.abs(X.b) > 1e-9)):
            raise EmptySetError("Constraint 0 = b with b nonzero")
        keep_rows = np.flatnonzero(~zero_rows)
        A, b = A[keep_rows], X.b[keep_rows]
    else:
        b = X.b
    if len(keep_cols) == X.n_g and A.shape[0] == X.n_h:
        return X
    return ConstrainedZonotope(G, X.c, A, b)


def precondition(X):
    """
    Same set with [A | b] in reduced row echelon form.

    Gauss-Jordan elimination with full pivoting; rows that become zero are
    dropped, or raise EmptySetError when their right-hand side is not.
    """
    if X.n_h == 0:
        return X
    A = np.array(X.A, dtype=float)
    b = np.array(X.b, dtype=float)
    m, n_g = A.shape
    scale = np.max(np.abs(A), initial=0.0)
    free = np.ones(n_g, dtype=bool)
    rank = 0
    for r in range(m if scale > 0.0 else 0):
        sub = np.abs(A[r:]) * free
        i, j = np.unravel_index(np.argmax(sub), sub.shape)
        if sub[i, j] <= PIVOT_REL_TOL * scale:
            break
        i += r
        A[[r, i]] = A[[i, r]]
        b[[r, i]] = b[[i, r]]
        piv = A[r, j]
        A[r] /= piv
        b[r] /= piv
        for k in range(m):
            if k != r and A[k, j] != 0.0:
                f = A[k, j]
                A[k] -= f * A[r]
                b[k] -= f * b[r]
                A[k, j] = 0.0
        free[j] = False
        rank += 1

    if np.any(np.abs(b[rank:]) > 1e-9 * (1.0 + np.max(np.abs(b), initial=0.0))):
        raise EmptySetError("Dependent constraints with inconsistent right-hand sides")
    if rank < m:
        logger.debug(f"Dropped {m - rank} dependent constraints")
    return ConstrainedZonotope(X.G, X.c, A[:rank], b[:rank])


def select_pivot(X):
    """
    Returns (row, column) minimizing the inflation score, or None.

    For row i solved for xi_j, the other variables in [-1, 1] imply
    |xi_j| <= (|b_i| + sum_{k != j} |A_ik|) / |A_ij|; the overshoot past 1
    times the lifted column norm scores the relaxation.
    """
    A, b = X.A, X.b
    scale = np.max(np.abs(A), initial=0.0)
    if scale == 0.0:
        return None
    col_norms = np.linalg.norm(X.lifted(), axis=0)
    abs_A = np.abs(A)
    row_sums = abs_A.sum(axis=1)
    best, best_key = None, None
    for j in range(X.n_g):
        for i in range(X.n_h):
            a = abs_A[i, j]
            if a < PIVOT_REL_TOL * scale:
                continue
            reach = (abs(b[i]) + row_sums[i] - a) / a
            score = max(0.0, reach - 1.0) * col_norms[j]
            key = (score, j, i)
            if best_key is None or key < best_key:
                best, best_key = (i, j), key
    return best


def eliminate(X, i, j):
    """Substitutes xi_j from constraint row i; the bound |xi_j| <= 1 is dropped."""
    a_i = X.A[i] / X.A[i, j]
    beta = X.b[i] / X.A[i, j]
    G = X.G - np.outer(X.G[:, j], a_i)
    c = X.c + X.G[:, j] * beta
    A = X.A - np.outer(X.A[:, j], a_i)
    b = X.b - X.A[:, j] * beta
    rows = [r for r in range(X.n_h) if r != i]
    cols = [k for k in range(X.n_g) if k != j]
    return ConstrainedZonotope(G[:, cols], c, A[np.ix_(rows, cols)], b[rows])


def reduce_generators(X, phi_g):
    """Boxes low-score lifted generators until at most phi_g remain."""
    if X.n_g <= phi_g:
        return X
    lifted = X.lifted()
    dim = lifted.shape[0]
    n_box = X.n_g - phi_g + dim
    if n_box > X.n_g:
        raise ValueError(f"Cannot reach {phi_g} generators with {X.n_h} constraints in dimension {X.n}")

    score = np.linalg.norm(lifted, axis=0) - np.max(np.abs(lifted), axis=0)
    order = np.argsort(score, kind="stable")
    boxed, kept = order[:n_box], np.sort(order[n_box:])
    box = np.diag(np.sum(np.abs(lifted[:, boxed]), axis=1))
    box = box[:, np.any(box > 0.0, axis=0)]
    new_lifted = np.hstack([lifted[:, kept], box])
    logger.debug(f"Boxed {n_box} of {X.n_g} generators into {box.shape[1]} axis generators")
    return ConstrainedZonotope(new_lifted[:X.n], X.c, new_lifted[X.n:], X.b)


def _reduce_order(X, phi_c, phi_g, contraction_passes):
    # Generator boxing needs room for n + n_h axis generators
    phi_c = min(phi_c, phi_g - X.n)
    Y = prune(X)
    while Y.n_h > phi_c:
        lo, hi = contract_box(Y.A, Y.b, contraction_passes)
        Y = precondition(prune(rescale(Y, lo, hi)))
        if Y.n_h <= phi_c:
            break
        pivot = select_pivot(Y)
        if pivot is None:
            break
        Y = eliminate(Y, *pivot)
    return reduce_generators(precondition(Y), phi_g)


def _grown_axes(inner, outer):
    """Axes where hull `inner` pokes out of hull `outer` by more than HULL_GROWTH_TOL of its width."""
    slack = HULL_GROWTH_TOL * np.maximum(outer.upper - outer.lower, ZERO_TOL)
    return np.flatnonzero((inner.lower < outer.lower - slack) | (inner.upper > outer.upper + slack))


def reduce(X, targets, contraction_passes=1, solver=None, hull_guard=True):
    """
    Outer approximation of X with at most phi_c constraints and phi_g generators.

    X is returned unchanged when it already meets both targets. With
    hull_guard the interval hull of the result stays within that of X
    whenever phi_c >= n and phi_g >= 2n.
    """
    targets.check(X.n)
    if X.n_h <= targets.phi_c and X.n_g <= targets.phi_g:
        return X

    Y = _reduce_order(X, targets.phi_c, targets.phi_g, contraction_passes)
    logger.debug(f"Reduced (n_g={X.n_g}, n_h={X.n_h}) -> (n_g={Y.n_g}, n_h={Y.n_h})")
    n = X.n
    if not hull_guard or targets.phi_c < n or targets.phi_g < 2 * n:
        return Y

    hull = interval_hull(X, solver)
    if not len(_grown_axes(interval_hull(Y, solver), hull)):
        return Y

    inner = ReductionTargets(targets.phi_c - n, targets.phi_g - n)
    Y = _reduce_order(X, inner.phi_c, inner.phi_g, contraction_passes)
    axes = _grown_axes(interval_hull(Y, solver), hull)
    if len(axes):
        lower, upper = hull.lower[axes], hull.upper[axes]
        box = Zonotope(np.diag(0.5 * (upper - lower)), 0.5 * (upper + lower))
        Y = generalized_intersection(Y, box, np.eye(n)[axes])
        logger.debug(f"Hull grew on axes {axes.tolist()}; intersected with the input hull box")
    return Y


def _select_directions(G):
    n = G.shape[0]
    norms = np.linalg.norm(G, axis=0)
    order = np.argsort(-norms, kind="stable")
    chosen = []
    for k in order:
        if norms[k] <= ZERO_TOL:
            break
        trial = G[:, chosen + [k]]
        if np.linalg.matrix_rank(trial, tol=1e-10 * norms[order[0]]) == len(chosen) + 1:
            chosen.append(int(k))
        if len(chosen) == n:
            break
    T = np.zeros((n, n))
    if chosen:
        T[:, :len(chosen)] = G[:, chosen]
    return T, len(chosen)


def zonotope_reduce_to_parallelotope(Z):
    """
    Parallelotope {T diag(r), c} containing Z.

    T holds the n largest linearly independent generators; r_i is the l1 norm
    of row i of T^-1 G. A rank-deficient T gets eps*I added first.
    """
    if Z.n_h:
        raise ValueError("zonotope_reduce_to_parallelotope expects a plain zonotope")
    n, G = Z.n, Z.G
    T, rank = _select_directions(G)
    if rank < n:
        eps = 1e-10 * (float(np.max(np.abs(G), initial=0.0)) or 1.0)
        T = T + eps * np.eye(n)
        logger.debug(f"Generator matrix has rank {rank} < {n}; regularized with eps={eps:.3e}")
    try:
        coeffs = np.linalg.solve(T, G) if G.shape[1] else np.zeros((n, 0))
    except np.linalg.LinAlgError:
        raise ValueError("Parallelotope directions are singular even after regularization")
    r = np.sum(np.abs(coeffs), axis=1)
    return Zonotope(T * r, Z.c)
