"""
Global bounds and linearization enclosures from DC decompositions.

With rho = a - b, a and b convex, the linear minorant of a underestimates a
everywhere, so a_bar - b is concave and its minimum over a polytope sits at a
vertex; a - b_bar is convex and its maximum does too. Both facts reduce the
bounds below to vertex evaluations.
"""
import logging
from dataclasses import dataclass

import numpy as np

from ..czset.constrained_zonotope import Zonotope
from ..interval.interval import IntervalMatrix, IntervalScalar, get_inflation
from .differentiable_map import DcDecomposition, DifferentiableMap, Provenance
from .enclosure import DEFAULT_VERTEX_CAP, PolytopeEnclosure, vertices

logger = logging.getLogger("DcProg")


@dataclass(frozen=True)
class AffineMinorant:
    """z -> value + slope (z - zbar)."""
    value: np.ndarray
    slope: np.ndarray
    zbar: np.ndarray

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        return self.value + (z - self.zbar) @ self.slope.T


def linear_minorant(s, zbar):
    zbar = np.asarray(zbar, dtype=float)
    return AffineMinorant(s.eval(zbar), s.jacobian(zbar), zbar)


def _center(P):
    return P.center if isinstance(P, PolytopeEnclosure) else np.array(P.c, dtype=float)


def dc_bounds(dc, P, i, zbar=None, vertex_cap=DEFAULT_VERTEX_CAP):
    """Bracket [min, max] of rho_i over P from the vertex programs."""
    if not 0 <= i < dc.dim_out:
        raise IndexError(f"Component {i} out of range")
    zbar = _center(P) if zbar is None else np.asarray(zbar, dtype=float)
    V = vertices(P, vertex_cap)
    a_v = dc.a.eval_many(V)[:, i]
    b_v = dc.b.eval_many(V)[:, i]
    a_bar = linear_minorant(dc.a, zbar)(V)[:, i]
    b_bar = linear_minorant(dc.b, zbar)(V)[:, i]
    lower = float(np.min(a_bar - b_v))
    upper = float(np.max(a_v - b_bar))
    margin = get_inflation() * (1.0 + np.max(np.abs(np.concatenate([a_v, b_v]))))
    return IntervalScalar(lower - margin, upper + margin)


def linearization_enclosure(dc, rho, P, zbar=None, vertex_cap=DEFAULT_VERTEX_CAP):
    """
    Box {diag(rad), mid} containing rho(z) - rho_bar(z) for all z in P.

    rho_bar is the first-order expansion of rho at zbar; e_lo comes from the
    concave part a_bar - b - rho_bar and e_hi from the convex part
    a - b_bar - rho_bar, both minimized/maximized over the vertices of P.
    """
    zbar = _center(P) if zbar is None else np.asarray(zbar, dtype=float)
    V = vertices(P, vertex_cap)
    a_v = dc.a.eval_many(V)
    b_v = dc.b.eval_many(V)
    a_bar = linear_minorant(dc.a, zbar)(V)
    b_bar = linear_minorant(dc.b, zbar)(V)
    rho_bar = linear_minorant(rho, zbar)(V)

    e_lo = np.min(a_bar - b_v - rho_bar, axis=0)
    e_hi = np.max(a_v - b_bar - rho_bar, axis=0)
    scale = 1.0 + np.max(np.abs(np.vstack([a_v, b_v])), axis=0)
    margin = get_inflation() * scale
    e_lo = e_lo - margin
    e_hi = np.maximum(e_hi, e_lo) + margin
    return Zonotope(np.diag(0.5 * (e_hi - e_lo)), 0.5 * (e_hi + e_lo))


def eig_lower_bound(H):
    """
    Interval Gershgorin bound: min_i ( lower(H)_ii - sum_{j != i} max(|lower_ij|, |upper_ij|) ).
    """
    if H.shape[0] != H.shape[1]:
        raise ValueError(f"Hessian enclosure must be square, got {H.shape}")
    mag = np.maximum(np.abs(H.lower), np.abs(H.upper))
    off = mag.sum(axis=1) - np.diag(mag)
    return float(np.min(np.diag(H.lower) - off))


def convexify(rho, boxP, strategy="positive"):
    """
    Quadratic DC split rho = (rho + q) - q with q_i = (lam_i / 2) z'z.

    lam_i = max(0, -eig_lower_bound(H_i)) makes rho_i + q_i convex on boxP.
    With strategy "best" each component may instead convexify -rho_i,
    giving a_i = q_i and b_i = q_i - rho_i, whichever needs the smaller lam_i.
    """
    if strategy not in ("positive", "best"):
        raise ValueError(f"Unknown convexify strategy '{strategy}'")
    m, n = rho.dim_out, rho.dim_in
    lam = np.zeros(m)
    negated = np.zeros(m, dtype=bool)
    for i in range(m):
        H = rho.interval_hessian(i, boxP)
        lam_pos = max(0.0, -eig_lower_bound(H))
        lam[i] = lam_pos
        if strategy == "best":
            lam_neg = max(0.0, -eig_lower_bound(-H))
            if lam_neg < lam_pos:
                lam[i] = lam_neg
                negated[i] = True
    logger.debug(f"Convexified {rho.name}: lam={np.round(lam, 6).tolist()}, negated={negated.tolist()}")

    keep = np.where(negated, 0.0, 1.0)
    flip = np.where(negated, -1.0, 0.0)

    def quad(z):
        return 0.5 * lam * float(z @ z)

    def a_eval(z):
        return keep * rho.eval(z) + quad(z)

    def b_eval(z):
        return flip * rho.eval(z) + quad(z)

    def a_jac(z):
        return keep[:, None] * rho.jacobian(z) + np.outer(lam, z)

    def b_jac(z):
        return flip[:, None] * rho.jacobian(z) + np.outer(lam, z)

    def shifted_hessian(weight):
        def hessian(i, box):
            shift = lam[i] * np.eye(n)
            if weight[i] == 0.0:
                return IntervalMatrix.from_point(shift)
            H = rho.interval_hessian(i, box)
            H = H if weight[i] > 0 else -H
            return H + shift
        return hessian

    a = DifferentiableMap(n, m, a_eval, a_jac, shifted_hessian(keep) if rho.hessian_fn else None, f"{rho.name}^a")
    b = DifferentiableMap(n, m, b_eval, b_jac, shifted_hessian(flip) if rho.hessian_fn else None, f"{rho.name}^b")
    return DcDecomposition(a, b, Provenance.CONVEXIFIED, lam, negated)
