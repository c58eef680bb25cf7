"""
The set-valued stages of one filter iteration.

Each nonlinear map is linearized at the center of a box or parallelotope
enclosing its argument set, and the linearization error is enclosed with
the DC vertex bounds, so every stage returns an outer approximation.
"""
import logging

import numpy as np

from ..czset.operations import (affine_map, cartesian_product, generalized_intersection,
                                minkowski_sum, translate)
from ..dcprog.dc_bounds import convexify, linearization_enclosure
from ..dcprog.differentiable_map import restrict_map
from ..dcprog.enclosure import enclose

forecast_logger = logging.getLogger("Stage.forecast")
assimilation_logger = logging.getLogger("Stage.assimilation")
admissibility_logger = logging.getLogger("Stage.admissibility")
consistency_logger = logging.getLogger("Stage.consistency")


def _solver(cfg, solver):
    return solver if solver is not None else cfg.make_solver()


def linearize(Z, rho, dc, kind, cfg, solver):
    """
    Encloses Z, picks zbar at the enclosure center and bounds rho - rho_bar.

    Returns (P, zbar, R). Without an explicit DC pair rho is convexified over
    the hull of P.
    """
    P = enclose(Z, kind, solver, cfg.contraction_passes)
    zbar = P.center
    if dc is None:
        dc = convexify(rho, P.box(), cfg.convexify_strategy)
    R = linearization_enclosure(dc, rho, P, zbar, cfg.vertex_cap)
    return P, zbar, R


def _augmented_block(model_map, dc, fixed_point, free_idx):
    rho = restrict_map(model_map, free_idx, fixed_point)
    return rho, (dc.restrict(free_idx, fixed_point) if dc is not None else None)


def forecast(Xprev, u, W, model, cfg, solver=None):
    """
    Outer approximation of {f(x, u, w) : x in Xprev, w in W}:

        (f(zbar) - Fx xbar - Fw wbar) + Fx Xprev + Fw W + R
    """
    solver = _solver(cfg, solver)
    n, p, q = model.n, model.p, model.q
    u = np.asarray(u, dtype=float).reshape(p)

    if model.f_noise_affine:
        Z = Xprev
        free_idx = np.arange(n)
        base = np.concatenate([np.zeros(n), u, W.c])
    else:
        Z = cartesian_product(Xprev, W)
        free_idx = np.concatenate([np.arange(n), np.arange(n + p, n + p + q)])
        base = np.concatenate([np.zeros(n), u, np.zeros(q)])

    rho, dc = _augmented_block(model.f, model.f_dc, base, free_idx)
    P, zbar_free, R = linearize(Z, rho, dc, cfg.enclosure_for("forecast"), cfg, solver)

    zbar = base.copy()
    zbar[free_idx] = zbar_free
    xbar, wbar = zbar[:n], zbar[n + p:]
    J = model.f.jacobian(zbar)
    Fx, Fw = J[:, :n], J[:, n + p:]
    offset = model.f.eval(zbar) - Fx @ xbar - Fw @ wbar

    X = minkowski_sum(affine_map(Fx, Xprev, offset), affine_map(Fw, W))
    X = minkowski_sum(X, R)
    forecast_logger.debug(f"Forecast with {P.kind.value} enclosure: remainder radii {np.diag(R.G).round(8).tolist()}")
    return X


def data_assimilate(Xpred, y, V, model, cfg, solver=None):
    """
    Xpred intersected (through Hx) with the measurement set

        Y = (y - h(zbar) + H zbar) + (-Hv V) + (-R)
    """
    solver = _solver(cfg, solver)
    n, r = model.n, model.r
    y = np.asarray(y, dtype=float).reshape(model.m)

    if model.h_noise_affine:
        Z = Xpred
        free_idx = np.arange(n)
        base = np.concatenate([np.zeros(n), V.c])
    else:
        Z = cartesian_product(Xpred, V)
        free_idx = np.arange(n + r)
        base = np.zeros(n + r)

    rho, dc = _augmented_block(model.h, model.h_dc, base, free_idx)
    P, zbar_free, R = linearize(Z, rho, dc, cfg.enclosure_for("assimilation"), cfg, solver)

    zbar = base.copy()
    zbar[free_idx] = zbar_free
    J = model.h.jacobian(zbar)
    Hx, Hv = J[:, :n], J[:, n:]
    offset = y - model.h.eval(zbar) + J @ zbar
    Y = minkowski_sum(affine_map(-Hv, V, offset), -R)
    assimilation_logger.debug(f"Measurement set: n_g={Y.n_g}, n_h={Y.n_h}")
    return generalized_intersection(Xpred, Y, Hx)


def admissibility(Xbreve, XF):
    """Exact intersection with the feasible set."""
    admissibility_logger.debug(f"Intersecting with feasible set (n_g={XF.n_g}, n_h={XF.n_h})")
    return generalized_intersection(Xbreve, XF, np.eye(Xbreve.n))


def consistency(Xcheck, model, cfg, solver=None):
    """
    Xcheck intersected (through H = dg/dx at xbar) with the linearized
    level set  C = (-g(xbar) + H xbar) + (-R).
    """
    if model.g is None:
        raise ValueError(f"Model {model.name} has no invariant")
    solver = _solver(cfg, solver)
    P, xbar, R = linearize(Xcheck, model.g, model.g_dc, cfg.enclosure_for("consistency"), cfg, solver)
    H = model.g.jacobian(xbar)
    C = translate(-R, -model.g.eval(xbar) + H @ xbar)
    consistency_logger.debug(f"Invariant remainder radii {np.diag(R.G).round(8).tolist()}")
    return generalized_intersection(Xcheck, C, H)
