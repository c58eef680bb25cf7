import itertools
import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..czset.constrained_zonotope import ReductionTargets, Zonotope
from ..czset.operations import box_to_zonotope, interval_hull, is_empty
from ..czset.reduction import reduce, zonotope_reduce_to_parallelotope
from ..interval.interval import IntervalVector
from ..lp.simplex import LinearProgram, LpStatus, SimplexSolver
from ..utils.errors import EmptySetError, SolverError, VertexBudgetError

logger = logging.getLogger("DcProg.enclose")

DEFAULT_VERTEX_CAP = 16


class EnclosureKind(str, Enum):
    BOX = "box"
    PARALLELOTOPE = "parallelotope"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        aliases = {"partope": cls.PARALLELOTOPE, "parallelotope": cls.PARALLELOTOPE, "box": cls.BOX}
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise ValueError(f"Unknown enclosure kind '{value}'")


@dataclass(frozen=True)
class PolytopeEnclosure:
    """A box or parallelotope P containing some set, kept as an n-generator zonotope."""
    kind: EnclosureKind
    as_zonotope: Zonotope

    def __post_init__(self):
        G = self.as_zonotope.G
        if G.shape[0] != G.shape[1]:
            raise ValueError(f"Enclosure needs exactly n generators, got {G.shape[1]} for n={G.shape[0]}")
        if self.kind == EnclosureKind.BOX and np.any(G - np.diag(np.diag(G))):
            raise ValueError("Box enclosure must have a diagonal generator matrix")

    @property
    def n(self):
        return self.as_zonotope.n

    @property
    def center(self):
        return self.as_zonotope.c.copy()

    @property
    def vertex_count(self):
        return 2 ** self.n

    def box(self):
        rad = np.sum(np.abs(self.as_zonotope.G), axis=1)
        return IntervalVector.from_bounds(self.as_zonotope.c - rad, self.as_zonotope.c + rad)

    def area(self):
        """Product of the hull diameters."""
        return float(np.prod(self.box().diameters()))


def vertices(P, cap=DEFAULT_VERTEX_CAP):
    """
    All G sigma + c over sigma in {-1, +1}^n, in lexicographic sigma order.
    """
    Z = P.as_zonotope if isinstance(P, PolytopeEnclosure) else P
    n = Z.G.shape[1]
    if n > cap:
        raise VertexBudgetError(f"{2 ** n} vertices requested; dimension {n} exceeds cap {cap}")
    signs = np.array(list(itertools.product((-1.0, 1.0), repeat=n))).reshape(-1, n)
    return signs @ Z.G.T + Z.c


def tighten_parallelotope(C, P, solver=None):
    """
    Smallest parallelotope with the generator directions of C that contains P.

    For each i, min and max of xi_c[i] subject to G_c xi_c + c_c = G_p xi_p + c_p,
    xi_c in the unit box and xi_p in B(A_p, b_p).
    """
    solver = solver or SimplexSolver()
    n = C.n
    n_vars = n + P.n_g
    A_eq = np.vstack([
        np.hstack([np.zeros((P.n_h, n)), P.A]),
        np.hstack([C.G, -P.G]),
    ])
    b_eq = np.concatenate([P.b, P.c - C.c])
    lo_b, hi_b = -np.ones(n_vars), np.ones(n_vars)

    zeta_lo = np.empty(n)
    zeta_hi = np.empty(n)
    for i in range(n):
        objective = np.zeros(n_vars)
        objective[i] = 1.0
        for sense, out in (("minimize", zeta_lo), ("maximize", zeta_hi)):
            sol = solver.solve(LinearProgram(objective, A_eq, b_eq, lo_b, hi_b, sense))
            if sol.status == LpStatus.INFEASIBLE:
                if is_empty(P, solver):
                    raise EmptySetError("Cannot tighten a parallelotope around an empty set")
                raise ValueError("Candidate parallelotope does not contain the set")
            if sol.status != LpStatus.OPTIMAL:
                raise SolverError(f"Tightening LP ended with status {sol.status.value}", sol.status)
            out[i] = sol.objective_value

    pad = solver.tol_opt
    zeta_lo = np.clip(zeta_lo - pad, -1.0, 1.0)
    zeta_hi = np.clip(np.maximum(zeta_hi, zeta_lo) + pad, -1.0, 1.0)
    mid = 0.5 * (zeta_lo + zeta_hi)
    rad = 0.5 * (zeta_hi - zeta_lo)
    return Zonotope(C.G * rad, C.c + C.G @ mid)


def enclose(Z, kind, solver=None, contraction_passes=1):
    """Box or tightened parallelotope containing the nonempty set Z."""
    kind = EnclosureKind.parse(kind)
    solver = solver or SimplexSolver()
    if kind == EnclosureKind.BOX:
        return PolytopeEnclosure(kind, box_to_zonotope(interval_hull(Z, solver)))

    if Z.n_h and is_empty(Z, solver):
        raise EmptySetError("Cannot enclose an empty set")
    lifted = reduce(Z, ReductionTargets(0, max(Z.n, Z.n_g)), contraction_passes, solver)
    candidate = zonotope_reduce_to_parallelotope(Zonotope.from_cz(lifted))
    tight = tighten_parallelotope(candidate, Z, solver)
    logger.debug(f"Parallelotope enclosure: candidate area {PolytopeEnclosure(kind, candidate).area():.4g}, "
                 f"tightened {PolytopeEnclosure(kind, tight).area():.4g}")
    return PolytopeEnclosure(kind, tight)
