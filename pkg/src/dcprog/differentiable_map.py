"""Vector-valued maps with Jacobians and interval Hessians, and their DC splits."""
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from ..interval.interval import IntervalMatrix, IntervalVector
from ..utils.errors import DimensionMismatchError


@dataclass(frozen=True)
class DifferentiableMap:
    """
    rho: R^dim_in -> R^dim_out.

    Args:
        eval_fn: z -> rho(z), shape (dim_out,)
        jacobian_fn: z -> d rho / dz, shape (dim_out, dim_in)
        hessian_fn: (i, box) -> IntervalMatrix enclosing the Hessian of
            component i over the box; optional, only convexify needs it.
    """
    dim_in: int
    dim_out: int
    eval_fn: Callable
    jacobian_fn: Callable
    hessian_fn: Optional[Callable] = None
    name: str = "rho"

    def eval(self, z):
        z = np.asarray(z, dtype=float)
        return np.atleast_1d(np.asarray(self.eval_fn(z), dtype=float)).reshape(self.dim_out)

    def eval_many(self, Z):
        return np.array([self.eval(z) for z in np.atleast_2d(Z)]).reshape(-1, self.dim_out)

    def jacobian(self, z):
        J = np.asarray(self.jacobian_fn(np.asarray(z, dtype=float)), dtype=float)
        if J.size == self.dim_out * self.dim_in:
            J = J.reshape(self.dim_out, self.dim_in)
        else:
            raise DimensionMismatchError(
                f"{self.name}: Jacobian has shape {J.shape}, expected ({self.dim_out}, {self.dim_in})")
        return J

    def interval_hessian(self, i, box):
        if self.hessian_fn is None:
            raise ValueError(f"{self.name} has no interval Hessian evaluator")
        if not 0 <= i < self.dim_out:
            raise IndexError(f"Component {i} out of range for {self.name}")
        H = self.hessian_fn(i, box)
        if H.shape != (self.dim_in, self.dim_in):
            raise DimensionMismatchError(f"{self.name}: Hessian has shape {H.shape}")
        return H


def affine_map_fn(M, v, name="affine"):
    """DifferentiableMap for z -> M z + v (zero Hessian)."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    zero = np.zeros((M.shape[1], M.shape[1]))
    return DifferentiableMap(
        M.shape[1], M.shape[0],
        lambda z: M @ z + v,
        lambda z: M,
        lambda i, box: IntervalMatrix.from_point(zero),
        name,
    )


def restrict_map(rho, free_idx, fixed_point, name=None):
    """
    rho with the coordinates outside free_idx frozen at fixed_point.

    Used to drop deterministic inputs, and noise that enters affinely, from
    the vertex enumeration.
    """
    free_idx = np.asarray(free_idx, dtype=int)
    fixed_point = np.asarray(fixed_point, dtype=float).copy()
    if fixed_point.shape[0] != rho.dim_in:
        raise DimensionMismatchError(f"Fixed point has {fixed_point.shape[0]} entries, {rho.name} takes {rho.dim_in}")

    def embed(zf):
        z = fixed_point.copy()
        z[free_idx] = zf
        return z

    def hessian(i, box):
        lower, upper = fixed_point.copy(), fixed_point.copy()
        lower[free_idx] = box.lower
        upper[free_idx] = box.upper
        H = rho.interval_hessian(i, IntervalVector.from_bounds(lower, upper))
        return H.sub(free_idx, free_idx)

    return DifferentiableMap(
        len(free_idx), rho.dim_out,
        lambda zf: rho.eval(embed(zf)),
        lambda zf: rho.jacobian(embed(zf))[:, free_idx],
        hessian if rho.hessian_fn is not None else None,
        name or f"{rho.name}|restricted",
    )


class Provenance(str, Enum):
    EXPLICIT = "explicit"
    CONVEXIFIED = "convexified"


@dataclass(frozen=True)
class DcDecomposition:
    """rho = a - b with a and b componentwise convex on the working domain."""
    a: DifferentiableMap
    b: DifferentiableMap
    provenance: Provenance = Provenance.EXPLICIT
    lam: Optional[np.ndarray] = None
    # Components where -rho was convexified instead of rho
    negated: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        if (self.a.dim_in, self.a.dim_out) != (self.b.dim_in, self.b.dim_out):
            raise DimensionMismatchError("DC parts must share input and output dimensions")
        if self.provenance == Provenance.CONVEXIFIED:
            if self.lam is None or np.any(np.asarray(self.lam) < 0):
                raise ValueError("Convexified decomposition needs lam >= 0")

    @property
    def dim_in(self):
        return self.a.dim_in

    @property
    def dim_out(self):
        return self.a.dim_out

    def restrict(self, free_idx, fixed_point):
        return DcDecomposition(
            restrict_map(self.a, free_idx, fixed_point),
            restrict_map(self.b, free_idx, fixed_point),
            self.provenance, self.lam, self.negated,
        )
