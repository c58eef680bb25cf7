"""
Two-state benchmark with quadratic and exponential process terms.

    x1+ = -0.7 x2 + 0.1 x2^2 + 0.1 x1 x2 + 0.1 exp(x1) + w1
    x2+ =  x1 + x2 - 0.1 x1^2 + 0.2 x1 x2 + w2
    y   =  x1 + x2 + v
"""
import numpy as np

from ..czset.constrained_zonotope import Zonotope
from ..dcprog.differentiable_map import DcDecomposition, DifferentiableMap, affine_map_fn
from ..filter.system_model import SystemModel
from ..interval.interval import IntervalMatrix, IntervalVector, iv_exp

OPERATING_BOX = IntervalVector.from_bounds([-3.0, -3.0], [3.0, 3.0])
X0_NOMINAL = np.array([1.0, 1.0])


def _f(z):
    x1, x2, w1, w2 = z
    return np.array([
        -0.7 * x2 + 0.1 * x2 ** 2 + 0.1 * x1 * x2 + 0.1 * np.exp(x1) + w1,
        x1 + x2 - 0.1 * x1 ** 2 + 0.2 * x1 * x2 + w2,
    ])


def _f_jacobian(z):
    x1, x2 = z[0], z[1]
    return np.array([
        [0.1 * x2 + 0.1 * np.exp(x1), -0.7 + 0.2 * x2 + 0.1 * x1, 1.0, 0.0],
        [1.0 - 0.2 * x1 + 0.2 * x2, 1.0 + 0.2 * x1, 0.0, 1.0],
    ])


def _f_hessian(i, box):
    lower = np.zeros((4, 4))
    upper = np.zeros((4, 4))
    if i == 0:
        e = iv_exp(box[0])
        lower[:2, :2] = [[0.1 * e.lo, 0.1], [0.1, 0.2]]
        upper[:2, :2] = [[0.1 * e.hi, 0.1], [0.1, 0.2]]
    else:
        lower[:2, :2] = upper[:2, :2] = [[-0.2, 0.2], [0.2, 0.0]]
    return IntervalMatrix(lower, upper)


def _fa(z):
    x1, x2, w1, w2 = z
    return np.array([
        0.1 * x1 ** 2 + 0.1 * x1 * x2 + 0.1 * x2 ** 2 + 0.1 * np.exp(x1) + w1,
        0.1 * x2 ** 2 + x1 + x2 + w2,
    ])


def _fa_jacobian(z):
    x1, x2 = z[0], z[1]
    return np.array([
        [0.2 * x1 + 0.1 * x2 + 0.1 * np.exp(x1), 0.1 * x1 + 0.2 * x2, 1.0, 0.0],
        [1.0, 0.2 * x2 + 1.0, 0.0, 1.0],
    ])


def _fb(z):
    x1, x2 = z[0], z[1]
    return np.array([
        0.1 * x1 ** 2 + 0.7 * x2,
        0.1 * x1 ** 2 + 0.1 * x2 ** 2 - 0.2 * x1 * x2,
    ])


def _fb_jacobian(z):
    x1, x2 = z[0], z[1]
    return np.array([
        [0.2 * x1, 0.7, 0.0, 0.0],
        [0.2 * x1 - 0.2 * x2, 0.2 * x2 - 0.2 * x1, 0.0, 0.0],
    ])


def process_map():
    return DifferentiableMap(4, 2, _f, _f_jacobian, _f_hessian, "quad2d.f")


def process_dc():
    """Explicit split; the additive noise rides on the convex part."""
    return DcDecomposition(
        DifferentiableMap(4, 2, _fa, _fa_jacobian, name="quad2d.f^a"),
        DifferentiableMap(4, 2, _fb, _fb_jacobian, name="quad2d.f^b"),
    )


def build_quad2d():
    return SystemModel(
        name="quad2d",
        n=2, p=0, q=2, r=1, m=1,
        f=process_map(),
        h=affine_map_fn([[1.0, 1.0, 1.0]], [0.0], name="quad2d.h"),
        W=Zonotope(0.1 * np.eye(2), np.zeros(2)),
        V=Zonotope([[0.2]], [0.0]),
        X0=Zonotope(3.0 * np.eye(2), np.zeros(2)),
        f_noise_affine=True,
        h_noise_affine=True,
        f_dc=process_dc(),
        x0_nominal=X0_NOMINAL.copy(),
        operating_box=OPERATING_BOX,
    )
