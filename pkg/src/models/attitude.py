"""
Quaternion attitude benchmark.

The process rotates x by the measured angular rate u with the unknown input
noise removed, u_true = u - w:

    x+ = (cos(p) I - (Ts/2) sin(p)/p Omega(u - w)) x,   p = (Ts/2) ||u - w||

Measurements are the first two columns of the rotation matrix C(x) plus
noise, and unit norm x'x - 1 = 0 is the invariant.

alpha(s) = cos(a sqrt(s)) and beta(s) = a sin(a sqrt(s)) / (a sqrt(s)) with
a = Ts/2 and s = ||u - w||^2 are entire in s. Point values and interval
enclosures both use their power series in s, which removes the p = 0
singularity.
"""
import math

import numpy as np

from ..czset.constrained_zonotope import Zonotope
from ..dcprog.differentiable_map import DcDecomposition, DifferentiableMap
from ..filter.system_model import SystemModel
from ..interval.interval import IntervalMatrix, IntervalScalar, IntervalVector, iv_sqr, iv_sum
from .common import quadratic_map, split_quadratic_form

TS = 0.2
HALF_TS = 0.5 * TS
INPUT_AMPLITUDE = 0.3
INPUT_PHASES = np.array([0.0, 6.0, 12.0])
X0_NOMINAL = np.array([0.0, 1.0, 0.0, 0.0])

N_TERMS = 14
_A2 = HALF_TS ** 2
_ALPHA = np.array([(-_A2) ** k / math.factorial(2 * k) for k in range(N_TERMS + 4)])
_BETA = np.array([HALF_TS * (-_A2) ** k / math.factorial(2 * k + 1) for k in range(N_TERMS + 4)])


def _deriv(coeffs):
    return coeffs[1:] * np.arange(1, len(coeffs))


_ALPHA1, _BETA1 = _deriv(_ALPHA), _deriv(_BETA)
_ALPHA2, _BETA2 = _deriv(_ALPHA1), _deriv(_BETA1)

# Omega(u) = sum_l u_l OMEGA_BASIS[l]
OMEGA_BASIS = np.array([
    [[0, 0, 0, 1], [0, 0, 1, 0], [0, -1, 0, 0], [-1, 0, 0, 0]],
    [[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]],
    [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]],
], dtype=float)

# Rotation-matrix entries as quadratic forms x'Qx, rows C11 C21 C31 C12 C22 C32
MEASUREMENT_FORMS = [
    np.diag([1.0, -1.0, -1.0, 1.0]),
    np.array([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, -1, 0]], dtype=float),
    np.array([[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]], dtype=float),
    np.array([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=float),
    np.diag([-1.0, 1.0, -1.0, 1.0]),
    np.array([[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=float),
]

SERIES_LIMIT = 4.0  # a^2 s beyond this switches point evaluation to closed forms


def omega(u):
    return np.tensordot(np.asarray(u, dtype=float), OMEGA_BASIS, axes=1)


def _horner(coeffs, s):
    acc = 0.0
    for c in coeffs[N_TERMS - 1::-1]:
        acc = acc * s + c
    return acc


def _sinc(p):
    return 1.0 - p * p / 6.0 if p < 1e-6 else math.sin(p) / p


def rate_terms(s):
    """(alpha, alpha', beta, beta') at s = ||u||^2, derivatives taken in s."""
    if _A2 * s <= SERIES_LIMIT:
        return (_horner(_ALPHA, s), _horner(_ALPHA1, s), _horner(_BETA, s), _horner(_BETA1, s))
    p = HALF_TS * math.sqrt(s)
    alpha = math.cos(p)
    alpha1 = -0.5 * _A2 * _sinc(p)
    beta = HALF_TS * _sinc(p)
    beta1 = 0.5 * HALF_TS ** 3 * (p * math.cos(p) - math.sin(p)) / p ** 3
    return alpha, alpha1, beta, beta1


def transition_matrix(u_true):
    alpha, _, beta, _ = rate_terms(float(np.dot(u_true, u_true)))
    return alpha * np.eye(4) - beta * omega(u_true)


def _series_interval(coeffs, s_iv):
    acc = IntervalScalar.point(coeffs[N_TERMS - 1])
    for c in coeffs[N_TERMS - 2::-1]:
        acc = acc * s_iv + float(c)
    s_hi = max(s_iv.hi, 0.0)
    ratio = abs(coeffs[N_TERMS + 1] / coeffs[N_TERMS]) if coeffs[N_TERMS] else 0.0
    q = 2.0 * ratio * s_hi
    if q >= 1.0:
        raise ValueError(f"Angular-rate box too wide for the series enclosure (s <= {s_hi:.3g})")
    tail = abs(coeffs[N_TERMS]) * s_hi ** N_TERMS / (1.0 - q)
    return acc + IntervalScalar(-tail, tail)


def _f(z):
    x, u, w = z[:4], z[4:7], z[7:10]
    return transition_matrix(u - w) @ x


def _f_jacobian(z):
    x, u, w = z[:4], z[4:7], z[7:10]
    ut = u - w
    alpha, alpha1, beta, beta1 = rate_terms(float(ut @ ut))
    Om = omega(ut)
    J = np.zeros((4, 10))
    J[:, :4] = alpha * np.eye(4) - beta * Om
    Om_x = Om @ x
    basis_x = OMEGA_BASIS @ x  # row l is Omega^(l) x
    d_ut = (2.0 * alpha1 * np.outer(x, ut)
            - 2.0 * beta1 * np.outer(Om_x, ut)
            - beta * basis_x.T)
    J[:, 4:7] = d_ut
    J[:, 7:10] = -d_ut
    return J


def _f_hessian(i, box):
    """
    Hessian of component i over box, z = (x, u, w).

    With t = u - w and f_i = alpha x_i - beta (Omega(t) x)_i:
      d2/dx_j dt_l  = alpha_l delta_ij - beta_l Omega_ij - beta Omega^(l)_ij
      d2/dt_l dt_m  = alpha_lm x_i - beta_lm (Omega x)_i
                      - beta_l (Omega^(m) x)_i - beta_m (Omega^(l) x)_i
    where alpha_l = 2 alpha' t_l and alpha_lm = 4 alpha'' t_l t_m + 2 alpha' delta_lm.
    """
    x = [box[j] for j in range(4)]
    t = [box[4 + l] - box[7 + l] for l in range(3)]
    s = iv_sum(iv_sqr(tl) for tl in t)
    alpha1, alpha2 = _series_interval(_ALPHA1, s), _series_interval(_ALPHA2, s)
    beta0, beta1, beta2 = _series_interval(_BETA, s), _series_interval(_BETA1, s), _series_interval(_BETA2, s)

    alpha_l = [2.0 * alpha1 * tl for tl in t]
    beta_l = [2.0 * beta1 * tl for tl in t]
    omega_row = [iv_sum(float(OMEGA_BASIS[l][i, j]) * t[l] for l in range(3)) for j in range(4)]
    omega_x = iv_sum(omega_row[j] * x[j] for j in range(4))
    basis_x = [iv_sum(float(OMEGA_BASIS[l][i, j]) * x[j] for j in range(4)) for l in range(3)]

    zero = IntervalScalar(0.0, 0.0)
    H = [[zero] * 10 for _ in range(10)]
    for j in range(4):
        for l in range(3):
            entry = -(beta_l[l] * omega_row[j]) - beta0 * float(OMEGA_BASIS[l][i, j])
            if i == j:
                entry = entry + alpha_l[l]
            H[j][4 + l] = H[4 + l][j] = entry
            H[j][7 + l] = H[7 + l][j] = -entry
    for l in range(3):
        for mm in range(l, 3):
            alpha_lm = 4.0 * alpha2 * (t[l] * t[mm])
            beta_lm = 4.0 * beta2 * (t[l] * t[mm])
            if l == mm:
                alpha_lm = 4.0 * alpha2 * iv_sqr(t[l]) + 2.0 * alpha1
                beta_lm = 4.0 * beta2 * iv_sqr(t[l]) + 2.0 * beta1
            entry = (alpha_lm * x[i] - beta_lm * omega_x
                     - beta_l[l] * basis_x[mm] - beta_l[mm] * basis_x[l])
            for a, b, sign in ((4, 4, 1.0), (4, 7, -1.0), (7, 4, -1.0), (7, 7, 1.0)):
                value = entry if sign > 0 else -entry
                H[a + l][b + mm] = H[b + mm][a + l] = value
    return IntervalMatrix.from_entries(H).symmetrized()


def process_map():
    return DifferentiableMap(10, 4, _f, _f_jacobian, _f_hessian, "attitude.f")


def measurement_map():
    return quadratic_map(MEASUREMENT_FORMS, noise_dim=6, name="attitude.h")


def measurement_dc():
    """Eigen-split of each rotation-matrix quadratic form into PSD parts."""
    parts = [split_quadratic_form(Q) for Q in MEASUREMENT_FORMS]
    return DcDecomposition(
        quadratic_map([plus for plus, _ in parts], noise_dim=6, name="attitude.h^a"),
        _pad_noise(quadratic_map([minus for _, minus in parts], name="attitude.h^b"), 6),
    )


def _pad_noise(rho, noise_dim):
    """Same map, extended with ignored trailing noise coordinates."""
    n = rho.dim_in

    def jacobian(z):
        J = np.zeros((rho.dim_out, n + noise_dim))
        J[:, :n] = rho.jacobian(z[:n])
        return J

    def hessian(i, box):
        H = rho.interval_hessian(i, IntervalVector(box.entries[:n]))
        lower = np.zeros((n + noise_dim, n + noise_dim))
        upper = np.zeros_like(lower)
        lower[:n, :n], upper[:n, :n] = H.lower, H.upper
        return IntervalMatrix(lower, upper)

    return DifferentiableMap(n + noise_dim, rho.dim_out, lambda z: rho.eval(z[:n]), jacobian, hessian, rho.name)


def invariant_map():
    return quadratic_map([np.eye(4)], const=[-1.0], name="attitude.g")


def invariant_dc():
    return DcDecomposition(invariant_map(), quadratic_map([np.zeros((4, 4))], name="attitude.g^b"))


def true_input(k):
    """Physical angular rate at step k."""
    phase = 2.0 * math.pi / 12.0 * k * TS
    return INPUT_AMPLITUDE * np.sin(phase - INPUT_PHASES)


def build_attitude():
    w_rad = 3e-3
    return SystemModel(
        name="attitude",
        n=4, p=3, q=3, r=6, m=6, m_c=1,
        f=process_map(),
        h=measurement_map(),
        g=invariant_map(),
        W=Zonotope(w_rad * np.eye(3), np.zeros(3)),
        V=Zonotope(0.15 * np.eye(6), np.zeros(6)),
        X0=Zonotope(0.18 * np.eye(4), np.array([0.1, 0.9, 0.1, 0.1])),
        XF=Zonotope(np.eye(4), np.zeros(4)),
        f_noise_affine=False,
        h_noise_affine=True,
        h_dc=measurement_dc(),
        g_dc=invariant_dc(),
        x0_nominal=X0_NOMINAL.copy(),
        true_input=true_input,
        input_noise=True,
        operating_box=IntervalVector.from_bounds(
            np.concatenate([-np.ones(4), -(INPUT_AMPLITUDE + w_rad) * np.ones(3), -w_rad * np.ones(3)]),
            np.concatenate([np.ones(4), (INPUT_AMPLITUDE + w_rad) * np.ones(3), w_rad * np.ones(3)]),
        ),
    )
