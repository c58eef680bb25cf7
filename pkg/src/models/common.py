import numpy as np

from ..dcprog.differentiable_map import DifferentiableMap
from ..interval.interval import IntervalMatrix


def split_quadratic_form(Q):
    """Q = Q_plus - Q_minus with both parts positive semidefinite."""
    Q = 0.5 * (Q + Q.T)
    eigval, eigvec = np.linalg.eigh(Q)
    Q_plus = (eigvec * np.maximum(eigval, 0.0)) @ eigvec.T
    Q_minus = (eigvec * np.maximum(-eigval, 0.0)) @ eigvec.T
    return Q_plus, Q_minus


def quadratic_map(forms, const=None, noise_dim=0, name="quadratic"):
    """
    z = (x, v) -> [x' Q_i x + const_i] + v.

    v is only present when noise_dim > 0 and must then match the number of
    forms. The Hessian of component i is 2 Q_i on the state block.
    """
    forms = [0.5 * (np.asarray(Q, dtype=float) + np.asarray(Q, dtype=float).T) for Q in forms]
    m = len(forms)
    n = forms[0].shape[0]
    const = np.zeros(m) if const is None else np.asarray(const, dtype=float)
    if noise_dim not in (0, m):
        raise ValueError("Additive noise must match the output dimension")
    dim_in = n + noise_dim
    stacked = np.array(forms)

    def evaluate(z):
        x = z[:n]
        out = np.einsum("i,kij,j->k", x, stacked, x) + const
        if noise_dim:
            out = out + z[n:]
        return out

    def jacobian(z):
        J = np.zeros((m, dim_in))
        J[:, :n] = 2.0 * stacked @ z[:n]
        if noise_dim:
            J[:, n:] = np.eye(m)
        return J

    def hessian(i, box):
        H = np.zeros((dim_in, dim_in))
        H[:n, :n] = 2.0 * forms[i]
        return IntervalMatrix.from_point(H)

    return DifferentiableMap(dim_in, m, evaluate, jacobian, hessian, name)
