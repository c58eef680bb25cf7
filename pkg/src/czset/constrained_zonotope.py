import numpy as np

from ..utils.errors import ConfigError, DimensionMismatchError


def _as_matrix(M, rows=None, cols=None):
    M = np.asarray(M, dtype=float)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    elif M.ndim == 1:
        # A flat generator list for a 1-D set, or a single constraint row
        M = M.reshape(1, -1) if rows in (None, 1) else M.reshape(-1, 1)
    if M.size == 0:
        M = M.reshape(rows if rows is not None else M.shape[0], cols if cols is not None else 0)
    return M


def _frozen(arr):
    arr = np.array(arr, dtype=float, copy=True)
    arr.flags.writeable = False
    return arr


class ConstrainedZonotope:
    """
    The set {G xi + c : ||xi||_inf <= 1, A xi = b}.

    n is the ambient dimension, n_g the number of generators and n_h the
    number of equality constraints. Arrays are stored read-only, so instances
    behave as values and can be shared between runs.
    """

    def __init__(self, G, c, A=None, b=None):
        c = np.atleast_1d(np.asarray(c, dtype=float)).reshape(-1)
        n = c.shape[0]
        G = _as_matrix(G, rows=n)
        if G.shape[0] != n:
            raise DimensionMismatchError(f"G has {G.shape[0]} rows but c has {n} entries")
        n_g = G.shape[1]

        if A is None:
            A = np.zeros((0, n_g))
            b = np.zeros(0)
        else:
            A = np.asarray(A, dtype=float)
            if A.ndim == 1:
                A = A.reshape(1, -1) if A.size else A.reshape(0, n_g)
            if A.size == 0:
                A = A.reshape(A.shape[0] if A.ndim == 2 else 0, n_g)
            b = np.atleast_1d(np.asarray(b, dtype=float)).reshape(-1)
        if A.shape[1] != n_g:
            raise DimensionMismatchError(f"A has {A.shape[1]} columns but G has {n_g}")
        if A.shape[0] != b.shape[0]:
            raise DimensionMismatchError(f"A has {A.shape[0]} rows but b has {b.shape[0]} entries")

        self.G = _frozen(G)
        self.c = _frozen(c)
        self.A = _frozen(A)
        self.b = _frozen(b)

    @classmethod
    def from_box(cls, lower, upper):
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        return cls(np.diag(0.5 * (upper - lower)), 0.5 * (upper + lower))

    @classmethod
    def point(cls, p):
        p = np.atleast_1d(np.asarray(p, dtype=float))
        return cls(np.zeros((p.shape[0], 0)), p)

    @property
    def n(self):
        return self.c.shape[0]

    @property
    def n_g(self):
        return self.G.shape[1]

    @property
    def n_h(self):
        return self.A.shape[0]

    @property
    def is_zonotope(self):
        return self.n_h == 0

    def lifted(self):
        """Generator matrix [G; A] of the lifted zonotope used by reductions."""
        return np.vstack([self.G, self.A])

    def __neg__(self):
        return ConstrainedZonotope(-self.G, -self.c, self.A, self.b)

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n}, n_g={self.n_g}, n_h={self.n_h})"


class Zonotope(ConstrainedZonotope):
    """Constrained zonotope without equality constraints, {G, c}."""

    def __init__(self, G, c):
        super().__init__(G, c)

    @classmethod
    def from_cz(cls, X):
        if X.n_h:
            raise ValueError(f"Set has {X.n_h} constraints; not a plain zonotope")
        return cls(X.G, X.c)

    @classmethod
    def from_box(cls, lower, upper):
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        return cls(np.diag(0.5 * (upper - lower)), 0.5 * (upper + lower))


class ReductionTargets:
    """Target constraint count phi_c and generator count phi_g."""

    def __init__(self, phi_c, phi_g):
        if phi_c < 0:
            raise ConfigError("phi_c must be non-negative")
        if phi_g < 0:
            raise ConfigError("phi_g must be non-negative")
        self.phi_c = int(phi_c)
        self.phi_g = int(phi_g)

    def check(self, n):
        if self.phi_g < n:
            raise ConfigError(f"phi_g={self.phi_g} is below the state dimension {n}")

    def __eq__(self, other):
        return isinstance(other, ReductionTargets) and (self.phi_c, self.phi_g) == (other.phi_c, other.phi_g)

    def __hash__(self):
        return hash((self.phi_c, self.phi_g))

    def __repr__(self):
        return f"ReductionTargets(phi_c={self.phi_c}, phi_g={self.phi_g})"
