"""
Minimal interval arithmetic for Hessian enclosures and box bookkeeping.

No directed rounding is used. Every arithmetic result is widened by an
absolute inflation epsilon instead (``set_inflation`` changes it for the
whole process; the CLI sets it from config/settings.json).
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger("Interval")

DEFAULT_INFLATION = 1e-12
_inflation = DEFAULT_INFLATION


def set_inflation(eps):
    global _inflation
    if eps < 0:
        raise ValueError("Inflation epsilon must be non-negative")
    _inflation = float(eps)


def get_inflation():
    return _inflation


def _widen(lo, hi):
    return IntervalScalar(lo - _inflation, hi + _inflation)


@dataclass(frozen=True)
class IntervalScalar:
    lo: float
    hi: float

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise ValueError("Interval bounds must not be NaN")
        if self.lo > self.hi:
            raise ValueError(f"Invalid interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x):
        return cls(float(x), float(x))

    @property
    def mid(self):
        return 0.5 * (self.lo + self.hi)

    @property
    def rad(self):
        return 0.5 * (self.hi - self.lo)

    @property
    def mag(self):
        return max(abs(self.lo), abs(self.hi))

    def contains(self, x, tol=0.0):
        return self.lo - tol <= x <= self.hi + tol

    def __add__(self, other):
        return iv_add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return iv_sub(self, other)

    def __rsub__(self, other):
        return iv_sub(_as_interval(other), self)

    def __mul__(self, other):
        return iv_mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return iv_neg(self)

    def __repr__(self):
        return f"[{self.lo:.6g}, {self.hi:.6g}]"


def _as_interval(x):
    if isinstance(x, IntervalScalar):
        return x
    return IntervalScalar.point(x)


def iv_add(a, b):
    a, b = _as_interval(a), _as_interval(b)
    return _widen(a.lo + b.lo, a.hi + b.hi)


def iv_sub(a, b):
    a, b = _as_interval(a), _as_interval(b)
    return _widen(a.lo - b.hi, a.hi - b.lo)


def iv_neg(a):
    a = _as_interval(a)
    return IntervalScalar(-a.hi, -a.lo)


def iv_mul(a, b):
    a, b = _as_interval(a), _as_interval(b)
    products = (a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi)
    return _widen(min(products), max(products))


def iv_sqr(a):
    a = _as_interval(a)
    lo_sq, hi_sq = a.lo * a.lo, a.hi * a.hi
    if a.lo <= 0.0 <= a.hi:
        return IntervalScalar(0.0, max(lo_sq, hi_sq) + _inflation)
    return _widen(min(lo_sq, hi_sq), max(lo_sq, hi_sq))


def iv_exp(a):
    a = _as_interval(a)
    return _widen(math.exp(a.lo), math.exp(a.hi))


def iv_sin(a):
    a = _as_interval(a)
    if a.hi - a.lo >= 2.0 * math.pi:
        return IntervalScalar(-1.0, 1.0)
    lo = min(math.sin(a.lo), math.sin(a.hi))
    hi = max(math.sin(a.lo), math.sin(a.hi))
    # Interior extrema at pi/2 + 2k*pi (max) and -pi/2 + 2k*pi (min)
    k_max = math.ceil((a.lo - 0.5 * math.pi) / (2.0 * math.pi))
    if 0.5 * math.pi + 2.0 * math.pi * k_max <= a.hi:
        hi = 1.0
    k_min = math.ceil((a.lo + 0.5 * math.pi) / (2.0 * math.pi))
    if -0.5 * math.pi + 2.0 * math.pi * k_min <= a.hi:
        lo = -1.0
    return IntervalScalar(max(-1.0, lo - _inflation), min(1.0, hi + _inflation))


def iv_cos(a):
    a = _as_interval(a)
    shifted = IntervalScalar(a.lo + 0.5 * math.pi, a.hi + 0.5 * math.pi)
    return iv_sin(shifted)


def iv_sum(items):
    total = IntervalScalar(0.0, 0.0)
    for item in items:
        total = iv_add(total, item)
    return total


def iv_hull(*items):
    items = [_as_interval(x) for x in items]
    return IntervalScalar(min(x.lo for x in items), max(x.hi for x in items))


class IntervalVector:
    """A box [lo, hi] in R^n stored as a tuple of IntervalScalar entries."""

    def __init__(self, entries):
        self.entries = tuple(_as_interval(e) for e in entries)

    @classmethod
    def from_bounds(cls, lower, upper):
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        if lower.shape != upper.shape:
            raise ValueError(f"Bound shapes differ: {lower.shape} vs {upper.shape}")
        return cls(IntervalScalar(float(lo), float(hi)) for lo, hi in zip(lower, upper))

    @classmethod
    def from_point(cls, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return cls.from_bounds(x, x)

    @property
    def n(self):
        return len(self.entries)

    @property
    def lower(self):
        return np.array([e.lo for e in self.entries], dtype=float)

    @property
    def upper(self):
        return np.array([e.hi for e in self.entries], dtype=float)

    def diameters(self):
        return self.upper - self.lower

    def contains(self, x, tol=0.0):
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, idx):
        return self.entries[idx]

    def __repr__(self):
        return "IntervalVector(" + ", ".join(repr(e) for e in self.entries) + ")"


def rad_mid(v):
    """Returns (radius, midpoint) arrays of an interval vector."""
    lower, upper = v.lower, v.upper
    return 0.5 * (upper - lower), 0.5 * (lower + upper)


class IntervalMatrix:
    """Elementwise bounds M^L <= M <= M^U."""

    def __init__(self, lower, upper):
        self.lower = np.atleast_2d(np.asarray(lower, dtype=float))
        self.upper = np.atleast_2d(np.asarray(upper, dtype=float))
        if self.lower.shape != self.upper.shape:
            raise ValueError(f"Bound shapes differ: {self.lower.shape} vs {self.upper.shape}")
        if np.any(self.lower > self.upper):
            raise ValueError("Lower bound exceeds upper bound in IntervalMatrix")

    @classmethod
    def from_entries(cls, grid):
        lower = np.array([[_as_interval(e).lo for e in row] for row in grid], dtype=float)
        upper = np.array([[_as_interval(e).hi for e in row] for row in grid], dtype=float)
        return cls(lower, upper)

    @classmethod
    def from_point(cls, M):
        M = np.atleast_2d(np.asarray(M, dtype=float))
        return cls(M, M.copy())

    @property
    def shape(self):
        return self.lower.shape

    def entry(self, i, j):
        return IntervalScalar(float(self.lower[i, j]), float(self.upper[i, j]))

    def mid(self):
        return 0.5 * (self.lower + self.upper)

    def rad(self):
        return 0.5 * (self.upper - self.lower)

    def is_symmetric(self, tol=0.0):
        return (self.shape[0] == self.shape[1]
                and np.allclose(self.lower, self.lower.T, rtol=0.0, atol=tol)
                and np.allclose(self.upper, self.upper.T, rtol=0.0, atol=tol))

    def symmetrized(self):
        """Hull of the matrix and its transpose; symmetric members are unaffected."""
        return IntervalMatrix(np.minimum(self.lower, self.lower.T), np.maximum(self.upper, self.upper.T))

    def sub(self, rows, cols):
        idx = np.ix_(rows, cols)
        return IntervalMatrix(self.lower[idx], self.upper[idx])

    def contains(self, M, tol=0.0):
        M = np.asarray(M, dtype=float)
        return bool(np.all(M >= self.lower - tol) and np.all(M <= self.upper + tol))

    def __neg__(self):
        return IntervalMatrix(-self.upper, -self.lower)

    def __add__(self, other):
        if isinstance(other, IntervalMatrix):
            return IntervalMatrix(self.lower + other.lower - _inflation, self.upper + other.upper + _inflation)
        other = np.asarray(other, dtype=float)
        return IntervalMatrix(self.lower + other, self.upper + other)

    def __repr__(self):
        return f"IntervalMatrix(lower={self.lower.tolist()}, upper={self.upper.tolist()})"
