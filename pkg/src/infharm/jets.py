"""Second-order forward-mode automatic differentiation.

A :class:`Jet2` carries the value, gradient and Hessian of a scalar quantity
with respect to ``d`` independent variables.  Every field may carry leading
batch axes, so one jet can describe the same expression at many points at
once: ``value`` has shape ``B``, ``gradient`` ``B + (d,)`` and ``hessian``
``B + (d, d)``.

A jet may also be *first-order only* (``hessian is None``).  Such jets arise
when differentiating derivative data (e.g. ``|grad u|^2``), whose Hessian
would need third derivatives of the inputs.  Arithmetic propagates the
missing Hessian instead of inventing one.

The elementary functions in this module accept plain floats and arrays as
well as jets, so a single expression can be evaluated either way.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ArgumentError, SingularPointError

__all__ = [
    "Jet2",
    "lift",
    "variables",
    "constant",
    "partial",
    "apply_scalar",
    "sin",
    "cos",
    "exp",
    "log",
    "sqrt",
    "pow_const",
    "atan",
    "atan2",
]


def _outer(a, b):
    return a[..., :, None] * b[..., None, :]


def _first_bad(mask):
    idx = np.argwhere(np.asarray(mask))
    if idx.size == 0:
        return None
    return tuple(int(i) for i in idx[0])


class Jet2:
    """Value, gradient and Hessian of a scalar at a point (or batch of points)."""

    __slots__ = ("value", "gradient", "hessian")
    # Make ``ndarray * Jet2`` dispatch to Jet2.__rmul__.
    __array_priority__ = 1000

    def __init__(self, value, gradient, hessian=None):
        self.value = np.asarray(value, dtype=float)
        self.gradient = np.asarray(gradient, dtype=float)
        self.hessian = None if hessian is None else np.asarray(hessian, dtype=float)

    @property
    def dim(self):
        return self.gradient.shape[-1]

    @property
    def batch_shape(self):
        return self.value.shape

    @property
    def first_order(self):
        return self.hessian is None

    def __repr__(self):
        return f"Jet2(value={self.value!r}, gradient={self.gradient!r}, hessian={self.hessian!r})"

    # -- coercion ---------------------------------------------------------

    def _const(self, c):
        c = np.asarray(c, dtype=float)
        shape = np.broadcast_shapes(c.shape, self.value.shape)
        d = self.dim
        return Jet2(
            np.broadcast_to(c, shape),
            np.zeros(shape + (d,)),
            None if self.hessian is None else np.zeros(shape + (d, d)),
        )

    def _coerce(self, other):
        if isinstance(other, Jet2):
            if other.dim != self.dim:
                raise ArgumentError(f"jet dimension mismatch: {self.dim} vs {other.dim}")
            return other
        return self._const(other)

    # -- arithmetic -------------------------------------------------------

    def __neg__(self):
        return Jet2(-self.value, -self.gradient, None if self.hessian is None else -self.hessian)

    def __pos__(self):
        return self

    def __add__(self, other):
        if not isinstance(other, Jet2) and np.ndim(other) == 0:
            return Jet2(self.value + other, self.gradient, self.hessian)
        other = self._coerce(other)
        h = None
        if self.hessian is not None and other.hessian is not None:
            h = self.hessian + other.hessian
        return Jet2(self.value + other.value, self.gradient + other.gradient, h)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet2):
            c = np.asarray(other, dtype=float)
            return Jet2(
                self.value * c,
                c[..., None] * self.gradient,
                None if self.hessian is None else c[..., None, None] * self.hessian,
            )
        other = self._coerce(other)
        a, b = self, other
        value = a.value * b.value
        gradient = a.value[..., None] * b.gradient + b.value[..., None] * a.gradient
        hessian = None
        if a.hessian is not None and b.hessian is not None:
            # Grouped so that swapping operands permutes only commutative sums.
            hessian = (
                a.value[..., None, None] * b.hessian + b.value[..., None, None] * a.hessian
            ) + (_outer(a.gradient, b.gradient) + _outer(b.gradient, a.gradient))
        return Jet2(value, gradient, hessian)

    __rmul__ = __mul__

    def reciprocal(self):
        bad = self.value == 0.0
        if np.any(bad):
            raise SingularPointError("division by zero value", batch_index=_first_bad(bad))
        v = self.value
        return apply_scalar(self, 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))

    def __truediv__(self, other):
        if not isinstance(other, Jet2):
            c = np.asarray(other, dtype=float)
            if np.any(c == 0.0):
                raise SingularPointError("division by zero value", batch_index=_first_bad(c == 0.0))
            return self * (1.0 / c)
        return self * self._coerce(other).reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, q):
        if isinstance(q, Jet2):
            return exp(q * log(self))
        return pow_const(self, q)


# -- seeding --------------------------------------------------------------


def lift(point, index):
    """Coordinate function ``x_index`` seeded at ``point``.

    ``point`` may be a vector of length ``d`` or an array of points with the
    coordinates on the last axis.
    """
    point = np.asarray(point, dtype=float)
    if point.ndim == 0:
        raise ArgumentError("point must have at least one coordinate")
    d = point.shape[-1]
    if not 0 <= index < d:
        raise ArgumentError(f"index {index} out of range for dimension {d}")
    batch = point.shape[:-1]
    gradient = np.zeros(batch + (d,))
    gradient[..., index] = 1.0
    return Jet2(point[..., index], gradient, np.zeros(batch + (d, d)))


def variables(point):
    """All coordinate jets of ``point`` (list of length ``d``)."""
    point = np.asarray(point, dtype=float)
    return [lift(point, i) for i in range(point.shape[-1])]


def constant(value, dim, batch_shape=()):
    """Jet of a constant: zero gradient and Hessian."""
    shape = tuple(batch_shape)
    return Jet2(
        np.broadcast_to(np.asarray(value, dtype=float), shape),
        np.zeros(shape + (dim,)),
        np.zeros(shape + (dim, dim)),
    )


def partial(a, i):
    """First-order jet of the partial derivative d a / d x_i."""
    return Jet2(a.gradient[..., i], a.hessian[..., i, :])


def apply_scalar(a, f0, f1, f2):
    """Chain rule for ``f(a)`` given f, f', f'' evaluated at ``a.value``."""
    f0 = np.asarray(f0, dtype=float)
    f1 = np.asarray(f1, dtype=float)
    f2 = np.asarray(f2, dtype=float)
    gradient = f1[..., None] * a.gradient
    hessian = None
    if a.hessian is not None:
        hessian = f2[..., None, None] * _outer(a.gradient, a.gradient) + f1[..., None, None] * a.hessian
    return Jet2(f0, gradient, hessian)


def _apply_binary(x, y, f, fx, fy, fxx, fxy, fyy):
    gx, gy = x.gradient, y.gradient
    gradient = fx[..., None] * gx + fy[..., None] * gy
    hessian = None
    if x.hessian is not None and y.hessian is not None:
        hessian = (
            fx[..., None, None] * x.hessian
            + fy[..., None, None] * y.hessian
            + fxx[..., None, None] * _outer(gx, gx)
            + fyy[..., None, None] * _outer(gy, gy)
            + fxy[..., None, None] * (_outer(gx, gy) + _outer(gy, gx))
        )
    return Jet2(f, gradient, hessian)


# -- elementary functions ---------------------------------------------------


def sin(a):
    if not isinstance(a, Jet2):
        return np.sin(a)
    s, c = np.sin(a.value), np.cos(a.value)
    return apply_scalar(a, s, c, -s)


def cos(a):
    if not isinstance(a, Jet2):
        return np.cos(a)
    s, c = np.sin(a.value), np.cos(a.value)
    return apply_scalar(a, c, -s, -c)


def exp(a):
    if not isinstance(a, Jet2):
        return np.exp(a)
    e = np.exp(a.value)
    return apply_scalar(a, e, e, e)


def log(a):
    v = a.value if isinstance(a, Jet2) else np.asarray(a, dtype=float)
    bad = v <= 0.0
    if np.any(bad):
        raise SingularPointError("log of non-positive value", batch_index=_first_bad(bad))
    if not isinstance(a, Jet2):
        return np.log(v)
    return apply_scalar(a, np.log(v), 1.0 / v, -1.0 / (v * v))


def sqrt(a):
    v = a.value if isinstance(a, Jet2) else np.asarray(a, dtype=float)
    if not isinstance(a, Jet2):
        if np.any(v < 0.0):
            raise SingularPointError("sqrt of negative value", batch_index=_first_bad(v < 0.0))
        return np.sqrt(v)
    # The derivative is unbounded at 0, so 0 is singular for jets.
    bad = v <= 0.0
    if np.any(bad):
        raise SingularPointError("sqrt of non-positive value", batch_index=_first_bad(bad))
    r = np.sqrt(v)
    return apply_scalar(a, r, 0.5 / r, -0.25 / (r * v))


def pow_const(a, q):
    """``a ** q`` for a real constant ``q``.

    Integer exponents are valid for any sign of ``a`` (negative integers
    exclude 0); fractional exponents need ``a > 0``.
    """
    q = float(q)
    v = a.value if isinstance(a, Jet2) else np.asarray(a, dtype=float)
    if q.is_integer():
        n = int(q)
        if n < 0 and np.any(v == 0.0):
            raise SingularPointError("negative power of zero", batch_index=_first_bad(v == 0.0))
        if not isinstance(a, Jet2):
            return np.power(v, float(n)) if n < 0 else v ** n
        if n == 0:
            return a._const(1.0)
        if n == 1:
            return a
        f0 = v ** n if n > 0 else 1.0 / v ** (-n)
        f1 = n * (v ** (n - 1) if n >= 1 else 1.0 / v ** (1 - n))
        f2 = n * (n - 1) * (v ** (n - 2) if n >= 2 else 1.0 / v ** (2 - n))
        return apply_scalar(a, f0, f1, f2)
    bad = v <= 0.0
    if np.any(bad):
        raise SingularPointError(
            f"fractional power {q:g} of non-positive value", batch_index=_first_bad(bad)
        )
    if not isinstance(a, Jet2):
        return np.power(v, q)
    f0 = np.power(v, q)
    return apply_scalar(a, f0, q * f0 / v, q * (q - 1.0) * f0 / (v * v))


def atan(a):
    if not isinstance(a, Jet2):
        return np.arctan(a)
    v = a.value
    w = 1.0 / (1.0 + v * v)
    return apply_scalar(a, np.arctan(v), w, -2.0 * v * w * w)


def atan2(y, x):
    """Angle of the point (x, y); jets in either slot."""
    if not isinstance(y, Jet2) and not isinstance(x, Jet2):
        yv, xv = np.asarray(y, dtype=float), np.asarray(x, dtype=float)
        if np.any((yv == 0.0) & (xv == 0.0)):
            raise SingularPointError("atan2 at the origin")
        return np.arctan2(yv, xv)
    like = y if isinstance(y, Jet2) else x
    y = like._coerce(y)
    x = like._coerce(x)
    r2 = x.value * x.value + y.value * y.value
    bad = r2 == 0.0
    if np.any(bad):
        raise SingularPointError("atan2 at the origin", batch_index=_first_bad(bad))
    xv, yv = x.value, y.value
    r4 = r2 * r2
    return _apply_binary(
        x,
        y,
        np.arctan2(yv, xv),
        -yv / r2,
        xv / r2,
        2.0 * xv * yv / r4,
        (yv * yv - xv * xv) / r4,
        -2.0 * xv * yv / r4,
    )


PI = math.pi
