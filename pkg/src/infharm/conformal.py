"""Infinity Laplacian under a conformal change of metric, and the model-space equations.

A conformal factor ``F > 0`` defines the metric ``F^-2 g``.  The sphere
(minus a point) and the hyperbolic ball are both conformally flat with
``F = (1 + |x|^2) / 2`` and ``F = (1 - |x|^2) / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .errors import InvalidFactorError, OutOfDomainError
from .geometry import Chart, Metric, SmoothMap, as_scalar_map, metric_gradient
from .inflap import inf_laplacian_function


@dataclass(frozen=True)
class ConformalFactor:
    """Positive scalar ``F``; the conformal metric is ``F^-2 g``."""

    F: SmoothMap
    chart: Chart

    @classmethod
    def from_callable(cls, chart, fn, label="F"):
        return cls(SmoothMap(chart, Chart(1, "R"), lambda X: [fn(X)], label), chart)

    def jet(self, x):
        f = self.F.jets(x)[0]
        bad = f.value <= 0.0
        if np.any(bad):
            raise InvalidFactorError(f"conformal factor must be positive (min {np.min(f.value):.3g})")
        return f


def sphere_factor(m):
    """``F = (1 + |x|^2) / 2`` on R^m."""
    chart = Chart(m, f"R{m}")
    return ConformalFactor.from_callable(chart, lambda X: 0.5 * (1.0 + sum(c * c for c in X)), "sphere")


def hyperbolic_factor(m):
    """``F = (1 - |x|^2) / 2`` on the unit ball."""
    chart = Chart(m, f"B{m}", lambda x: float(np.sum(x * x)) < 1.0)
    return ConformalFactor.from_callable(chart, lambda X: 0.5 * (1.0 - sum(c * c for c in X)), "hyperbolic")


def conformal_metric(g, factor):
    """The metric ``F^-2 g`` as a :class:`Metric` (entries built from jets)."""
    n = g.dim
    F = factor.F

    def entries(X):
        f = F.compose(X)[0]
        inv = 1.0 / (f * f)
        base = g.entries(X) if g.entries else [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]
        return [[inv * base[i][j] for j in range(n)] for i in range(n)]

    return Metric(g.chart, entries, f"{g.label}/F^2")


def conformal_inf_laplacian(u, g, factor, x):
    """``F^4 Delta_inf u + F^3 |grad u|^2 g(grad u, grad F)`` (all terms in g)."""
    u = as_scalar_map(u, g.chart)
    f = factor.jet(x)
    grad_u, normsq = metric_gradient(u, g, x)
    lap = inf_laplacian_function(u, g, x)
    cross = np.einsum("...i,...i->...", grad_u, f.gradient)  # g(grad u, grad F) = dF(grad u)
    F = f.value
    return F**4 * lap + F**3 * normsq.value * cross


def conformal_inf_laplacian_direct(u, g, factor, x):
    """Same quantity computed as the infinity Laplacian under the metric ``F^-2 g``."""
    factor.jet(x)
    return inf_laplacian_function(u, conformal_metric(g, factor), x)


def _flat_data(u, x):
    x = np.asarray(x, dtype=float)
    chart = Chart(x.shape[-1], f"R{x.shape[-1]}")
    u = as_scalar_map(u, chart)
    _, du, d2u = u.differential(x)
    return x, du[..., 0, :], d2u[..., 0, :, :]


def _flat_inf_lap(grad, hess):
    return np.einsum("...i,...ij,...j->...", grad, hess, grad)


def sphere_equation_residual(u, x):
    """``Delta_inf u + 2 |grad u|^2 <x, grad u> / (1 + |x|^2)`` (Euclidean operators)."""
    x, grad, hess = _flat_data(u, x)
    r2 = np.sum(x * x, axis=-1)
    normsq = np.sum(grad * grad, axis=-1)
    radial = np.sum(x * grad, axis=-1)
    return _flat_inf_lap(grad, hess) + 2.0 * normsq * radial / (1.0 + r2)


def hyperbolic_equation_residual(u, x):
    """``Delta_inf u - 2 |grad u|^2 <x, grad u> / (1 - |x|^2)`` on the unit ball."""
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1)
    if np.any(r2 >= 1.0):
        raise OutOfDomainError("point lies outside the open unit ball")
    x, grad, hess = _flat_data(u, x)
    normsq = np.sum(grad * grad, axis=-1)
    radial = np.sum(x * grad, axis=-1)
    return _flat_inf_lap(grad, hess) - 2.0 * normsq * radial / (1.0 - r2)


def _on_sphere(x, tol=1e-12):
    x = np.asarray(x, dtype=float)
    norm = np.linalg.norm(x, axis=-1)
    if np.any(np.abs(norm - 1.0) > tol):
        raise OutOfDomainError("point is not on the unit sphere")
    return x / norm[..., None]


def sphere_restriction_residual(u, x):
    """Infinity Laplacian of ``u`` restricted to the unit sphere, from ambient derivatives.

    Uses ``Delta_inf u - 1/2 <grad u, grad u_r^2> - 1/2 u_r d_r(|du|^2 - u_r^2)``
    with ``u_r = <x, grad u>``.
    """
    x = _on_sphere(x)
    x, grad, hess = _flat_data(u, x)
    ur = np.sum(x * grad, axis=-1)
    hx = np.einsum("...ij,...j->...i", hess, x)
    hg = np.einsum("...ij,...j->...i", hess, grad)
    grad_ur = grad + hx  # gradient of <x, grad u>
    grad_ur2 = 2.0 * ur[..., None] * grad_ur
    grad_w = 2.0 * hg - grad_ur2  # gradient of |du|^2 - u_r^2
    lap = _flat_inf_lap(grad, hess)
    return (
        lap
        - 0.5 * np.sum(grad * grad_ur2, axis=-1)
        - 0.5 * ur * np.sum(x * grad_w, axis=-1)
    )


_POLAR_CHART = Chart(2, "S2 polar", lambda p: 0.0 < p[0] < np.pi)
POLAR_METRIC = Metric(
    _POLAR_CHART, lambda X: [[1.0, 0.0], [0.0, jets.sin(X[0]) * jets.sin(X[0])]], "round S2"
)


def sphere_polar_inf_laplacian(u, x):
    """Infinity Laplacian on S^2 in geodesic polar coordinates; ``u`` is ambient on R^3."""
    x = _on_sphere(x)
    rho = np.arctan2(np.hypot(x[..., 0], x[..., 1]), x[..., 2])
    phi = np.arctan2(x[..., 1], x[..., 0])
    u = as_scalar_map(u, Chart(3, "R3"))

    def pulled(P):
        s = jets.sin(P[0])
        return u.compose([s * jets.cos(P[1]), s * jets.sin(P[1]), jets.cos(P[0])])[0]

    return inf_laplacian_function(pulled, POLAR_METRIC, np.stack([rho, phi], axis=-1))
