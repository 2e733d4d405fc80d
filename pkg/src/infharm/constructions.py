"""Builders for infinity harmonic maps into Euclidean space."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, ValidationError
from .geometry import Chart, Metric, SmoothMap, as_scalar_map, metric_gradient
from .inflap import inf_laplacian_function, inf_laplacian_map

VALIDATION_TOL = 1e-8


def build_line_map(u, direction, chart=None):
    """``x -> u(x) * a`` for a fixed vector ``a``."""
    a = [float(c) for c in np.ravel(direction)]
    if not any(a):
        raise ArgumentError("line direction must be nonzero")
    if chart is None:
        if not isinstance(u, SmoothMap):
            raise ArgumentError("chart required when u is a bare callable")
        chart = u.source
    u = as_scalar_map(u, chart)

    def comps(X):
        val = u.compose(X)[0]
        return [val * c for c in a]

    return SmoothMap(u.source, Chart(len(a), f"R{len(a)}"), comps, f"line({u.label})")


def _check_infinity_harmonic(u, g, points, tol, name):
    if points is None:
        return
    lap = np.abs(inf_laplacian_function(u, g, points))
    if np.max(lap) >= tol:
        raise ValidationError(f"{name} is not infinity harmonic (|Delta_inf| = {np.max(lap):.3g})")


def build_eikonal_tuple(components, metric, validation_points, tol=VALIDATION_TOL):
    """Stack eikonal infinity harmonic functions into a map to R^n.

    Each component must have constant ``|grad phi^k|^2`` and vanishing
    infinity Laplacian at ``validation_points``.
    """
    if not components:
        raise ArgumentError("need at least one component")
    chart = metric.chart
    maps = [as_scalar_map(c, chart) for c in components]
    pts = np.asarray(validation_points, dtype=float).reshape(-1, chart.dim)
    for k, u in enumerate(maps):
        name = f"component {k}" + (f" ({u.label})" if u.label else "")
        _, normsq = metric_gradient(u, metric, pts)
        spread = float(np.max(normsq.value) - np.min(normsq.value))
        if spread >= tol:
            raise ValidationError(f"{name} is not eikonal (|grad|^2 varies by {spread:.3g})")
        _check_infinity_harmonic(u, metric, pts, tol, name)

    def comps(X):
        return [u.compose(X)[0] for u in maps]

    return SmoothMap(chart, Chart(len(maps), f"R{len(maps)}"), comps, "eikonal tuple")


def product_metric(g, h):
    """``g + h`` on the product chart (coordinates of g first)."""
    m1, m2 = g.dim, h.dim
    chart = Chart(m1 + m2, f"{g.chart.label}x{h.chart.label}")
    if g.is_euclidean and h.is_euclidean:
        return Metric.euclidean(chart)

    def entries(X):
        A = g.entries(X[:m1]) if g.entries else np.eye(m1).tolist()
        B = h.entries(X[m1:]) if h.entries else np.eye(m2).tolist()
        rows = [list(A[i]) + [0.0] * m2 for i in range(m1)]
        rows += [[0.0] * m1 + list(B[i]) for i in range(m2)]
        return rows

    return Metric(chart, entries, f"{g.label}+{h.label}")


def build_product_map(u, g, v, h, u_points=None, v_points=None, tol=VALIDATION_TOL):
    """``(x, y) -> (u(x), v(y))`` on ``(M x N, g + h)``; returns (map, metric)."""
    u = as_scalar_map(u, g.chart)
    v = as_scalar_map(v, h.chart)
    _check_infinity_harmonic(u, g, u_points, tol, "first factor")
    _check_infinity_harmonic(v, h, v_points, tol, "second factor")
    G = product_metric(g, h)
    m1 = g.dim

    def comps(X):
        return [u.compose(X[:m1])[0], v.compose(X[m1:])[0]]

    return SmoothMap(G.chart, Chart(2, "R2"), comps, "product map"), G


def build_direct_sum(phi, g, psi, h, phi_points=None, psi_points=None, tol=VALIDATION_TOL):
    """``(p, q) -> phi(p) + psi(q)`` for maps into the same R^n; returns (map, metric)."""
    if phi.target.dim != psi.target.dim:
        raise ArgumentError(f"target dimensions differ: {phi.target.dim} vs {psi.target.dim}")
    euclid = Metric.euclidean(phi.target)
    for name, f, met, pts in (("first summand", phi, g, phi_points), ("second summand", psi, h, psi_points)):
        if pts is None:
            continue
        lap = np.linalg.norm(inf_laplacian_map(f, met, euclid, pts), axis=-1)
        if np.max(lap) >= tol:
            raise ValidationError(f"{name} is not infinity harmonic (|Delta_inf| = {np.max(lap):.3g})")
    G = product_metric(g, h)
    m1 = g.dim

    def comps(X):
        return [a + b for a, b in zip(phi.compose(X[:m1]), psi.compose(X[m1:]))]

    return SmoothMap(G.chart, phi.target, comps, f"{phi.label}+{psi.label}"), G


@dataclass(frozen=True)
class IdentityCheck:
    is_inf_harmonic: bool
    trace_values: list


def check_identity_map(g, h, samples, tol=VALIDATION_TOL):
    """Identity ``(M, g) -> (M, h)`` is infinity harmonic iff ``Trace_g h`` is constant."""
    pts = np.asarray(samples, dtype=float).reshape(-1, g.dim)
    G, _ = g.at(pts)
    H, _ = h.at(pts)
    trace = np.einsum("...ij,...ji->...", np.linalg.inv(G), H)
    spread = float(np.max(trace) - np.min(trace))
    return IdentityCheck(spread < tol, trace.tolist())


from .catalog import (  # noqa: E402
    CatalogEntry,
    SampleRegion,
    catalog_entries,
    catalog_get,
    catalog_list,
    witness_residual,
)
