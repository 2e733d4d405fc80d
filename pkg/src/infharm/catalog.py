"""Registry of explicit example maps with their expected energy and verdict.

Each entry carries a sample region that stays a margin away from the
singular set of the map and metrics, so evaluation on the shipped grid
never raises.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import jets
from .errors import ArgumentError, UnknownEntryError
from .geometry import Chart, Metric, SmoothMap
from .inflap import HORIZONTALLY_HOMOTHETIC, HWC, INFINITY_HARMONIC, MORPHISM, map_report

MARGIN = 0.05
ALL_FLAGS = frozenset({INFINITY_HARMONIC, HWC, HORIZONTALLY_HOMOTHETIC, MORPHISM})
IH_ONLY = frozenset({INFINITY_HARMONIC})


@dataclass(frozen=True)
class SampleRegion:
    """Tensor-product box grid, optionally filtered and mapped into the chart."""

    lower: tuple
    upper: tuple
    counts: tuple
    keep: Optional[Callable] = field(default=None, compare=False)
    transform: Optional[Callable] = field(default=None, compare=False)
    endpoint: tuple = ()

    @property
    def dim(self):
        return len(self.lower)

    def _finish(self, box_pts):
        pts = box_pts if self.transform is None else self.transform(box_pts)
        if self.keep is not None:
            pts = pts[self.keep(pts)]
        return pts

    def grid(self, per_axis=None):
        axes = []
        for i, (lo, hi, n) in enumerate(zip(self.lower, self.upper, self.counts)):
            n = n if per_axis is None else per_axis
            closed = self.endpoint[i] if self.endpoint else True
            axes.append(np.linspace(lo, hi, n, endpoint=closed))
        mesh = np.meshgrid(*axes, indexing="ij")
        return self._finish(np.stack([m.ravel() for m in mesh], axis=-1))

    def random(self, count, seed=0):
        rng = np.random.default_rng(seed)
        out = np.empty((0, self.dim))
        while len(out) < count:
            box = rng.uniform(self.lower, self.upper, size=(2 * count, self.dim))
            out = np.concatenate([out, self._finish(box)])
        return out[:count]


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    map: SmoothMap
    source_metric: Metric
    target_metric: Metric
    expected_energy: Optional[Callable]
    expected_flags: frozenset
    sample_region: SampleRegion
    provenance: str
    negative: bool = False
    witness: Optional[tuple] = None
    witness_check: str = INFINITY_HARMONIC

    @property
    def energy_closed_form(self):
        return self.expected_energy is not None

    def grid(self, per_axis=None):
        return self.sample_region.grid(per_axis)


def _R(m):
    return Chart(m, f"R{m}")


def _euclid(m):
    return Metric.euclidean(_R(m))


def _diag_metric(chart, fn, label):
    """Diagonal metric from ``fn(X) -> list of diagonal entries``."""

    def entries(X):
        d = fn(X)
        n = len(d)
        return [[d[i] if i == j else 0.0 for j in range(n)] for i in range(n)]

    return Metric(chart, entries, label)


def _map(src, dim, comps, label, manifold_dim=None):
    return SmoothMap(src, Chart(dim, f"R{dim}"), comps, label, manifold_dim)


def _aronsson(x, y):
    """``x^{4/3} - y^{4/3}`` written through squares so negative arguments work."""
    return jets.pow_const(x * x, 2.0 / 3.0) - jets.pow_const(y * y, 2.0 / 3.0)


def _off_axes(cols):
    def keep(p):
        return np.all(np.abs(p[:, cols]) >= MARGIN, axis=1)

    return keep


def _radius_at_least(r):
    return lambda p: np.linalg.norm(p, axis=1) >= r


def _build():
    entries = []
    add = entries.append

    A = np.array([[1.0, 2.0, 0.5], [-1.0, 0.3, 2.0]])
    b = np.array([1.0, -2.0])
    add(CatalogEntry(
        "affine_map",
        _map(_R(3), 2, lambda X: [sum(A[i, j] * X[j] for j in range(3)) + b[i] for i in range(2)], "affine"),
        _euclid(3), _euclid(2),
        lambda p: np.full(len(p), float(np.sum(A * A))),
        IH_ONLY,
        SampleRegion((-2.0,) * 3, (2.0,) * 3, (8,) * 3),
        "affine maps between Euclidean spaces",
    ))

    lam = (1.0, 1.0, 1.0)
    add(CatalogEntry(
        "exp_trig",
        _map(_R(3), 2, lambda X: [sum(l * jets.cos(x) for l, x in zip(lam, X)),
                                  sum(l * jets.sin(x) for l, x in zip(lam, X))], "sum of lambda_k e^{i x_k}"),
        _euclid(3), _euclid(2),
        lambda p: np.full(len(p), sum(l * l for l in lam)),
        IH_ONLY,
        SampleRegion((-3.0,) * 3, (3.0,) * 3, (10,) * 3),
        "sums of complex exponentials, constant energy",
    ))

    m = 3
    add(CatalogEntry(
        "cyclic_cos_sin",
        _map(_R(m), m, lambda X: [jets.cos(X[i]) + jets.sin(X[(i + 1) % m]) for i in range(m)], "cyclic cos/sin"),
        _euclid(m), _euclid(m),
        lambda p: np.full(len(p), float(m)),
        IH_ONLY,
        SampleRegion((-3.0,) * m, (3.0,) * m, (10,) * m),
        "cyclic cos/sin map R^m -> R^m, constant energy",
    ))

    hopf_src = Chart(3, "S3 Hopf coordinates")
    clifford = _diag_metric(hopf_src, lambda X: [1.0, jets.sin(X[0]) ** 2, jets.cos(X[0]) ** 2], "round S3")

    def hopf(X):
        t, d = X[0], X[1] - X[2]
        return [-jets.cos(2.0 * t), jets.sin(2.0 * t) * jets.cos(d), jets.sin(2.0 * t) * jets.sin(d)]

    torus_box = SampleRegion(
        (MARGIN, 0.0, 0.0), (math.pi / 2 - MARGIN, 2 * math.pi, 2 * math.pi), (20, 20, 20),
        endpoint=(True, False, False),
    )
    add(CatalogEntry(
        "eigenmap_hopf",
        _map(hopf_src, 3, hopf, "Hopf map S3 -> S2", manifold_dim=2),
        clifford, _euclid(3),
        lambda p: np.full(len(p), 8.0),
        ALL_FLAGS,
        torus_box,
        "eigenmap between spheres (degree-2 Hopf instance)",
    ))

    polar = Chart(2, "S2 polar")
    round_s2 = _diag_metric(polar, lambda X: [1.0, jets.sin(X[0]) ** 2], "round S2")
    add(CatalogEntry(
        "isometric_immersion",
        _map(polar, 3, lambda X: [jets.sin(X[0]) * jets.cos(X[1]), jets.sin(X[0]) * jets.sin(X[1]), jets.cos(X[0])],
             "S2 in R3"),
        round_s2, _euclid(3),
        lambda p: np.full(len(p), 2.0),
        IH_ONLY,
        SampleRegion((MARGIN, 0.0), (math.pi - MARGIN, 2 * math.pi), (40, 40), endpoint=(True, False)),
        "isometric immersion of the round 2-sphere",
    ))

    add(CatalogEntry(
        "riemannian_submersion",
        _map(_R(3), 2, lambda X: [X[0], X[1]], "orthogonal projection"),
        _euclid(3), _euclid(2),
        lambda p: np.full(len(p), 2.0),
        ALL_FLAGS,
        SampleRegion((-2.0,) * 3, (2.0,) * 3, (8,) * 3),
        "Riemannian submersion",
    ))

    add(CatalogEntry(
        "arc_length_circle",
        _map(_R(1), 2, lambda X: [jets.cos(X[0]), jets.sin(X[0])], "unit circle by arc length"),
        _euclid(1), _euclid(2),
        lambda p: np.ones(len(p)),
        IH_ONLY,
        SampleRegion((0.0,), (2 * math.pi,), (200,), endpoint=(False,)),
        "curve parametrised by arc length",
    ))

    sol = _diag_metric(_R(3), lambda X: [jets.exp(2.0 * X[2]), jets.exp(-2.0 * X[2]), 1.0], "Sol")
    add(CatalogEntry(
        "sol_projection",
        _map(_R(3), 2, lambda X: [X[0], X[1]], "(x, y, z) -> (x, y)"),
        sol, _euclid(2),
        lambda p: np.exp(-2.0 * p[:, 2]) + np.exp(2.0 * p[:, 2]),
        IH_ONLY,
        SampleRegion((-1.0,) * 3, (1.0,) * 3, (9,) * 3),
        "projection of Sol space onto the plane",
    ))

    add(CatalogEntry(
        "clifford_torus",
        _map(hopf_src, 2, lambda X: [X[1], X[2]], "projection onto the Clifford torus"),
        clifford, _euclid(2),
        lambda p: 1.0 / np.sin(p[:, 0]) ** 2 + 1.0 / np.cos(p[:, 0]) ** 2,
        IH_ONLY,
        torus_box,
        "projection of S3 onto the Clifford torus",
    ))

    add(CatalogEntry(
        "radial_projection",
        _map(_R(3), 3, lambda X: [c / jets.sqrt(X[0] * X[0] + X[1] * X[1] + X[2] * X[2]) for c in X],
             "x / |x|", manifold_dim=2),
        _euclid(3), _euclid(3),
        lambda p: 2.0 / np.sum(p * p, axis=1),
        ALL_FLAGS,
        SampleRegion((-2.0,) * 3, (2.0,) * 3, (12,) * 3, keep=_radius_at_least(MARGIN)),
        "radial projection onto the sphere, dilation 1/|x|",
    ))

    warped = _diag_metric(_R(3), lambda X: [1.0, jets.exp(2.0 * X[0]), jets.exp(2.0 * X[0])], "dt^2 + e^{2t}(dx^2 + dy^2)")
    add(CatalogEntry(
        "warped_fiber_projection",
        _map(_R(3), 2, lambda X: [X[1], X[2]], "projection onto the fibre"),
        warped, _euclid(2),
        lambda p: 2.0 * np.exp(-2.0 * p[:, 0]),
        ALL_FLAGS,
        SampleRegion((-1.0,) * 3, (1.0,) * 3, (9,) * 3),
        "warped product projected onto the fibre",
    ))

    add(CatalogEntry(
        "sphere_to_circle",
        _map(polar, 1, lambda X: [X[1]], "longitude"),
        round_s2, _euclid(1),
        lambda p: 1.0 / np.sin(p[:, 0]) ** 2,
        ALL_FLAGS,
        SampleRegion((MARGIN, 0.0), (math.pi - MARGIN, 2 * math.pi), (40, 40), endpoint=(True, False)),
        "S2 minus poles onto a circle, dilation 1/sin",
    ))

    c = 0.5  # sine of the cone's half-angle
    cone = _diag_metric(Chart(2, "cone polar"), lambda X: [1.0, c * c * X[0] * X[0]], "cone")
    add(CatalogEntry(
        "cone_to_circle",
        _map(cone.chart, 1, lambda X: [X[1]], "angle"),
        cone, Metric(Chart(1, "circle"), lambda X: [[c * c]], "circle of radius c"),
        lambda p: 1.0 / p[:, 0] ** 2,
        ALL_FLAGS,
        SampleRegion((MARGIN, 0.0), (2.0, 2 * math.pi), (40, 40), endpoint=(True, False)),
        "cone without apex onto a circle, dilation 1/r",
    ))

    add(CatalogEntry(
        "aronsson_function",
        _map(_R(2), 1, lambda X: [_aronsson(X[0], X[1])], "x^{4/3} - y^{4/3}"),
        _euclid(2), _euclid(1),
        lambda p: 16.0 / 9.0 * np.sum(np.abs(p) ** (2.0 / 3.0), axis=1),
        ALL_FLAGS,
        SampleRegion((-2.0, -2.0), (2.0, 2.0), (60, 60), keep=_off_axes([0, 1])),
        "Aronsson's function x^{4/3} - y^{4/3}",
    ))

    ea, eb, ec = 1.0, 2.0, 3.0
    add(CatalogEntry(
        "eikonal_tuple",
        _map(_R(2), 2, lambda X: [ea * X[0] + eb * X[1] + ec, jets.sqrt(X[0] * X[0] + X[1] * X[1])],
             "(ax + by + c, |x|)"),
        _euclid(2), _euclid(2),
        lambda p: np.full(len(p), ea * ea + eb * eb + 1.0),
        IH_ONLY,
        SampleRegion((-2.0, -2.0), (2.0, 2.0), (40, 40), keep=_radius_at_least(MARGIN)),
        "tuple of eikonal infinity harmonic functions",
    ))

    add(CatalogEntry(
        "product_aronsson",
        _map(_R(4), 2, lambda X: [_aronsson(X[0], X[1]), _aronsson(X[2], X[3])], "Aronsson x Aronsson"),
        _euclid(4), _euclid(2),
        lambda p: 16.0 / 9.0 * np.sum(np.abs(p) ** (2.0 / 3.0), axis=1),
        IH_ONLY,
        SampleRegion((-2.0,) * 4, (2.0,) * 4, (10,) * 4, keep=_off_axes([0, 1, 2, 3])),
        "product of two Aronsson functions",
    ))

    ball_chart = Chart(2, "ball about (2, 2)")

    def ball_metric_entries(X):
        r2 = X[0] * X[0] + X[1] * X[1]
        return [X[0] * X[0] / r2, X[1] * X[1] / r2]

    add(CatalogEntry(
        "ball_identity",
        _map(ball_chart, 2, lambda X: [X[0], X[1]], "identity"),
        Metric.euclidean(ball_chart), _diag_metric(ball_chart, ball_metric_entries, "sum x_i^2/|x|^2 dx_i^2"),
        lambda p: np.ones(len(p)),
        IH_ONLY,
        SampleRegion((1.0, 1.0), (3.0, 3.0), (40, 40),
                     keep=lambda p: np.linalg.norm(p - 2.0, axis=1) <= 1.0 - MARGIN),
        "identity onto a ball with metric sum x_i^2/|x|^2 dx_i^2",
    ))

    def conformally_flat(sign, label):
        return _diag_metric(_R(2) if sign > 0 else Chart(2, "unit disc"),
                            lambda X: [1.0 / _factor(X, sign) ** 2] * len(X), label)

    add(CatalogEntry(
        "sphere_arctan",
        _map(_R(2), 1, lambda X: [jets.atan(X[0] / X[1])], "arctan(x1/x2)"),
        conformally_flat(1.0, "stereographic sphere"), _euclid(1),
        lambda p: (0.5 * (1.0 + np.sum(p * p, axis=1))) ** 2 / np.sum(p * p, axis=1),
        ALL_FLAGS,
        SampleRegion((-2.0, -2.0), (2.0, 2.0), (40, 40), keep=_off_axes([1])),
        "arctan(x1/x2) on the stereographic sphere",
    ))

    add(CatalogEntry(
        "hyperbolic_arctan",
        _map(Chart(2, "unit disc"), 1, lambda X: [jets.atan(X[0] / X[1])], "arctan(x1/x2)"),
        conformally_flat(-1.0, "hyperbolic disc"), _euclid(1),
        lambda p: (0.5 * (1.0 - np.sum(p * p, axis=1))) ** 2 / np.sum(p * p, axis=1),
        ALL_FLAGS,
        SampleRegion((-1.0, -1.0), (1.0, 1.0), (40, 40),
                     keep=lambda p: _off_axes([1])(p) & (np.linalg.norm(p, axis=1) <= 1.0 - MARGIN)),
        "arctan(x1/x2) on the hyperbolic disc",
    ))

    coeffs = (1.0, 2.0)
    ball3 = Chart(3, "unit ball")
    add(CatalogEntry(
        "hyperbolic_fraction",
        _map(ball3, 1, lambda X: [hyperbolic_fraction(coeffs)(X)], "(a . x') / (1 + |x|^2 - 2 x_m)"),
        _diag_metric(ball3, lambda X: [1.0 / _factor(X, -1.0) ** 2] * 3, "hyperbolic ball"), _euclid(1),
        None,
        ALL_FLAGS,
        SampleRegion((-1.0,) * 3, (1.0,) * 3, (16,) * 3,
                     keep=lambda p: np.linalg.norm(p, axis=1) <= 1.0 - MARGIN),
        "linear-fractional family on the hyperbolic ball",
    ))

    def polar_to_xy(p):
        return np.stack([p[:, 0] * np.cos(p[:, 1]), p[:, 0] * np.sin(p[:, 1])], axis=-1)

    add(CatalogEntry(
        "circle_metric_projection",
        _map(_R(2), 2, lambda X: [c / jets.sqrt(X[0] * X[0] + X[1] * X[1]) for c in X], "x / |x|", manifold_dim=1),
        _euclid(2), _euclid(2),
        lambda p: 1.0 / np.sum(p * p, axis=1),
        ALL_FLAGS,
        SampleRegion((0.5, 0.0), (2.0, 2 * math.pi), (10, 10), transform=polar_to_xy, endpoint=(True, False)),
        "metric projection onto an SO(2) orbit",
    ))

    dw_chart = Chart(3, "I x M x N")
    doubly = _diag_metric(dw_chart, lambda X: [1.0, (1.0 + X[0] * X[0]) ** 2, (2.0 + X[0] * X[0]) ** 2], "doubly warped")
    add(CatalogEntry(
        "doubly_warped_projection",
        _map(dw_chart, 2, lambda X: [X[1], X[2]], "projection onto M x N"),
        doubly, _euclid(2),
        lambda p: 1.0 / (1.0 + p[:, 0] ** 2) ** 2 + 1.0 / (2.0 + p[:, 0] ** 2) ** 2,
        IH_ONLY,
        SampleRegion((-1.0, -2.0, -2.0), (1.0, 2.0, 2.0), (9, 9, 9)),
        "doubly warped product projected onto M x N",
    ))

    # -- negative controls ---------------------------------------------------------
    add(CatalogEntry(
        "doubly_warped_distance",
        _map(dw_chart, 1, lambda X: [jets.sqrt(X[1] * X[1] + X[2] * X[2])], "dist o projection"),
        doubly, _euclid(1),
        None,
        frozenset({HWC}),
        SampleRegion((-1.0, -2.0, -2.0), (1.0, 2.0, 2.0), (9, 10, 10), keep=lambda p: np.hypot(p[:, 1], p[:, 2]) >= MARGIN),
        "distance function composed with the doubly warped projection",
        negative=True,
        witness=(0.5, 1.0, 1.0),
    ))

    D = np.diag([1.0, 2.0])
    add(CatalogEntry(
        "linear_diag12",
        _map(_R(2), 2, lambda X: [X[0], 2.0 * X[1]], "diag(1, 2)"),
        _euclid(2), _euclid(2),
        lambda p: np.full(len(p), 5.0),
        IH_ONLY,
        SampleRegion((-2.0, -2.0), (2.0, 2.0), (20, 20)),
        "linear map that is not horizontally conformal",
        negative=True,
        witness=(1.0, 1.0),
        witness_check="conformality",
    ))

    add(CatalogEntry(
        "linear_diag12_pullback",
        _map(_R(2), 1, lambda X: [jets.sqrt(X[0] * X[0] + 4.0 * X[1] * X[1])], "|diag(1, 2) x|"),
        _euclid(2), _euclid(1),
        None,
        frozenset({HWC}),
        SampleRegion((-2.0, -2.0), (2.0, 2.0), (20, 20), keep=_radius_at_least(MARGIN)),
        "distance function pulled back by diag(1, 2)",
        negative=True,
        witness=tuple(float(v) for v in _diag_witness(D)),
    ))
    return {e.id: e for e in entries}


def _factor(X, sign):
    return 0.5 * (1.0 + sign * sum(c * c for c in X))


def hyperbolic_fraction(a):
    """``u(x) = (a_1 x_1 + ... + a_{m-1} x_{m-1}) / (1 + |x|^2 - 2 x_m)``."""
    a = tuple(float(v) for v in a)

    def u(X):
        num = sum(ai * xi for ai, xi in zip(a, X[:-1]))
        return num / (1.0 + sum(c * c for c in X) - 2.0 * X[-1])

    return u


def _diag_witness(D):
    from .inflap import blowup_witness_direction

    return blowup_witness_direction(D)


_REGISTRY = _build()


def witness_residual(entry):
    """Raw residual of the failing criterion at the entry's witness point.

    ``|Delta_inf|`` (target norm) for infinity harmonicity, the relative
    singular-value spread for conformality.
    """
    if entry.witness is None:
        raise ArgumentError(f"entry {entry.id!r} has no witness point")
    r = map_report(entry.map, entry.source_metric, entry.target_metric, np.asarray(entry.witness))
    if entry.witness_check == "conformality":
        return r.conformality_residual
    H, _ = entry.target_metric.at(entry.map.evaluate(np.asarray(entry.witness)))
    v = r.inf_laplacian
    return float(np.sqrt(v @ H @ v))


def catalog_list():
    """Entry ids in sorted order."""
    return sorted(_REGISTRY)


def catalog_get(entry_id):
    try:
        return _REGISTRY[entry_id]
    except KeyError:
        raise UnknownEntryError(f"unknown catalog entry {entry_id!r}") from None


def catalog_entries(include_negative=True):
    return [_REGISTRY[k] for k in catalog_list() if include_negative or not _REGISTRY[k].negative]
