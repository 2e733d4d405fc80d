"""Charts, metrics, Christoffel symbols and smooth maps between charts.

Everything here is evaluated through :mod:`infharm.jets`.  Metric entries and
map components are plain Python callables taking a list of coordinate jets
and returning (nested lists of) jets or constants, so the same definition
serves for values, first and second derivatives.

Points may be passed singly (shape ``(d,)``) or stacked (``(N, d)``); all
array-valued results carry the same leading batch axes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import jets
from .errors import ArgumentError, DegenerateMetricError, SingularPointError
from .jets import Jet2

DEFAULT_RANK_TOL = 1e-9
# Singular-value ratios within this factor of rank_tol are reported as near a rank change.
NEAR_DEGENERATE_BAND = 1e3


def _always(_x):
    return True


@dataclass(frozen=True)
class Chart:
    dim: int
    label: str = ""
    domain: Callable = field(default=_always, compare=False, repr=False)

    def __post_init__(self):
        if self.dim < 1:
            raise ArgumentError("chart dimension must be >= 1")

    def contains(self, x):
        return bool(self.domain(np.asarray(x, dtype=float)))


def pack(items, batch_shape, dim, with_hessian=True):
    """Stack a nested list of jets/constants into value, gradient, Hessian arrays.

    The nesting shape ``S`` is appended after the batch axes: values are
    ``B + S``, gradients ``B + S + (dim,)``, Hessians ``B + S + (dim, dim)``.
    """
    flat_items = _flatten(items)
    shape = _nest_shape(items)
    n = len(flat_items)
    batch_shape = tuple(batch_shape)
    values = np.empty(batch_shape + (n,))
    grads = np.zeros(batch_shape + (n, dim))
    hess = np.zeros(batch_shape + (n, dim, dim)) if with_hessian else None
    for k, item in enumerate(flat_items):
        if isinstance(item, Jet2):
            values[..., k] = np.broadcast_to(item.value, batch_shape)
            grads[..., k, :] = np.broadcast_to(item.gradient, batch_shape + (dim,))
            if with_hessian:
                if item.hessian is None:
                    raise ArgumentError("second derivatives requested from a first-order jet")
                hess[..., k, :, :] = np.broadcast_to(item.hessian, batch_shape + (dim, dim))
        else:
            values[..., k] = np.broadcast_to(np.asarray(item, dtype=float), batch_shape)
    values = values.reshape(batch_shape + shape)
    grads = grads.reshape(batch_shape + shape + (dim,))
    if with_hessian:
        hess = hess.reshape(batch_shape + shape + (dim, dim))
    return values, grads, hess


def _flatten(items):
    if isinstance(items, (list, tuple)):
        out = []
        for it in items:
            out.extend(_flatten(it))
        return out
    return [items]


def _nest_shape(items):
    if isinstance(items, (list, tuple)):
        if not items:
            return (0,)
        return (len(items),) + _nest_shape(items[0])
    return ()


def _batch_of(point):
    point = np.asarray(point, dtype=float)
    return point, point.shape[:-1]


def _attach_point(err, point):
    """Re-raise a jet singularity with the offending chart point."""
    point = np.asarray(point, dtype=float)
    if point.ndim == 1:
        return err.with_point(point)
    if err.batch_index is not None:
        try:
            return err.with_point(point[err.batch_index])
        except IndexError:
            pass
    return err


@dataclass(frozen=True)
class Metric:
    """Riemannian metric on a chart.

    ``entries`` maps a list of coordinate jets to a ``dim x dim`` nested list.
    ``entries=None`` is the Euclidean metric.
    """

    chart: Chart
    entries: Optional[Callable] = field(default=None, compare=False, repr=False)
    label: str = "euclidean"

    @classmethod
    def euclidean(cls, chart):
        return cls(chart, None, "euclidean")

    @property
    def dim(self):
        return self.chart.dim

    @property
    def is_euclidean(self):
        return self.entries is None

    def matrix(self, coords, batch_shape, var_dim, with_hessian=False):
        """Metric entries at (possibly composed) coordinate jets.

        Returns ``G`` (``B + (n, n)``), ``dG`` with the derivative index last,
        and optionally second derivatives.
        """
        n = self.dim
        if self.entries is None:
            G = np.broadcast_to(np.eye(n), tuple(batch_shape) + (n, n)).copy()
            dG = np.zeros(tuple(batch_shape) + (n, n, var_dim))
            d2G = np.zeros(tuple(batch_shape) + (n, n, var_dim, var_dim)) if with_hessian else None
            return G, dG, d2G
        rows = self.entries(coords)
        if len(rows) != n or any(len(r) != n for r in rows):
            raise ArgumentError(f"metric {self.label!r} must return a {n}x{n} matrix")
        return pack(rows, batch_shape, var_dim, with_hessian)

    def at(self, x):
        """Metric matrix and its coordinate derivatives at chart point(s) ``x``."""
        x, batch = _batch_of(x)
        try:
            G, dG, _ = self.matrix(jets.variables(x), batch, self.dim)
        except SingularPointError as err:
            raise _attach_point(err, x) from None
        check_positive_definite(G)
        return G, dG

    def inverse(self, x):
        G, _ = self.at(x)
        return np.linalg.inv(G)


def check_positive_definite(G, rel_tol=1e-12):
    G = np.asarray(G)
    if not np.allclose(G, np.swapaxes(G, -1, -2), rtol=1e-12, atol=1e-14):
        raise DegenerateMetricError("metric matrix is not symmetric")
    eig = np.linalg.eigvalsh(G)
    lo, hi = eig[..., 0], eig[..., -1]
    if np.any(~np.isfinite(eig)) or np.any(lo <= rel_tol * np.abs(hi)) or np.any(hi <= 0):
        raise DegenerateMetricError("metric matrix is not positive definite")


def inverse_with_derivative(G, dG):
    """``G^{-1}`` and its derivative ``-G^{-1} dG_k G^{-1}`` (index k last)."""
    check_positive_definite(G)
    Ginv = np.linalg.inv(G)
    dGinv = -np.einsum("...ia,...abk,...bj->...ijk", Ginv, dG, Ginv)
    return Ginv, dGinv


def christoffel_from(Ginv, dG):
    """Gamma^k_ij from the inverse metric and dG[..., i, j, l] = d_l g_ij."""
    # d_i g_jl + d_j g_il - d_l g_ij, indexed [i, j, l]
    t = (
        np.einsum("...jli->...ijl", dG)
        + np.einsum("...ilj->...ijl", dG)
        - dG
    )
    return 0.5 * np.einsum("...kl,...ijl->...kij", Ginv, t)


def christoffel(g, x):
    """Christoffel symbols ``Gamma[..., k, i, j]`` of ``g`` at ``x``."""
    G, dG = g.at(x)
    return christoffel_from(np.linalg.inv(G), dG)


@dataclass(frozen=True)
class SmoothMap:
    """Map between charts with components given as a jet callable.

    ``manifold_dim`` is the dimension of the submanifold of the target chart
    that the map lands in; it differs from ``target.dim`` when a sphere is
    represented through its ambient Euclidean space.
    """

    source: Chart
    target: Chart
    components: Callable = field(compare=False, repr=False)
    label: str = ""
    manifold_dim: Optional[int] = None

    @property
    def image_dim(self):
        return self.target.dim if self.manifold_dim is None else self.manifold_dim

    def jets(self, x):
        """Component jets (list of length ``target.dim``) at chart point(s) ``x``."""
        x, batch = _batch_of(x)
        if x.shape[-1] != self.source.dim:
            raise ArgumentError(
                f"point has {x.shape[-1]} coordinates, chart {self.source.label!r} has {self.source.dim}"
            )
        try:
            comps = self.compose(jets.variables(x))
        except SingularPointError as err:
            raise _attach_point(err, x) from None
        out = []
        for c in comps:
            if isinstance(c, Jet2):
                out.append(c)
            else:
                out.append(jets.constant(np.broadcast_to(c, batch), self.source.dim, batch))
        return out

    def compose(self, coords):
        comps = list(self.components(coords))
        if len(comps) != self.target.dim:
            raise ArgumentError(
                f"map {self.label!r} returned {len(comps)} components, target has {self.target.dim}"
            )
        return comps

    def __call__(self, x):
        return self.evaluate(x)

    def evaluate(self, x):
        x, batch = _batch_of(x)
        vals, _, _ = pack(self.jets(x), batch, self.source.dim, with_hessian=False)
        return vals

    def differential(self, x):
        """Values ``B+(n,)``, Jacobian ``B+(n,m)`` and Hessians ``B+(n,m,m)``."""
        x, batch = _batch_of(x)
        return pack(self.jets(x), batch, self.source.dim)


def scalar_map(chart, fn, label=""):
    """Wrap ``fn(coords) -> jet`` as a SmoothMap into R."""
    return SmoothMap(chart, Chart(1, "R"), lambda X: [fn(X)], label)


def as_scalar_map(u, chart):
    if isinstance(u, SmoothMap):
        if u.target.dim != 1:
            raise ArgumentError("expected a scalar-valued map")
        return u
    return scalar_map(chart, u)


def metric_gradient(u, g, x):
    """Gradient ``g^{-1} du`` and ``|grad u|^2`` (first-order jet) at ``x``."""
    u = as_scalar_map(u, g.chart)
    x, batch = _batch_of(x)
    _, du, d2u = u.differential(x)
    du, d2u = du[..., 0, :], d2u[..., 0, :, :]
    G, dG = g.at(x)
    Ginv, dGinv = inverse_with_derivative(G, dG)
    grad = np.einsum("...ij,...j->...i", Ginv, du)
    value = np.einsum("...i,...i->...", grad, du)
    d_value = np.einsum("...ijk,...i,...j->...k", dGinv, du, du) + 2.0 * np.einsum(
        "...ij,...ik,...j->...k", Ginv, d2u, du
    )
    return grad, Jet2(value, d_value)


@dataclass(frozen=True)
class PointFrame:
    point: np.ndarray
    vertical_basis: np.ndarray
    horizontal_basis: np.ndarray
    rank: int
    singular_values: np.ndarray
    near_degenerate: bool = False


def orthonormal_frame(G):
    """Columns form a G-orthonormal basis: ``E^T G E = I``."""
    L = np.linalg.cholesky(G)
    return np.swapaxes(np.linalg.inv(L), -1, -2)


def metric_gram_schmidt(vectors, G, count=None, tol=1e-12):
    """Modified Gram-Schmidt in the G inner product, pivoting on largest remaining norm.

    Ties go to the lowest column index.  Stops after ``count`` vectors or when
    every remaining vector has norm below ``tol``.
    """
    G = np.asarray(G, dtype=float)
    remaining = [np.asarray(v, dtype=float) for v in np.asarray(vectors, dtype=float).T]
    count = len(remaining) if count is None else count
    basis = []
    while remaining and len(basis) < count:
        norms = [float(np.sqrt(max(v @ G @ v, 0.0))) for v in remaining]
        k = int(np.argmax(norms))
        if norms[k] < tol:
            break
        q = remaining.pop(k) / norms[k]
        basis.append(q)
        remaining = [v - (q @ G @ v) * q for v in remaining]
    m = G.shape[0]
    return np.array(basis).T if basis else np.zeros((m, 0))


def rank_from_singular_values(s, rank_tol=DEFAULT_RANK_TOL):
    """Numerical rank and near-degeneracy flag from descending singular values."""
    s = np.asarray(s, dtype=float)
    if s.shape[-1] == 0:
        return np.zeros(s.shape[:-1], dtype=int), np.zeros(s.shape[:-1], dtype=bool)
    top = s[..., :1]
    ratio = np.divide(s, top, out=np.zeros_like(s), where=top > 0)
    rank = np.sum(ratio > rank_tol, axis=-1)
    near = np.any(
        (ratio > rank_tol / NEAR_DEGENERATE_BAND) & (ratio < rank_tol * NEAR_DEGENERATE_BAND),
        axis=-1,
    )
    return rank, near


def differential_frame(phi, g, h, x, rank_tol=DEFAULT_RANK_TOL):
    """Split the source tangent space at ``x`` into ker dphi and its g-complement."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ArgumentError("differential_frame takes a single point")
    y, J, _ = phi.differential(x)
    G, _ = g.at(x)
    H, _ = h.at(y)
    E = orthonormal_frame(G)
    A = np.linalg.cholesky(H).T @ J @ E
    _, s, vt = np.linalg.svd(A)
    rank, near = rank_from_singular_values(s, rank_tol)
    rank = int(rank)
    m = g.dim
    kernel = E @ vt.T[:, rank:] if rank < m else np.zeros((m, 0))
    vertical = metric_gram_schmidt(kernel, G, count=m - rank)
    # Horizontal: coordinate directions with the vertical part removed.
    cand = np.eye(m)
    if vertical.shape[1]:
        cand = cand - vertical @ (vertical.T @ G @ cand)
    horizontal = metric_gram_schmidt(cand, G, count=rank)
    return PointFrame(x, vertical, horizontal, rank, s, bool(near))
