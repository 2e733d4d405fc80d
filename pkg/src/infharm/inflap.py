"""Energy density, infinity Laplacian, tension field, p-Laplacian and classification.

All operators accept one point (shape ``(m,)``) or a stack of points
(``(N, m)``).  Target-tangent vectors are returned in target chart
coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import jets
from .errors import ArgumentError, DegenerateProbeError, SingularPointError
from .geometry import (
    DEFAULT_RANK_TOL,
    Chart,
    Metric,
    SmoothMap,
    as_scalar_map,
    _attach_point,
    check_positive_definite,
    christoffel_from,
    inverse_with_derivative,
    metric_gradient,
    orthonormal_frame,
    pack,
    rank_from_singular_values,
)
from .jets import Jet2

DEFAULT_TOL = 1e-7

INFINITY_HARMONIC = "infinity_harmonic"
HWC = "hwc"
HORIZONTALLY_HOMOTHETIC = "horizontally_homothetic"
MORPHISM = "infinity_harmonic_morphism"
NONE = "none"
VERDICT_ORDER = (INFINITY_HARMONIC, HWC, HORIZONTALLY_HOMOTHETIC, MORPHISM)


@dataclass
class _Local:
    """First and second order data of a map at a batch of points."""

    x: np.ndarray
    y: np.ndarray  # phi(x)
    J: np.ndarray  # B+(n,m)
    D2: np.ndarray  # B+(n,m,m)
    G: np.ndarray
    dG: np.ndarray
    Ginv: np.ndarray
    dGinv: np.ndarray
    H: np.ndarray  # h at phi(x)
    dH: np.ndarray  # source derivatives of h o phi, B+(n,n,m)


def _local(phi, g, h, x):
    x = np.asarray(x, dtype=float)
    batch = x.shape[:-1]
    comps = phi.jets(x)
    y, J, D2 = pack(comps, batch, phi.source.dim)
    G, dG = g.at(x)
    Ginv, dGinv = inverse_with_derivative(G, dG)
    try:
        H, dH, _ = h.matrix(comps, batch, phi.source.dim)
    except SingularPointError as err:
        raise _attach_point(err, x) from None
    check_positive_definite(H)
    return _Local(x, y, J, D2, G, dG, Ginv, dGinv, H, dH)


def _energy(loc):
    K = np.einsum("...ai,...ij,...bj->...ab", loc.J, loc.Ginv, loc.J)
    E = np.einsum("...ab,...ab->...", K, loc.H)
    dE = (
        np.einsum("...ijk,...ai,...bj,...ab->...k", loc.dGinv, loc.J, loc.J, loc.H)
        + 2.0 * np.einsum("...ij,...aik,...bj,...ab->...k", loc.Ginv, loc.D2, loc.J, loc.H)
        + np.einsum("...ab,...abk->...k", K, loc.dH)
    )
    return E, dE


def _inf_lap(loc, dE):
    gradE = np.einsum("...kl,...l->...k", loc.Ginv, dE)
    return 0.5 * np.einsum("...ak,...k->...a", loc.J, gradE), gradE


def _hnorm(v, H):
    return np.sqrt(np.maximum(np.einsum("...a,...ab,...b->...", v, H, v), 0.0))


def energy_density(phi, g, h, x):
    """``|dphi|^2`` as a first-order jet (value and source gradient)."""
    loc = _local(phi, g, h, x)
    E, dE = _energy(loc)
    return Jet2(E, dE)


def inf_laplacian_map(phi, g, h, x):
    """``1/2 dphi(grad |dphi|^2)`` in target coordinates."""
    loc = _local(phi, g, h, x)
    _, dE = _energy(loc)
    return _inf_lap(loc, dE)[0]


def inf_laplacian_function(u, g, x):
    """``1/2 g(grad u, grad |grad u|^2)`` for a scalar function (map or jet callable)."""
    u = as_scalar_map(u, g.chart)
    grad, normsq = metric_gradient(u, g, x)
    grad_normsq, _ = metric_gradient_of_jet(normsq, g, x)
    G, _ = g.at(x)
    return 0.5 * np.einsum("...i,...ij,...j->...", grad, G, grad_normsq)


def metric_gradient_of_jet(a, g, x):
    """g-gradient of a jet-valued function whose differential is ``a.gradient``."""
    Ginv = g.inverse(x)
    return np.einsum("...kl,...l->...k", Ginv, a.gradient), Ginv


def euclidean_component_system(phi, x):
    """Left-hand sides ``sum_b <grad phi^a, grad |grad phi^b|^2>`` for Euclidean data.

    Independent of :func:`inf_laplacian_map`: each component's squared
    gradient norm is differentiated on its own.  Equals twice the infinity
    Laplacian.
    """
    comps = phi.jets(x)
    grads = [c.gradient for c in comps]
    norm_grads = [2.0 * np.einsum("...ij,...j->...i", c.hessian, c.gradient) for c in comps]
    total = sum(norm_grads)
    return np.stack([np.einsum("...i,...i->...", ga, total) for ga in grads], axis=-1)


def tension_field(phi, g, h, x):
    """``Trace_g nabla dphi`` in target coordinates."""
    loc = _local(phi, g, h, x)
    gamma_g = christoffel_from(loc.Ginv, loc.dG)
    Hy, dHy = h.at(loc.y)
    gamma_h = christoffel_from(np.linalg.inv(Hy), dHy)
    second = loc.D2 - np.einsum("...kij,...ak->...aij", gamma_g, loc.J)
    second = second + np.einsum("...cab,...ai,...bj->...cij", gamma_h, loc.J, loc.J)
    return np.einsum("...ij,...cij->...c", loc.Ginv, second)


def p_laplacian(phi, g, h, x, p):
    """``|dphi|^{p-2} tau + (p-2) |dphi|^{p-4} * 1/2 dphi(grad |dphi|^2)``."""
    if p <= 1:
        raise ArgumentError("p must exceed 1")
    loc = _local(phi, g, h, x)
    E, dE = _energy(loc)
    lap = _inf_lap(loc, dE)[0]
    tau = tension_field(phi, g, h, x)
    if p == 2:
        return tau
    if np.any(E <= 0.0) and p < 4:
        bad = np.argwhere(np.atleast_1d(E) <= 0.0)[0]
        raise SingularPointError(
            "vanishing energy density with negative power",
            point=np.asarray(x) if np.ndim(x) == 1 else np.asarray(x)[tuple(bad)],
        )
    norm = np.sqrt(E)
    return (norm ** (p - 2))[..., None] * tau + ((p - 2) * norm ** (p - 4))[..., None] * lap


# -- reports and classification ---------------------------------------------


@dataclass
class MapReport:
    point: np.ndarray
    energy_density: float
    inf_laplacian: np.ndarray
    tension: np.ndarray
    dilation_sq: float
    conformality_residual: float
    energy_gradient_vertical_residual: float
    rank: int
    flags: frozenset = frozenset()
    inf_laplacian_residual: float = 0.0
    homothety_residual: float = 0.0


def _residuals(phi, g, h, x, rank_tol=DEFAULT_RANK_TOL):
    """Per-point residual arrays for classification (batched)."""
    loc = _local(phi, g, h, x)
    E, dE = _energy(loc)
    lap, gradE = _inf_lap(loc, dE)
    m = phi.source.dim
    n_eff = phi.image_dim

    Eg = orthonormal_frame(loc.G)
    Lh = np.linalg.cholesky(loc.H)
    A = np.einsum("...ba,...bc,...ci->...ai", Lh, loc.J, Eg)  # L_h^T J E
    _, s, vt = np.linalg.svd(A)
    rank, near = rank_from_singular_values(s, rank_tol)

    k = s.shape[-1]
    idx = np.arange(m)
    horizontal_mask = idx < rank[..., None]  # first `rank` right singular vectors
    # grad E in g-orthonormal coordinates is L_g^T gradE
    Lg = np.linalg.cholesky(loc.G)
    c = np.einsum("...ji,...j->...i", Lg, gradE)
    proj = np.einsum("...ij,...j->...i", vt, c)
    horiz = np.sqrt(np.sum(np.where(horizontal_mask, proj, 0.0) ** 2, axis=-1))

    safe_rank = np.maximum(rank, 1)
    dil = np.where(rank > 0, E / safe_rank, 0.0)
    s2 = np.zeros(s.shape[:-1] + (max(n_eff, k),))
    s2[..., :k] = s * s
    s2 = s2[..., :n_eff]
    spread = np.max(np.abs(s2 - dil[..., None]), axis=-1) if n_eff else np.zeros_like(E)
    safe_dil = np.where(dil > 0, dil, 1.0)
    conf = np.where(rank > 0, spread / safe_dil, 0.0)

    scale = np.maximum(E, 1.0) ** 2
    lap_norm = _hnorm(lap, loc.H)
    hom_vec = np.einsum("...ak,...k->...a", loc.J, gradE) / safe_rank[..., None]
    hom = np.where(rank > 0, _hnorm(hom_vec, loc.H), 0.0)
    safe_E = np.where(E > 0, E, 1.0)
    return {
        "x": loc.x,
        "energy": E,
        "lap": lap,
        "lap_norm": lap_norm,
        "inf_residual": lap_norm / scale,
        "vertical_residual": np.where(E > 0, horiz / safe_E, 0.0),
        "conformality_residual": conf,
        "homothety_residual": hom / scale,
        "dilation_sq": dil,
        "rank": rank,
        "near": near,
        "singular_values": s,
    }


def map_report(phi, g, h, x, rank_tol=DEFAULT_RANK_TOL):
    """Diagnostic record for a single point."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ArgumentError("map_report takes a single point")
    r = _residuals(phi, g, h, x, rank_tol)
    rank = int(r["rank"])
    flags = set()
    if rank == 0:
        flags.add("critical")
    if bool(r["near"]):
        flags.add("near_degenerate")
    return MapReport(
        point=x,
        energy_density=float(r["energy"]),
        inf_laplacian=r["lap"],
        tension=tension_field(phi, g, h, x),
        dilation_sq=float(r["dilation_sq"]),
        conformality_residual=float(r["conformality_residual"]),
        energy_gradient_vertical_residual=float(r["vertical_residual"]),
        rank=rank,
        flags=frozenset(flags),
        inf_laplacian_residual=float(r["inf_residual"]),
        homothety_residual=float(r["homothety_residual"]),
    )


@dataclass
class Classification:
    verdict: frozenset
    tolerance: float
    sample_count: int
    worst_residuals: dict
    worst_points: dict = field(default_factory=dict)
    near_degenerate_count: int = 0
    critical_count: int = 0

    def has(self, flag):
        return flag in self.verdict

    def as_dict(self):
        return {
            "verdict": sorted(self.verdict),
            "tolerance": self.tolerance,
            "sample_count": self.sample_count,
            "worst_residuals": {k: float(v) for k, v in sorted(self.worst_residuals.items())},
            "near_degenerate_count": self.near_degenerate_count,
            "critical_count": self.critical_count,
        }


def assemble_verdict(worst, tol):
    """Verdict set from worst residuals; the morphism flag implies its three parts."""
    verdict = set()
    if worst["infinity_harmonic"] < tol:
        verdict.add(INFINITY_HARMONIC)
    if worst["conformality"] < tol:
        verdict.add(HWC)
        if worst["homothety"] < tol:
            verdict.add(HORIZONTALLY_HOMOTHETIC)
    if {INFINITY_HARMONIC, HWC, HORIZONTALLY_HOMOTHETIC} <= verdict:
        verdict.add(MORPHISM)
    if not verdict:
        verdict.add(NONE)
    check_verdict(verdict)
    return frozenset(verdict)


def check_verdict(verdict):
    if MORPHISM in verdict:
        assert {HWC, INFINITY_HARMONIC, HORIZONTALLY_HOMOTHETIC} <= set(verdict), verdict
    if HORIZONTALLY_HOMOTHETIC in verdict:
        assert HWC in verdict, verdict
    if NONE in verdict:
        assert len(verdict) == 1, verdict


def classify(phi, g, h, sample_points, tol=DEFAULT_TOL, rank_tol=DEFAULT_RANK_TOL):
    """Residual-based classification over sample points."""
    pts = np.asarray(sample_points, dtype=float)
    if pts.size == 0:
        raise ArgumentError("classify needs at least one sample point")
    pts = pts.reshape(-1, phi.source.dim)
    r = _residuals(phi, g, h, pts, rank_tol)
    keys = {
        "infinity_harmonic": "inf_residual",
        "verticality": "vertical_residual",
        "conformality": "conformality_residual",
        "homothety": "homothety_residual",
    }
    worst, where = {}, {}
    for name, key in keys.items():
        vals = r[key]
        i = int(np.argmax(vals))
        worst[name] = float(vals[i])
        where[name] = pts[i].tolist()
    return Classification(
        verdict=assemble_verdict(worst, tol),
        tolerance=tol,
        sample_count=len(pts),
        worst_residuals=worst,
        worst_points=where,
        near_degenerate_count=int(np.sum(r["near"])),
        critical_count=int(np.sum(r["rank"] == 0)),
    )


# -- linear maps ------------------------------------------------------------


@dataclass(frozen=True)
class LinearCheck:
    is_morphism: bool
    lam: float | None


def linear_morphism_check(A, tol=1e-10):
    """Onto with ``A A^T = lambda^2 I``: a horizontally conformal linear submersion."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[0]
    if np.linalg.matrix_rank(A) < n:
        return LinearCheck(False, None)
    AAt = A @ A.T
    lam2 = np.trace(AAt) / n
    if np.max(np.abs(AAt - lam2 * np.eye(n))) > tol * max(1.0, lam2):
        return LinearCheck(False, None)
    return LinearCheck(True, float(np.sqrt(lam2)))


def distance_pullback(A):
    """``x -> |A x|``, the pullback of the distance from the origin."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n, m = A.shape

    def comps(X):
        total = 0.0
        for i in range(n):
            row = sum(A[i, j] * X[j] for j in range(m) if A[i, j] != 0.0)
            total = total + row * row
        return [jets.sqrt(total)]

    return SmoothMap(Chart(m, f"R{m}"), Chart(1, "R"), comps, "dist(0, A x)")


def blowup_witness_direction(A):
    """Unit direction mixing the extreme horizontal singular directions of A."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    _, s, vt = np.linalg.svd(A)
    v = vt[0] + vt[len(s) - 1]
    return v / np.linalg.norm(v)


def morphism_blowup_probe(A, radii, direction=None):
    """``|Delta_inf (|A x|)|`` at ``r * direction`` for each radius."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if np.linalg.matrix_rank(A) < A.shape[0]:
        raise ArgumentError("probe needs an onto linear map")
    if linear_morphism_check(A).is_morphism:
        raise DegenerateProbeError("map is horizontally conformal; the probe sequence is identically zero")
    w = blowup_witness_direction(A) if direction is None else np.asarray(direction, dtype=float)
    u = distance_pullback(A)
    g = Metric.euclidean(u.source)
    pts = np.array([r * w for r in radii])
    return [float(abs(v)) for v in inf_laplacian_function(u, g, pts)]


def pullback_energy_check(pi, f, g, h, sample_points, rank_tol=DEFAULT_RANK_TOL):
    """Max of ``| |grad(f o pi)|^2 - lambda^2 (|grad f|^2 o pi) |`` over samples.

    ``|grad f|`` is measured along the image of ``dpi`` (the tangent space of
    the target submanifold for ambient-embedded targets).
    """
    pts = np.asarray(sample_points, dtype=float).reshape(-1, pi.source.dim)
    f = as_scalar_map(f, pi.target)
    comp = SmoothMap(pi.source, Chart(1, "R"), lambda X: f.compose(pi.compose(X)), "f o pi")
    _, normsq = metric_gradient(comp, g, pts)
    r = _residuals(pi, g, h, pts, rank_tol)
    y = pi.evaluate(pts)
    _, df, _ = f.differential(y)
    df = df[..., 0, :]
    H, _ = h.at(y)
    Lh = np.linalg.cholesky(H)
    cf = np.linalg.solve(Lh, df[..., None])[..., 0]
    # range of L_h^T J E is spanned by the leading left singular vectors
    _, J, _ = pi.differential(pts)
    G, _ = g.at(pts)
    A = np.einsum("...ba,...bc,...ci->...ai", Lh, J, orthonormal_frame(G))
    U, _, _ = np.linalg.svd(A)
    proj = np.einsum("...ji,...j->...i", U, cf)
    mask = np.arange(U.shape[-1]) < r["rank"][..., None]
    target_normsq = np.sum(np.where(mask, proj, 0.0) ** 2, axis=-1)
    resid = np.abs(normsq.value - r["dilation_sq"] * target_normsq)
    return float(np.max(resid))
