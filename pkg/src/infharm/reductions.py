"""Symmetric reductions of the infinity harmonic map equation to ODEs.

Two families are covered.  Rotationally symmetric maps ``B^n -> S^n`` of the
form ``(r, theta) -> (rho(r), theta)`` have energy density
``rho'^2 + (n-1) sin^2(rho) / r^2``.  Maps from the cylinder
``(s, t) -> (cos a(s), sin a(s) e^{ikt})`` into S^2 have energy density
``a'^2 + k^2 sin^2 a``.  In both cases infinity harmonicity away from the
equator branch reduces to constancy of that quantity.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import jets
from .errors import ArgumentError, InfeasibleConstantError, WrongRegimeError
from .geometry import Chart, Metric, SmoothMap
from .inflap import energy_density, inf_laplacian_map

EQUATOR = "equator"
BALL_PROFILE = "ball_profile"
CYLINDER_CONSTANT = "cylinder_constant"
CYLINDER_KINK = "cylinder_kink"
CYLINDER_PENDULUM = "cylinder_pendulum"


@dataclass(frozen=True)
class ReductionSolution:
    kind: str
    parameter: np.ndarray
    value: np.ndarray
    derivative: np.ndarray
    conserved_constant: float | None
    params: dict = field(default_factory=dict)
    events: tuple = ()
    period: float | None = None

    @property
    def samples(self):
        return list(zip(self.parameter.tolist(), self.value.tolist(), self.derivative.tolist()))

    def invariant(self):
        """The conserved expression evaluated at every sample."""
        p, v, d = self.parameter, self.value, self.derivative
        if self.kind in (BALL_PROFILE, EQUATOR):
            n = self.params["n"]
            return d * d + (n - 1) * np.sin(v) ** 2 / (p * p)
        k = self.params["k"]
        return d * d + k * k * np.sin(v) ** 2

    def invariant_residual(self):
        """``|invariant - C|``; for the equator the energy ``(n-1)/r^2`` is the reference."""
        inv = self.invariant()
        if self.kind == EQUATOR:
            return np.abs(inv - (self.params["n"] - 1) / self.parameter**2)
        return np.abs(inv - self.conserved_constant)

    def to_csv(self, out=None):
        """Write ``parameter,value,derivative,invariant_residual`` rows; returns the text."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["parameter", "value", "derivative", "invariant_residual"])
        for row in zip(self.parameter, self.value, self.derivative, self.invariant_residual()):
            writer.writerow([repr(float(c)) for c in row])
        text = buf.getvalue()
        if out is not None:
            with open(out, "w") as fh:
                fh.write(text)
        return text


def rk4_step(f, t, y, h):
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, [a + 0.5 * h * b for a, b in zip(y, k1)])
    k3 = f(t + 0.5 * h, [a + 0.5 * h * b for a, b in zip(y, k2)])
    k4 = f(t + h, [a + h * b for a, b in zip(y, k3)])
    return [a + h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4) for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4)]


def integrate(f, y0, t0, t1, step, stop=None):
    """Fixed-step classical RK4 from t0 to t1 (either direction).

    ``stop(t, y)`` may return a message to end integration early; the
    message is returned as the event.  Returns (ts, ys, event).
    """
    if step <= 0:
        raise ArgumentError("step must be positive")
    count = max(1, int(round(abs(t1 - t0) / step)))
    h = (t1 - t0) / count
    ts, ys = [t0], [list(y0)]
    y = list(y0)
    for i in range(count):
        t = t0 + i * h
        y = rk4_step(f, t, y, h)
        t_next = t0 + (i + 1) * h
        msg = stop(t_next, y) if stop else None
        if msg:
            return np.array(ts), np.array(ys), msg
        ts.append(t_next)
        ys.append(y)
    return np.array(ts), np.array(ys), None


# -- ball B^n -> S^n -----------------------------------------------------------


class _TurningPoint(Exception):
    pass


def solve_ball_profile(n, C, r_range=(0.5, 1.0), rho_at_1=math.pi / 2, step=1e-4, sign=1.0):
    """Profile with ``rho'^2 + (n-1) sin^2(rho) / r^2 = C``, integrated inward from r = 1.

    RK4 on ``rho' = sign * sqrt(C - (n-1) sin^2(rho) / r^2)``.  If the square
    root argument turns negative the run stops there and a turning-point
    event is recorded; no branch switching is attempted.
    """
    if n < 2:
        raise ArgumentError("n must be at least 2")
    r0, r1 = r_range
    if not 0.0 < r0 < r1:
        raise ArgumentError("need 0 < r0 < r1; the ODE is singular at r = 0")
    m = n - 1
    if C < m * math.sin(rho_at_1) ** 2 / r1**2:
        raise InfeasibleConstantError(
            f"C = {C:g} is below (n-1) sin^2(rho(1)) = {m * math.sin(rho_at_1) ** 2 / r1**2:g}; "
            "rho' would be imaginary"
        )

    def slope(r, rho):
        arg = C - m * math.sin(rho) ** 2 / (r * r)
        if arg < 0.0:
            raise _TurningPoint(r)
        return math.copysign(math.sqrt(arg), sign)

    count = max(1, int(round((r1 - r0) / step)))
    h = (r0 - r1) / count
    rs, rhos, ds = [r1], [rho_at_1], [slope(r1, rho_at_1)]
    event = None
    rho = rho_at_1
    for i in range(count):
        r = r1 + i * h
        try:
            k1 = slope(r, rho)
            k2 = slope(r + 0.5 * h, rho + 0.5 * h * k1)
            k3 = slope(r + 0.5 * h, rho + 0.5 * h * k2)
            k4 = slope(r + h, rho + h * k3)
            nxt = rho + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            d = slope(r1 + (i + 1) * h, nxt)
        except _TurningPoint as tp:
            event = f"turning point near r = {tp.args[0]:.6g}"
            break
        rho = nxt
        rs.append(r1 + (i + 1) * h)
        rhos.append(rho)
        ds.append(d)
    params = {"n": n, "rho_at_1": rho_at_1, "step": step, "sign": sign, "r_range": [r0, r1]}
    order = slice(None, None, -1)
    return ReductionSolution(
        BALL_PROFILE, np.array(rs)[order], np.array(rhos)[order], np.array(ds)[order], float(C),
        params, events=(event,) if event else (),
    )


def equator(n, r_range=(0.1, 1.0), count=50):
    """Equator branch ``rho = pi/2``: the map ``x -> x/|x|``, energy ``(n-1)/r^2``."""
    if n < 2:
        raise ArgumentError("n must be at least 2")
    r = np.linspace(r_range[0], r_range[1], count)
    return ReductionSolution(EQUATOR, r, np.full_like(r, math.pi / 2), np.zeros_like(r), None, {"n": n})


# -- cylinder -> S^2 ---------------------------------------------------------------


def _check_k(k):
    if k == 0 or int(k) != k:
        raise ArgumentError("k must be a nonzero integer")
    return int(k)


def cylinder_kink(k, A=0.0, s_range=(-5.0, 5.0), step=0.01):
    """Closed form ``a(s) = 2 arctan(e^{ks+A}) - pi/2`` with conserved value k^2."""
    k = _check_k(k)
    count = max(1, int(round((s_range[1] - s_range[0]) / step)))
    s = np.linspace(s_range[0], s_range[1], count + 1)
    z = k * s + A
    alpha = 2.0 * np.arctan(np.exp(z)) - math.pi / 2
    return ReductionSolution(
        CYLINDER_KINK, s, alpha, k / np.cosh(z), float(k * k), {"k": k, "A": A, "step": step}
    )


def cylinder_constant(k, alpha, s_range=(-1.0, 1.0), count=50):
    """Constant profile: energy ``k^2 sin^2(alpha)``."""
    k = _check_k(k)
    s = np.linspace(s_range[0], s_range[1], count)
    return ReductionSolution(
        CYLINDER_CONSTANT, s, np.full_like(s, float(alpha)), np.zeros_like(s),
        float(k * k * math.sin(alpha) ** 2), {"k": k, "alpha": float(alpha)},
    )


def pendulum_energy(theta, dtheta, k):
    return 0.5 * dtheta * dtheta - k * k * np.cos(theta)


def cylinder_pendulum(k, C, alpha0=0.0, s_max=None, step=1e-3, periods=2):
    """Circulating profile (C > k^2): ``theta = 2a`` solves ``theta'' + k^2 sin theta = 0``.

    Integrates the pendulum for ``theta`` with RK4 and records the period of
    ``a``: the first time ``a`` has advanced by 2 pi, by linear interpolation.
    Without ``s_max`` the run covers ``periods`` periods (bounded above
    using ``C - k^2``).
    """
    k = _check_k(k)
    if C <= k * k:
        raise WrongRegimeError(
            f"C = {C:g} <= k^2 = {k * k}: not the circulating pendulum branch; "
            "use the kink (C = k^2) or constant-profile branch"
        )
    d0 = math.sqrt(C - k * k * math.sin(alpha0) ** 2)
    if s_max is None:
        s_max = periods * 2.0 * math.pi / math.sqrt(C - k * k) * 1.01
    kk = float(k * k)

    def rhs(_s, y):
        return [y[1], -kk * math.sin(y[0])]

    s, ys, _ = integrate(rhs, [2.0 * alpha0, 2.0 * d0], 0.0, s_max, step)
    alpha, dalpha = 0.5 * ys[:, 0], 0.5 * ys[:, 1]
    period = None
    target = alpha0 + 2.0 * math.pi
    hit = np.nonzero(alpha >= target)[0]
    if hit.size:
        i = int(hit[0])
        w = (target - alpha[i - 1]) / (alpha[i] - alpha[i - 1])
        period = float(s[i - 1] + w * (s[i] - s[i - 1]))
    return ReductionSolution(
        CYLINDER_PENDULUM, s, alpha, dalpha, float(C),
        {"k": k, "alpha0": alpha0, "step": step, "s_max": s_max}, period=period,
    )


# -- reconstruction ----------------------------------------------------------------


def _profile_jet(sol, second):
    """Jet function ``f(r_jet)`` interpolating the profile samples and the ODE's second derivative."""
    p, v, d = sol.parameter, sol.value, sol.derivative

    def f(r):
        rv = r.value
        return jets.apply_scalar(r, np.interp(rv, p, v), np.interp(rv, p, d), second(rv, np.interp(rv, p, v), np.interp(rv, p, d)))

    return f


@dataclass(frozen=True)
class VerificationSummary:
    kind: str
    sample_count: int
    max_inf_laplacian: float
    max_energy_error: float
    energy_reference: str

    def as_dict(self):
        return {
            "kind": self.kind,
            "sample_count": self.sample_count,
            "max_inf_laplacian": self.max_inf_laplacian,
            "max_energy_error": self.max_energy_error,
            "energy_reference": self.energy_reference,
        }


def reconstruct(sol):
    """Full map, source metric, target metric and sample points for a solution."""
    if sol.kind in (BALL_PROFILE, EQUATOR):
        n = sol.params["n"]
        m = n - 1

        def second(r, rho, d):
            safe = np.where(d == 0.0, 1.0, d)
            out = m * (np.sin(rho) ** 2 / (r**3 * safe) - np.sin(rho) * np.cos(rho) / r**2)
            return np.where(d == 0.0, 0.0, out)

        prof = _profile_jet(sol, second)
        src = Chart(n, f"B{n}")

        def comps(X):
            r = jets.sqrt(sum(c * c for c in X))
            rho = prof(r)
            s = jets.sin(rho) / r
            return [s * c for c in X] + [jets.cos(rho)]

        phi = SmoothMap(src, Chart(n + 1, f"R{n + 1}"), comps, sol.kind, manifold_dim=n)
        radii = sol.parameter[:: max(1, len(sol.parameter) // 50)]
        angles = np.linspace(0.0, 2.0 * math.pi, 50, endpoint=False)
        if n == 2:
            pts = np.array([[r * math.cos(a), r * math.sin(a)] for r in radii for a in angles])
        else:
            rng = np.random.default_rng(0)
            dirs = rng.normal(size=(len(angles), n))
            dirs /= np.linalg.norm(dirs, axis=1)[:, None]
            pts = np.array([r * w for r in radii for w in dirs])
        return phi, Metric.euclidean(src), Metric.euclidean(phi.target), pts

    k = sol.params["k"]
    kk = float(k * k)

    def second(s, a, d):
        return -kk * np.sin(a) * np.cos(a) + 0.0 * d

    prof = _profile_jet(sol, second)
    src = Chart(2, "cylinder")

    def comps(X):
        a = prof(X[0])
        sa = jets.sin(a)
        return [jets.cos(a), sa * jets.cos(k * X[1]), sa * jets.sin(k * X[1])]

    phi = SmoothMap(src, Chart(3, "R3"), comps, sol.kind, manifold_dim=2)
    params = sol.parameter[:: max(1, len(sol.parameter) // 50)]
    ts = np.linspace(0.0, 2.0 * math.pi, 50, endpoint=False)
    pts = np.array([[s, t] for s in params for t in ts])
    return phi, Metric.euclidean(src), Metric.euclidean(phi.target), pts


def reconstruct_and_verify(sol):
    """Rebuild the map on a grid through the profile samples; measure Delta_inf and energy."""
    phi, g, h, pts = reconstruct(sol)
    lap = np.linalg.norm(inf_laplacian_map(phi, g, h, pts), axis=-1)
    energy = energy_density(phi, g, h, pts).value
    if sol.kind == EQUATOR:
        r = np.linalg.norm(pts, axis=-1)
        reference, label = (sol.params["n"] - 1) / r**2, "(n-1)/r^2"
    else:
        reference, label = sol.conserved_constant, "conserved constant"
    return VerificationSummary(
        sol.kind, len(pts), float(np.max(lap)), float(np.max(np.abs(energy - reference))), label
    )
