import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from infharm import jets
from infharm.catalog import catalog_entries, catalog_get
from infharm.errors import ArgumentError, DegenerateMetricError, SingularPointError
from infharm.geometry import Chart, Metric, SmoothMap, christoffel, differential_frame, metric_gradient, scalar_map
from strategies import finite, matrices, points

R2 = Chart(2, "R2")
R3 = Chart(3, "R3")


def diag_metric(chart, fn):
    n = chart.dim
    return Metric(chart, lambda X: [[fn(X)[i] if i == j else 0.0 for j in range(n)] for i in range(n)])


def test_chart_dimension_must_be_positive():
    with pytest.raises(ArgumentError):
        Chart(0)


def test_gradient_of_coordinate():
    grad, normsq = metric_gradient(scalar_map(R2, lambda X: X[0]), Metric.euclidean(R2), np.array([0.3, -1.2]))
    np.testing.assert_array_equal(grad, [1.0, 0.0])
    assert normsq.value == 1.0


def test_gradient_of_angle_function():
    u = scalar_map(R2, lambda X: jets.atan(X[0] / X[1]))
    _, normsq = metric_gradient(u, Metric.euclidean(R2), np.array([1.0, 1.0]))
    assert math.isclose(normsq.value, 0.5, rel_tol=1e-14)
    # finite-difference oracle of |grad u|^2 = 1/|x|^2
    h = 1e-6
    f = lambda a, b: math.atan(a / b)
    gx = (f(1 + h, 1) - f(1 - h, 1)) / (2 * h)
    gy = (f(1, 1 + h) - f(1, 1 - h)) / (2 * h)
    assert abs(gx * gx + gy * gy - 0.5) < 1e-9


def test_gradient_scaled_by_inverse_metric():
    g = diag_metric(R2, lambda X: [4.0, 1.0])
    grad, normsq = metric_gradient(scalar_map(R2, lambda X: X[0]), g, np.array([0.0, 0.0]))
    np.testing.assert_allclose(grad, [0.25, 0.0])
    assert math.isclose(normsq.value, 0.25)


def test_euclidean_christoffel_vanishes():
    assert not christoffel(Metric.euclidean(R3), np.array([1.0, 2.0, 3.0])).any()


def test_polar_plane_christoffel():
    gamma = christoffel(diag_metric(R2, lambda X: [1.0, X[0] * X[0]]), np.array([2.0, 0.7]))
    expected = np.zeros((2, 2, 2))
    expected[0, 1, 1] = -2.0
    expected[1, 0, 1] = expected[1, 1, 0] = 0.5
    np.testing.assert_allclose(gamma, expected, atol=1e-15)


def test_sphere_polar_christoffel():
    gamma = christoffel(diag_metric(R2, lambda X: [1.0, jets.sin(X[0]) ** 2]), np.array([math.pi / 4, 0.0]))
    assert math.isclose(gamma[0, 1, 1], -0.5, rel_tol=1e-14)


def test_degenerate_metric_rejected():
    g = diag_metric(R2, lambda X: [1.0, X[0] * X[0]])
    with pytest.raises(DegenerateMetricError):
        g.at(np.array([0.0, 1.0]))


def test_singular_component_reports_point():
    u = scalar_map(R2, lambda X: X[0] / X[1])
    with pytest.raises(SingularPointError) as info:
        u.evaluate(np.array([[1.0, 1.0], [2.0, 0.0]]))
    np.testing.assert_array_equal(info.value.point, [2.0, 0.0])


def test_component_count_enforced():
    bad = SmoothMap(R2, R3, lambda X: [X[0], X[1]])
    with pytest.raises(ArgumentError):
        bad.evaluate(np.zeros(2))


def _catalog_metrics():
    seen = {}
    for e in catalog_entries():
        for g in (e.source_metric, e.target_metric):
            if not g.is_euclidean and g.label not in seen:
                region = e.sample_region if g is e.source_metric else None
                if region is not None:
                    seen[g.label] = (g, region)
    return sorted(seen.items())


@pytest.mark.parametrize("label, item", _catalog_metrics(), ids=[k for k, _ in _catalog_metrics()])
def test_metric_derivatives_match_finite_differences(label, item):
    g, region = item
    pts = region.random(100, seed=3)
    G, dG = g.at(pts)
    h = 1e-5
    for k in range(g.dim):
        e = np.zeros(g.dim)
        e[k] = h
        fd = (g.at(pts + e)[0] - g.at(pts - e)[0]) / (2 * h)
        scale = np.maximum(np.max(np.abs(fd), axis=(1, 2)), 1.0)
        assert np.max(np.max(np.abs(dG[..., k] - fd), axis=(1, 2)) / scale) < 1e-5
    assert np.max(np.abs(G @ np.linalg.inv(G) - np.eye(g.dim))) < 1e-10


@pytest.mark.parametrize("label, item", _catalog_metrics(), ids=[k for k, _ in _catalog_metrics()])
def test_christoffel_symmetric_in_lower_indices(label, item):
    g, region = item
    gamma = christoffel(g, region.random(20, seed=4))
    assert np.array_equal(gamma, np.swapaxes(gamma, -1, -2))


def test_projection_frame():
    phi = SmoothMap(R3, R2, lambda X: [X[0], X[1]])
    f = differential_frame(phi, Metric.euclidean(R3), Metric.euclidean(R2), np.array([0.1, 0.2, 0.3]))
    assert f.rank == 2
    np.testing.assert_allclose(np.abs(f.vertical_basis[:, 0]), [0.0, 0.0, 1.0])


def test_constant_map_frame_is_critical():
    phi = SmoothMap(R2, R2, lambda X: [3.0, -1.0])
    f = differential_frame(phi, Metric.euclidean(R2), Metric.euclidean(R2), np.array([0.5, 0.5]))
    assert f.rank == 0
    assert f.vertical_basis.shape == (2, 2)


def test_clifford_projection_frame():
    e = catalog_get("clifford_torus")
    f = differential_frame(e.map, e.source_metric, e.target_metric, np.array([math.pi / 4, 1.0, 2.0]))
    assert f.rank == 2
    np.testing.assert_allclose(np.abs(f.vertical_basis[:, 0]), [1.0, 0.0, 0.0], atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(matrices(2, 3), points(3), st.floats(0.3, 3.0, **finite), st.floats(0.3, 3.0, **finite))
def test_frames_orthonormal_and_complementary(A, x, a, b):
    phi = SmoothMap(R3, R2, lambda X: [sum(A[i, j] * X[j] for j in range(3)) for i in range(2)])
    g = Metric(R3, lambda X: [[a, 0.1, 0.0], [0.1, b, 0.0], [0.0, 0.0, 1.0 + 0.0 * X[0]]])
    f = differential_frame(phi, g, Metric.euclidean(R2), x)
    G, _ = g.at(x)
    B = np.hstack([f.vertical_basis, f.horizontal_basis])
    assert f.rank + f.vertical_basis.shape[1] == 3
    assert np.max(np.abs(B.T @ G @ B - np.eye(B.shape[1]))) < 1e-9
