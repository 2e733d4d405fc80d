import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from infharm import jets
from infharm.errors import ArgumentError, SingularPointError
from strategies import BATTERY, JET_LIB, NP_LIB, coords, finite

GRAD_STEP = 1e-5
HESS_STEP = 1e-4


def fd_gradient(f, x, h=GRAD_STEP):
    d = x.shape[-1]
    out = np.empty(x.shape)
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        out[..., i] = (f(x + e) - f(x - e)) / (2 * h)
    return out


def fd_hessian(f, x, h=HESS_STEP):
    d = x.shape[-1]
    out = np.empty(x.shape + (d,))
    for i in range(d):
        for j in range(d):
            ei, ej = np.zeros(d), np.zeros(d)
            ei[i], ej[j] = h, h
            out[..., i, j] = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (4 * h * h)
    return out


def rel_err(a, b):
    """Per-point error relative to the size of the reference."""
    axes = tuple(range(1, np.ndim(b)))
    return np.max(np.abs(a - b), axis=axes) / np.maximum(np.max(np.abs(b), axis=axes), 1.0)


@pytest.fixture(scope="module")
def sample_1000():
    return np.random.default_rng(2024).uniform(0.5, 1.5, size=(1000, 3))


@pytest.mark.parametrize("name", sorted(BATTERY))
def test_battery_matches_finite_differences(name, sample_1000):
    fn = BATTERY[name]
    jet = fn(jets.variables(sample_1000), JET_LIB)

    def plain(p):
        return fn([p[..., i] for i in range(3)], NP_LIB)

    np.testing.assert_allclose(jet.value, plain(sample_1000), rtol=1e-14)
    assert np.max(rel_err(jet.gradient, fd_gradient(plain, sample_1000))) < 1e-5
    assert np.max(rel_err(jet.hessian, fd_hessian(plain, sample_1000))) < 1e-5


@pytest.mark.parametrize("name", sorted(BATTERY))
def test_hessian_built_symmetric(name, sample_1000):
    H = BATTERY[name](jets.variables(sample_1000[:50]), JET_LIB).hessian
    assert np.array_equal(H, np.swapaxes(H, -1, -2))


def test_lift_seeds_coordinate():
    a = jets.lift((3.0, 4.0), 0)
    assert a.value == 3.0
    assert a.gradient.tolist() == [1.0, 0.0]
    assert not a.hessian.any()
    b = jets.lift((1.0, 2.0, 5.0), 2)
    assert b.value == 5.0 and b.gradient.tolist() == [0.0, 0.0, 1.0]
    c = jets.lift((0.0,), 0)
    assert c.value == 0.0 and c.gradient.tolist() == [1.0]


@pytest.mark.parametrize("index", [-1, 2, 7])
def test_lift_rejects_bad_index(index):
    with pytest.raises(ArgumentError):
        jets.lift((1.0, 2.0), index)


def test_square_and_shift():
    (x,) = jets.variables([3.0])
    sq = x * x
    assert (sq.value, sq.gradient[0], sq.hessian[0, 0]) == (9.0, 6.0, 2.0)
    (z,) = jets.variables([0.0])
    s = z + 1.0
    assert (s.value, s.gradient[0], s.hessian[0, 0]) == (1.0, 1.0, 0.0)


def test_reciprocal():
    (x,) = jets.variables([2.0])
    r = 1.0 / x
    assert r.value == 0.5
    assert math.isclose(r.gradient[0], -0.25, rel_tol=1e-15)
    assert math.isclose(r.hessian[0, 0], 0.25, rel_tol=1e-15)
    plain = lambda p: 1.0 / p[..., 0]
    assert abs(fd_gradient(plain, np.array([2.0]))[0] + 0.25) < 1e-6


def test_division_by_zero_raises_with_point():
    x, y = jets.variables(np.array([[1.0, 2.0], [3.0, 0.0]]))
    with pytest.raises(SingularPointError) as info:
        x / y
    assert info.value.batch_index == (1,)


def test_elementary_values():
    (x,) = jets.variables([0.0])
    s = jets.sin(x)
    assert (s.value, s.gradient[0], s.hessian[0, 0]) == (0.0, 1.0, 0.0)
    (one,) = jets.variables([1.0])
    p = jets.pow_const(one, 4.0 / 3.0)
    assert math.isclose(p.gradient[0], 4.0 / 3.0, rel_tol=1e-14)
    assert math.isclose(p.hessian[0, 0], 4.0 / 9.0, rel_tol=1e-14)
    x1, x2 = jets.variables([1.0, 1.0])
    a = jets.atan(x1 / x2)
    assert math.isclose(a.value, math.pi / 4)
    np.testing.assert_allclose(a.gradient, [0.5, -0.5], atol=1e-15)


@pytest.mark.parametrize(
    "fn, at",
    [
        (jets.log, 0.0),
        (jets.log, -1.0),
        (jets.sqrt, -0.5),
        (jets.sqrt, 0.0),
        (lambda a: jets.pow_const(a, 4.0 / 3.0), 0.0),
        (lambda a: jets.pow_const(a, 0.5), -2.0),
    ],
)
def test_domain_violations_raise(fn, at):
    (x,) = jets.variables([at])
    with pytest.raises(SingularPointError):
        fn(x)


def test_integer_power_of_negative_is_allowed():
    (x,) = jets.variables([-2.0])
    c = jets.pow_const(x, 3.0)
    assert (c.value, c.gradient[0], c.hessian[0, 0]) == (-8.0, 12.0, -12.0)


pair = st.tuples(coords, coords)


@settings(max_examples=200, deadline=None)
@given(pair, st.floats(-2, 2, **finite), st.floats(-2, 2, **finite))
def test_add_and_mul_commute_bitwise(p, c1, c2):
    x, y = jets.variables(np.array(p))
    a = jets.sin(x) * c1 + y
    b = jets.exp(0.3 * y) + c2 * x * x
    for u, v in ((a + b, b + a), (a * b, b * a)):
        assert np.array_equal(u.value, v.value)
        assert np.array_equal(u.gradient, v.gradient)
        assert np.array_equal(u.hessian, v.hessian)


@settings(max_examples=200, deadline=None)
@given(pair)
def test_product_rule(p):
    x, y = jets.variables(np.array(p))
    a, b = jets.cos(x) + y, x * y + 1.0
    prod = a * b
    expected = a.value * b.hessian + b.value * a.hessian + np.outer(a.gradient, b.gradient) + np.outer(
        b.gradient, a.gradient
    )
    np.testing.assert_allclose(prod.hessian, expected, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(prod.gradient, a.value * b.gradient + b.value * a.gradient, rtol=1e-12, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(pair)
def test_chain_rule_against_composition(p):
    # exp(log(t)) is the identity on t > 0
    x, y = jets.variables(np.array(p))
    t = x * x + y * y + 1.0
    back = jets.exp(jets.log(t))
    np.testing.assert_allclose(back.gradient, t.gradient, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(back.hessian, t.hessian, rtol=1e-12, atol=1e-11)
