"""Observable coefficients, spatial means and the time window transform."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from torusres.symbols import (TimeWindow, constant_coeff, eval_symbol_coeff,
                              gaussian_coeff, hermitian_symbol, mean_mode,
                              poly_gaussian_coeff, position_symbol,
                              symbol_from_modes, window_transform,
                              zero_mean_part)

TWO_PI = 2.0 * math.pi


def test_eval_symbol_coeff_examples():
    a = symbol_from_modes(2, {(1, 0): constant_coeff(2.5)})
    assert eval_symbol_coeff(a, (0, 1), (0.0, 0.0)) == 0.0
    assert eval_symbol_coeff(a, (1, 0), (3.0, -1.0)) == 2.5

    g = symbol_from_modes(2, {(0, 1): gaussian_coeff(1.0, (0.0, 0.0), 1.0)})
    assert eval_symbol_coeff(g, (0, 1), (0.0, 0.0)) == pytest.approx(1.0)


def test_mean_mode_examples():
    d = 2
    b = gaussian_coeff(0.7, (0.1, 0.2), 1.3)
    a = symbol_from_modes(d, {(0, 0): b.scaled(TWO_PI ** (d / 2))})
    mean = mean_mode(a)
    xi = np.array([0.4, -0.2])
    assert complex(mean.value(xi)) == pytest.approx(complex(b.value(xi)))

    empty_mean = mean_mode(symbol_from_modes(d, {(1, 0): constant_coeff(1.0)}))
    assert complex(empty_mean.value(xi)) == 0.0

    a2 = symbol_from_modes(2, {(0, 0): constant_coeff(TWO_PI)})
    assert complex(mean_mode(a2).value(xi)) == pytest.approx(1.0)


def test_zero_mean_part_examples():
    a = symbol_from_modes(2, {(0, 0): constant_coeff(1.0),
                              (1, 0): constant_coeff(2.0)})
    zm = zero_mean_part(a)
    assert set(zm.modes) == {(1, 0)}
    assert set(zero_mean_part(symbol_from_modes(2, {(0, 0): constant_coeff(1.0)})).modes) == set()
    assert zero_mean_part(zm).modes == zm.modes


def test_window_transform_examples():
    phi = TimeWindow(amplitude=1.0, tau=1.0, t0=0.0)
    assert window_transform(phi, 0.0) == pytest.approx(math.sqrt(TWO_PI))
    assert window_transform(phi, 1.3) == pytest.approx(window_transform(phi, -1.3))
    assert window_transform(phi, 1.3).imag == 0.0
    assert window_transform(phi, 1.0) == pytest.approx(math.sqrt(TWO_PI) * math.exp(-0.5))


@pytest.mark.parametrize("s", [-20.0, -5.5, -1.0, 0.0, 0.3, 2.0, 7.0, 20.0])
@pytest.mark.parametrize("params", [(1.0, 1.0, 0.0), (0.7, 1.6, -0.4), (2.0, 0.5, 1.1)])
def test_window_transform_quadrature_oracle(s, params):
    amp, tau, t0 = params
    phi = TimeWindow(amplitude=amp, tau=tau, t0=t0)
    lim = t0 + 40 * tau

    def integrand_re(t):
        return (amp * math.exp(-0.5 * ((t - t0) / tau) ** 2)
                * math.cos(s * t))

    def integrand_im(t):
        return -(amp * math.exp(-0.5 * ((t - t0) / tau) ** 2)
                 * math.sin(s * t))

    re, _ = quad(integrand_re, t0 - lim, t0 + lim, limit=600)
    im, _ = quad(integrand_im, t0 - lim, t0 + lim, limit=600)
    assert abs(window_transform(phi, s) - complex(re, im)) < 1e-10


def test_hermitian_symbol_conjugate_pairs():
    a = hermitian_symbol(2, {
        (1, 0): gaussian_coeff(0.4 + 0.3j, (0.2, -0.1), 0.8),
        (0, 2): constant_coeff(1.0 - 2.0j),
    })
    rng = np.random.default_rng(0)
    for _ in range(20):
        xi = rng.normal(size=2)
        for k in a.modes:
            neg = tuple(-c for c in k)
            lhs = eval_symbol_coeff(a, neg, xi)
            rhs = eval_symbol_coeff(a, k, xi).conjugate()
            assert abs(lhs - rhs) <= 1e-14


def test_position_symbol_scaling():
    m = {(0, 0): 1.0, (1, 0): 0.5, (-1, 0): 0.5}
    a = position_symbol(2, m)
    assert a.hermitian
    assert complex(a.modes[(1, 0)].value(np.zeros(2))) == pytest.approx(TWO_PI * 0.5)


COEFFS = [
    constant_coeff(1.3 - 0.4j),
    gaussian_coeff(0.9 + 0.2j, (0.5, -0.3), 0.7),
    poly_gaussian_coeff(1.1, (0.0, 0.2), 1.2, (2, 1)),
    poly_gaussian_coeff(-0.4, (-0.7, 0.1), 0.6, (0, 3)),
]


@given(st.integers(0, len(COEFFS) - 1),
       st.tuples(st.floats(-8, 8), st.floats(-8, 8)))
def test_sup_norm_dominates_samples(idx, xi):
    fn = COEFFS[idx]
    xi = np.asarray(xi)
    assert abs(fn.value(xi)) <= fn.sup_norm() * (1 + 1e-12) + 1e-300
    grad = fn.gradient(xi)
    assert float(np.linalg.norm(grad)) <= fn.grad_sup_norm() * (1 + 1e-9) + 1e-300


def test_gradient_matches_finite_difference():
    rng = np.random.default_rng(1)
    for fn in COEFFS:
        xi = rng.normal(size=2)
        grad = fn.gradient(xi)
        eps = 1e-6
        for axis in range(2):
            step = np.zeros(2)
            step[axis] = eps
            fd = (complex(fn.value(xi + step)) - complex(fn.value(xi - step))) / (2 * eps)
            assert abs(fd - grad[axis]) < 1e-6 * (1 + abs(grad[axis]))


def test_nonnegative_flags():
    assert constant_coeff(0.0).nonnegative
    assert gaussian_coeff(2.0, (0.0, 0.0), 1.0).nonnegative
    assert not gaussian_coeff(-2.0, (0.0, 0.0), 1.0).nonnegative
    assert not constant_coeff(1j).nonnegative
    assert poly_gaussian_coeff(1.0, (0, 0), 1.0, (2, 0)).nonnegative
    assert not poly_gaussian_coeff(1.0, (0, 0), 1.0, (1, 0)).nonnegative


def test_window_value_and_transform_vectorized():
    phi = TimeWindow(amplitude=0.8, tau=1.4, t0=0.2)
    ss = np.linspace(-3, 3, 11)
    vec = phi.transform(ss)
    for s, v in zip(ss, vec):
        assert abs(v - window_transform(phi, float(s))) < 1e-14
