import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from muskat import (
    InterfaceState, InvalidArgument, KernelId, bump, kernel, make_grid, sample,
    slope_f, slope_g, slope_h, zeros, zeta,
)

SPEC = make_grid(5, 201)
DX = SPEC.dx
ZERO = InterfaceState(zeros(SPEC))


def node(x):
    return SPEC.center + int(round(x / DX))


def bump_state(a=0.8, w=1.5, c=0.3, t=0.0):
    return InterfaceState(sample(SPEC, lambda x: bump(x, a, w, c)), t)


def test_slope_f_examples():
    assert slope_f(0.0, 0.0) == 0.0
    assert slope_f(1.0, 2.0) == 0.0
    assert slope_f(3.0, 1.0) == 5.0


def test_slope_g_examples():
    assert slope_g(ZERO, node(1.0), 0.5) == 0.0
    # identity on a flat window
    st_ = InterfaceState(sample(SPEC, lambda x: x * (np.abs(x) < 3)))
    assert slope_g(st_, node(1.0), 1.0) == pytest.approx(1.0, rel=1e-13)
    # zero extension beyond the grid
    b = bump_state(1.0, 1.0, 0.0)
    alpha = 6.0
    assert slope_g(b, SPEC.center, alpha) == pytest.approx(b.g.values[SPEC.center] / alpha)
    with pytest.raises(InvalidArgument):
        slope_g(b, 10, 0.3 * DX)


def test_slope_g_limit_is_derivative():
    b = bump_state()
    i = node(0.5)
    assert slope_g(b, i, 0.0) == b.dg[i]
    assert slope_h(b, i, 0.0) == pytest.approx(2 * SPEC.x[i] + b.dg[i])


def test_kernel_examples():
    assert kernel(ZERO, node(0.0), 0.0, KernelId.K) == 1.0
    assert kernel(ZERO, node(1.0), 0.0, KernelId.K) == pytest.approx(0.2)
    # 2x - alpha = 1
    assert kernel(ZERO, node(1.0), 1.0, KernelId.G) == pytest.approx(-1.0)
    b = bump_state()
    for i in (node(-1.0), node(0.3), node(2.0)):
        assert kernel(b, i, 0.0, KernelId.D) == 0.0
    assert kernel(ZERO, node(1.0), 1.0, KernelId.GAMMA_F) == pytest.approx(1 / 8)
    with pytest.raises(InvalidArgument):
        kernel(b, 5, 0.0, KernelId.PHI)


def test_kernel_zero_state_closed_forms():
    # with g = 0 every kernel is a function of u = 2x - alpha alone
    for x, a in [(0.4, 0.2), (1.0, -1.5), (-2.0, 0.6)]:
        u = 2 * x - a
        k = 1 / (1 + u * u)
        i = node(x)
        assert kernel(ZERO, i, a, KernelId.K) == pytest.approx(k)
        assert kernel(ZERO, i, a, KernelId.G) == pytest.approx(-4 * u * k * k)
        assert kernel(ZERO, i, a, KernelId.B5) == pytest.approx(-2 * u * k * k)
        assert kernel(ZERO, i, a, KernelId.THETA_F) == pytest.approx(u**3 * k**4)
        assert kernel(ZERO, i, a, KernelId.GAMMA_CAP) == pytest.approx(
            -2 * u * u * 3 * k**4)
        assert kernel(ZERO, i, a, KernelId.THETA_CAP) == pytest.approx(
            -2 * u**4 * 4 * k**5)
        assert kernel(ZERO, i, a, KernelId.GAMMA) == pytest.approx(
            24 * u * k**3 - 48 * u**3 * k**4)


def test_zeta_examples():
    assert zeta(ZERO, node(1.0), node(0.0)) == pytest.approx(-1.0, rel=1e-13)
    i, j = node(-0.7), node(0.7)
    assert zeta(ZERO, i, j) == -zeta(ZERO, j, i)
    with pytest.raises(InvalidArgument):
        zeta(ZERO, 3, 3)


def test_zeta_matches_scalar_formula():
    b = bump_state()
    i, j = node(0.2), node(-0.9)
    x, y = SPEC.x[i], SPEC.x[j]
    h = lambda k: SPEC.x[k] ** 2 + b.g.values[k]
    dh = lambda k: 2 * SPEC.x[k] + b.dg[k]
    s1 = (h(i) - h(j)) / (x - y)
    s2 = (dh(i) - dh(j)) / (x - y)
    want = -2 * s1 * s2 / (1 + s1 * s1) ** 2 / (x - y)
    assert zeta(b, i, j) == pytest.approx(want, rel=1e-13)


def test_time_does_not_change_slopes():
    a, b = bump_state(t=0.0), bump_state(t=3.0)
    i = node(0.4)
    for kid in (KernelId.K, KernelId.G, KernelId.B3):
        assert kernel(a, i, 0.7, kid) == kernel(b, i, 0.7, kid)
    assert zeta(a, i, node(1.0)) == pytest.approx(zeta(b, i, node(1.0)), rel=1e-12)


def test_state_rejects_bad_jump():
    with pytest.raises(InvalidArgument):
        InterfaceState(zeros(SPEC), jump=0.0)
    with pytest.raises(InvalidArgument):
        InterfaceState(zeros(SPEC), t=-1.0)


states = st.builds(
    lambda a, w, c: InterfaceState(sample(SPEC, lambda x: bump(x, a, w, c))),
    st.floats(-3, 3), st.floats(0.3, 2.0), st.floats(-2, 2),
)
nodes = st.integers(0, SPEC.n - 1)
steps = st.integers(-2 * SPEC.n, 2 * SPEC.n)


@given(s=states, i=nodes, j=steps)
def test_kernel_bounds(s, i, j):
    a = j * DX
    k = kernel(s, i, a, KernelId.K)
    assert 0 < k <= 1 and k * k <= k
    assert abs(kernel(s, i, a, KernelId.G)) <= 2 + 1e-12
    assert abs(kernel(s, i, a, KernelId.D)) <= 2
    assert abs(kernel(s, i, a, KernelId.B5)) <= 2 * k**1.5 + 1e-15 <= 2 + 1e-15


@given(s=states, i=nodes, j=nodes)
def test_zeta_antisymmetric(s, i, j):
    if i == j:
        return
    assert zeta(s, i, j) == pytest.approx(-zeta(s, j, i), rel=1e-12, abs=1e-300)


@given(i=nodes, j=steps)
def test_gamma_f_theta_f_odd(i, j):
    x = SPEC.x[i]
    a = j * DX
    a2 = 4 * x - a
    for kid in (KernelId.GAMMA_F, KernelId.THETA_F):
        assert kernel(ZERO, i, a, kid) == pytest.approx(-kernel(ZERO, i, a2, kid), rel=1e-12, abs=1e-15)


FINE = make_grid(5, 801)


def _sup_abs(state, kid, alphas):
    n = state.spec.n
    return np.array([max(abs(kernel(state, i, a, kid)) for i in range(n)) for a in alphas])


def _dyadic_alphas(spec):
    return [spec.dx * 2**k for k in range(20) if spec.dx * 2**k <= 1.0]


def test_difference_bounded_by_alpha():
    b = InterfaceState(sample(FINE, bump))
    alphas = _dyadic_alphas(FINE)
    d = _sup_abs(b, KernelId.D, alphas)
    # |D| <= sup|F'| * sup|d_alpha slope_h| * alpha, sup|F'| = 3 sqrt(3) / 8
    bound = 3 * math.sqrt(3) / 8 * (1 + 0.5 * np.abs(b.d2g).max())
    assert np.all(d <= bound * np.array(alphas))
    slope = np.polyfit(np.log(alphas), np.log(d), 1)[0]
    assert slope <= 1.0 + 0.05


def test_phi_holder_slope():
    b = InterfaceState(sample(FINE, bump))
    alphas = _dyadic_alphas(FINE)
    p = _sup_abs(b, KernelId.PHI, alphas)
    slope = np.polyfit(np.log(alphas), np.log(p), 1)[0]
    assert slope >= -0.6
