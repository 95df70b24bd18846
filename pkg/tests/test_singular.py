import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from muskat import (
    InterfaceState, InvalidArgument, bump, discrete_hilbert, hilbert_rational,
    hilbert_rational_truncated, lambda_op, make_grid, make_scheme, pv_integral,
    pv_integral_all, sample, zeros,
)
from muskat.singular import Form, QuadratureScheme

# QUADPACK flags roundoff near its own tolerance floor; agreement is still asserted
pytestmark = pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")

SPEC = make_grid(5, 501)
ZERO = InterfaceState(zeros(SPEC))
SCHEME = make_scheme(SPEC)


def bump_state(spec=SPEC):
    return InterfaceState(sample(spec, lambda x: bump(x, 0.5, 1.5, 0.2)))


def rational(m, n):
    return lambda s: s**m / (1 + s * s) ** n


def oracle_full(m, n, x, R=200.0):
    """(1/pi) PV int r(s)/(x-s) ds by QUADPACK's Cauchy weight plus plain tails."""
    r = rational(m, n)
    mid = quad(r, x - R, x + R, weight="cauchy", wvar=x, epsabs=1e-14, epsrel=1e-13, limit=500)[0]
    tail = lambda s: r(s) / (x - s)
    lo = quad(tail, -np.inf, x - R, epsabs=1e-15, epsrel=1e-13, limit=500)[0]
    hi = quad(tail, x + R, np.inf, epsabs=1e-15, epsrel=1e-13, limit=500)[0]
    return (-mid + lo + hi) / math.pi


def oracle_inner(m, n, x):
    r = rational(m, n)
    v = quad(r, x - 1, x + 1, weight="cauchy", wvar=x, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    return -v / math.pi


# --- pv_integral ---------------------------------------------------------------

@pytest.mark.parametrize("form", [Form.VEL1, Form.VEL2, Form.VEL])
def test_velocity_forms_vanish_for_flat_state(form):
    assert np.all(pv_integral_all(ZERO, form, SCHEME) == 0.0)


def test_k_over_alpha_odd_at_origin():
    assert abs(pv_integral(ZERO, SPEC.center, Form.K_OVER_ALPHA, SCHEME)) <= 1e-12


def test_k_over_alpha_hilbert_identity_at_half():
    s = make_grid(2, 401)
    q = make_scheme(s, 1000.0)
    v = pv_integral(InterfaceState(zeros(s)), s.center + 50, Form.K_OVER_ALPHA, q)
    assert v == pytest.approx(math.pi / 2, abs=1e-4)


def test_k_over_alpha_hilbert_identity_every_node():
    v = pv_integral_all(ZERO, Form.K_OVER_ALPHA, SCHEME)
    x = SPEC.x
    assert np.abs(v - 2 * math.pi * x / (1 + 4 * x * x)).max() <= 1e-6


@pytest.mark.parametrize("form", [Form.MEAN_GAMMA_F, Form.MEAN_THETA_F])
def test_mean_zero_forms(form):
    assert np.abs(pv_integral_all(ZERO, form, SCHEME)).max() <= 1e-10


def test_pv_one_matches_all():
    b = bump_state()
    allv = pv_integral_all(b, Form.VEL, SCHEME)
    for i in (0, 17, SPEC.center, 400, SPEC.n - 1):
        assert pv_integral(b, i, Form.VEL, SCHEME) == allv[i]


def test_deterministic_repeat():
    b = bump_state()
    a1 = pv_integral_all(b, Form.G_OVER_ALPHA, SCHEME)
    a2 = pv_integral_all(b, Form.G_OVER_ALPHA, SCHEME)
    assert np.array_equal(a1, a2)


def test_errors():
    with pytest.raises(InvalidArgument):
        pv_integral_all(ZERO, "NOT_A_FORM", SCHEME)
    with pytest.raises(InvalidArgument):
        pv_integral_all(ZERO, Form.VEL, make_scheme(make_grid(5, 201)))
    with pytest.raises(InvalidArgument):
        make_scheme(SPEC, tail_nodes=8)
    with pytest.raises(InvalidArgument):
        QuadratureScheme(5.0, 256, SPEC)
    assert pv_integral_all(ZERO, "VEL", SCHEME).shape == (SPEC.n,)


def test_cutoff_rounded_to_grid():
    q = make_scheme(SPEC, 10.005)
    assert q.J * SPEC.dx == pytest.approx(q.near_cutoff)
    assert q.near_cutoff >= 10.005
    assert make_scheme(SPEC).near_cutoff == pytest.approx(4 * SPEC.L)


@pytest.mark.parametrize("form", [Form.VEL1, Form.VEL2])
def test_tail_cutoff_convergence(form):
    # the far field is transformed exactly, so moving the cutoff only changes
    # the result at the rounding level; require at least O(1/A) decay of that
    b = bump_state()
    As = [10.02, 20.04, 40.08, 80.16, 160.32]
    vals = [pv_integral_all(b, form, make_scheme(SPEC, A)) for A in As]
    gaps = [np.abs(vals[k] - vals[k + 1]).max() for k in range(len(As) - 1)]
    scale = np.abs(vals[-1]).max()
    floor = 1e-13 * scale
    for A, gap in zip(As, gaps):
        assert gap <= max(floor, gaps[0] * (As[0] / A) ** 0.9)


@pytest.mark.parametrize("form", [Form.VEL1, Form.VEL2])
def test_grid_refinement_order(form):
    res = []
    for n in (201, 401, 801):
        s = make_grid(5, n)
        v = pv_integral_all(bump_state(s), form, make_scheme(s, 20.0))
        res.append(v[:: (n - 1) // 200])
    e1 = np.abs(res[0] - res[1]).max()
    e2 = np.abs(res[1] - res[2]).max()
    assert math.log2(e1 / e2) >= 2


def test_tail_forms_start_at_one():
    # with g = 0 the integrand is K^3/a with K = 1/(1 + (2x - a)^2); the
    # corrected trapezoid from a = 1 is fourth order, ~3e-8 at dx = 0.02
    x0 = 0.5
    i = SPEC.center + int(round(x0 / SPEC.dx))
    v = pv_integral(ZERO, i, Form.K3_OVER_ALPHA, SCHEME)
    f = lambda a: (1 / (1 + (2 * x0 - a) ** 2)) ** 3 / a
    want = (quad(f, 1, np.inf, epsabs=1e-13)[0] + quad(f, -np.inf, -1, epsabs=1e-13)[0])
    assert v == pytest.approx(want, abs=1e-7)


# --- closed-form Hilbert transforms ----------------------------------------------

def test_hilbert_rational_examples():
    assert hilbert_rational(0, 1, 0.0) == 0.0
    assert hilbert_rational(0, 1, 1.0) == pytest.approx(0.5, rel=1e-14)
    assert hilbert_rational(1, 1, 0.0) == pytest.approx(-1.0, rel=1e-14)
    with pytest.raises(InvalidArgument):
        hilbert_rational(2, 1, 0.0)
    with pytest.raises(InvalidArgument):
        hilbert_rational(0, 0, 0.0)


def test_hilbert_rational_vectorised():
    x = np.linspace(-3, 3, 7)
    assert np.allclose(hilbert_rational(0, 1, x), x / (1 + x * x), rtol=1e-14)


def _sample_points():
    rng = np.random.default_rng(20240611)
    pts = []
    while len(pts) < 100:
        n = int(rng.integers(1, 5))
        m = int(rng.integers(0, 2 * n))
        pts.append((m, n, float(rng.uniform(-6, 6))))
    return pts


@pytest.mark.parametrize("m,n,x", _sample_points())
def test_hilbert_rational_matches_oracle(m, n, x):
    assert hilbert_rational(m, n, x) == pytest.approx(oracle_full(m, n, x), rel=1e-8, abs=1e-12)


def test_truncated_examples():
    assert hilbert_rational_truncated(0, 1, 0.0, "inner") == pytest.approx(0.0, abs=1e-15)
    want = quad(lambda y: 1 / (1 + (3 - y) ** 2), -1, 1, weight="cauchy", wvar=0.0,
                epsabs=1e-14)[0] / math.pi
    assert hilbert_rational_truncated(0, 1, 3.0, "inner") == pytest.approx(want, abs=1e-10)
    with pytest.raises(InvalidArgument):
        hilbert_rational_truncated(0, 1, 0.0, "middle")


@pytest.mark.parametrize("m,n,x", _sample_points()[:30])
def test_truncated_inner_matches_oracle(m, n, x):
    v = hilbert_rational_truncated(m, n, x, "inner")
    assert v == pytest.approx(oracle_inner(m, n, x), rel=1e-8, abs=1e-12)


@given(n=st.integers(1, 5), data=st.data(), x=st.floats(-20, 20))
def test_truncated_additivity(n, data, x):
    m = data.draw(st.integers(0, 2 * n - 1))
    inner = hilbert_rational_truncated(m, n, x, "inner")
    outer = hilbert_rational_truncated(m, n, x, "outer")
    assert inner + outer == pytest.approx(hilbert_rational(m, n, x), rel=1e-12, abs=1e-14)


# --- discrete operators -----------------------------------------------------------

def test_discrete_hilbert_zero():
    assert np.all(discrete_hilbert(zeros(SPEC)).values == 0)
    assert np.all(lambda_op(zeros(SPEC)).values == 0)


def test_discrete_hilbert_symmetric_window():
    w = sample(SPEC, lambda x: bump(x, 1.0, 3.0) ** 0.05)
    assert abs(discrete_hilbert(w).values[SPEC.center]) <= 1e-14


def test_lambda_of_flat_window_small_inside():
    # derivative of a window with a flat top vanishes there; Lambda picks up
    # only the ramps, which are far from the centre
    s = make_grid(10, 2001)
    ramp = lambda x: np.clip((6 - np.abs(x)), 0, 1) ** 4
    w = sample(s, lambda x: ramp(x) * (np.abs(x) < 6))
    lam = lambda_op(w).values
    inner = np.abs(s.x) < 1
    assert np.abs(lam[inner]).max() < 0.1 * np.abs(lam).max()


def test_discrete_hilbert_pair_on_wide_grid():
    s = make_grid(50, 2001)
    h = discrete_hilbert(sample(s, lambda x: 1 / (1 + x * x))).values
    inner = np.abs(s.x) <= 2
    want = s.x / (1 + s.x**2)
    assert np.abs(h - want)[inner].max() <= 2e-2


def test_lambda_pair_on_wide_grid():
    s = make_grid(50, 2001)
    lam = lambda_op(sample(s, lambda x: 1 / (1 + x * x))).values
    inner = np.abs(s.x) <= 2
    want = (1 - s.x**2) / (1 + s.x**2) ** 2
    assert np.abs(lam - want)[inner].max() <= 2e-2
