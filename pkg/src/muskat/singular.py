"""Principal-value quadrature in alpha and Hilbert transforms.

Near field: grid-aligned nodes alpha = j*dx, 0 < |j| <= A/dx, summed in
symmetric +-alpha pairs with trapezoid weights.  Far field |alpha| > A:
alpha = 1/u with m equispaced nodes in u on (0, 1/A], trapezoid rule
Richardson-extrapolated against its every-other-node subset when m is even;
there every shifted sample g(x - alpha) vanishes by zero extension.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _loops
from .errors import InvalidArgument
from .grid import GridFunction, GridSpec, derivative_array
from .kernels import InterfaceState


class Form(Enum):
    VEL1 = (_loops.VEL1, _loops.REGULAR)
    VEL2 = (_loops.VEL2, _loops.REGULAR)
    VEL = (_loops.VEL, _loops.REGULAR)
    K_OVER_ALPHA = (_loops.K_OVER_ALPHA, _loops.SINGULAR)
    G_OVER_ALPHA = (_loops.G_OVER_ALPHA, _loops.SINGULAR)
    DXK_OVER_ALPHA = (_loops.DXK_OVER_ALPHA, _loops.SINGULAR)
    K3_OVER_ALPHA = (_loops.K3_OVER_ALPHA, _loops.TAIL)
    GAMMA_OVER_ALPHA = (_loops.GAMMA_OVER_ALPHA, _loops.TAIL)
    B4_OVER_ALPHA = (_loops.B4_OVER_ALPHA, _loops.TAIL)
    GAMMACAP_OVER_ALPHA = (_loops.GAMMACAP_OVER_ALPHA, _loops.TAIL)
    THETACAP_OVER_ALPHA = (_loops.THETACAP_OVER_ALPHA, _loops.TAIL)
    DXXK_OVER_ALPHA = (_loops.DXXK_OVER_ALPHA, _loops.TAIL)
    MEAN_GAMMA_F = (_loops.MEAN_GAMMA_F, _loops.REGULAR)
    MEAN_THETA_F = (_loops.MEAN_THETA_F, _loops.REGULAR)

    @property
    def code(self) -> int:
        return self.value[0]

    @property
    def kind(self) -> int:
        return self.value[1]


@dataclass(frozen=True)
class QuadratureScheme:
    near_cutoff: float
    tail_nodes: int
    spec: GridSpec

    def __post_init__(self):
        if self.tail_nodes < 16:
            raise InvalidArgument(f"tail_nodes must be >= 16, got {self.tail_nodes}")
        J = self.spec.steps(self.near_cutoff)
        if J * self.spec.dx < 2.0 * self.spec.L + self.spec.dx * (1 - 1e-9):
            raise InvalidArgument(
                f"near cutoff {self.near_cutoff} must be >= 2L + dx = "
                f"{2 * self.spec.L + self.spec.dx}"
            )

    @property
    def J(self) -> int:
        return self.spec.steps(self.near_cutoff)

    @property
    def tail_start(self) -> int:
        """First node index of the |alpha| >= 1 forms."""
        return max(1, math.ceil(1.0 / self.spec.dx - 1e-9))


def make_scheme(spec: GridSpec, near_cutoff: float | None = None, tail_nodes: int = 256):
    """Scheme on ``spec``; the cutoff is rounded up to a multiple of dx.

    The default cutoff 4L keeps the parabola peak of every kernel, at
    alpha = 2x, well inside the near field.
    """
    if near_cutoff is None:
        near_cutoff = max(4.0 * spec.L, 2.0 * spec.L + spec.dx)
    j = math.ceil(near_cutoff / spec.dx - 1e-9)
    return QuadratureScheme(j * spec.dx, tail_nodes, spec)


def _check(state: InterfaceState, scheme: QuadratureScheme):
    if scheme.spec != state.spec:
        raise InvalidArgument("quadrature scheme is aligned to a different grid")


def pv_integral_all(state: InterfaceState, form: Form, scheme: QuadratureScheme) -> np.ndarray:
    """PV integral over alpha of ``form`` at every grid node."""
    if not isinstance(form, Form):
        try:
            form = Form[str(form)]
        except KeyError:
            raise InvalidArgument(f"unknown integrand {form!r}") from None
    _check(state, scheme)
    j_lo = scheme.tail_start if form.kind == _loops.TAIL else 1
    return _loops.pv_all(
        form.code, form.kind, state.x, state.g.values, state.dg, state.d2g,
        state.spec.dx, scheme.J, j_lo, scheme.tail_nodes, scheme.near_cutoff,
    )


def pv_integral(state: InterfaceState, i: int, form: Form, scheme: QuadratureScheme) -> float:
    if not isinstance(form, Form):
        try:
            form = Form[str(form)]
        except KeyError:
            raise InvalidArgument(f"unknown integrand {form!r}") from None
    _check(state, scheme)
    j_lo = scheme.tail_start if form.kind == _loops.TAIL else 1
    return float(_loops.pv_one(
        form.code, form.kind, i, state.x, state.g.values, state.dg, state.d2g,
        state.spec.dx, scheme.J, j_lo, scheme.tail_nodes, scheme.near_cutoff,
    ))


# --- closed-form Hilbert transforms of y^m / (1 + y^2)^n -------------------

def _check_mn(m: int, n: int):
    if n < 1 or m < 0:
        raise InvalidArgument(f"need m >= 0 and n >= 1, got m={m}, n={n}")
    if m >= 2 * n:
        raise InvalidArgument(f"need m < 2n, got m={m}, n={n}")


def _principal_part(m: int, n: int) -> list[complex]:
    """Coefficients a_k of a_k / (y - i)^k, k = 1..n, in y^m / (1+y^2)^n."""
    # phi(y) = y^m (y + i)^-n expanded in t = y - i up to t^(n-1)
    p = [math.comb(m, r) * (1j) ** (m - r) for r in range(min(m, n - 1) + 1)]
    p += [0j] * (n - len(p))
    q = [_binom_neg(n, r) * (2j) ** (-n - r) for r in range(n)]
    c = [sum(p[r] * q[s - r] for r in range(s + 1)) for s in range(n)]
    # coefficient of t^s pairs with (y - i)^-(n - s)
    return [c[n - k] for k in range(1, n + 1)]


def _binom_neg(n: int, r: int) -> float:
    """Binomial coefficient C(-n, r)."""
    return (-1) ** r * math.comb(n + r - 1, r)


def hilbert_rational(m: int, n: int, x):
    """H[y^m/(1+y^2)^n](x) with Hf(x) = (1/pi) PV int f(x-y)/y dy.

    The part of r with poles at +i maps to i*R, the conjugate part to -i*R,
    so Hr = -2 Im R(x) with R the principal part at +i.
    """
    _check_mn(m, n)
    a = _principal_part(m, n)
    z = np.asarray(x, dtype=float) - 1j
    R = sum(a[k - 1] * z ** (-k) for k in range(1, n + 1))
    out = -2.0 * np.imag(R)
    return float(out) if np.ndim(out) == 0 else out


def _truncated_pole_power(k: int, x):
    """(1/pi) PV int_{|y|<1} (s - i)^-k / y dy with s = x - y, as a complex number."""
    w = np.asarray(x, dtype=float) - 1j
    z_hi = w + 1.0
    z_lo = w - 1.0
    total = 0j
    for j in range(1, k + 1):
        if j == 1:
            I = np.log(z_hi) - np.log(z_lo)
        else:
            I = (z_hi ** (1 - j) - z_lo ** (1 - j)) / (1 - j)
        total = total + w ** (-(k - j + 1)) * I
    # the w^-k / (w - z) term is an odd PV over a symmetric window: zero
    return total / math.pi


def hilbert_rational_truncated(m: int, n: int, x, region: str = "inner"):
    """Truncated transforms: ``inner`` integrates |y| < 1, ``outer`` |y| > 1."""
    _check_mn(m, n)
    if region not in ("inner", "outer"):
        raise InvalidArgument(f"region must be 'inner' or 'outer', got {region!r}")
    a = _principal_part(m, n)
    inner = 2.0 * np.real(sum(a[k - 1] * _truncated_pole_power(k, x) for k in range(1, n + 1)))
    if region == "outer":
        out = hilbert_rational(m, n, x) - inner
    else:
        out = inner
    return float(out) if np.ndim(out) == 0 else out


# --- discrete Hilbert transform and Lambda ----------------------------------

def hilbert_array(values: np.ndarray, dx: float) -> np.ndarray:
    n = values.shape[0]
    d1 = dx * derivative_array(values, dx, 1)
    return _loops.hilbert_pairs(np.ascontiguousarray(values, dtype=float), d1, n - 1)


def discrete_hilbert(g: GridFunction) -> GridFunction:
    """H g on the grid: paired trapezoid over |y| <= 2L, g zero outside."""
    return GridFunction(g.spec, hilbert_array(g.values, g.spec.dx))


def lambda_array(values: np.ndarray, dx: float) -> np.ndarray:
    return hilbert_array(derivative_array(values, dx, 1), dx)


def lambda_op(g: GridFunction) -> GridFunction:
    return GridFunction(g.spec, lambda_array(g.values, g.spec.dx))
