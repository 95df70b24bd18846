"""Pointwise kernels of the g-equation for h(x, t) = x^2 + jump*t + g(x, t).

Every kernel is a function of four slopes at (x, alpha):

* ``df``   = (f(x) - f(x-alpha)) / alpha = 2x - alpha
* ``sg``   = (g(x) - g(x-alpha)) / alpha
* ``sxg``  = d/dx of ``sg``
* ``sxxg`` = d^2/dx^2 of ``sg``

so ``dh = df + sg`` and ``d/dx dh = 2 + sxg``.  The same compiled function
serves the scalar API below and the quadrature loops.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from functools import cached_property

import numpy as np
from numba import njit

from .errors import InvalidArgument
from .grid import GridFunction, derivative_array

TWO_PI = 2.0 * math.pi


class KernelId(IntEnum):
    K = 0
    G = 1
    K0 = 2
    D = 3
    PHI = 4
    B1 = 5
    B2 = 6
    B3 = 7
    B4 = 8
    B5 = 9
    GAMMA = 10
    GAMMA_F = 11
    GAMMA_CAP = 12
    THETA_CAP = 13
    THETA_F = 14
    # x-derivatives of K, used by the PV forms
    DXK = 15
    DXXK = 16


@njit(cache=True)
def F(u):
    return 1.0 / (1.0 + u * u)


@njit(cache=True)
def dF(u):
    k = 1.0 / (1.0 + u * u)
    return -2.0 * u * k * k


@njit(cache=True)
def kernel_from_slopes(kid, df, sg, sxg, sxxg):
    u = df + sg
    k = 1.0 / (1.0 + u * u)
    if kid == 0:
        return k
    ff = 1.0 / (1.0 + df * df)
    if kid == 1:
        return -2.0 * (u + df) * k * ff
    if kid == 5:
        return -2.0 * k * k + 8.0 * u * u * k * k * k
    if kid == 6 or kid == 9:
        return -2.0 * u * k * k
    if kid == 10:
        return 24.0 * u * k**3 - 48.0 * u**3 * k**4
    if kid == 7:
        ux = 2.0 + sxg
        return (24.0 * u * k**3 - 48.0 * u**3 * k**4) * ux * ux
    if kid == 8:
        return 3.0 * (-2.0 * k**3 + 8.0 * u * u * k**4) * (2.0 + sxg)
    if kid == 11:
        return df * ff**3
    if kid == 14:
        return df**3 * ff**4
    if kid == 12:
        return -df * (df + u) * (k**3 * ff + k * k * ff * ff + k * ff**3)
    if kid == 13:
        return -(df**3) * (df + u) * (
            k**4 * ff + k**3 * ff * ff + k * k * ff**3 + k * ff**4
        )
    if kid == 15:
        return -2.0 * u * k * k * (2.0 + sxg)
    if kid == 16:
        ux = 2.0 + sxg
        b1 = -2.0 * k * k + 8.0 * u * u * k * k * k
        b2 = -2.0 * u * k * k
        return ux * ux * b1 + sxxg * b2
    return math.nan


@dataclass(frozen=True, eq=False)
class InterfaceState:
    g: GridFunction
    t: float = 0.0
    jump: float = TWO_PI

    def __post_init__(self):
        if not self.jump > 0:
            raise InvalidArgument(f"density jump must be positive, got {self.jump}")
        if self.t < 0:
            raise InvalidArgument(f"time must be >= 0, got {self.t}")

    @property
    def spec(self):
        return self.g.spec

    @property
    def x(self) -> np.ndarray:
        return self.g.spec.x

    @cached_property
    def dg(self) -> np.ndarray:
        return derivative_array(self.g.values, self.spec.dx, 1)

    @cached_property
    def d2g(self) -> np.ndarray:
        return derivative_array(self.g.values, self.spec.dx, 2)

    @cached_property
    def d3g(self) -> np.ndarray:
        return derivative_array(self.g.values, self.spec.dx, 3)

    @property
    def h(self) -> np.ndarray:
        return self.x**2 + self.jump * self.t + self.g.values

    @property
    def dh(self) -> np.ndarray:
        return 2.0 * self.x + self.dg

    def with_g(self, values: np.ndarray, t: float | None = None) -> InterfaceState:
        return InterfaceState(
            GridFunction(self.spec, values), self.t if t is None else t, self.jump
        )


def _at(arr: np.ndarray, idx):
    """Zero-extended lookup."""
    idx = np.asarray(idx)
    inside = (idx >= 0) & (idx < arr.shape[0])
    out = np.where(inside, arr[np.clip(idx, 0, arr.shape[0] - 1)], 0.0)
    return float(out) if out.ndim == 0 else out


def _alpha_steps(state: InterfaceState, alpha: float) -> int:
    try:
        return state.spec.steps(alpha)
    except InvalidArgument:
        raise InvalidArgument(f"alpha={alpha} is not grid-aligned") from None


def slope_f(x: float, alpha: float, t: float = 0.0, jump: float = TWO_PI) -> float:
    """(f(x) - f(x - alpha)) / alpha for f = x^2 + jump*t; equals 2x - alpha."""
    return 2.0 * x - alpha


def _slopes(state: InterfaceState, i: int, j: int):
    """The four slopes at node i and alpha = j*dx (limits at j = 0)."""
    x = state.x[i]
    if j == 0:
        return 2.0 * x, state.dg[i], state.d2g[i], state.d3g[i]
    a = j * state.spec.dx
    g = state.g.values
    return (
        2.0 * x - a,
        (g[i] - _at(g, i - j)) / a,
        (state.dg[i] - _at(state.dg, i - j)) / a,
        (state.d2g[i] - _at(state.d2g, i - j)) / a,
    )


def slope_g(state: InterfaceState, i: int, alpha: float) -> float:
    return float(_slopes(state, i, _alpha_steps(state, alpha))[1])


def slope_h(state: InterfaceState, i: int, alpha: float) -> float:
    df, sg, _, _ = _slopes(state, i, _alpha_steps(state, alpha))
    return float(df + sg)


def kernel(state: InterfaceState, i: int, alpha: float, kid: KernelId) -> float:
    kid = KernelId(kid)
    j = _alpha_steps(state, alpha)
    if kid == KernelId.K0:
        return float(kernel_from_slopes(0, *_slopes(state, i, 0)))
    if kid == KernelId.D:
        if j == 0:
            return 0.0
        return float(
            kernel_from_slopes(0, *_slopes(state, i, j))
            - kernel_from_slopes(0, *_slopes(state, i, 0))
        )
    if kid == KernelId.PHI:
        if j == 0:
            raise InvalidArgument("PHI has no value at alpha = 0")
        return phi(state, i, j)
    return float(kernel_from_slopes(int(kid), *_slopes(state, i, j)))


def phi(state: InterfaceState, i: int, j: int) -> float:
    """d/dalpha [(K(x,alpha) - K(x,0)) / alpha] at alpha = j*dx, j != 0.

    d/dalpha of the h-slope is a centred difference of width dx in alpha.
    """
    dx = state.spec.dx
    a = j * dx
    df, sg, sxg, sxxg = _slopes(state, i, j)
    u = df + sg
    k_a = F(u)
    k_0 = F(state.dh[i])
    up = sum(_slopes(state, i, j + 1)[:2])
    um = sum(_slopes(state, i, j - 1)[:2])
    dk_da = dF(u) * (up - um) / (2.0 * dx)
    return float(-(k_a - k_0) / (a * a) + dk_da / a)


def zeta(state: InterfaceState, i: int, j: int) -> float:
    """d/dx K(x, x-y) / (x-y) at x = x_i, y = x_j."""
    if i == j:
        raise InvalidArgument("zeta is singular on the diagonal")
    x, y = state.x[i], state.x[j]
    h, dh = state.h, state.dh
    d = x - y
    s1 = (h[i] - h[j]) / d
    s2 = (dh[i] - dh[j]) / d
    return float(-2.0 / d * s1 * s2 / (1.0 + s1 * s1) ** 2)
