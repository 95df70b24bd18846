"""Uniform grids on [-L, L], finite-difference derivatives and norms.

All fields live on an odd number of nodes so that ``x = 0`` is a node.
Outside ``[-L, L]`` every grid function is taken to be zero; derivative
stencils and shifted samples use that zero extension.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import InvalidArgument, InvalidData

SUPPORT_TOL = 1e-12

# 4th-order centred stencils, offsets -3..3
_STENCILS = {
    1: np.array([0.0, 1.0, -8.0, 0.0, 8.0, -1.0, 0.0]) / 12.0,
    2: np.array([0.0, -1.0, 16.0, -30.0, 16.0, -1.0, 0.0]) / 12.0,
    3: np.array([1.0, -8.0, 13.0, 0.0, -13.0, 8.0, -1.0]) / 8.0,
    4: np.array([-1.0, 12.0, -39.0, 56.0, -39.0, 12.0, -1.0]) / 6.0,
}


class SupportWarning(UserWarning):
    """Grid function is not negligible near the domain edge."""


@dataclass(frozen=True)
class GridSpec:
    half_width: float
    node_count: int

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / (self.node_count - 1)

    @property
    def n(self) -> int:
        return self.node_count

    @property
    def L(self) -> float:
        return self.half_width

    @cached_property
    def x(self) -> np.ndarray:
        c = self.node_count // 2
        x = self.dx * (np.arange(self.node_count) - c).astype(float)
        x[0], x[-1] = -self.half_width, self.half_width
        x.flags.writeable = False
        return x

    @property
    def center(self) -> int:
        return self.node_count // 2

    def steps(self, length: float) -> int:
        """Number of grid steps in ``length``; it must be a multiple of dx."""
        k = length / self.dx
        kr = round(k)
        if abs(k - kr) > 1e-9 * max(1.0, abs(k)):
            raise InvalidArgument(f"{length} is not a multiple of dx={self.dx}")
        return int(kr)


def make_grid(L: float, n: int) -> GridSpec:
    if not (isinstance(n, (int, np.integer)) and n >= 9 and n % 2 == 1):
        raise InvalidArgument(f"node count must be an odd integer >= 9, got {n}")
    if not (math.isfinite(L) and L > 0):
        raise InvalidArgument(f"half width must be positive, got {L}")
    return GridSpec(float(L), int(n))


@dataclass(frozen=True, eq=False)
class GridFunction:
    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.spec.n,):
            raise InvalidData(f"expected {self.spec.n} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidData("grid function has non-finite values")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def x(self) -> np.ndarray:
        return self.spec.x

    def __add__(self, other: GridFunction) -> GridFunction:
        return GridFunction(self.spec, self.values + other.values)

    def __sub__(self, other: GridFunction) -> GridFunction:
        return GridFunction(self.spec, self.values - other.values)

    def __mul__(self, c: float) -> GridFunction:
        return GridFunction(self.spec, c * self.values)

    __rmul__ = __mul__

    def support_ok(self, tol: float = SUPPORT_TOL) -> bool:
        edge = max(1, int(math.ceil(0.05 * self.spec.n)))
        v = self.values
        return bool(np.all(np.abs(v[:edge]) < tol) and np.all(np.abs(v[-edge:]) < tol))

    def check_support(self, tol: float = SUPPORT_TOL) -> bool:
        ok = self.support_ok(tol)
        if not ok:
            warnings.warn(
                f"grid function exceeds {tol:g} on the outer 5% of nodes",
                SupportWarning,
                stacklevel=2,
            )
        return ok


def zeros(spec: GridSpec) -> GridFunction:
    return GridFunction(spec, np.zeros(spec.n))


def sample(spec: GridSpec, f: Callable) -> GridFunction:
    x = spec.x
    try:
        v = np.asarray(f(x), dtype=float)
        if v.shape != x.shape:
            v = np.broadcast_to(v, x.shape).copy()
    except (TypeError, ValueError):
        v = np.array([f(float(xi)) for xi in x], dtype=float)
    if not np.all(np.isfinite(v)):
        raise InvalidData("sampled function is not finite on the grid")
    return GridFunction(spec, v)


def bump(x, amplitude: float = 1.0, width: float = 1.0, center: float = 0.0):
    """a * exp(-1/(1 - ((x-c)/w)^2)) inside |x-c| < w, zero outside."""
    s = (np.asarray(x, dtype=float) - center) / width
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = amplitude * np.exp(-1.0 / (1.0 - s[inside] ** 2))
    if np.ndim(x) == 0:
        return float(out)
    return out


def derivative_array(values: np.ndarray, dx: float, k: int) -> np.ndarray:
    if k not in _STENCILS:
        raise InvalidArgument(f"derivative order must be 1..4, got {k}")
    w = _STENCILS[k]
    padded = np.concatenate([np.zeros(3), values, np.zeros(3)])
    n = values.shape[0]
    out = np.zeros(n)
    # pair mirrored taps so symmetric data gives exact symmetry
    sign = -1.0 if k % 2 else 1.0
    for s in range(3):
        if w[s] != 0.0:
            out += w[s] * (padded[s:s + n] + sign * padded[6 - s:6 - s + n])
    if w[3] != 0.0:
        out += w[3] * padded[3:3 + n]
    return out / dx**k


def derivative(g: GridFunction, k: int) -> GridFunction:
    return GridFunction(g.spec, derivative_array(g.values, g.spec.dx, k))


@dataclass(frozen=True)
class EnergyReport:
    l2: float
    d3_l2: float
    energy: float
    c_norms: tuple[float, float, float, float]
    holder_2_half: float
    h3: float

    def c_norm(self, k: int) -> float:
        """C^k norm: the largest sup norm among derivatives of order <= k."""
        return max(self.c_norms[: k + 1])

    @property
    def c2_half(self) -> float:
        return self.c_norm(2) + self.holder_2_half

    def as_row(self) -> list[float]:
        return [self.l2, self.d3_l2, self.energy, *self.c_norms, self.holder_2_half]


def l2_norm(values: np.ndarray, dx: float) -> float:
    v2 = values * values
    return math.sqrt(dx * (v2.sum() - 0.5 * (v2[0] + v2[-1])))


def holder_seminorm(d2: np.ndarray, dx: float, exponent: float = 0.5) -> float:
    """max |f(x)-f(y)|/|x-y|^exponent over dyadic separations dx, 2dx, ... <= 1."""
    best = 0.0
    s = 1
    n = d2.shape[0]
    while s * dx <= 1.0 + 1e-12 and s < n:
        diff = np.abs(d2[s:] - d2[:-s]).max()
        best = max(best, diff / (s * dx) ** exponent)
        s *= 2
    return float(best)


def norms(g: GridFunction) -> EnergyReport:
    dx = g.spec.dx
    v = g.values
    derivs = [v] + [derivative_array(v, dx, k) for k in (1, 2, 3)]
    l2 = l2_norm(v, dx)
    d3 = l2_norm(derivs[3], dx)
    c = tuple(float(np.abs(d).max()) for d in derivs)
    return EnergyReport(
        l2=l2,
        d3_l2=d3,
        energy=0.5 * l2 * l2 + 0.5 * d3 * d3,
        c_norms=c,
        holder_2_half=holder_seminorm(derivs[2], dx),
        h3=math.hypot(l2, d3),
    )
