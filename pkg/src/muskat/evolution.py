"""Right-hand side of the g-equation, its mollified variant and RK4 stepping."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BlowUpError, InvalidArgument
from .grid import EnergyReport, GridFunction, GridSpec, bump, derivative_array, norms
from .kernels import TWO_PI, InterfaceState
from .singular import Form, QuadratureScheme, pv_integral_all

BLOWUP_GUARD = 1e6


@dataclass(frozen=True, eq=False)
class MollifierConfig:
    epsilon: float
    dx: float
    discrete_weights: np.ndarray
    profile: str = "standard_bump"

    @property
    def half_width(self) -> int:
        return (self.discrete_weights.shape[0] - 1) // 2


def make_mollifier(spec: GridSpec, epsilon: float) -> MollifierConfig:
    """Unit-mass discrete bump of half width ``epsilon`` on ``spec``."""
    dx = spec.dx
    if not (epsilon >= 2.0 * dx * (1 - 1e-12)):
        raise InvalidArgument(f"epsilon={epsilon} must be >= 2*dx = {2 * dx}")
    k = int(math.floor(epsilon / dx + 1e-9))
    w = bump(np.arange(-k, k + 1) * dx, 1.0, epsilon)
    w = w / (w.sum() * dx)
    w.flags.writeable = False
    return MollifierConfig(float(epsilon), dx, w)


def mollify_array(values: np.ndarray, mol: MollifierConfig) -> np.ndarray:
    return np.convolve(values, mol.discrete_weights, mode="same") * mol.dx


def mollify(g: GridFunction, mol: MollifierConfig) -> GridFunction:
    if not math.isclose(mol.dx, g.spec.dx, rel_tol=1e-12):
        raise InvalidArgument("mollifier was built for a different grid spacing")
    return GridFunction(g.spec, mollify_array(g.values, mol))


def _velocity_array(state: InterfaceState, quad: QuadratureScheme) -> np.ndarray:
    # at the standard normalisation jump = 2*pi the prefactor is one
    return (state.jump / TWO_PI) * pv_integral_all(state, Form.VEL, quad)


def velocity(state: InterfaceState, quad: QuadratureScheme) -> GridFunction:
    """dg/dt at every node: PV of d_x(slope g) K plus PV of (slope g) G."""
    return GridFunction(state.spec, _velocity_array(state, quad))


def velocity_regularized(
    state: InterfaceState, mol: MollifierConfig, quad: QuadratureScheme
) -> GridFunction:
    """M^eps(g): the velocity of the mollified state, mollified again."""
    smooth = state.with_g(mollify(state.g, mol).values)
    return GridFunction(state.spec, mollify_array(_velocity_array(smooth, quad), mol))


def parabola_residual(xs, quad: QuadratureScheme) -> float:
    """max |U_f(x) - 2 pi| for the Muskat velocity of h = x^2.

    With g = 0 the integrand is 2 / (1 + (2x - alpha)^2).  The near field is
    the trapezoid rule on alpha = j*dx, |alpha| <= A, the rest is closed form.
    """
    dx = quad.spec.dx
    J = quad.J
    A = J * dx
    alpha = np.arange(-J, J + 1) * dx
    worst = 0.0
    for x in np.atleast_1d(np.asarray(xs, dtype=float)):
        v = 2.0 / (1.0 + (2.0 * x - alpha) ** 2)
        v[0] *= 0.5
        v[-1] *= 0.5
        near = dx * math.fsum(v)
        tail = 2.0 * (math.pi - math.atan(A - 2.0 * x) - math.atan(A + 2.0 * x))
        worst = max(worst, abs(near + tail - TWO_PI))
    return worst


def edge_taper(spec: GridSpec, fraction: float) -> np.ndarray | None:
    """Smooth window: 1 on |x| <= L - d, 0 at |x| = L, d = fraction * L.

    The continuum solution leaves [-L, L] at rate O(|x|^-4); multiplying the
    velocity by this window keeps the stored g compatible with the
    zero-extension convention instead of growing a jump at the edge.
    """
    if fraction == 0:
        return None
    if not 0 < fraction < 0.5:
        raise InvalidArgument(f"taper fraction must lie in [0, 0.5), got {fraction}")
    s = np.clip((spec.L - np.abs(spec.x)) / (fraction * spec.L), 0.0, 1.0)
    a = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
    b = np.where(s < 1, np.exp(-1.0 / np.where(s < 1, 1.0 - s, 1.0)), 0.0)
    w = a / (a + b)
    w.flags.writeable = False
    return w


def _rhs(state, quad, mol, taper):
    if mol is None:
        v = _velocity_array(state, quad)
    else:
        v = velocity_regularized(state, mol, quad).values
    return v if taper is None else v * taper


def _guarded(values, t, guard, dx):
    if not np.all(np.isfinite(values)):
        raise BlowUpError("non-finite values", t)
    c1 = max(np.abs(values).max(), np.abs(derivative_array(values, dx, 1)).max())
    if c1 > guard:
        raise BlowUpError(f"C^1 norm {c1:.3g} exceeds guard {guard:g}", t)
    return values


def step(
    state: InterfaceState,
    dt: float,
    quad: QuadratureScheme,
    mol: MollifierConfig | None = None,
    guard: float = BLOWUP_GUARD,
    taper: np.ndarray | None = None,
) -> InterfaceState:
    """One classical RK4 step of dg/dt = velocity (or M^eps when ``mol`` is set).

    ``taper`` optionally multiplies the velocity, see :func:`edge_taper`.
    """
    if not dt > 0:
        raise InvalidArgument(f"dt must be positive, got {dt}")
    dx = state.spec.dx
    t = state.t
    g = state.g.values

    def stage(values, tt):
        _guarded(values, tt, guard, dx)
        return _rhs(state.with_g(values, tt), quad, mol, taper)

    k1 = stage(g, t)
    k2 = stage(g + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = stage(g + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = stage(g + dt * k3, t + dt)
    new = g + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    _guarded(new, t + dt, guard, dx)
    return state.with_g(new, t + dt)


@dataclass(frozen=True)
class SimConfig:
    grid: GridSpec
    quad: QuadratureScheme
    t_end: float
    dt: float | None = None
    cfl: float | None = None
    epsilon: float = 0.0
    output_every: int = 1
    snapshot_every: int = 0
    jump: float = TWO_PI
    blowup_guard: float = BLOWUP_GUARD
    taper_fraction: float = 0.1

    def __post_init__(self):
        if self.quad.spec != self.grid:
            raise InvalidArgument("quad is aligned to a different grid")
        if not self.t_end > 0:
            raise InvalidArgument(f"t_end must be positive, got {self.t_end}")
        if self.dt is not None and self.cfl is not None:
            raise InvalidArgument("give either dt or cfl, not both")
        if self.dt is not None and not self.dt > 0:
            raise InvalidArgument(f"dt must be positive, got {self.dt}")
        if self.cfl is not None and not 0 < self.cfl <= 1:
            raise InvalidArgument(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.epsilon < 0:
            raise InvalidArgument(f"epsilon must be >= 0, got {self.epsilon}")
        if 0 < self.epsilon < 2.0 * self.grid.dx * (1 - 1e-12):
            raise InvalidArgument(f"epsilon={self.epsilon} must be >= 2*dx = {2 * self.grid.dx}")
        if int(self.output_every) != self.output_every or self.output_every < 1:
            raise InvalidArgument(f"output_every must be an integer >= 1, got {self.output_every}")
        if not 0 <= self.taper_fraction < 0.5:
            raise InvalidArgument(f"taper_fraction must lie in [0, 0.5), got {self.taper_fraction}")
        if self.snapshot_every < 0:
            raise InvalidArgument("snapshot_every must be >= 0")

    @property
    def nominal_dt(self) -> float:
        if self.dt is not None:
            return self.dt
        return (0.25 if self.cfl is None else self.cfl) * self.grid.dx

    @property
    def steps(self) -> int:
        return max(1, math.ceil(self.t_end / self.nominal_dt - 1e-9))

    @property
    def step_dt(self) -> float:
        """Step actually taken: t_end split into a whole number of steps."""
        return self.t_end / self.steps


@dataclass(frozen=True)
class Trajectory:
    times: tuple[float, ...]
    reports: tuple[EnergyReport, ...]
    snapshots: tuple[tuple[float, GridFunction], ...]
    final: GridFunction
    blew_up: bool = False
    blowup_time: float | None = None
    blowup_reason: str = ""
    dt: float = 0.0
    meta: dict = field(default_factory=dict)

    def h3(self) -> np.ndarray:
        return np.array([r.h3 for r in self.reports])

    def energy(self) -> np.ndarray:
        return np.array([r.energy for r in self.reports])


def simulate(g0: GridFunction, cfg: SimConfig, progress=None) -> Trajectory:
    if g0.spec != cfg.grid:
        raise InvalidArgument("initial data lives on a different grid")
    mol = make_mollifier(cfg.grid, cfg.epsilon) if cfg.epsilon > 0 else None
    taper = edge_taper(cfg.grid, cfg.taper_fraction)
    state = InterfaceState(g0, 0.0, cfg.jump)
    dt = cfg.step_dt
    nsteps = cfg.steps
    times = [0.0]
    reports = [norms(g0)]
    snaps = [(0.0, g0)]
    blew, t_blow, why = False, None, ""
    for s in range(1, nsteps + 1):
        try:
            state = step(state, dt, cfg.quad, mol, cfg.blowup_guard, taper)
        except BlowUpError as e:
            blew, t_blow, why = True, e.time, str(e)
            break
        # the last step lands on t_end exactly
        t = cfg.t_end if s == nsteps else s * dt
        state = InterfaceState(state.g, t, cfg.jump)
        if s % cfg.output_every == 0 or s == nsteps:
            times.append(t)
            reports.append(norms(state.g))
            k = len(reports) - 1
            if s == nsteps or (cfg.snapshot_every and k % cfg.snapshot_every == 0):
                snaps.append((t, state.g))
            if progress is not None:
                progress(t, reports[-1])
    if blew and snaps[-1][0] != times[-1]:
        snaps.append((state.t, state.g))
    return Trajectory(
        tuple(times), tuple(reports), tuple(snaps), state.g,
        blew, t_blow, why, dt,
    )
