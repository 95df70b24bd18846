"""Simulation and bound certification for the Muskat equation about the
moving parabola h = x^2 + jump*t + g."""
from .errors import BlowUpError, InvalidArgument, InvalidData
from .grid import (
    EnergyReport, GridFunction, GridSpec, SupportWarning, bump, derivative,
    make_grid, norms, sample, zeros,
)
from .kernels import InterfaceState, KernelId, kernel, slope_f, slope_g, slope_h, zeta
from .singular import (
    Form, QuadratureScheme, discrete_hilbert, hilbert_rational,
    hilbert_rational_truncated, lambda_op, make_scheme, pv_integral, pv_integral_all,
)

__version__ = "0.1.0"
