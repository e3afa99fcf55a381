"""Numerical solvers for the Kuramoto mean-field game.

Stationary equilibria through the scalar self-consistency map, the
sub/super-critical phase transition, time-dependent solutions by damped
Picard iteration on the mean-field forcing, the strong-interaction Eikonal
limit, the linearized stability operators, and finite ensembles of
controlled oscillators.
"""

from . import errors
from ._kernels import BACKEND as kernel_backend
from .eikonal import eikonal_gap, explicit_eikonal, lipschitz_check, scaled_w
from .evolution import (
    Forcing,
    MeasureFlow,
    MfgSolution,
    ValueField,
    apply_T,
    estimate_decay_rate,
    solve_backward_hjb,
    solve_forward_fp,
    solve_mfg,
)
from .fixedpoint import (
    BifurcationPoint,
    StationaryProfile,
    bifurcation_scan,
    big_f,
    find_fixed_points,
    gibbs_measure,
    slope_at_zero,
    stationary_profile,
)
from .hjb import ValueFn, drift_field, solve_stationary_hjb
from .linearized import WeightedForcing, mn_operators, remainder_probe, xi_operator
from .particles import EnsembleStats, ParticleEnsemble, empirical_cost, simulate
from .torus import (
    Grid,
    GridFn,
    Measure,
    Params,
    align,
    dist_to_uniform,
    running_cost,
    standard_density,
    translate,
    trig_moments,
    wrapped_gaussian,
)

__version__ = "0.1.0"
