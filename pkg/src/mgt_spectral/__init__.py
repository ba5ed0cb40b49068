"""Spectral analysis and time stepping for a third-order-in-time evolution
equation with fractional damping, realized diagonally on the eigenbasis of a
positive self-adjoint operator."""

from .block_operators import (BlockKind, Regime, RegimeReport, classify, closed_form_inverse,
                              closed_form_spectrum, dissipativity_witness,
                              extrapolation_constants, growth_abscissa, mode_block,
                              multipliers, resolvent_reduced, scan_resolvent, sector_scan)
from .errors import (NearSingularError, NonRealFieldError, NumericalFailure, RegimeError,
                     ShapeError, UnsupportedBasisError)
from .nonlinear_solver import (NonlinearityForm, NonlinearitySpec, Scheme, SolverConfig, Status,
                               Trajectory, etd_solve, lipschitz_probe, nemytskii,
                               reduction_solve, rho_admissible)
from .semigroup import (Propagator, PropagatorMethod, decay_rate, mode_propagator,
                        propagate_linear, rate_scan, smoothing_constant)
from .spectral_core import (Basis, Coords, EigenSequence, SpectralState, analyze, dirichlet_eigs,
                            frac_apply, natural_to_reduced, reduced_to_natural, scale_norm,
                            synthesize, z_norm)

__version__ = "0.1.0"
