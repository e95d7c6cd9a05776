"""Facilitated lattice gases, their exclusion/zero-range mapping, and the
limiting Stefan free-boundary problems, with a verification harness that
checks the hydrodynamic-limit statements at desk scale."""

from .core import (ExclusionConfig, LineWindow, Phase, Torus, ZeroRangeConfig,
                   classify_exclusion, classify_zero_range, hole_count,
                   particle_count, total_mass)
from .dynamics import (CoupledRun, ObservationSet, SimParams, run_coupled_fzrp,
                       run_fep, run_fep_with_tagged_hole, run_fzrp)
from .measures import (Profile, sample_bernoulli_heights, sample_bernoulli_profile,
                       sample_equilibrium_zr, sample_geometric_profile,
                       sample_monotone_coupling)
from .pde import (DensityField, FluxSpec, FRAK_H, G, H, build_smoothed_flux,
                  build_viscous_fluxes, flux_eval, riemann_exact,
                  solve_hyperbolic, solve_parabolic)

__version__ = "0.1.0"
