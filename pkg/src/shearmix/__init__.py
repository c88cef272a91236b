"""Numerical laboratory for passive scalar mixing by shear flows on the torus.

The package evolves the advection-diffusion equation mode by mode, samples
its exact stochastic (flow-map) representation, and provides quantitative
verification harnesses for mixing rates, random-phase sublevel structure,
oscillatory-integral decay, image-curve geometry, and enhanced dissipation.
"""

__version__ = "0.1.0"

from .shear import ShearProfile, analyze_critical_structure  # noqa: F401
from .grid import PeriodicGrid1D, PeriodicGrid2D, ScalarField  # noqa: F401
from .solver import EvolutionConfig, solve_exact_inviscid, solve_viscous  # noqa: F401
