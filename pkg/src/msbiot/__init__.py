"""Mass-conservative mixed multiscale solver for 2D linear
poroelasticity in high-contrast heterogeneous media."""

from .grid import build_hierarchy, GridHierarchy, Neighborhood
from .medium import (PoroelasticMedium, derive_lame, build_medium,
                     load_field, save_field, generate_high_contrast)
from .fine_fem import (BoundarySpec, FineSpaces, OperatorSet, build_spaces,
                       assemble_operators, assemble_load, energy_norm)
from .time_integrator import SchemeConfig, SystemState, Trajectory, run, \
    initialize
from .ms_system import MultiscaleSpace, build_multiscale_space, \
    project_operators, solve_multiscale, conservation_report
from .diagnostics import ErrorReport, compute_errors, write_csv

__version__ = "0.1.0"
