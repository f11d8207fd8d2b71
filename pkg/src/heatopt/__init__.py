"""Two-material heat-conduction design via a nonlinear-diffusion level-set method."""

from .design import DesignField, MaterialParams, clip_shift, coefficient, project_volume, volume
from .fem import (SolverDivergenceError, apply_dirichlet, assemble_mass,
                  assemble_stiffness, cg_solve, dirichlet_energy, lumped_mass)
from .heat import (FieldSeries, RunParams, SourceSpec, duality_steady,
                   duality_time_average, solve_elliptic, solve_parabolic)
from .mesh import Mesh, build_rect_mesh, element_basis_gradients
from .optimizer import (ObjectiveRecord, OptimizationResult, OptimizerConfig,
                        objective, run, update_step)
from .sensitivity import (SensitivityField, correlation_derivative,
                          correlation_integral, descent_field,
                          directional_derivative, elliptic_descent_field)
from .spectral import (EigenPair, check_source_assumption, h_ratio,
                       mode_coefficient, mode_product, smallest_eigenpair)

__version__ = "0.1.0"
