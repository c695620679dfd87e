"""gradiform: decides whether a dissipative system is gradient-like,
splits its one-form into exact and antiexact parts via the ray homotopy
operator, and searches for coordinate changes that gradientize it."""

__version__ = "0.1.0"

from .fields import (FieldEvalError, Jet, SecondOrderSystem, VectorField,
                     eval_field, jacobian, reduce_second_order)
from .homotopy import (Decomposition, OneForm, QuadratureRule, antiexact_part,
                       decompose, dG_matrix, exact_part, potential)
from .integrability import (ClosednessReport, Loop, Verdict, circle_loop,
                            classify, closedness, frobenius_defect,
                            loop_integral)
from .gradientize import (BarrierViolation, ConstantSolveReport,
                          ConstantVerdict, GeneralSolveConfig,
                          GeneralSolveReport, GradientizeError, MatrixFamily,
                          check_necessary_constant, consistency_check,
                          general_residual, potential_via_transform,
                          solve_consistency_constant, solve_general,
                          solve_symmetrizer, transform_field,
                          transform_field_general)
from .dynamics import (DensityGrid, LyapunovReport, Trajectory,
                       TrajectoryEnsemble, euler_maruyama,
                       euler_maruyama_ensemble, graham_estimate,
                       integrate_rk4, lyapunov_check, orthogonality_residual,
                       stationary_density, write_trajectory_csv)
from .sampling import sample_ball
from .zoo import SystemSpec, analytic_potential, build_system
from . import zoo
