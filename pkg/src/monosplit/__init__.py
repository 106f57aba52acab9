"""Operator-splitting solvers for monotone inclusions 0 in M(z) + F(z).

Core pieces: a momentum-accelerated reflected forward-backward method with
an equivalent certificate form, the classical splitting baselines, blockwise
primal-dual variants for saddle-point and cone-constrained problems, a
Lyapunov verification layer, and the benchmark harness behind the
comparison tables and convergence figures.
"""

from .numkit import (DimensionError, NormEstimationError, SparseMatrix, as_vector,
                     axpy, dot, norm, operator_norm, spmv)
from .operators import (ConeKind, ForwardOp, MonotoneOp, Problem, certificate_gap,
                        forward_eval, lipschitz_bound, project_cone, prox_l1,
                        resolvent)
from .splitters import (METHODS, IterateTrace, ParameterError, SolverConfig,
                        SolverState, StateSnapshot, collect_snapshots, default_c,
                        gamma_cap, iterate, run_solver, validate_params)
from .primal_dual import (PDCertificates, PDState, SaddleProblem, as_inclusion,
                          compute_reference, cone_step, composite_step,
                          objective_value, pack, pd_certificates, pd_diagnostics,
                          pd_init, run_pd, saddle_step, unpack)
from .analysis import (LyapunovParams, LyapunovTracker, OmegaConstants, RateFit,
                       condition_delta_interval, condition_s_interval,
                       default_window_params, energy_identity_residual,
                       first_nonneg_k, fixed_point_residual, g_lower_bound_gap,
                       lambda_window, lyapunov_E, lyapunov_G, mu_k,
                       omega_constants, rate_slope, tangent_residual_upper)
from .bench import (ExperimentReport, MethodStats, StoppingRule,
                    build_chain_matrix, build_known_solution_problem,
                    build_qp_problem, chain_eq_solution, hitting_times,
                    kkt_residual, reference_solution, run_parameter_study,
                    run_table_experiment, table_method_configs)

__version__ = "0.1.0"
