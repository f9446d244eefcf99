"""Jump and variation inequalities for truncated singular integral
families on grid functions: operators, discrete functionals, dyadic
decomposition, weight classes, and an experiment harness."""

from .errors import (GridMismatchError, KernelError, ParameterError,
                     ResolutionError, VarjumpError)
from .kernels import (DirectionalKernel, circle_kernel, constant_kernel,
                      cosine_kernel, hilbert_kernel, lq_norm, mean,
                      parse_kernel, read_kernel, sector_kernel,
                      split_mean_zero, two_point_kernel, write_kernel)
from .grids import (GridFunction, Weight, build_function, build_weight,
                    frequencies, inverse_spectral_transform, lp_norm,
                    read_grid_function, sample_at, spectral_energy,
                    spectral_transform, weighted_lp_norm,
                    write_grid_function)
from .families import FamilySamples, read_family, write_family
from .functionals import (JUMP_DOMINATION_CONSTANT, JumpProfile,
                          VariationMode, jump_count_batch, jump_profile,
                          jump_sup_batch, lambda_jump, octave_index,
                          rho_variation, rho_variation_batch,
                          short_variation, short_variation_batch,
                          smooth_variation_bound)
from .operators import (averaging, averaging_family, cutoff_profile,
                        dyadic_shell, geometric_grid, hl_maximal,
                        log_breakpoints, lp_projection, maximal_truncated,
                        projection_levels, projection_profile,
                        rough_maximal, sample_shifted, shell_derivative,
                        shell_family, smooth_cutoff, truncated_family,
                        truncated_singular)
from .dyadic import (Cube, CZResult, DyadicLattice, conditional_expectation,
                     cz_decompose, lattice_of, martingale_difference)
from .muckenhoupt import (CubeFamily, a1_characteristic, ap_characteristic,
                          characteristic, check_condition,
                          dyadic_cube_family, dual_weight,
                          power_weight_in_class, refinement_profile)
from .harness import (ExperimentConfig, ROUGH_SUITE, SMOOTH_SUITE,
                      load_configs, parse_param_grid, parse_scale,
                      run_experiment, run_jump_ratio, run_many,
                      run_pointwise_checks, run_variation_ratio,
                      run_weight_boundary)
from .report import (RatioReport, RatioRow, VERSION, config_hash,
                     emit_report, load_report)
from .acceptance import CriterionResult, run_all

__version__ = VERSION

__all__ = [name for name in dir() if not name.startswith("_")]
