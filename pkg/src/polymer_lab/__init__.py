"""Self-repelling polymers on Z^d: exact enumeration, walk decompositions,
surgeries and Monte Carlo estimates."""

__version__ = "0.1.0"

from .decompose import (BridgeDecomposition, CrossingProfile, crossing_profile, diamond_times,
                        hw_decompose, hw_reconstruct, in_diamond_cone, irreducible_pieces, is_bridge,
                        is_diamond_point, is_irreducible, renewal_sandwich, renewal_times, short_zigzags,
                        width, zigzags)
from .enumeration import (EnumerationReport, LambdaBracket, SeriesEvaluation, ShardPlan, collect,
                          enumerate_all, evaluate_series, fitted_sqrt_constants, kesten_partial_sum,
                          lambda_bracket, run_plan, shard_enumeration)
from .errors import *  # noqa: F401,F403
from .lattice import StepSet, Walk, apply_symmetry, concatenate, reflect_x, rotate_xy_clockwise, validate_step_set
from .model import (JumpDistribution, LocalTimeMap, Model, Potential, incremental_weight_delta, interaction,
                    local_times, validate_potential, weight_sigma)
from .montecarlo import (BallisticScanReport, IbProcessConfig, SamplerConfig, ballistic_scan,
                         diamond_density_estimate, exact_sample, mcmc_sample, shift, simulate_ib_process,
                         verify_conditional_identity)
from .transform import SurgeryRecord, stickbreak, surgery, unfold, unfold_set
