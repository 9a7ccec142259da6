"""Exact laws and Monte Carlo engines for interlaced, non-colliding and
coalescing Brownian motions."""

__version__ = "0.1.0"

from .errors import CapabilityError, DomainError, NumericalError
from .kernels import gauss_cdf, gauss_pdf, gauss_pdf_prime, iterated_phi, iterated_phi_orders
from .densities import (
    InterlacedPoint, coalescing_cdf, entrance_mu, entrance_nu, gt_cone_volume,
    gt_entrance_density, intertwining_residual, is_gt_pattern, km_density, km_density_plus,
    lambda_kernel, ordered_eigenvalue_cdf, q_density, q_density_dual, q_density_plus,
    r_density, top_eigenvalue_cdf, vandermonde_h,
)
from .simulate import (
    EntranceStart, PathBatch, SimConfig, SpreadStart, dyson_step, sample_gt_pattern,
    sample_gue_spectrum, simulate_coalescing, simulate_dyson, simulate_gt_cone,
    simulate_interlaced_pair, simulate_interlaced_pair_plus, simulate_sup_functional,
    skorokhod_step, sup_functional,
)
from .verify import KSResult, Tolerances, VerificationReport, ks_test, run_suite
