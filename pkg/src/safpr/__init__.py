"""Phase retrieval by smooth amplitude flow.

Gradient descent on a smoothed amplitude loss, started from a weighted
maximal-correlation estimate, over real/complex Gaussian and coded
diffraction measurement models. AF and WF losses are included as baselines.
"""
from .initialization import (DegenerateSpectrumError, InitConfig, estimate_norm, initialize,
                             leading_eigenvector, power_iteration, select_top_indices)
from .measurement import (CDPModel, DenseModel, MeasurementModel, Observation, adjoint,
                          build_cdp_model, build_gaussian_model, forward, observe)
from .numerics import (COMPLEX, REAL, ContractError, DomainError, align_phase, dist_up_to_phase,
                       make_rng, nmse, sample_gaussian_vector)
from .objective import (AF, SAF, WF, af_grad, af_loss, kernel, make_objective, saf_grad,
                        saf_loss, saf_weight, smooth_abs, verify_kernel_properties, wf_grad,
                        wf_loss)
from .solver import SolverConfig, SolverTrace, backtrack_step, run, solve

__version__ = "0.1.0"
