"""eslinc: a (1,lambda)-ES with resampling on a linear function under a
linear constraint — exact samplers, analytic densities, chain simulators and
Monte Carlo estimators of the divergence behaviour.

The hot chain loops run on a compiled extension when available, with a
bit-identical numpy fallback (`eslinc.backend_name()` tells which one is
active; the ESLINC_BACKEND environment variable forces a choice).
"""

from ._kernels import BACKEND as _BACKEND
from .chain import (ConstSigmaResult, ConstSigmaState, ConstantSigma, CsaConfig,
                    CsaResult, CsaState, FullEsResult, chi_norm, const_sigma_step,
                    csa_step, default_burn_in, run_const_sigma, run_csa, run_full_es)
from .densities import (QuadratureResult, feasible_step_marginal1_cdf,
                        feasible_step_marginal1_pdf, feasible_step_pdf,
                        quadrature_expectation, selected_step_marginal1_pdf,
                        selected_step_marginal2_pdf, selected_step_pdf)
from .errors import ConfigurationError, QuadratureError
from .estimators import (DriftProbeResult, EstimateReport, KsDecision,
                         batch_means_se, drift_probe, ks_two_sample,
                         log_sigma_slope, progress_rate, sign_verdict,
                         stationary_delta_mean)
from .geometry import ProblemConfig, Step2
from .normal import (std_normal_cdf, std_normal_pdf, std_normal_quantile,
                     std_normal_sf, trunc_normal_inverse)
from .rng import RngStream
from .sampling import (ResampleBatch, draw_batch, g_tilde, rejection_sample,
                       rejection_select_block, select, select_block)

__version__ = "0.1.0"


def backend_name() -> str:
    """Active chain-kernel backend: 'compiled' or 'python'."""
    return _BACKEND
