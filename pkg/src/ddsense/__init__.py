"""Joint delay-Doppler estimation from sparse OFDMA resource grids.

Simulates sparse OFDMA frames with arbitrary QAM payloads, propagates them
through a multipath delay-Doppler channel, and recovers per-path delay,
Doppler shift and complex weight with an amplitude-weighted model-based
estimator, verified against Cramer-Rao bounds and ZF/MF baselines.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .baselines import (ambiguity_function, dft_spreading, mf_channel,
                        unweighted_estimate, zf_channel)
from .bounds import crb, fisher_information
from .channel import (Observation, PathSet, observe, propagate, wrap_delay,
                      wrap_difference, wrap_doppler)
from .errors import (ConfigurationError, DdsenseError, FormatError,
                     OptimizationError, SingularModelError)
from .estimator import (EstimationReport, EstimatorConfig, blue_weights,
                        coarse_search, estimate, lm_refine, spreading_function)
from .grid import AllocationMask, GridConfig, build_mask, scatter, vectorize
from .harness import (CampaignConfig, RandomPathSpec, build_scenario,
                      export_af, export_sf, match_paths, run_campaign)
from .model import (SamplingAxes, jacobian, signal_model, steering,
                    steering_full, synth_channel)
from .txgen import Frame, ModulationConfig, generate_frame, make_constellation

__version__ = "0.1.0"
