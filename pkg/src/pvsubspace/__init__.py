"""Active subspaces, bootstrap stability and PCE Sobol' indices for scalar models.

The reference model is the single-diode PV cell, whose maximum power is
studied as a function of five normalized circuit parameters.
"""

from .bootstrap import BootstrapSummary, bootstrap_subspace, replicate_summary_cloud, subspace_distance
from .diode import (DiodeConstants, DiodeParams, DiodePmaxModel, IVPoint, PmaxResult, iv_curve,
                    open_circuit_voltage, p_max, photocurrent, solve_current)
from .gradients import GradientSampleSet, build_sample_set, fd_gradient, local_linear_gradient
from .models import ExternalModel, load_external_model
from .params import (DIODE_SI_2CM2, PRESETS, ParameterDef, ParameterSpace, Transform, denormalize,
                     load_space, normalize, sample_uniform)
from .sobol import PceExpansion, SobolResult, fit_pce, gauss_legendre_nodes, legendre_eval, sobol_indices
from .study import StudyConfig, run_study
from .subspace import (SubspaceEstimate, SubspacePartition, active_coordinates, eigh_symmetric,
                       estimate_c_matrix, partition, suggest_gap, summary_plot_data)

__version__ = "0.1.0"
