"""Geometric-mean CFAR detectors for Pareto Type I clutter.

Library layout:

* :mod:`gmcfar.clutter` -- Pareto distribution primitives and sampling;
* :mod:`gmcfar.detectors` -- the four log-domain decision rules;
* :mod:`gmcfar.pfa` -- closed-form false-alarm probabilities (with the
  competing published and re-derived variants where they differ);
* :mod:`gmcfar.oracles` -- Monte Carlo and quadrature oracles plus the
  adjudication that decides which closed forms to trust;
* :mod:`gmcfar.simulate` -- end-to-end Pareto-domain simulation and the
  CFAR homogeneity check;
* :mod:`gmcfar.solver` -- threshold-multiplier inversion;
* :mod:`gmcfar.cli` -- the ``gmcfar`` command-line tool.
"""

from .clutter import (ParetoParams, dual_to_pareto, pareto_cdf,
                      pareto_quantile, pareto_to_dual,
                      sample_exponential_unit, sample_pareto)
from .detectors import (Decision, DetectorKind, Outcome, Window,
                        gm_full_multi, gm_full_single, gm_partial_multi,
                        gm_partial_single, margins_full_multi,
                        margins_partial_multi)
from .errors import (GmCfarError, InconsistentReportError,
                     NumericalFailureError, ParameterDomainError,
                     QuantileOverflowError, UnreachableTargetError,
                     UnsupportedConfigurationError)
from .oracles import (AdjudicationReport, EstimateWithCI, ExcessShape,
                      GridPointRecord, adjudicate, default_grid, mc_dual_pfa,
                      quadrature_pfa_full_multi, quadrature_pfa_partial_multi,
                      validated_pfa, wilson_interval)
from .pfa import (PfaFormulaVariant, gamma_tail_poisson_sum, log_binomial,
                  pfa_gm_full_multi, pfa_gm_full_single, pfa_gm_partial_multi,
                  pfa_gm_partial_single)
from .rng import RandomStream, stable_u64
from .simulate import (CfarGridPoint, CfarGridReport, SweepSpec,
                       cfar_grid_check, empirical_pfa)
from .solver import SolverConfig, solve_tau_numeric, solve_tau_partial_single

__version__ = "0.1.0"

__all__ = [
    "AdjudicationReport",
    "CfarGridPoint",
    "CfarGridReport",
    "Decision",
    "DetectorKind",
    "EstimateWithCI",
    "ExcessShape",
    "GmCfarError",
    "GridPointRecord",
    "InconsistentReportError",
    "NumericalFailureError",
    "Outcome",
    "ParameterDomainError",
    "ParetoParams",
    "PfaFormulaVariant",
    "QuantileOverflowError",
    "RandomStream",
    "SolverConfig",
    "SweepSpec",
    "UnreachableTargetError",
    "UnsupportedConfigurationError",
    "Window",
    "adjudicate",
    "cfar_grid_check",
    "default_grid",
    "dual_to_pareto",
    "empirical_pfa",
    "gamma_tail_poisson_sum",
    "gm_full_multi",
    "gm_full_single",
    "gm_partial_multi",
    "gm_partial_single",
    "log_binomial",
    "margins_full_multi",
    "margins_partial_multi",
    "mc_dual_pfa",
    "pareto_cdf",
    "pareto_quantile",
    "pareto_to_dual",
    "pfa_gm_full_multi",
    "pfa_gm_full_single",
    "pfa_gm_partial_multi",
    "pfa_gm_partial_single",
    "quadrature_pfa_full_multi",
    "quadrature_pfa_partial_multi",
    "sample_exponential_unit",
    "sample_pareto",
    "solve_tau_numeric",
    "solve_tau_partial_single",
    "stable_u64",
    "validated_pfa",
    "wilson_interval",
    "__version__",
]
