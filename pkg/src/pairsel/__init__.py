"""Pairwise correlation screening with mixed l1/l2 penalized regression.

Covariates are screened marginally (SIS), then in pairs using extreme-value
thresholds on the maximal sample correlation and on pairwise R^2. Covariates
that survive in some pair get a ridge penalty, the rest a lasso penalty.
"""

from .exceptions import (ConvergenceWarning, DegenerateInputError,
                         DegenerateThresholdWarning, DimensionalityWarning,
                         DomainError, PairselError, SeparationWarning,
                         SingularPairError, SubsetClampWarning,
                         ThresholdSaturationWarning, TuningError)
from .io import CsvFormatError, dumps, emit_data_csv, ingest_csv
from .laws import (LawThresholds, NormalizingConstants, law_thresholds,
                   limiting_cdf_w2, limiting_quantile_w2, normalizing_constants,
                   phase_transition_cdf, phase_transition_statistic,
                   r_squared_threshold, spearman_cdf, spearman_threshold,
                   w2_threshold)
from .screening import (ScreenSets, glm_pair_screen, pair_screen, paired_set,
                        screen, sis_screen)
from .simulate import (PipelineConfig, SimReport, SimScenario, evaluate,
                       example_scenario, generate, run_pipeline, run_scenario,
                       sensitivity_sweep)
from .solver import (FitModel, PenaltySpec, classify, fit, fit_linear,
                     fit_logistic, fit_path, kkt_residual, lambda1_grid,
                     lambda1_max, predict)
from .stats import (DataMatrix, StandardizedDesign, correlation_matrix,
                    pairwise_r_squared, pearson_corr, spearman_rho,
                    standardize)
from .tuning import TuningPlan, TuningResult, tune
from .validation import validate_laws

__all__ = [
    'ConvergenceWarning', 'DegenerateInputError',
    'DegenerateThresholdWarning', 'DimensionalityWarning', 'DomainError',
    'PairselError', 'SeparationWarning', 'SingularPairError',
    'SubsetClampWarning', 'ThresholdSaturationWarning', 'TuningError',
    'CsvFormatError', 'dumps', 'emit_data_csv', 'ingest_csv',
    'LawThresholds', 'NormalizingConstants', 'law_thresholds',
    'limiting_cdf_w2', 'limiting_quantile_w2', 'normalizing_constants',
    'phase_transition_cdf', 'phase_transition_statistic',
    'r_squared_threshold', 'spearman_cdf', 'spearman_threshold',
    'w2_threshold', 'ScreenSets', 'glm_pair_screen', 'pair_screen',
    'paired_set', 'screen', 'sis_screen', 'PipelineConfig', 'SimReport',
    'SimScenario', 'evaluate', 'example_scenario', 'generate',
    'run_pipeline', 'run_scenario', 'sensitivity_sweep', 'FitModel',
    'PenaltySpec', 'classify', 'fit', 'fit_linear', 'fit_logistic',
    'fit_path', 'kkt_residual', 'lambda1_grid', 'lambda1_max', 'predict',
    'DataMatrix', 'StandardizedDesign', 'correlation_matrix',
    'pairwise_r_squared', 'pearson_corr', 'spearman_rho', 'standardize',
    'TuningPlan', 'TuningResult', 'tune', 'validate_laws',
]

__version__ = "0.1.0"
