"""Predictable feature analysis for multivariate time series."""

from .ar_model import (ArPredictor, ShiftPredictor, fit_full, fit_reduced, fit_shift,
                       iterated_prediction, prediction_error)
from .exceptions import CsvFormatError, DegenerateSignalError, InsufficientDataError, PfaError
from .preprocessing import (SpheringTransform, ThresholdPolicy, apply_sphering, fit_sphering,
                            thresholded_inverse)
from .sfa import SfaResult, solve_sfa
from .single_component import extract_alternating, extract_deflated
from .solver import (ExtractionResult, LinearARModel, PfaConfig, PredictionModel, extract_features,
                     solve_general, solve_pfa_k, solve_relaxation, verify_agnosticity)
from .timeseries import TimeSeries, embed_history, expand, history_matrix, kron_block, read_csv

__version__ = "0.1.0"
