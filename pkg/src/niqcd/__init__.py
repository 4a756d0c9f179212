"""Mixture estimation for heavy-tailed data via quantile change detection."""

from .changepoint import Segmentation, collapse_locations, detect_changepoints
from .distributions import Family, MixtureModel, std_cdf, std_pdf, std_quantile
from .empirical import SortedSample, log_returns, median_iqr, skewness_kurtosis
from .errors import DataError, IntegrationError, NumericalError
from .estimation import (FitConfig, FitReport, coordinate_descent, fit_iqcd,
                         fit_niqcd, negative_log_likelihood)
from .finance import CategorySeries, ReturnSeries, classify, ingest_prices, weekly_refit
from .gof import AdResult, ad_statistic, ad_test
from .overlap import OverlapReport, bcd, dol, integrate_real_line, overlap_report, rbcd, wdol
from .simulate import ExperimentResult, Setting, emit_report, make_setting, run_experiment

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Family", "MixtureModel", "std_pdf", "std_cdf", "std_quantile",
    "SortedSample", "median_iqr", "skewness_kurtosis", "log_returns",
    "Segmentation", "detect_changepoints", "collapse_locations",
    "FitConfig", "FitReport", "fit_niqcd", "fit_iqcd",
    "coordinate_descent", "negative_log_likelihood",
    "OverlapReport", "overlap_report", "integrate_real_line",
    "dol", "wdol", "bcd", "rbcd",
    "AdResult", "ad_statistic", "ad_test",
    "Setting", "ExperimentResult", "make_setting", "run_experiment", "emit_report",
    "ReturnSeries", "CategorySeries", "ingest_prices", "classify", "weekly_refit",
    "DataError", "NumericalError", "IntegrationError",
]
