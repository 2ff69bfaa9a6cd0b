"""Split-and-smooth estimation and inference for high-dimensional GLMs."""

from .data import Dataset, expand_interactions, load_dataset
from .families import family_eval, get_family
from .glm import (PartialFit, fit_mle, neg_log_likelihood,
                  score_and_information)
from .inference import (ContrastTest, InferenceReport, VarianceEstimate,
                        bias_corrected_variance, contrast_test,
                        coordinate_inference, infer, jackknife_variance,
                        subvector_covariance, subvector_fit)
from .selection import (SelectionResult, cv_select, iterated_sis_select,
                        lambda_max, lasso_path, make_selector, sis_select)
from .simulate import (MetricsReport, SimScenario, contrast_scenario,
                       gen_design, gen_response, gen_truth, load_scenario,
                       run_scenario, save_scenario, sweep_split_proportion)
from .smoothing import (SmoothedFit, SplitEstimate, one_time_estimate,
                        ssglm_fit)
from .splitting import SplitPlan, make_splits, substream

__version__ = "0.1.0"

__all__ = [
    "Dataset", "expand_interactions", "load_dataset",
    "family_eval", "get_family",
    "PartialFit", "fit_mle", "neg_log_likelihood", "score_and_information",
    "ContrastTest", "InferenceReport", "VarianceEstimate",
    "bias_corrected_variance", "contrast_test", "coordinate_inference",
    "infer", "jackknife_variance", "subvector_covariance", "subvector_fit",
    "SelectionResult", "cv_select", "iterated_sis_select", "lambda_max",
    "lasso_path", "make_selector", "sis_select",
    "MetricsReport", "SimScenario", "contrast_scenario", "gen_design",
    "gen_response", "gen_truth", "load_scenario", "run_scenario",
    "save_scenario", "sweep_split_proportion",
    "SmoothedFit", "SplitEstimate", "one_time_estimate", "ssglm_fit",
    "SplitPlan", "make_splits", "substream",
]
