"""Neural-network survival prediction on right-censored data.

Three methods share one pipeline: a softmax parametrization of the event-time
probabilities per interval (pmf), a logistic parametrization of the discrete
hazards (logistic-hazard), and a continuous-time model with piecewise-constant
hazards (pc-hazard). The package also provides time-grid construction,
survival-curve interpolation, evaluation metrics, a synthetic data generator
with known truth, and a command-line pipeline.
"""

from .dataset import (
    Standardizer,
    SurvivalDataset,
    SurvivalRecord,
    fit_standardizer,
    load_csv,
    split,
    write_csv,
)
from .errors import (
    MetricUndefinedError,
    NumericalError,
    SchemaError,
    SurvnetError,
    ValidationError,
)
from .grid import (
    DiscreteLabels,
    GridDeduplicationWarning,
    TimeGrid,
    continuous_labels,
    discretize,
    equidistant_grid,
    km_quantile_grid,
    locate,
)
from .km import KaplanMeierCurve
from .losses import (
    LossOutput,
    cumsum_head,
    nll_logistic_hazard,
    nll_pc_hazard,
    nll_pmf,
    sigmoid,
    softplus,
)
from .curves import (
    SurvivalCurve,
    interpolate,
    pc_hazard_curve,
    pmf_probs,
    surv_from_hazard,
    surv_from_pmf,
    surv_pc_hazard,
)
from .net import Mlp, TrainConfig, forward, gradient_check, init_mlp
from .net import fit as fit_net
from .metrics import EvalGrid, integrated_brier_score, mse_vs_truth, td_concordance
from .sim import GammaSet, SimConfig, generate_dataset, logit_hazard, true_survival

__version__ = "0.1.0"

__all__ = [
    "DiscreteLabels",
    "EvalGrid",
    "GammaSet",
    "GridDeduplicationWarning",
    "KaplanMeierCurve",
    "LossOutput",
    "MetricUndefinedError",
    "Mlp",
    "NumericalError",
    "SchemaError",
    "SimConfig",
    "Standardizer",
    "SurvivalCurve",
    "SurvivalDataset",
    "SurvivalRecord",
    "SurvnetError",
    "TimeGrid",
    "TrainConfig",
    "ValidationError",
    "continuous_labels",
    "cumsum_head",
    "discretize",
    "equidistant_grid",
    "fit_net",
    "fit_standardizer",
    "forward",
    "generate_dataset",
    "gradient_check",
    "init_mlp",
    "integrated_brier_score",
    "interpolate",
    "km_quantile_grid",
    "load_csv",
    "locate",
    "logit_hazard",
    "mse_vs_truth",
    "nll_logistic_hazard",
    "nll_pc_hazard",
    "nll_pmf",
    "pc_hazard_curve",
    "pmf_probs",
    "sigmoid",
    "softplus",
    "split",
    "surv_from_hazard",
    "surv_from_pmf",
    "surv_pc_hazard",
    "td_concordance",
    "true_survival",
    "write_csv",
]
