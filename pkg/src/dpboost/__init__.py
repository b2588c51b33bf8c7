"""Differentially private linear classification by boosting random
classifiers, with a public/private feature split, baselines, and a
reproducibility harness.
"""

from .baselines import (
    LogRegHyper,
    PateConfig,
    PateModel,
    fit_dp_logreg,
    fit_logreg,
    fit_logreg_weighted,
    fit_pate,
)
from .boosting import (
    RoundRecord,
    brc_fit,
    brc_fit_all_private,
    clipped_update,
    noisy_private_error,
    sensitivity_oracle,
    weighted_error,
)
from .data import (
    ColumnSpec,
    DataError,
    Dataset,
    FeatureSplit,
    LabelSpec,
    RawTable,
    Schema,
    balance,
    encode,
    load_csv,
    normalize,
    split,
)
from .harness import (
    ExperimentConfig,
    ResultRecord,
    SummaryRow,
    aggregate,
    convergence_trace,
    emit_csv,
    emit_svg,
    run_experiment,
)
from .model import Ensemble, EnsembleMember, LinearClassifier, accuracy, sign_labels
from .noise import (
    PrivacyParams,
    Purpose,
    budget_per_round,
    laplace,
    make_rng,
    random_linear_classifier,
    rng_for,
)
from .toy import ToyConfig, ToyReport, ThresholdClassifier, flip_and_fit_threshold, generate_toy, run_toy_sweep

__version__ = "0.1.0"
