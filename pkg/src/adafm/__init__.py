"""Factorization machines for implicit-feedback ranking with adaptive boosting.

The package provides a second-order FM predictor over sparse one-hot
user/item features, pairwise and pointwise SGD trainers with four negative
sampling strategies, ranking metrics (AUC, NDCG), and a boosting loop that
grows an ensemble of low-rank component FMs equivalent to a single
higher-rank FM.
"""

from .boosting import (
    BoostConfig,
    BoostingError,
    BoostState,
    RoundRecord,
    compute_alpha,
    run_adafm,
    update_weights,
)
from .core import (
    FeatureEncoder,
    Interaction,
    InteractionDataset,
    RngHandle,
    SparseVector,
    build_popularity_index,
    encode_pair,
    positive_and_negative_sets,
)
from .data import (
    DataFormatError,
    SplitSpec,
    filter_min_interactions,
    load_dataset,
    load_split,
    split,
    write_interactions,
)
from .metrics import (
    EvalResult,
    Measure,
    PerUserPerformance,
    RankedList,
    evaluate_model,
    format_report,
    user_auc,
    user_ndcg,
    weighted_auc,
)
from .model import (
    EnsembleModel,
    FmParams,
    ModelFormatError,
    ensemble_predict,
    init_params,
    load_model,
    merge_ensemble,
    partial_score,
    predict_fast,
    predict_naive,
    save_model,
    score_items,
)
from .samplers import (
    RankAwareDraw,
    SamplerConfig,
    gamma_exact,
    sample_dynamic,
    sample_rank_aware,
    sample_static,
    sample_uniform,
)
from .training import (
    PairStep,
    TrainConfig,
    TrainingDivergedError,
    lambda_grad,
    pairwise_logistic_loss,
    sgd_pair_update,
    train_component,
    train_pointwise_fm,
)

__version__ = "0.1.0"
