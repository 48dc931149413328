"""Adaptive boosting of component FMs on reweighted users."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .core import FeatureEncoder, InteractionDataset
from .metrics import Measure, evaluate_model
from .model import EnsembleModel, FmParams, merge_ensemble, score_items
from .training import TrainConfig, train_component, train_pointwise_fm

__all__ = [
    "BoostConfig",
    "BoostState",
    "RoundRecord",
    "BoostingError",
    "compute_alpha",
    "update_weights",
    "run_adafm",
    "ROUND_LOG_HEADER",
]

logger = logging.getLogger(__name__)

ROUND_LOG_HEADER = "round,alpha,component_weighted_E,ensemble_train_E,ensemble_holdout_E"

_MAX_RETRIES = 3


class BoostingError(RuntimeError):
    """Raised when a boosting round cannot be completed."""


@dataclass(frozen=True)
class BoostConfig:
    """Boosting loop settings wrapping one component trainer config.

    ``e_clamp`` bounds per-user accuracies away from 0 and 1 before the
    component-weight formula so it stays finite. ``patience`` (if set) stops
    the loop once the holdout aggregate has not improved for that many
    consecutive rounds. ``eval_negatives`` is the per-user sampled candidate
    count used for all internal evaluations.
    """

    rounds: int
    train: TrainConfig
    measure: Measure = field(default_factory=lambda: Measure("auc"))
    e_clamp: float = 1e-6
    patience: int | None = None
    eval_negatives: int = 100

    def __post_init__(self):
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if not 0.0 < self.e_clamp < 0.5:
            raise ValueError("e_clamp must lie in (0, 0.5)")
        if self.patience is not None and self.patience < 1:
            raise ValueError("patience must be >= 1")
        if self.eval_negatives < 0:
            raise ValueError("eval_negatives must be >= 0")


@dataclass
class RoundRecord:
    """Per-round log row plus the weight distribution used next round."""

    round: int
    alpha: float
    component_weighted_e: float
    ensemble_train_e: float
    ensemble_holdout_e: float | None
    weights: np.ndarray

    def csv_row(self) -> str:
        holdout = "" if self.ensemble_holdout_e is None else f"{self.ensemble_holdout_e:.17g}"
        return (
            f"{self.round},{self.alpha:.17g},{self.component_weighted_e:.17g},"
            f"{self.ensemble_train_e:.17g},{holdout}"
        )


@dataclass
class BoostState:
    """Mutable state of the boosting loop."""

    round: int
    weights: np.ndarray
    components: list[tuple[float, FmParams]]
    history: list[RoundRecord]


def compute_alpha(
    weights: np.ndarray, per_user_e: dict[int, float], e_clamp: float = 1e-6
) -> float:
    """Component weight: half the log-odds of its weighted accuracy.

    alpha = 0.5 * ln(sum_a p_a (1 + E_a) / sum_a p_a (1 - E_a)) over users
    with a defined accuracy, each E clamped to [e_clamp, 1 - e_clamp]. The
    ratio is invariant to rescaling the weights, so no renormalization over
    the defined subset is needed.
    """
    if not per_user_e:
        raise BoostingError("no user has a defined accuracy")
    weights = np.asarray(weights, dtype=float)
    users = np.fromiter(per_user_e.keys(), dtype=np.int64, count=len(per_user_e))
    vals = np.fromiter(per_user_e.values(), dtype=float, count=len(per_user_e))
    vals = np.clip(vals, e_clamp, 1.0 - e_clamp)
    p = weights[users]
    num = float(p @ (1.0 + vals))
    den = float(p @ (1.0 - vals))
    if num <= 0 or den <= 0:
        raise BoostingError("degenerate weight mass on evaluated users")
    return 0.5 * math.log(num / den)


def update_weights(per_user_e: dict[int, float], n_users: int) -> np.ndarray:
    """Next-round user distribution: softmax of negated ensemble accuracy.

    Users the current ensemble ranks poorly gain weight; users without a
    defined accuracy get weight zero for the round.
    """
    if not per_user_e:
        raise BoostingError("no user has a defined accuracy")
    p = np.zeros(n_users)
    users = np.fromiter(per_user_e.keys(), dtype=np.int64, count=len(per_user_e))
    vals = np.fromiter(per_user_e.values(), dtype=float, count=len(per_user_e))
    expd = np.exp(-vals)
    p[users] = expd / expd.sum()
    return p


def _derived_seed(master: int, *key: int) -> int:
    seq = np.random.SeedSequence(master & ((1 << 64) - 1), spawn_key=key)
    return int(seq.generate_state(1, np.uint64)[0])


def _train_dispatch(
    ds: InteractionDataset, weights: np.ndarray, cfg: TrainConfig, measure: Measure
) -> FmParams:
    if cfg.objective == "pointwise":
        return train_pointwise_fm(ds, weights, cfg)
    return train_component(ds, weights, cfg, measure)


def run_adafm(
    ds: InteractionDataset,
    cfg: BoostConfig,
    holdout: InteractionDataset | None = None,
    on_round: Callable[[RoundRecord], None] | None = None,
) -> EnsembleModel:
    """Boosting loop: train, weigh, and accumulate component FMs.

    Each round trains a component on the current user distribution, computes
    its weight from the weighted per-user accuracy on the training split,
    then re-evaluates the running ensemble to concentrate the next round's
    distribution on poorly-ranked users. Rounds whose component weight is
    not positive are retried with a perturbed seed (at most 3 retries), else
    the loop stops with the ensemble built so far. Deterministic given the
    config seed.
    """
    n = ds.n_users
    enc = FeatureEncoder(n, ds.n_items)
    state = BoostState(
        round=0,
        weights=np.full(n, 1.0 / n),
        components=[],
        history=[],
    )
    master = cfg.train.seed
    eval_seed = _derived_seed(master, 0)
    holdout_exclude = None
    if holdout is not None:
        holdout_exclude = {
            a: np.union1d(ds.items_of(a), holdout.items_of(a)) for a in range(n)
        }
    best_holdout = -math.inf
    rounds_since_best = 0

    for t in range(1, cfg.rounds + 1):
        accepted = None
        for retry in range(_MAX_RETRIES + 1):
            cfg_t = replace(cfg.train, seed=_derived_seed(master, t, retry))
            component = _train_dispatch(ds, state.weights, cfg_t, cfg.measure)
            comp_eval = evaluate_model(
                lambda u, items: score_items(component, enc, u, items),
                ds,
                cfg.measure,
                weights=state.weights,
                n_negatives=cfg.eval_negatives,
                seed=eval_seed,
            )
            alpha = compute_alpha(state.weights, comp_eval.per_user.values, cfg.e_clamp)
            if alpha > 0:
                accepted = (alpha, component, comp_eval)
                break
            logger.info("round=%d retry=%d alpha=%.6g rejected", t, retry, alpha)
        if accepted is None:
            logger.info("round=%d: no useful component after retries, stopping", t)
            break
        alpha, component, comp_eval = accepted
        state.components.append((alpha, component))
        state.round = t

        merged = merge_ensemble(EnsembleModel(state.components))
        ens_eval = evaluate_model(
            lambda u, items: score_items(merged, enc, u, items),
            ds,
            cfg.measure,
            n_negatives=cfg.eval_negatives,
            seed=eval_seed,
        )
        state.weights = update_weights(ens_eval.per_user.values, n)

        holdout_e = None
        if holdout is not None:
            holdout_e = evaluate_model(
                lambda u, items: score_items(merged, enc, u, items),
                holdout,
                cfg.measure,
                exclude=holdout_exclude,
                n_negatives=cfg.eval_negatives,
                seed=eval_seed,
            ).aggregate

        record = RoundRecord(
            round=t,
            alpha=alpha,
            component_weighted_e=comp_eval.aggregate,
            ensemble_train_e=ens_eval.aggregate,
            ensemble_holdout_e=holdout_e,
            weights=state.weights.copy(),
        )
        state.history.append(record)
        if on_round is not None:
            on_round(record)
        logger.info("round=%d alpha=%.6g train_E=%.6g", t, alpha, ens_eval.aggregate)

        if cfg.patience is not None and holdout_e is not None:
            if holdout_e > best_holdout:
                best_holdout = holdout_e
                rounds_since_best = 0
            else:
                rounds_since_best += 1
                if rounds_since_best >= cfg.patience:
                    logger.info("round=%d: holdout stalled, stopping early", t)
                    break

    if not state.components:
        raise BoostingError("boosting produced no usable component")
    return EnsembleModel(state.components)
