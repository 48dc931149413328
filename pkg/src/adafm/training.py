"""Weighted pairwise and pointwise SGD trainers for component FMs."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .core import FeatureEncoder, InteractionDataset, RngHandle, SparseVector
from .model import FmParams, init_params, score_items
from .samplers import (
    SamplerConfig,
    StaticSampler,
    sample_dynamic,
    sample_rank_aware,
    sample_uniform,
)

__all__ = [
    "TrainConfig",
    "PairStep",
    "TrainingDivergedError",
    "pairwise_logistic_loss",
    "lambda_grad",
    "sgd_pair_update",
    "train_component",
    "train_pointwise_fm",
]

logger = logging.getLogger(__name__)


class TrainingDivergedError(RuntimeError):
    """Raised when an SGD update produces a non-finite parameter."""


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of one component training run.

    ``objective`` selects pairwise ranking SGD (the default) or pointwise
    logistic SGD on positive/sampled-negative instances. ``log_every`` emits
    a progress line every that many steps (0 disables logging).
    """

    eta: float
    gamma: float = 0.0
    max_iter: int = 100_000
    k: int = 2
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    seed: int = 0
    objective: str = "pairwise"
    log_every: int = 0

    def __post_init__(self):
        if self.eta < 0:
            raise ValueError("eta must be >= 0")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.objective not in ("pairwise", "pointwise"):
            raise ValueError(f"unknown objective {self.objective!r}")


@dataclass
class PairStep:
    """One sampled (user, positive, negative) step with its gradient scalars."""

    user: int
    positive: int
    negative: int
    delta: float
    lam: float
    user_weight: float
    extra_weight: float = 1.0


def pairwise_logistic_loss(delta: float) -> float:
    """ln(1 + exp(-delta)), stable for large |delta|."""
    if delta >= 0:
        return math.log1p(math.exp(-delta))
    return -delta + math.log1p(math.exp(delta))


def lambda_grad(delta: float) -> float:
    """d/d(delta) of the pairwise logistic loss: -exp(-d)/(1+exp(-d)) in (-1, 0)."""
    if delta >= 0:
        e = math.exp(-delta)
        return -e / (1.0 + e)
    return -1.0 / (1.0 + math.exp(delta))


def _apply_pair_update(
    w: np.ndarray,
    V: np.ndarray,
    idx: np.ndarray,
    a_vals: np.ndarray,
    c_vals: np.ndarray,
    lam_mult: float,
    gamma: float,
    eta: float,
) -> None:
    """In-place SGD step on the coordinates touched by one pair.

    ``idx`` holds the union of both vectors' nonzero indices; ``a_vals`` and
    ``c_vals`` are the positive/negative feature values aligned to it. The
    regularizer shrinks exactly these touched coordinates.
    """
    rows = V[idx]
    s_a = a_vals @ rows
    s_c = c_vals @ rows
    grad_w = a_vals - c_vals
    grad_V = (
        a_vals[:, None] * s_a
        - c_vals[:, None] * s_c
        - rows * (a_vals * a_vals - c_vals * c_vals)[:, None]
    )
    new_w = w[idx] - eta * (lam_mult * grad_w + gamma * w[idx])
    new_V = rows - eta * (lam_mult * grad_V + gamma * rows)
    if not (np.isfinite(new_w).all() and np.isfinite(new_V).all()):
        raise TrainingDivergedError("non-finite parameter after pair update")
    w[idx] = new_w
    V[idx] = new_V


def sgd_pair_update(
    params: FmParams,
    step: PairStep,
    x_ab: SparseVector,
    x_ac: SparseVector,
    cfg: TrainConfig,
    n_users: int = 1,
) -> FmParams:
    """Apply one weighted pairwise step in place and return the params.

    Each touched coordinate moves by
    -eta * (extra * (p_a / n) * lam * dDelta/dtheta + gamma * theta).
    """
    if x_ab.dim != params.d or x_ac.dim != params.d:
        raise ValueError("vector dim does not match model dim")
    if len(x_ab.indices) == len(x_ac.indices) and np.array_equal(
        x_ab.indices, x_ac.indices
    ) and np.array_equal(x_ab.values, x_ac.values):
        raise ValueError("positive and negative vectors must differ")
    idx = np.union1d(x_ab.indices, x_ac.indices)
    a_vals = np.zeros(len(idx))
    c_vals = np.zeros(len(idx))
    a_vals[np.searchsorted(idx, x_ab.indices)] = x_ab.values
    c_vals[np.searchsorted(idx, x_ac.indices)] = x_ac.values
    lam_mult = step.extra_weight * (step.user_weight / n_users) * step.lam
    _apply_pair_update(params.w, params.V, idx, a_vals, c_vals, lam_mult, cfg.gamma, cfg.eta)
    return params


class _NegativeDrawer:
    """Per-user negative draws for the configured sampler strategy.

    The drawable pool for a user is the complement of their top-grade items:
    strictly lower-graded observed items plus everything unobserved. Pools
    are materialized lazily and cached.
    """

    def __init__(self, ds: InteractionDataset, enc: FeatureEncoder, cfg: SamplerConfig):
        self._ds = ds
        self._enc = enc
        self._cfg = cfg
        self._pools: dict[int, np.ndarray] = {}
        self._blocked: dict[int, set[int]] = {}
        self._static: StaticSampler | None = None
        if cfg.kind == "static":
            self._static = StaticSampler(ds.popularity_rank, cfg.rho)
        self._max_trials = cfg.max_trials if cfg.max_trials is not None else ds.n_items

    def pool(self, user: int) -> np.ndarray:
        cached = self._pools.get(user)
        if cached is None:
            cached = np.setdiff1d(
                np.arange(self._ds.n_items, dtype=np.int64),
                self._ds.positives_of(user),
                assume_unique=True,
            )
            self._pools[user] = cached
        return cached

    def _blocked_set(self, user: int) -> set[int]:
        cached = self._blocked.get(user)
        if cached is None:
            cached = set(int(i) for i in self._ds.positives_of(user))
            self._blocked[user] = cached
        return cached

    def draw(
        self, user: int, positive_item: int, params: FmParams, rng: RngHandle
    ) -> tuple[int, float]:
        """Return (negative item, extra gradient weight)."""
        kind = self._cfg.kind
        if kind == "uniform":
            return sample_uniform(self.pool(user), rng), 1.0
        if kind == "static":
            assert self._static is not None
            return self._static.draw(rng, blocked=self._blocked_set(user)), 1.0
        score_fn = lambda u, items: score_items(params, self._enc, u, items)
        if kind == "dynamic":
            item = sample_dynamic(
                score_fn, user, self.pool(user), self._cfg.m, self._cfg.rho, rng
            )
            return item, 1.0
        draw = sample_rank_aware(
            score_fn,
            user,
            positive_item,
            self.pool(user),
            self._cfg.epsilon,
            self._max_trials,
            rng,
            self._ds.n_items,
        )
        return draw.item, float(draw.gamma_weight)


def _resolve_weights(weights: np.ndarray | None, n: int) -> np.ndarray:
    if weights is None:
        return np.full(n, 1.0 / n)
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (n,):
        raise ValueError(f"weights must have shape ({n},)")
    if np.any(weights < 0):
        raise ValueError("weights must be non-negative")
    if abs(float(weights.sum()) - 1.0) > 1e-9:
        raise ValueError("weights must sum to 1")
    return weights


def _eligible_pair_users(ds: InteractionDataset) -> np.ndarray:
    users = [
        a
        for a in range(ds.n_users)
        if ds.positives_of(a).size and ds.positives_of(a).size < ds.n_items
    ]
    return np.array(users, dtype=np.int64)


_PAT_A = np.array([1.0, 1.0, 0.0])
_PAT_C = np.array([1.0, 0.0, 1.0])


def train_component(
    ds: InteractionDataset,
    weights: np.ndarray | None,
    cfg: TrainConfig,
    measure=None,
) -> FmParams:
    """Weighted pairwise SGD over sampled (user, positive, negative) triples.

    Per step: a pair-eligible user is drawn uniformly, a positive uniformly
    from their top-grade items, and a negative from the configured sampler;
    the rank-aware sampler additionally scales the step by its harmonic
    weight estimate. Fully deterministic given ``cfg.seed``. ``weights``
    (default uniform) scale each user's loss term; zero-weight users still
    contribute the shrinkage of the coordinates their pairs touch.
    """
    if cfg.objective != "pairwise":
        raise ValueError("train_component runs the pairwise objective")
    n = ds.n_users
    p = _resolve_weights(weights, n)
    eligible = _eligible_pair_users(ds)
    if eligible.size == 0:
        raise ValueError("no user has both a positive item and a drawable negative")
    enc = FeatureEncoder(n, ds.n_items)
    rng = RngHandle(cfg.seed)
    params = init_params(enc.dim, cfg.k, rng)
    drawer = _NegativeDrawer(ds, enc, cfg.sampler)
    w, V = params.w, params.V
    eta, gamma = cfg.eta, cfg.gamma
    loss_sum = 0.0
    try:
        # overflow saturates to inf/nan and is caught by the finiteness check
        with np.errstate(over="ignore", invalid="ignore"):
            for step_no in range(1, cfg.max_iter + 1):
                a = int(eligible[rng.uniform_int(eligible.size)])
                positives = ds.positives_of(a)
                b = int(positives[rng.uniform_int(positives.size)])
                c, extra = drawer.draw(a, b, params, rng)
                ob, oc = n + b, n + c
                vu = V[a]
                delta = float(w[ob] - w[oc] + vu @ (V[ob] - V[oc]))
                lam_mult = extra * (p[a] / n) * lambda_grad(delta)
                if ob < oc:
                    idx = np.array([a, ob, oc], dtype=np.int64)
                    a_vals, c_vals = _PAT_A, _PAT_C
                else:
                    idx = np.array([a, oc, ob], dtype=np.int64)
                    a_vals, c_vals = _PAT_C, _PAT_A
                _apply_pair_update(w, V, idx, a_vals, c_vals, lam_mult, gamma, eta)
                if cfg.log_every:
                    loss_sum += pairwise_logistic_loss(delta)
                    if step_no % cfg.log_every == 0:
                        logger.info(
                            "step=%d avg_loss=%.17g", step_no, loss_sum / cfg.log_every
                        )
                        loss_sum = 0.0
    except TrainingDivergedError as exc:
        raise TrainingDivergedError(f"step {step_no}: {exc}") from None
    return params


def _apply_pointwise_update(
    params: FmParams,
    idx: np.ndarray,
    vals: np.ndarray,
    label: float,
    mult: float,
    gamma: float,
    eta: float,
) -> float:
    """One logistic-loss step on a single instance; returns the loss."""
    w, V = params.w, params.V
    rows = V[idx]
    s = vals @ rows
    score = float(w[idx] @ vals) + 0.5 * (float(s @ s) - float((vals * vals) @ (rows * rows).sum(axis=1)))
    margin = label * score
    loss = pairwise_logistic_loss(margin)
    g = label * lambda_grad(margin)  # d loss / d score
    grad_w = g * vals
    grad_V = g * (vals[:, None] * s - rows * (vals * vals)[:, None])
    new_w = w[idx] - eta * (mult * grad_w + gamma * w[idx])
    new_V = rows - eta * (mult * grad_V + gamma * rows)
    if not (np.isfinite(new_w).all() and np.isfinite(new_V).all()):
        raise TrainingDivergedError("non-finite parameter after pointwise update")
    w[idx] = new_w
    V[idx] = new_V
    return loss


def train_pointwise_fm(
    ds: InteractionDataset,
    weights: np.ndarray | None,
    cfg: TrainConfig,
) -> FmParams:
    """User-weighted pointwise logistic FM on implicit data.

    Each step draws a user, one of their positive items (label +1), and one
    uniformly sampled unobserved item (label -1), applying a logistic SGD
    update for both instances, each scaled by the user's weight.
    """
    n = ds.n_users
    p = _resolve_weights(weights, n)
    eligible = []
    pools: dict[int, np.ndarray] = {}
    all_items = np.arange(ds.n_items, dtype=np.int64)
    for a in range(n):
        if ds.positives_of(a).size and ds.items_of(a).size < ds.n_items:
            eligible.append(a)
    if not eligible:
        raise ValueError("no user has both a positive item and an unobserved item")
    eligible = np.array(eligible, dtype=np.int64)
    enc = FeatureEncoder(n, ds.n_items)
    rng = RngHandle(cfg.seed)
    params = init_params(enc.dim, cfg.k, rng)
    vals = np.ones(2)
    loss_sum = 0.0
    try:
        # overflow saturates to inf/nan and is caught by the finiteness check
        with np.errstate(over="ignore", invalid="ignore"):
            for step_no in range(1, cfg.max_iter + 1):
                a = int(eligible[rng.uniform_int(eligible.size)])
                positives = ds.positives_of(a)
                b = int(positives[rng.uniform_int(positives.size)])
                pool = pools.get(a)
                if pool is None:
                    pool = np.setdiff1d(all_items, ds.items_of(a), assume_unique=True)
                    pools[a] = pool
                c = int(pool[rng.uniform_int(pool.size)])
                mult = p[a] / n
                loss = _apply_pointwise_update(
                    params, np.array([a, n + b], dtype=np.int64), vals, 1.0, mult,
                    cfg.gamma, cfg.eta,
                )
                loss += _apply_pointwise_update(
                    params, np.array([a, n + c], dtype=np.int64), vals, -1.0, mult,
                    cfg.gamma, cfg.eta,
                )
                if cfg.log_every:
                    loss_sum += 0.5 * loss
                    if step_no % cfg.log_every == 0:
                        logger.info(
                            "step=%d avg_loss=%.17g", step_no, loss_sum / cfg.log_every
                        )
                        loss_sum = 0.0
    except TrainingDivergedError as exc:
        raise TrainingDivergedError(f"step {step_no}: {exc}") from None
    return params
