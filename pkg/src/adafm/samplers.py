"""Negative-item sampling strategies: uniform, popularity, score-adaptive, rank-aware."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import RngHandle

__all__ = [
    "SamplerConfig",
    "RankAwareDraw",
    "StaticSampler",
    "sample_uniform",
    "sample_static",
    "sample_dynamic",
    "sample_rank_aware",
    "gamma_exact",
]

SAMPLER_KINDS = ("uniform", "static", "dynamic", "rank-aware")

ScoreFn = Callable[[int, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SamplerConfig:
    """Which strategy to draw negatives with, and its knobs.

    ``rho`` sharpens the popularity/score bias (smaller = more top-heavy),
    ``m`` is the candidate batch for the dynamic sampler, ``epsilon`` the
    score margin and ``max_trials`` the draw cap for the rank-aware sampler
    (None resolves to the catalog size when training starts).
    """

    kind: str = "uniform"
    rho: float = 0.3
    m: int = 10
    epsilon: float = 0.1
    max_trials: int | None = None

    def __post_init__(self):
        if self.kind not in SAMPLER_KINDS:
            raise ValueError(f"unknown sampler kind {self.kind!r}")
        if not 0.0 < self.rho <= 1.0:
            raise ValueError("rho must lie in (0, 1]")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.max_trials is not None and self.max_trials < 1:
            raise ValueError("max_trials must be >= 1")


@dataclass
class RankAwareDraw:
    """Outcome of a rank-aware search: the item, trials spent, and its weight."""

    item: int
    trials: int
    gamma_weight: int


def sample_uniform(candidates: np.ndarray, rng: RngHandle) -> int:
    """Draw one candidate uniformly."""
    if len(candidates) == 0:
        raise ValueError("cannot sample from an empty candidate set")
    return int(candidates[rng.uniform_int(len(candidates))])


def _exp_rank_weights(ranks: np.ndarray, scale: float) -> np.ndarray:
    return np.exp(-(ranks + 1.0) / scale)


class StaticSampler:
    """Popularity-biased sampler with precomputed cumulative weights.

    Item j is drawn with probability proportional to
    exp(-(rank_j + 1) / (n_items * rho)); draws landing in a blocked set are
    rejected and redrawn, which is equivalent to renormalizing over the
    complement.
    """

    _MAX_REJECTS = 10_000

    def __init__(self, pop_rank: np.ndarray, rho: float):
        if not 0.0 < rho <= 1.0:
            raise ValueError("rho must lie in (0, 1]")
        pop_rank = np.asarray(pop_rank, dtype=float)
        if pop_rank.size == 0:
            raise ValueError("empty item catalog")
        self.pop_rank = pop_rank
        self.rho = float(rho)
        self._cum = np.cumsum(_exp_rank_weights(pop_rank, pop_rank.size * rho))

    def draw(self, rng: RngHandle, blocked: set[int] | None = None) -> int:
        total = self._cum[-1]
        for _ in range(self._MAX_REJECTS):
            u = rng.uniform_real() * total
            j = int(np.searchsorted(self._cum, u, side="right"))
            j = min(j, len(self._cum) - 1)
            if blocked is None or j not in blocked:
                return j
        # Pathological block ratio: fall back to an explicit renormalized draw.
        candidates = np.setdiff1d(np.arange(len(self._cum), dtype=np.int64),
                                  np.fromiter(blocked, dtype=np.int64, count=len(blocked)))
        return sample_static(self.pop_rank, self.rho, rng, candidates=candidates)


def sample_static(
    pop_rank: np.ndarray,
    rho: float,
    rng: RngHandle,
    candidates: np.ndarray | None = None,
) -> int:
    """One popularity-biased draw, optionally restricted to a candidate subset."""
    pop_rank = np.asarray(pop_rank, dtype=float)
    if not 0.0 < rho <= 1.0:
        raise ValueError("rho must lie in (0, 1]")
    if candidates is None:
        candidates = np.arange(pop_rank.size, dtype=np.int64)
    if len(candidates) == 0:
        raise ValueError("cannot sample from an empty candidate set")
    weights = _exp_rank_weights(pop_rank[candidates], pop_rank.size * rho)
    cum = np.cumsum(weights)
    u = rng.uniform_real() * cum[-1]
    j = min(int(np.searchsorted(cum, u, side="right")), len(candidates) - 1)
    return int(candidates[j])


def _draw_distinct(pool: np.ndarray, m: int, rng: RngHandle) -> np.ndarray:
    """m distinct elements of pool, uniformly without replacement."""
    n = len(pool)
    if m >= n:
        return pool.copy()
    if m > n // 2:
        return rng.gen.choice(pool, size=m, replace=False)
    chosen: list[int] = []
    seen: set[int] = set()
    while len(chosen) < m:
        j = rng.uniform_int(n)
        if j not in seen:
            seen.add(j)
            chosen.append(j)
    return pool[np.array(chosen)]


def sample_dynamic(
    score_fn: ScoreFn,
    user: int,
    pool: np.ndarray,
    m: int,
    rho: float,
    rng: RngHandle,
) -> int:
    """Score-adaptive draw under the current model.

    Uniformly draws ``m`` distinct candidates from the pool, ranks them by
    descending predicted score (ties by ascending item id), then samples one
    with probability proportional to exp(-(rank + 1) / (m * rho)), biasing
    toward the negatives the model currently scores highest.
    """
    if len(pool) == 0:
        raise ValueError("cannot sample from an empty pool")
    if m < 1:
        raise ValueError("m must be >= 1")
    m_eff = min(m, len(pool))
    cand = _draw_distinct(pool, m_eff, rng)
    if m_eff == 1:
        return int(cand[0])
    scores = np.asarray(score_fn(user, cand), dtype=float)
    order = np.lexsort((cand, -scores))
    cum = np.cumsum(_exp_rank_weights(np.arange(m_eff, dtype=float), m_eff * rho))
    u = rng.uniform_real() * cum[-1]
    j = min(int(np.searchsorted(cum, u, side="right")), m_eff - 1)
    return int(cand[order[j]])


def sample_rank_aware(
    score_fn: ScoreFn,
    user: int,
    positive_item: int,
    pool: np.ndarray,
    epsilon: float,
    max_trials: int,
    rng: RngHandle,
    n_items: int,
) -> RankAwareDraw:
    """Repeatedly draw until a negative scores within ``epsilon`` of the positive.

    The trial count T estimates how highly the positive is currently ranked;
    the returned weight ceil((n_items - 1) / T) is large when a competitive
    negative is found immediately (positive ranked low) and small when the
    search is hard (positive already near the top). Hitting ``max_trials``
    returns the final draw with T = max_trials.
    """
    if len(pool) == 0:
        raise ValueError("cannot sample from an empty pool")
    if max_trials < 1:
        raise ValueError("max_trials must be >= 1")
    pos_score = float(score_fn(user, np.array([positive_item], dtype=np.int64))[0])
    item = -1
    trials = 0
    for t in range(1, max_trials + 1):
        trials = t
        item = int(pool[rng.uniform_int(len(pool))])
        neg_score = float(score_fn(user, np.array([item], dtype=np.int64))[0])
        if pos_score - neg_score <= epsilon:
            break
    gamma = max(1, -(-(n_items - 1) // trials))
    return RankAwareDraw(item=item, trials=trials, gamma_weight=gamma)


def gamma_exact(rank: int, catalog_size: int) -> float:
    """Normalized truncated harmonic weight of a rank.

    Returns (sum_{s=0..rank} 1/(s+1)) / (sum_{s=0..catalog_size} 1/(s+1)),
    strictly increasing in rank and equal to 1 at rank == catalog_size.
    """
    if not 0 <= rank <= catalog_size:
        raise ValueError(f"rank {rank} out of range [0, {catalog_size}]")
    num = math.fsum(1.0 / (s + 1.0) for s in range(rank + 1))
    den = math.fsum(1.0 / (s + 1.0) for s in range(catalog_size + 1))
    return num / den
