"""Ranking metrics: per-user AUC and NDCG, weighted aggregates, model evaluation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import InteractionDataset

__all__ = [
    "Measure",
    "RankedList",
    "PerUserPerformance",
    "EvalResult",
    "user_auc",
    "user_ndcg",
    "user_metric",
    "weighted_auc",
    "evaluate_model",
    "format_report",
]

ScoreFn = Callable[[int, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Measure:
    """A ranking measure: AUC or NDCG with an optional cutoff."""

    kind: str
    cutoff: int | None = None

    def __post_init__(self):
        if self.kind not in ("auc", "ndcg"):
            raise ValueError(f"unknown measure {self.kind!r}")
        if self.cutoff is not None and self.cutoff < 1:
            raise ValueError("cutoff must be >= 1")
        if self.kind == "auc" and self.cutoff is not None:
            raise ValueError("AUC takes no cutoff")

    @classmethod
    def parse(cls, text: str) -> Measure:
        """Parse 'auc', 'ndcg', or 'ndcg@K'."""
        text = text.strip().lower()
        if text == "auc":
            return cls("auc")
        if text == "ndcg":
            return cls("ndcg")
        if text.startswith("ndcg@"):
            return cls("ndcg", int(text[len("ndcg@"):]))
        raise ValueError(f"unknown measure {text!r}")

    @property
    def label(self) -> str:
        if self.kind == "ndcg" and self.cutoff is not None:
            return f"ndcg@{self.cutoff}"
        return self.kind


@dataclass
class RankedList:
    """One user's evaluation list: aligned scores, grades and optional item ids."""

    scores: np.ndarray
    grades: np.ndarray
    items: np.ndarray | None = None

    def validate(self) -> None:
        if len(self.scores) != len(self.grades):
            raise ValueError("scores and grades must align")
        if not np.all(np.isfinite(self.scores)):
            raise ValueError("scores must be finite")


@dataclass
class PerUserPerformance:
    """Per-user measure values; users without a defined value are absent."""

    values: dict[int, float]
    measure: Measure


@dataclass
class EvalResult:
    aggregate: float
    per_user: PerUserPerformance
    n_evaluated: int
    n_skipped: int


def user_auc(rl: RankedList) -> float | None:
    """Pairwise AUC over all strictly-ordered grade pairs; ties count 1/2.

    Returns None when no pair of items has strictly different grades.
    """
    s = np.asarray(rl.scores, dtype=float)
    g = np.asarray(rl.grades)
    ordered = g[:, None] > g[None, :]
    total = int(ordered.sum())
    if total == 0:
        return None
    wins = int((ordered & (s[:, None] > s[None, :])).sum())
    ties = int((ordered & (s[:, None] == s[None, :])).sum())
    return (wins + 0.5 * ties) / total


def user_ndcg(rl: RankedList, cutoff: int | None = None) -> float | None:
    """NDCG with gain 2^grade - 1 and log2 position discount.

    Items are ranked by descending score, ties broken by ascending item id
    (list position when ids are absent). Returns None when every grade is
    zero, since the ideal DCG would vanish.
    """
    s = np.asarray(rl.scores, dtype=float)
    g = np.asarray(rl.grades)
    if not np.any(g > 0):
        return None
    n = len(s)
    depth = n if cutoff is None else min(cutoff, n)
    items = rl.items if rl.items is not None else np.arange(n)
    order = np.lexsort((items, -s))
    discounts = 1.0 / np.log2(np.arange(2, depth + 2))
    gains = np.exp2(g[order][:depth].astype(float)) - 1.0
    dcg = float(gains @ discounts)
    ideal = np.exp2(np.sort(g)[::-1][:depth].astype(float)) - 1.0
    idcg = float(ideal @ discounts)
    return dcg / idcg


def user_metric(rl: RankedList, measure: Measure) -> float | None:
    if measure.kind == "auc":
        return user_auc(rl)
    return user_ndcg(rl, measure.cutoff)


def weighted_auc(per_user: PerUserPerformance, weights: np.ndarray) -> float:
    """Weighted mean of per-user values.

    ``weights`` is a distribution over all user ids (sums to 1 within 1e-9).
    Weight mass on users without a defined value is renormalized away, so
    uniform weights reduce to the plain mean over defined users.
    """
    weights = np.asarray(weights, dtype=float)
    if abs(float(weights.sum()) - 1.0) > 1e-9:
        raise ValueError("weights must sum to 1")
    if np.any(weights < 0):
        raise ValueError("weights must be non-negative")
    users = np.fromiter(per_user.values.keys(), dtype=np.int64, count=len(per_user.values))
    if users.size and (users.min() < 0 or users.max() >= len(weights)):
        raise ValueError("per-user values misaligned with weight vector")
    if users.size == 0:
        return float("nan")
    vals = np.fromiter(per_user.values.values(), dtype=float, count=len(per_user.values))
    mass = float(weights[users].sum())
    if mass <= 0:
        return float("nan")
    return float(weights[users] @ vals) / mass


def evaluate_model(
    score_fn: ScoreFn,
    ds: InteractionDataset,
    measure: Measure,
    weights: np.ndarray | None = None,
    *,
    exclude: dict[int, np.ndarray] | None = None,
    n_negatives: int = 100,
    seed: int = 0,
) -> EvalResult:
    """Per-user measure of a scoring function plus an aggregate.

    Every user's candidate list is their items in ``ds`` joined with up to
    ``n_negatives`` unobserved items (grade 0) sampled without replacement
    from outside ``exclude[user]``. Negative draws use a per-user stream
    derived from ``seed``, so results do not depend on evaluation order.
    Users whose measure is undefined are skipped and counted.
    """
    values: dict[int, float] = {}
    n_skipped = 0
    catalog = np.arange(ds.n_items)
    for a in range(ds.n_users):
        items = ds.items_of(a)
        if items.size == 0:
            n_skipped += 1
            continue
        grades = ds.grades_of(a)
        blocked = items
        if exclude is not None and a in exclude:
            blocked = np.union1d(items, exclude[a])
        if n_negatives > 0:
            avail = np.setdiff1d(catalog, blocked, assume_unique=False)
            take = min(n_negatives, avail.size)
            if take > 0:
                gen = np.random.Generator(
                    np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(a,)))
                )
                negs = np.sort(gen.choice(avail, size=take, replace=False))
            else:
                negs = np.empty(0, dtype=np.int64)
        else:
            negs = np.empty(0, dtype=np.int64)
        cand = np.concatenate([items, negs])
        cand_grades = np.concatenate([grades, np.zeros(negs.size, dtype=np.int64)])
        scores = np.asarray(score_fn(a, cand), dtype=float)
        value = user_metric(RankedList(scores, cand_grades, cand), measure)
        if value is None:
            n_skipped += 1
        else:
            values[a] = value
    per_user = PerUserPerformance(values, measure)
    if not values:
        aggregate = float("nan")
    elif weights is None:
        aggregate = float(np.mean(list(values.values())))
    else:
        aggregate = weighted_auc(per_user, weights)
    return EvalResult(aggregate, per_user, len(values), n_skipped)


def format_report(result: EvalResult) -> str:
    """One-line machine-parsable evaluation report."""
    return (
        f"metric={result.per_user.measure.label}"
        f" value={result.aggregate:.17g}"
        f" users={result.n_evaluated}"
        f" skipped={result.n_skipped}"
    )
