"""Synthetic implicit-feedback datasets with a planted low-rank preference model."""

from __future__ import annotations

import numpy as np

from adafm import InteractionDataset


def planted_dataset(
    n_users: int,
    n_items: int,
    rank: int,
    seed: int,
    per_user: int = 20,
    popularity_skew: float = 1.0,
) -> InteractionDataset:
    """Binary interactions from a rank-``rank`` latent preference matrix.

    Each user interacts with their ``per_user`` top-scored items under
    planted user/item factors plus a decaying item popularity bias, so the
    positive sets are both structured (recoverable by a factor model) and
    popularity-skewed (non-degenerate popularity ranking).
    """
    rng = np.random.default_rng(seed)
    user_f = rng.normal(size=(n_users, rank))
    item_f = rng.normal(size=(n_items, rank))
    bias = popularity_skew * np.linspace(1.0, 0.0, n_items)
    scores = user_f @ item_f.T + bias[None, :] + 0.05 * rng.normal(size=(n_users, n_items))
    triples = []
    for u in range(n_users):
        top = np.argpartition(-scores[u], per_user)[:per_user]
        for i in top:
            triples.append((u, int(i), 1))
    return InteractionDataset.from_triples(triples, n_users=n_users, n_items=n_items)


def write_tsv(ds: InteractionDataset, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for a in range(ds.n_users):
            for i, g in zip(ds.items_of(a), ds.grades_of(a)):
                fh.write(f"{ds.user_tokens[a]}\t{ds.item_tokens[int(i)]}\t{int(g)}\n")
