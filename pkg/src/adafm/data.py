"""Dataset ingestion, filtering, and deterministic train/test splitting."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .core import InteractionDataset, RngHandle

logger = logging.getLogger(__name__)

__all__ = [
    "SplitSpec",
    "DataFormatError",
    "load_dataset",
    "load_split",
    "filter_min_interactions",
    "split",
    "write_interactions",
]

SPLIT_METHODS = ("holdout", "loo")


class DataFormatError(ValueError):
    """Raised for malformed interaction files; carries the offending line."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class SplitSpec:
    """How to carve a per-user test set out of a dataset.

    ``holdout`` holds out ceil(fraction * n_a) interactions per user; ``loo``
    holds out exactly one random positive per user (users with a single
    interaction stay fully in train and are counted as flagged).
    """

    method: str = "holdout"
    fraction: float = 0.2
    seed: int = 42
    min_user_interactions: int = 0

    def __post_init__(self):
        if self.method not in SPLIT_METHODS:
            raise ValueError(f"unknown split method {self.method!r}")
        if self.method == "holdout" and not 0.0 < self.fraction < 1.0:
            raise ValueError("holdout fraction must lie in (0, 1)")
        if self.min_user_interactions < 0:
            raise ValueError("min_user_interactions must be >= 0")


class _Vocab:
    """First-seen token -> dense id tables shared across files."""

    def __init__(self):
        self.user_ids: dict[str, int] = {}
        self.item_ids: dict[str, int] = {}

    def user(self, token: str) -> int:
        return self.user_ids.setdefault(token, len(self.user_ids))

    def item(self, token: str) -> int:
        return self.item_ids.setdefault(token, len(self.item_ids))

    @property
    def user_tokens(self) -> list[str]:
        return list(self.user_ids)

    @property
    def item_tokens(self) -> list[str]:
        return list(self.item_ids)


def _parse_file(path, vocab: _Vocab) -> dict[tuple[int, int], int]:
    """Read `user<TAB>item<TAB>grade` lines; duplicates keep the max grade."""
    entries: dict[tuple[int, int], int] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise DataFormatError(
                    f"expected 3 tab-separated fields, got {len(parts)}", line_no
                )
            user_tok, item_tok, grade_txt = parts
            if not user_tok or not item_tok:
                raise DataFormatError("empty user or item token", line_no)
            try:
                grade = int(grade_txt)
            except ValueError:
                raise DataFormatError(f"bad grade {grade_txt!r}", line_no) from None
            if grade < 0:
                raise DataFormatError(f"negative grade {grade}", line_no)
            key = (vocab.user(user_tok), vocab.item(item_tok))
            prev = entries.get(key)
            if prev is None or grade > prev:
                entries[key] = grade
    return entries


def _build(vocab: _Vocab, entries: dict[tuple[int, int], int]) -> InteractionDataset:
    n_users = len(vocab.user_ids)
    items: list[list[int]] = [[] for _ in range(n_users)]
    grades: list[list[int]] = [[] for _ in range(n_users)]
    for (u, i), g in entries.items():
        items[u].append(i)
        grades[u].append(g)
    return InteractionDataset(
        vocab.user_tokens,
        vocab.item_tokens,
        [np.array(x, dtype=np.int64) for x in items],
        [np.array(x, dtype=np.int64) for x in grades],
    )


def load_dataset(path) -> InteractionDataset:
    """Load one interaction file, assigning dense ids in first-seen order."""
    vocab = _Vocab()
    entries = _parse_file(path, vocab)
    if not entries:
        raise DataFormatError(f"no interactions found in {path}")
    return _build(vocab, entries)


def load_split(train_path, test_path) -> tuple[InteractionDataset, InteractionDataset]:
    """Load a train and test file over one shared user/item universe.

    Both returned datasets carry the same id tables (train tokens first, then
    any new test tokens), so models trained on one can score the other.
    """
    vocab = _Vocab()
    train_entries = _parse_file(train_path, vocab)
    if not train_entries:
        raise DataFormatError(f"no interactions found in {train_path}")
    test_entries = _parse_file(test_path, vocab)
    return _build(vocab, train_entries), _build(vocab, test_entries)


def filter_min_interactions(ds: InteractionDataset, threshold: int) -> InteractionDataset:
    """Drop users with fewer interactions than ``threshold``, then re-densify.

    Items left with no interactions are dropped as well; surviving ids are
    re-assigned contiguously preserving their original order.
    """
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    kept_users = [a for a in range(ds.n_users) if ds.items_of(a).size >= threshold]
    if not kept_users:
        raise DataFormatError("filtering removed every user")
    used_items = sorted(
        {int(i) for a in kept_users for i in ds.items_of(a)}
    )
    item_map = {old: new for new, old in enumerate(used_items)}
    return InteractionDataset(
        [ds.user_tokens[a] for a in kept_users],
        [ds.item_tokens[i] for i in used_items],
        [
            np.array([item_map[int(i)] for i in ds.items_of(a)], dtype=np.int64)
            for a in kept_users
        ],
        [ds.grades_of(a).copy() for a in kept_users],
    )


def split(
    ds: InteractionDataset, spec: SplitSpec
) -> tuple[InteractionDataset, InteractionDataset]:
    """Deterministic per-user split into disjoint train and test datasets.

    Both halves share the full id tables of ``ds``. Held-out picks come from
    a per-user stream derived from the spec seed, so the split is stable
    under any user ordering.
    """
    train_items: list[np.ndarray] = []
    train_grades: list[np.ndarray] = []
    test_items: list[np.ndarray] = []
    test_grades: list[np.ndarray] = []
    base = RngHandle(spec.seed)
    n_flagged = 0
    for a in range(ds.n_users):
        items, grades = ds.items_of(a), ds.grades_of(a)
        n_a = items.size
        held_pos: np.ndarray
        if n_a == 0:
            held_pos = np.empty(0, dtype=np.int64)
        elif spec.method == "loo":
            positive_pos = np.flatnonzero(grades > 0)
            if n_a < 2 or positive_pos.size == 0:
                held_pos = np.empty(0, dtype=np.int64)
                n_flagged += 1
            else:
                gen = base.derive(a).gen
                held_pos = positive_pos[[gen.integers(positive_pos.size)]]
        else:
            n_hold = int(np.ceil(spec.fraction * n_a))
            gen = base.derive(a).gen
            held_pos = np.sort(gen.choice(n_a, size=n_hold, replace=False))
        mask = np.zeros(n_a, dtype=bool)
        mask[held_pos] = True
        train_items.append(items[~mask])
        train_grades.append(grades[~mask])
        test_items.append(items[mask])
        test_grades.append(grades[mask])
    if n_flagged:
        logger.info("split: %d users kept fully in train (too few positives)", n_flagged)
    train = InteractionDataset(ds.user_tokens, ds.item_tokens, train_items, train_grades)
    test = InteractionDataset(ds.user_tokens, ds.item_tokens, test_items, test_grades)
    return train, test


def write_interactions(ds: InteractionDataset, path) -> None:
    """Write `user<TAB>item<TAB>grade` lines in (user id, item id) order."""
    with open(path, "w", encoding="utf-8") as fh:
        for a in range(ds.n_users):
            u = ds.user_tokens[a]
            for i, g in zip(ds.items_of(a), ds.grades_of(a)):
                fh.write(f"{u}\t{ds.item_tokens[int(i)]}\t{int(g)}\n")
