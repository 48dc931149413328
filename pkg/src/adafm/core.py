"""Core data types: sparse feature vectors, interaction datasets, encoders, RNG."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "RngHandle",
    "SparseVector",
    "Interaction",
    "InteractionDataset",
    "FeatureEncoder",
    "encode_pair",
    "positive_and_negative_sets",
    "build_popularity_index",
]

_SEED_MASK = (1 << 64) - 1


class RngHandle:
    """A seeded random stream backed by a platform-stable bit generator (PCG64).

    Equal ``(seed, spawn_key)`` pairs produce identical draw sequences across
    runs and platforms. ``derive`` forks an independent child stream whose
    output depends only on the parent seed and the key, never on how much the
    parent has been consumed.
    """

    def __init__(self, seed: int, spawn_key: tuple[int, ...] = ()):
        self.seed = int(seed) & _SEED_MASK
        self.spawn_key = tuple(int(k) for k in spawn_key)
        seq = np.random.SeedSequence(self.seed, spawn_key=self.spawn_key)
        self.gen = np.random.Generator(np.random.PCG64(seq))

    def derive(self, *key: int) -> RngHandle:
        """Fork a deterministic child stream tagged by ``key``."""
        return RngHandle(self.seed, self.spawn_key + tuple(key))

    def uniform_int(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        return int(self.gen.integers(n))

    def uniform_real(self) -> float:
        """Uniform float in [0, 1)."""
        return float(self.gen.random())

    def gaussian(self, mean: float = 0.0, std: float = 1.0) -> float:
        return float(self.gen.normal(mean, std))

    def __repr__(self) -> str:
        return f"RngHandle(seed={self.seed}, spawn_key={self.spawn_key})"


@dataclass
class SparseVector:
    """Sparse feature vector as aligned (index, value) arrays.

    Indices are strictly increasing, within ``[0, dim)``, and no explicit
    zeros are stored. Constructors in this package always produce valid
    vectors; ``validate`` re-checks the invariants for externally built ones.
    """

    indices: np.ndarray
    values: np.ndarray
    dim: int

    @property
    def nnz(self) -> int:
        return len(self.indices)

    def validate(self) -> None:
        idx, val = self.indices, self.values
        if len(idx) != len(val):
            raise ValueError("indices and values must have equal length")
        if len(idx) > 0:
            if idx[0] < 0 or idx[-1] >= self.dim:
                raise ValueError(f"indices out of range for dim={self.dim}")
            if np.any(np.diff(idx) <= 0):
                raise ValueError("indices must be strictly increasing")
        if np.any(val == 0.0):
            raise ValueError("explicit zero values are not allowed")
        if not np.all(np.isfinite(val)):
            raise ValueError("values must be finite")

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        out[self.indices] = self.values
        return out


@dataclass(frozen=True)
class Interaction:
    """One observed (user, item) event with a relevance grade."""

    user: int
    item: int
    relevance: int


@dataclass(frozen=True)
class FeatureEncoder:
    """One-hot user block concatenated with a one-hot item block.

    A (user, item) pair maps to a vector of dimension ``n_users + n_items``
    with exactly two unit entries, so distinct pairs give distinct vectors.
    """

    n_users: int
    n_items: int

    @property
    def dim(self) -> int:
        return self.n_users + self.n_items

    def encode(self, user: int, item: int) -> SparseVector:
        return encode_pair(user, item, self)

    def decode(self, x: SparseVector) -> tuple[int, int]:
        """Recover (user, item) from an encoded pair vector."""
        if x.nnz != 2:
            raise ValueError(f"expected 2 nonzero entries, got {x.nnz}")
        u, i = int(x.indices[0]), int(x.indices[1])
        if not (0 <= u < self.n_users and self.n_users <= i < self.dim):
            raise ValueError("entries do not form a valid user/item pair")
        return u, i - self.n_users


def encode_pair(user: int, item: int, enc: FeatureEncoder) -> SparseVector:
    """Encode a user-item pair as its two-hot feature vector."""
    if not 0 <= user < enc.n_users:
        raise ValueError(f"user id {user} out of range [0, {enc.n_users})")
    if not 0 <= item < enc.n_items:
        raise ValueError(f"item id {item} out of range [0, {enc.n_items})")
    return SparseVector(
        indices=np.array([user, enc.n_users + item], dtype=np.int64),
        values=np.ones(2),
        dim=enc.dim,
    )


class InteractionDataset:
    """Users, items, per-user graded interaction lists, and a popularity index.

    Immutable after construction; per-user item arrays are sorted by item id
    and contain no duplicates. Popularity rank 0 is the globally most
    interacted item, ties broken by ascending item id.
    """

    def __init__(
        self,
        user_tokens: list[str],
        item_tokens: list[str],
        items_per_user: list[np.ndarray],
        grades_per_user: list[np.ndarray],
    ):
        if len(items_per_user) != len(user_tokens):
            raise ValueError("one item list required per user")
        if len(grades_per_user) != len(user_tokens):
            raise ValueError("one grade list required per user")
        self.user_tokens = list(user_tokens)
        self.item_tokens = list(item_tokens)
        n_items = len(self.item_tokens)
        self._items: list[np.ndarray] = []
        self._grades: list[np.ndarray] = []
        for a, (items, grades) in enumerate(zip(items_per_user, grades_per_user)):
            items = np.asarray(items, dtype=np.int64)
            grades = np.asarray(grades, dtype=np.int64)
            if items.shape != grades.shape:
                raise ValueError(f"user {a}: items and grades misaligned")
            if items.size:
                if items.min() < 0 or items.max() >= n_items:
                    raise ValueError(f"user {a}: item id out of range")
                if np.any(grades < 0):
                    raise ValueError(f"user {a}: negative grade")
                order = np.argsort(items)
                items, grades = items[order], grades[order]
                if np.any(np.diff(items) == 0):
                    raise ValueError(f"user {a}: duplicate items in list")
            self._items.append(items)
            self._grades.append(grades)
        self._popularity: np.ndarray | None = None
        self._positives: dict[int, np.ndarray] = {}

    @classmethod
    def from_triples(
        cls,
        triples: list[tuple[int, int, int]],
        n_users: int | None = None,
        n_items: int | None = None,
        user_tokens: list[str] | None = None,
        item_tokens: list[str] | None = None,
    ) -> InteractionDataset:
        """Build a dataset from (user, item, grade) triples with dense ids."""
        if n_users is None:
            n_users = 1 + max((t[0] for t in triples), default=-1)
        if n_items is None:
            n_items = 1 + max((t[1] for t in triples), default=-1)
        if user_tokens is None:
            user_tokens = [f"u{a}" for a in range(n_users)]
        if item_tokens is None:
            item_tokens = [f"i{j}" for j in range(n_items)]
        items: list[list[int]] = [[] for _ in range(n_users)]
        grades: list[list[int]] = [[] for _ in range(n_users)]
        for u, i, g in triples:
            items[u].append(i)
            grades[u].append(g)
        return cls(
            user_tokens,
            item_tokens,
            [np.array(x, dtype=np.int64) for x in items],
            [np.array(x, dtype=np.int64) for x in grades],
        )

    @property
    def n_users(self) -> int:
        return len(self.user_tokens)

    @property
    def n_items(self) -> int:
        return len(self.item_tokens)

    @property
    def n_interactions(self) -> int:
        return sum(len(x) for x in self._items)

    def items_of(self, user: int) -> np.ndarray:
        return self._items[user]

    def grades_of(self, user: int) -> np.ndarray:
        return self._grades[user]

    def interactions_of(self, user: int) -> list[Interaction]:
        return [
            Interaction(user, int(i), int(g))
            for i, g in zip(self._items[user], self._grades[user])
        ]

    def grade_of(self, user: int, item: int) -> int:
        """Grade of an observed pair; KeyError if the pair was never observed."""
        items = self._items[user]
        pos = int(np.searchsorted(items, item))
        if pos == len(items) or items[pos] != item:
            raise KeyError(f"pair (user={user}, item={item}) not observed")
        return int(self._grades[user][pos])

    def positives_of(self, user: int) -> np.ndarray:
        """Items carrying the user's highest grade, provided that grade is > 0."""
        cached = self._positives.get(user)
        if cached is None:
            grades = self._grades[user]
            if grades.size == 0 or grades.max() <= 0:
                cached = np.empty(0, dtype=np.int64)
            else:
                cached = self._items[user][grades == grades.max()]
            self._positives[user] = cached
        return cached

    @property
    def grade_set(self) -> np.ndarray:
        if self.n_interactions == 0:
            return np.empty(0, dtype=np.int64)
        return np.unique(np.concatenate([g for g in self._grades if g.size]))

    @property
    def item_counts(self) -> np.ndarray:
        counts = np.zeros(self.n_items, dtype=np.int64)
        for items in self._items:
            np.add.at(counts, items, 1)
        return counts

    @property
    def popularity_rank(self) -> np.ndarray:
        if self._popularity is None:
            self._popularity = build_popularity_index(self)
        return self._popularity

    def __repr__(self) -> str:
        return (
            f"InteractionDataset(users={self.n_users}, items={self.n_items},"
            f" interactions={self.n_interactions})"
        )


def build_popularity_index(ds: InteractionDataset) -> np.ndarray:
    """Rank items by descending interaction count; rank 0 is the most popular.

    Ties break by ascending item id so the ranking is a deterministic
    bijection onto 0..n_items-1 even for items with no interactions.
    """
    if ds.n_items == 0:
        raise ValueError("cannot rank an empty item catalog")
    counts = ds.item_counts
    order = np.lexsort((np.arange(ds.n_items), -counts))
    rank = np.empty(ds.n_items, dtype=np.int64)
    rank[order] = np.arange(ds.n_items)
    return rank


def positive_and_negative_sets(
    ds: InteractionDataset, user: int, anchor_item: int
) -> tuple[np.ndarray, np.ndarray]:
    """Split a user's observed items around an anchor into grade classes.

    Returns ``(same_grade, lower_grade)``: observed items whose grade equals,
    respectively falls strictly below, the anchor's grade. For implicit data
    the full negative pool additionally contains the user's unobserved items
    (treated as grade 0); those are drawn lazily by the samplers rather than
    materialized here.
    """
    anchor_grade = ds.grade_of(user, anchor_item)
    items, grades = ds.items_of(user), ds.grades_of(user)
    return items[grades == anchor_grade], items[grades < anchor_grade]
