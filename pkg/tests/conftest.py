import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from adafm import FeatureEncoder, FmParams, InteractionDataset, RngHandle


@pytest.fixture
def rng():
    return RngHandle(123)


@pytest.fixture
def tiny_ds():
    """Four users, six items, binary grades."""
    triples = [
        (0, 0, 1), (0, 1, 1), (0, 2, 1),
        (1, 1, 1), (1, 3, 1),
        (2, 0, 1), (2, 4, 1), (2, 5, 1),
        (3, 2, 1), (3, 3, 1),
    ]
    return InteractionDataset.from_triples(triples, n_users=4, n_items=6)


@pytest.fixture
def graded_ds():
    """Two users with 0/1/2 grades, including observed zeros."""
    triples = [
        (0, 0, 2), (0, 1, 2), (0, 2, 1), (0, 3, 0),
        (1, 0, 1), (1, 2, 0), (1, 4, 1),
    ]
    return InteractionDataset.from_triples(triples, n_users=2, n_items=5)


def random_params(d: int, k: int, seed: int, scale: float = 0.5) -> FmParams:
    gen = np.random.default_rng(seed)
    return FmParams(w=scale * gen.normal(size=d), V=scale * gen.normal(size=(d, k)))


def random_sparse(d: int, nnz: int, seed: int):
    from adafm import SparseVector

    gen = np.random.default_rng(seed)
    idx = np.sort(gen.choice(d, size=min(nnz, d), replace=False)).astype(np.int64)
    vals = gen.normal(size=idx.size)
    vals[vals == 0.0] = 1.0
    return SparseVector(indices=idx, values=vals, dim=d)


@pytest.fixture
def encoder():
    return FeatureEncoder(n_users=3, n_items=2)
