import numpy as np
import pytest

from gridreduce import Dataset, GridSpec


def dataset_from_cells(dims, cells, values, **kwargs):
    """Dataset from explicit (i, j, k) cells and attribute values."""
    spec = GridSpec(dims, **kwargs)
    idx = np.asarray(cells, dtype=np.int64)
    ids = spec.cell_id(idx)
    return Dataset(spec, ids, np.asarray(values, dtype=np.float64))


def random_dataset(rng, n_min=2, n_max=200, dims_hi=15):
    """Random partial dataset; attribute values are sometimes quantized so
    distance ties actually occur, and sometimes constant (degenerate range)."""
    dims = tuple(int(v) for v in rng.integers(2, dims_hi, size=3))
    n_cells = dims[0] * dims[1] * dims[2]
    n = int(rng.integers(n_min, min(n_max, n_cells) + 1))
    ids = np.sort(rng.choice(n_cells, size=n, replace=False))
    style = rng.random()
    if style < 0.2:
        attrs = np.full(n, 0.5)
    elif style < 0.6:
        attrs = rng.integers(0, 4, size=n).astype(np.float64)
    else:
        attrs = rng.uniform(0.0, 1.0, size=n)
    return Dataset(GridSpec(dims), ids, attrs)


def random_points(rng, n, n_features=4, with_duplicates=True):
    """Raw feature rows, occasionally with exact duplicates."""
    X = rng.uniform(0.0, 1.0, size=(n, n_features))
    if with_duplicates and n >= 4 and rng.random() < 0.6:
        n_dup = int(rng.integers(1, max(2, n // 4)))
        src = rng.integers(0, n, size=n_dup)
        dst = rng.integers(0, n, size=n_dup)
        X[dst] = X[src]
    return X


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
