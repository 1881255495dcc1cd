"""
Seeded synthetic datasets for benchmarks, sample files and tests.
"""
import numpy as np

from .models import Dataset, DmuRecord

DEFAULT_LOW = 1.0
DEFAULT_HIGH = 100.0


def generate_dataset(n, m, s, seed, integer=False, low=DEFAULT_LOW, high=DEFAULT_HIGH):
    """
    Draw every coordinate uniformly from [low, high] (integers in that range
    when ``integer`` is set). The same arguments always give the same dataset.
    """
    rng = np.random.default_rng(seed)
    if integer:
        data = rng.integers(int(low), int(high), size=(n, m + s), endpoint=True).astype(float)
    else:
        data = rng.uniform(low, high, size=(n, m + s))
    width = len(str(n))
    records = [
        DmuRecord(id=f"D{j + 1:0{width}d}", inputs=row[:m], outputs=row[m:])
        for j, row in enumerate(data)
    ]
    return Dataset(
        records=records,
        input_labels=[f"x{i + 1}" for i in range(m)],
        output_labels=[f"y{r + 1}" for r in range(s)],
    )
