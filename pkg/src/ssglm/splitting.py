"""Random half-sample split plans with reproducible substreams.

Split b of a plan draws from the counter-based Philox stream keyed by
(seed, b); auxiliary randomness (e.g. CV folds inside a selector) uses
(seed, b, tag) so serial and parallel execution see identical streams.
"""

from dataclasses import dataclass

import numpy as np

TAG_SPLIT = 0
TAG_CV = 1
TAG_RETRY = 2


def substream(*key):
    """Independent Generator for a named (integer...) substream."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


@dataclass
class SplitPlan:
    """B random partitions of {1..n} into estimation (D1) and selection (D2)."""

    n: int
    n1: int
    q: float
    B: int
    assignments: np.ndarray   # (B, n) 0/1; 1 marks membership in D1
    seed: int

    def __post_init__(self):
        self.assignments = np.asarray(self.assignments)
        if self.assignments.shape != (self.B, self.n):
            raise ValueError("assignment matrix shape mismatch")
        sums = self.assignments.sum(axis=1)
        if not np.all(sums == self.n1):
            raise ValueError("every split must place exactly n1 samples in D1")
        if not np.all(np.isin(self.assignments, (0, 1))):
            raise ValueError("assignments must be 0/1")

    def d1_indices(self, b):
        return np.flatnonzero(self.assignments[b] == 1)

    def d2_indices(self, b):
        return np.flatnonzero(self.assignments[b] == 0)


def make_splits(n, q, B, seed):
    """Draw B independent uniform n1-subsets of {1..n}, n1 = round(q*n)."""
    if not 0.0 < q < 1.0:
        raise ValueError("split proportion q must be in (0, 1)")
    if B < 1:
        raise ValueError("B must be >= 1")
    n1 = int(round(q * n))
    if n1 < 2 or n - n1 < 2:
        raise ValueError(
            f"degenerate split sizes: n1={n1}, n2={n - n1} (need >= 2 each)")
    J = np.zeros((B, n), dtype=np.uint8)
    for b in range(B):
        rng = substream(seed, b, TAG_SPLIT)
        idx = rng.permutation(n)[:n1]
        J[b, idx] = 1
    return SplitPlan(n=n, n1=n1, q=q, B=B, assignments=J, seed=seed)
