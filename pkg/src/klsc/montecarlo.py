"""Monte Carlo cross-check of the exact information quantities.

Samples a joint i.i.d. and re-estimates conditional MI from the empirical
distribution (plug-in / maximum-likelihood, no bias correction — the
alphabets here are at most 128 cells, so the bias is O(cells/n) and
irrelevant at the tested sample sizes).

RNG contract: numpy's PCG64 via ``np.random.default_rng(seed)``. The
algorithm is pinned by name so batches are reproducible across machines
and future versions of this package; changing the generator is a breaking
change to SampleBatch determinism.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .probability import GroupLike, JointTensor, conditional_mi


@dataclass(frozen=True)
class SampleBatch:
    """n i.i.d. draws from a joint; one column per variable."""

    n: int
    draws: np.ndarray          # (n, num_vars) symbol indices
    seed: int
    labels: tuple
    sizes: tuple

    def column(self, label: str) -> np.ndarray:
        return self.draws[:, self.labels.index(label)]


def sample_joint(joint: JointTensor, n: int, seed: int) -> SampleBatch:
    """Inverse-CDF sampling over the flattened joint (PCG64 stream).

    Identical (joint, n, seed) gives identical batches.
    """
    if n < 1:
        raise ValidationError(f"need n >= 1 samples, got {n}")
    flat = joint.mass.reshape(-1)
    cdf = np.cumsum(flat)
    cdf[-1] = 1.0              # guard the top edge against rounding
    rng = np.random.default_rng(seed)
    u = rng.random(n)
    cells = np.searchsorted(cdf, u, side="right")
    draws = np.column_stack(np.unravel_index(cells, joint.mass.shape))
    return SampleBatch(n=n, draws=draws, seed=seed,
                       labels=joint.labels, sizes=joint.sizes)


def empirical_joint(batch: SampleBatch) -> JointTensor:
    """The batch's empirical distribution as a JointTensor."""
    if batch.n < 1:
        raise ValidationError("empty batch")
    radix = np.ones(len(batch.sizes), dtype=np.int64)
    for i in range(len(batch.sizes) - 2, -1, -1):
        radix[i] = radix[i + 1] * batch.sizes[i + 1]
    cells = batch.draws @ radix
    counts = np.bincount(cells, minlength=int(np.prod(batch.sizes)))
    mass = counts.reshape(batch.sizes) / batch.n
    return JointTensor(batch.labels, mass)


def plugin_cmi(batch: SampleBatch, g1: GroupLike, g2: GroupLike,
               cond: GroupLike = ()) -> float:
    """Conditional MI of the batch's empirical distribution, in bits."""
    return conditional_mi(empirical_joint(batch), g1, g2, cond)
