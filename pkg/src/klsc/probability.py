"""Exact finite-probability arithmetic on dense joint tensors.

All information quantities are in bits (log base 2) with the convention
0 * log 0 = 0. Mutual information is computed as a signed combination of
marginal entropies of one consistent joint, so no p * log(p/0) cell can
arise. Joints in scope are small (at most 7 binary variables, 128 cells),
hence dense numpy arrays throughout.

Tolerances: probability mass must close to 1 within 1e-12; derived
identities (chain rule, Markov vanishing) are asserted at 1e-10 by tests
to absorb accumulated rounding over <= 128-term sums.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import ValidationError

MASS_TOL = 1e-12
#: conditional MI more negative than this is a computation bug, not rounding
MI_NEG_TOL = -1e-10

GroupLike = Union[str, Sequence[str], "VarGroup"]


def _entropy_of(mass: np.ndarray) -> float:
    """Shannon entropy in bits of an arbitrary nonnegative mass array."""
    m = np.asarray(mass, dtype=float).ravel()
    pos = m[m > 0.0]
    return float(-(pos * np.log2(pos)).sum())


@dataclass(frozen=True)
class FiniteDist:
    """Probability vector over one finite alphabet."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValidationError("probs must be a nonempty 1-D vector")
        if np.any(p < 0):
            raise ValidationError(f"negative probability entry: min={p.min()}")
        if abs(p.sum() - 1.0) > MASS_TOL:
            raise ValidationError(f"probabilities sum to {p.sum()!r}, not 1")
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def __len__(self) -> int:
        return self.probs.size


@dataclass(frozen=True)
class VarGroup:
    """An ordered set of variable labels addressing part of a joint."""

    labels: tuple

    def __post_init__(self):
        labels = tuple(self.labels)
        if len(set(labels)) != len(labels):
            raise ValidationError(f"duplicate labels in group: {labels}")
        object.__setattr__(self, "labels", labels)

    @staticmethod
    def of(spec: GroupLike) -> "VarGroup":
        """Coerce a label, a sequence of labels, or a VarGroup."""
        if isinstance(spec, VarGroup):
            return spec
        if isinstance(spec, str):
            return VarGroup((spec,))
        return VarGroup(tuple(spec))

    def __iter__(self):
        return iter(self.labels)

    def __len__(self):
        return len(self.labels)


@dataclass(frozen=True)
class JointTensor:
    """Dense joint probability mass over an ordered tuple of variables.

    ``labels[i]`` names axis ``i`` of ``mass``; alphabet sizes are the axis
    lengths. Immutable after construction.
    """

    labels: tuple
    mass: np.ndarray
    _axis: dict = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        labels = tuple(self.labels)
        m = np.asarray(self.mass, dtype=float)
        if len(labels) != m.ndim:
            raise ValidationError(
                f"{len(labels)} labels for a {m.ndim}-dimensional mass array")
        if len(set(labels)) != len(labels):
            raise ValidationError(f"duplicate variable labels: {labels}")
        if np.any(m < 0):
            raise ValidationError(f"negative mass cell: min={m.min()}")
        if abs(m.sum() - 1.0) > MASS_TOL:
            raise ValidationError(f"total mass {m.sum()!r} != 1")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "mass", m)
        object.__setattr__(self, "_axis", {lab: i for i, lab in enumerate(labels)})

    @property
    def sizes(self) -> tuple:
        return self.mass.shape

    def axes_of(self, group: GroupLike) -> tuple:
        g = VarGroup.of(group)
        missing = [lab for lab in g if lab not in self._axis]
        if missing:
            raise ValidationError(f"unknown variable labels {missing}; have {self.labels}")
        return tuple(self._axis[lab] for lab in g)


def marginalize(joint: JointTensor, keep: GroupLike) -> JointTensor:
    """Sum out every variable not in ``keep`` (kept in original order)."""
    keep_axes = set(joint.axes_of(keep))
    drop = tuple(i for i in range(joint.mass.ndim) if i not in keep_axes)
    kept_labels = tuple(lab for i, lab in enumerate(joint.labels) if i in keep_axes)
    return JointTensor(kept_labels, joint.mass.sum(axis=drop))


def entropy(dist) -> float:
    """Shannon entropy in bits; accepts FiniteDist or JointTensor."""
    if isinstance(dist, JointTensor):
        return _entropy_of(dist.mass)
    if isinstance(dist, FiniteDist):
        return _entropy_of(dist.probs)
    # bare vector convenience: validate through FiniteDist
    return _entropy_of(FiniteDist(np.asarray(dist)).probs)


def _marginal_entropy(joint: JointTensor, labels: tuple) -> float:
    if not labels:
        return 0.0
    keep_axes = set(joint.axes_of(labels))
    drop = tuple(i for i in range(joint.mass.ndim) if i not in keep_axes)
    return _entropy_of(joint.mass.sum(axis=drop) if drop else joint.mass)


def conditional_mi(joint: JointTensor, g1: GroupLike, g2: GroupLike,
                   cond: GroupLike = ()) -> float:
    """I(g1; g2 | cond) in bits, by exact summation over the joint.

    Computed as H(g1,c) + H(g2,c) - H(g1,g2,c) - H(c). The raw value is
    asserted to be >= -1e-10 (anything lower signals a bug, not rounding)
    and clamped to 0 on return.
    """
    a = VarGroup.of(g1).labels
    b = VarGroup.of(g2).labels
    c = VarGroup.of(cond).labels
    overlap = (set(a) & set(b)) | (set(a) & set(c)) | (set(b) & set(c))
    if overlap:
        raise ValidationError(f"variable groups overlap on {sorted(overlap)}")
    value = (_marginal_entropy(joint, a + c) + _marginal_entropy(joint, b + c)
             - _marginal_entropy(joint, a + b + c) - _marginal_entropy(joint, c))
    if value < MI_NEG_TOL:
        raise ValidationError(
            f"conditional MI {value} < {MI_NEG_TOL}: inconsistent joint")
    return max(value, 0.0)
