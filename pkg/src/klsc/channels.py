"""Conditional channels and binary-symmetric-channel algebra.

Channels carry explicit input/output label metadata so the system-model
builder can wire factorizations by name instead of axis position.

The star operator is the crossover probability of two cascaded binary
symmetric channels: p * q = (1 - 2q) p + q. It is commutative and
associative, with identity 0 and absorbing element 1/2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError

ROW_TOL = 1e-12


@dataclass(frozen=True)
class CondChannel:
    """Stochastic map from a tuple of input variables to one output.

    ``rows`` has one row per joint input symbol in row-major order over
    ``input_sizes`` and one column per output symbol.
    """

    input_labels: tuple
    input_sizes: tuple
    output_label: str
    output_size: int
    rows: np.ndarray

    def __post_init__(self):
        in_labels = tuple(self.input_labels)
        in_sizes = tuple(int(s) for s in self.input_sizes)
        if len(in_labels) != len(in_sizes):
            raise ValidationError("input labels and sizes disagree in length")
        if any(s < 1 for s in in_sizes) or self.output_size < 1:
            raise ValidationError("alphabet sizes must be >= 1")
        r = np.asarray(self.rows, dtype=float)
        n_in = int(np.prod(in_sizes)) if in_sizes else 1
        if r.shape != (n_in, self.output_size):
            raise ValidationError(
                f"rows shape {r.shape} != ({n_in}, {self.output_size})")
        if np.any(r < 0):
            raise ValidationError(f"negative channel entry: min={r.min()}")
        bad = np.abs(r.sum(axis=1) - 1.0) > ROW_TOL
        if bad.any():
            raise ValidationError(
                f"rows {np.flatnonzero(bad).tolist()} do not sum to 1")
        r = r.copy()
        r.setflags(write=False)
        object.__setattr__(self, "input_labels", in_labels)
        object.__setattr__(self, "input_sizes", in_sizes)
        object.__setattr__(self, "rows", r)

    def as_tensor(self) -> np.ndarray:
        """rows reshaped to input_sizes + (output_size,)."""
        return self.rows.reshape(self.input_sizes + (self.output_size,))


@dataclass(frozen=True)
class CostFunction:
    """Per-action-symbol cost Gamma(a), in abstract cost units."""

    costs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.costs, dtype=float)
        if c.ndim != 1 or c.size == 0:
            raise ValidationError("costs must be a nonempty 1-D vector")
        if np.any(c < 0):
            raise ValidationError(f"negative cost: min={c.min()}")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "costs", c)

    def __len__(self):
        return self.costs.size


def _check_prob(name, value):
    if not (0.0 <= value <= 1.0):
        raise ValidationError(f"{name}={value} outside [0, 1]")


def bsc(p: float, input_label: str = "in", output_label: str = "out") -> CondChannel:
    """Binary symmetric channel with crossover probability p."""
    _check_prob("p", p)
    rows = np.array([[1.0 - p, p], [p, 1.0 - p]])
    return CondChannel((input_label,), (2,), output_label, 2, rows)


def star(p: float, q: float) -> float:
    """Crossover of the cascade BSC(p) then BSC(q): (1-2q)p + q."""
    _check_prob("p", p)
    _check_prob("q", q)
    return (1.0 - 2.0 * q) * p + q


def solve_star(target: float, q: float) -> float:
    """The p with star(p, q) = target; q = 1/2 is singular."""
    _check_prob("target", target)
    _check_prob("q", q)
    if q == 0.5:
        raise DomainError("q = 1/2 absorbs every input; star is not invertible")
    p = (target - q) / (1.0 - 2.0 * q)
    if not (0.0 <= p <= 1.0) and not math.isclose(p, 0.0, abs_tol=1e-15) \
            and not math.isclose(p, 1.0, abs_tol=1e-15):
        raise DomainError(
            f"target {target} unreachable from q={q} (would need p={p})")
    return min(max(p, 0.0), 1.0)


def cascade(first: CondChannel, second: CondChannel) -> CondChannel:
    """Compose channels: second consumes exactly first's output variable."""
    if second.input_labels != (first.output_label,):
        raise ValidationError(
            f"second channel inputs {second.input_labels} != ({first.output_label},)")
    if second.input_sizes != (first.output_size,):
        raise ValidationError(
            f"second channel input sizes {second.input_sizes} != ({first.output_size},)")
    return CondChannel(first.input_labels, first.input_sizes,
                       second.output_label, second.output_size,
                       first.rows @ second.rows)


def default_action_costs(q00: float, q01: float, q10: float, q11: float) -> CostFunction:
    """Cost pair from the four measurement crossovers q_{x~ a}.

    Gamma(0) = (q01 + q11) / (q00 + q01 + q10 + q11) and Gamma(1) is its
    complement, so the more reliable action (smaller crossovers) carries the
    larger cost.
    """
    for name, v in (("q00", q00), ("q01", q01), ("q10", q10), ("q11", q11)):
        if v < 0:
            raise ValidationError(f"{name}={v} is negative")
    total = q00 + q01 + q10 + q11
    if total == 0:
        raise DomainError("all crossovers are zero; costs undefined")
    g0 = (q01 + q11) / total
    return CostFunction(np.array([g0, 1.0 - g0]))
