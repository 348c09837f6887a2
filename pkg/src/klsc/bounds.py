"""Inner and outer rate bounds evaluated on a factorized joint.

For one auxiliary choice (one joint), the achievability-extremal tuple is

    key rate      R_s <= I(V;Y|A,U) - I(V;Z|A,U)            (shared by both sides)
    leakage, in   R_l >= max(l1, l2, l3)
    leakage, out  R_l >= I(X;A,V,Y) - I(X;Y|A) + I(X;Z|A) + I(U;Y|A) - I(U;Z|A)
    storage, GS   R_w >= I(X~;A) + I(V;X~|A,Y)
    storage, CS   R_w >= I(X~;A,V) - I(U;Y|A) - I(V;Z|A,U)
    cost          C    = E[Gamma(A)]

with l1 = I(V,X;Z|A) + I(X;A,V,Y) - I(V,X;Y|A), l2 its U-conditioned
variant, l3 = I(X;A,U,Z). The CS storage bound equals the GS storage bound
plus the raw (unclamped) key bound; that identity is kept as a cross-check,
not assumed.

The region is a union over auxiliary distributions; this module evaluates
one member. The search over auxiliaries lives in sweep.py.

Outer-bound validity additionally requires the channel orderings checked by
ordering.py; evaluation itself never re-checks them (they are properties of
the measurement channel, not of the auxiliary choice). On joints that break
those orderings the converse leakage expression may come out negative; it is
clamped at 0 (leakage is nonnegative regardless) with the raw value kept in
params["r_l_raw"].
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .channels import CostFunction
from .errors import ModelError, ValidationError
from .probability import JointTensor, conditional_mi
from .system import expected_cost

#: conditional MI above this on a factorization Markov chain means the joint
#: was not assembled from the required factor channels
MARKOV_TOL = 1e-8


@dataclass(frozen=True)
class LeakageTerms:
    """The three candidate privacy-leakage lower bounds, in bits."""

    l1: float
    l2: float
    l3: float

    @property
    def max_term(self) -> float:
        return max(self.l1, self.l2, self.l3)


@dataclass(frozen=True)
class RatePoint:
    """An evaluated (R_s, R_l, R_w, C) tuple for one auxiliary choice.

    r_s is clamped at 0; the raw difference is kept in params["r_s_raw"]
    for diagnostics and for the CS storage cross-check.
    """

    r_s: float
    r_l: float
    r_w: float
    cost: float
    model: str            # "gs" | "cs"
    side: str             # "inner" | "outer"
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.model not in ("gs", "cs"):
            raise ValidationError(f"model must be gs|cs, got {self.model!r}")
        if self.side not in ("inner", "outer"):
            raise ValidationError(f"side must be inner|outer, got {self.side!r}")
        if self.r_s < 0:
            raise ValidationError(f"r_s={self.r_s} negative (clamp before building)")
        if self.r_l < -1e-10 or self.r_w < -1e-10:
            raise ValidationError(
                f"negative rate beyond tolerance: r_l={self.r_l}, r_w={self.r_w}")


def _assert_factorized(joint: JointTensor) -> None:
    chain_u = conditional_mi(joint, "u", ("xt", "x", "y", "z"), ("v", "a"))
    chain_yz = conditional_mi(joint, ("y", "z"), ("u", "v"), ("x", "xt", "a"))
    if chain_u > MARKOV_TOL or chain_yz > MARKOV_TOL:
        raise ModelError(
            "joint does not satisfy the factorization Markov chains: "
            f"I(U;XT,X,Y,Z|V,A)={chain_u:.3e}, I(YZ;UV|X,XT,A)={chain_yz:.3e}")


def leakage_terms(joint: JointTensor) -> LeakageTerms:
    """l1, l2, l3 for the inner privacy-leakage bound."""
    i_x_avy = conditional_mi(joint, "x", ("a", "v", "y"))
    l1 = (conditional_mi(joint, ("v", "x"), "z", "a") + i_x_avy
          - conditional_mi(joint, ("v", "x"), "y", "a"))
    l2 = (conditional_mi(joint, ("v", "x"), "z", ("a", "u")) + i_x_avy
          - conditional_mi(joint, ("v", "x"), "y", ("a", "u")))
    l3 = conditional_mi(joint, "x", ("a", "u", "z"))
    return LeakageTerms(l1, l2, l3)


def _key_terms(joint: JointTensor):
    i_vy = conditional_mi(joint, "v", "y", ("a", "u"))
    i_vz = conditional_mi(joint, "v", "z", ("a", "u"))
    return i_vy, i_vz


def _gs_storage(joint: JointTensor) -> float:
    return (conditional_mi(joint, "xt", "a")
            + conditional_mi(joint, "v", "xt", ("a", "y")))


def _cs_storage(joint: JointTensor) -> float:
    return (conditional_mi(joint, "xt", ("a", "v"))
            - conditional_mi(joint, "u", "y", "a")
            - conditional_mi(joint, "v", "z", ("a", "u")))


def _outer_leakage(joint: JointTensor) -> float:
    return (conditional_mi(joint, "x", ("a", "v", "y"))
            - conditional_mi(joint, "x", "y", "a")
            + conditional_mi(joint, "x", "z", "a")
            + conditional_mi(joint, "u", "y", "a")
            - conditional_mi(joint, "u", "z", "a"))


def _evaluate(joint: JointTensor, costs: CostFunction, model: str, side: str,
              params: Optional[dict]) -> RatePoint:
    _assert_factorized(joint)
    i_vy, i_vz = _key_terms(joint)
    r_s_raw = i_vy - i_vz
    lt = leakage_terms(joint)
    r_w = _gs_storage(joint) if model == "gs" else _cs_storage(joint)
    meta = dict(params or {})
    meta.update(r_s_raw=r_s_raw, l1=lt.l1, l2=lt.l2, l3=lt.l3,
                i_vy_given_au=i_vy, i_vz_given_au=i_vz)
    if side == "inner":
        r_l = lt.max_term          # >= l3 >= 0 on any joint
    else:
        # the converse expression can go negative on joints whose
        # measurement channel violates the ordering preconditions; leakage
        # itself cannot, so clamp and keep the raw value for diagnostics
        raw_l = _outer_leakage(joint)
        meta["r_l_raw"] = raw_l
        r_l = max(raw_l, 0.0)
    return RatePoint(r_s=max(r_s_raw, 0.0), r_l=r_l, r_w=r_w,
                     cost=expected_cost(joint, costs),
                     model=model, side=side, params=meta)


def gs_inner(joint: JointTensor, costs: CostFunction,
             params: Optional[dict] = None) -> RatePoint:
    return _evaluate(joint, costs, "gs", "inner", params)


def cs_inner(joint: JointTensor, costs: CostFunction,
             params: Optional[dict] = None) -> RatePoint:
    return _evaluate(joint, costs, "cs", "inner", params)


def gs_outer(joint: JointTensor, costs: CostFunction,
             params: Optional[dict] = None) -> RatePoint:
    return _evaluate(joint, costs, "gs", "outer", params)


def cs_outer(joint: JointTensor, costs: CostFunction,
             params: Optional[dict] = None) -> RatePoint:
    return _evaluate(joint, costs, "cs", "outer", params)


def cardinality_limits(a_size: int, xt_size: int) -> tuple:
    """Sufficient auxiliary alphabet sizes (|U| max, |V| max)."""
    if a_size < 1 or xt_size < 1:
        raise ValidationError("alphabet sizes must be >= 1")
    base = a_size * xt_size
    return (base + 3, (base + 3) * (base + 2))
