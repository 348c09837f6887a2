"""Assemble the seven-variable joint from its factorization.

The joint over (U, V, A, X~, X, Y, Z) factors as

    P(x) P(x~|x) P(a|x~) P(y,z|x,x~,a) P(v|x~,a) P(u|v)

with axis labels ("u", "v", "a", "xt", "x", "y", "z"). The measurement is a
genuine joint channel to the product symbol (y, z); the degraded structure
of the binary example (Z obtained from Y by a further BSC) is one instance.

The binary example: X uniform, X~ = BSC(p_enc)(X), A|X~ the two-parameter
binary channel (alpha0, alpha1) = P(A=0 | X~=0), P(A=0 | X~=1),
Y = BSC(q_{x~ a})(X), Z = BSC(p_eve)(Y), V = BSC(p_a)(X~), U constant
(size-1 alphabet). p_eve is recovered from the cascade target
z_target = p_eve * q11 by exact inversion unless given explicitly.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .channels import CondChannel, CostFunction, bsc, default_action_costs, solve_star
from .errors import ValidationError
from .probability import FiniteDist, JointTensor, marginalize

JOINT_LABELS = ("u", "v", "a", "xt", "x", "y", "z")


@dataclass(frozen=True)
class SystemFactors:
    """The six factors of the joint, wired by variable label."""

    source: FiniteDist                 # P_X
    enc_meas: CondChannel              # x -> xt
    action: CondChannel                # xt -> a
    meas: CondChannel                  # (x, xt, a) -> yz product symbol
    aux_v: CondChannel                 # (xt, a) -> v
    aux_u: CondChannel                 # v -> u
    y_size: int = 2
    z_size: int = 2

    def __post_init__(self):
        expect = {
            "enc_meas": (("x",), "xt"),
            "action": (("xt",), "a"),
            "meas": (("x", "xt", "a"), "yz"),
            "aux_v": (("xt", "a"), "v"),
            "aux_u": (("v",), "u"),
        }
        for name, (in_labels, out_label) in expect.items():
            ch: CondChannel = getattr(self, name)
            if ch.input_labels != in_labels or ch.output_label != out_label:
                raise ValidationError(
                    f"{name} must map {in_labels} -> {out_label}, "
                    f"got {ch.input_labels} -> {ch.output_label}")
        x_size = len(self.source)
        xt_size = self.enc_meas.output_size
        a_size = self.action.output_size
        checks = [
            (self.enc_meas.input_sizes, (x_size,), "enc_meas input"),
            (self.action.input_sizes, (xt_size,), "action input"),
            (self.meas.input_sizes, (x_size, xt_size, a_size), "meas input"),
            (self.aux_v.input_sizes, (xt_size, a_size), "aux_v input"),
            (self.aux_u.input_sizes, (self.aux_v.output_size,), "aux_u input"),
        ]
        for got, want, what in checks:
            if got != want:
                raise ValidationError(f"{what} sizes {got} != {want}")
        if self.y_size * self.z_size != self.meas.output_size:
            raise ValidationError(
                f"y_size*z_size = {self.y_size * self.z_size} != "
                f"meas output size {self.meas.output_size}")


def build_joint(factors: SystemFactors) -> JointTensor:
    """Multiply out the factorization into the dense 7-variable joint."""
    f = factors
    px = f.source.probs
    t_enc = f.enc_meas.as_tensor()                    # (x, xt)
    t_act = f.action.as_tensor()                      # (xt, a)
    t_meas = f.meas.as_tensor().reshape(
        f.meas.input_sizes + (f.y_size, f.z_size))    # (x, xt, a, y, z)
    t_v = f.aux_v.as_tensor()                         # (xt, a, v)
    t_u = f.aux_u.as_tensor()                         # (v, u)
    mass = np.einsum("x,xt,ta,xtayz,tav,vu->uvatxyz",
                     px, t_enc, t_act, t_meas, t_v, t_u, optimize=True)
    return JointTensor(JOINT_LABELS, mass)


@dataclass(frozen=True)
class BinaryExampleConfig:
    """Compact description of the binary/BSC instance.

    q is indexed [x~][a]; alpha0/alpha1 give P(A=0 | X~); p0/p1 are the
    V-channel crossovers per action. Exactly one of z_target / p_eve pins
    the eavesdropper: with z_target, p_eve = solve_star(z_target, q[1][1]).
    """

    p_enc: float
    q: Sequence[Sequence[float]]
    alpha0: float
    alpha1: float
    p0: float
    p1: float
    z_target: Optional[float] = 0.150
    p_eve: Optional[float] = None
    costs: Optional[CostFunction] = None
    strict_ordering: bool = False

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        if q.shape != (2, 2):
            raise ValidationError(f"q must be 2x2 (x~, a), got shape {q.shape}")
        for name in ("p_enc", "alpha0", "alpha1", "p0", "p1"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValidationError(f"{name}={v} outside [0, 1]")
        if np.any(q < 0) or np.any(q > 1):
            raise ValidationError("q entries must lie in [0, 1]")
        if self.p_eve is None and self.z_target is None:
            raise ValidationError("one of z_target / p_eve must be given")
        ordered = (q[0, 0] < q[0, 1] and q[1, 0] < q[1, 1]
                   and q[0, 0] < q[1, 0] and q[0, 1] < q[1, 1])
        if not ordered:
            msg = ("q does not satisfy the reliability ordering "
                   "q_{x~0} < q_{x~1} and q_{0a} < q_{1a}")
            if self.strict_ordering:
                raise ValidationError(msg)
            warnings.warn(msg, stacklevel=2)
        object.__setattr__(self, "q", q)

    @property
    def eavesdropper_crossover(self) -> float:
        if self.p_eve is not None:
            return float(self.p_eve)
        return solve_star(float(self.z_target), float(self.q[1][1]))

    @property
    def cost_function(self) -> CostFunction:
        if self.costs is not None:
            return self.costs
        q = self.q
        return default_action_costs(q[0][0], q[0][1], q[1][0], q[1][1])

    def with_point(self, alpha0, alpha1, p0, p1) -> "BinaryExampleConfig":
        """Same instance at different sweep coordinates."""
        return BinaryExampleConfig(
            p_enc=self.p_enc, q=self.q, alpha0=alpha0, alpha1=alpha1,
            p0=p0, p1=p1, z_target=self.z_target, p_eve=self.p_eve,
            costs=self.costs, strict_ordering=False)


def build_binary_example(cfg: BinaryExampleConfig) -> SystemFactors:
    """Instantiate the factorization of the binary/BSC example."""
    p_eve = cfg.eavesdropper_crossover
    q = cfg.q
    source = FiniteDist(np.array([0.5, 0.5]))
    enc_meas = bsc(cfg.p_enc, "x", "xt")
    action = CondChannel(("xt",), (2,), "a", 2, np.array(
        [[cfg.alpha0, 1.0 - cfg.alpha0], [cfg.alpha1, 1.0 - cfg.alpha1]]))
    # (x, xt, a) -> (y, z): BSC(q_{x~ a}) from x, then BSC(p_eve) from y
    eve = bsc(p_eve).rows
    rows = np.empty((8, 4))
    for x in range(2):
        for xt in range(2):
            for a in range(2):
                y_row = bsc(q[xt][a]).rows[x]               # P(y | x)
                yz = y_row[:, None] * eve                   # P(y, z)
                rows[(x * 2 + xt) * 2 + a] = yz.ravel()
    meas = CondChannel(("x", "xt", "a"), (2, 2, 2), "yz", 4, rows)
    p_by_action = (cfg.p0, cfg.p1)
    v_rows = np.empty((4, 2))
    for xt in range(2):
        for a in range(2):
            v_rows[xt * 2 + a] = bsc(p_by_action[a]).rows[xt]
    aux_v = CondChannel(("xt", "a"), (2, 2), "v", 2, v_rows)
    aux_u = CondChannel(("v",), (2,), "u", 1, np.ones((2, 1)))
    return SystemFactors(source, enc_meas, action, meas, aux_v, aux_u)


def expected_cost(joint: JointTensor, costs: CostFunction) -> float:
    """E[Gamma(A)] under the joint's action marginal."""
    pa = marginalize(joint, "a").mass
    if pa.size != len(costs):
        raise ValidationError(
            f"cost function has {len(costs)} entries for |A|={pa.size}")
    return float(pa @ costs.costs)
