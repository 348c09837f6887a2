"""Channel-ordering checks backing the outer bounds.

Two orderings matter for the outer bounds: physical degradedness of the
eavesdropper's observation (Z obtainable from Y by one further channel,
certified exactly via linear feasibility), and the strictly weaker
conditionally-less-noisy ordering (X at least as informative as Z given
(A, Y) for every admissible auxiliary L). No sound decision procedure for
the latter is known here; cln_falsify is a multistart local-descent
*falsifier* — a returned witness refutes the ordering, a none result
proves nothing.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .channels import CondChannel
from .errors import ValidationError
from .probability import JointTensor, conditional_mi, marginalize

#: residual above this refuses a degradedness certificate
RESIDUAL_TOL = 1e-9
#: gap below this counts as a genuine CLN violation (not rounding noise)
VIOLATION_TOL = -1e-9

DIRECTION_X_OVER_Z = "x_over_z"   # X >= Z given (A, Y); L - (A,X~,Y) - (X,Z)
DIRECTION_Z_OVER_Y = "z_over_y"   # Z >= Y given (A, X); L - (A,X~,X) - (Z,Y)


@dataclass(frozen=True)
class DegradednessCertificate:
    """A row-stochastic Y->Z witness reproducing the joint's Z-channel."""

    witness: CondChannel
    residual: float

    @property
    def crossover(self) -> float:
        """Off-diagonal mean of a binary witness (BSC parameter estimate)."""
        w = self.witness.rows
        if w.shape != (2, 2):
            raise ValidationError("crossover is defined for binary witnesses only")
        return float(0.5 * (w[0, 1] + w[1, 0]))


@dataclass(frozen=True)
class ClnWitness:
    """An auxiliary channel refuting a conditionally-less-noisy ordering."""

    l_channel: CondChannel
    gap: float
    direction: str


def check_degraded(joint: JointTensor):
    """Certify (A,X~,X) - Y - Z, or return None.

    Solves min t over row-stochastic W = P(Z|Y) subject to
    |sum_y W(z|y) P(y|c) - P(z|c)| <= t for every context c = (a, x~, x)
    with positive mass. Contexts with zero mass are unreachable and skipped.
    """
    ctx = ("a", "xt", "x")
    t_y = _mass_in_order(joint, ctx + ("y",))
    t_z = _mass_in_order(joint, ctx + ("z",))
    m_y = t_y.reshape(-1, t_y.shape[-1])
    m_z = t_z.reshape(-1, t_z.shape[-1])
    p_ctx = m_y.sum(axis=1)
    live = p_ctx > 1e-15
    if not live.any():
        return None
    py = m_y[live] / p_ctx[live, None]
    pz = m_z[live] / p_ctx[live, None]
    n_ctx, ny = py.shape
    nz = pz.shape[1]

    # variables: W flattened row-major (y, z), then t
    nvar = ny * nz + 1
    cost_vec = np.zeros(nvar)
    cost_vec[-1] = 1.0
    rows_ub = []
    rhs_ub = []
    for c in range(n_ctx):
        for z in range(nz):
            coef = np.zeros(nvar)
            coef[z:ny * nz:nz] = py[c]    # sum_y W[y, z] * P(y|c)
            coef[-1] = -1.0
            rows_ub.append(coef.copy())
            rhs_ub.append(pz[c, z])
            coef2 = -coef
            coef2[-1] = -1.0
            rows_ub.append(coef2)
            rhs_ub.append(-pz[c, z])
    a_eq = np.zeros((ny, nvar))
    for y in range(ny):
        a_eq[y, y * nz:(y + 1) * nz] = 1.0
    res = linprog(cost_vec, A_ub=np.array(rows_ub), b_ub=np.array(rhs_ub),
                  A_eq=a_eq, b_eq=np.ones(ny),
                  bounds=[(0.0, 1.0)] * (ny * nz) + [(0.0, None)],
                  method="highs")
    if not res.success:
        return None
    residual = float(res.x[-1])
    if residual > RESIDUAL_TOL:
        return None
    w = res.x[:-1].reshape(ny, nz)
    w = np.clip(w, 0.0, None)
    w /= w.sum(axis=1, keepdims=True)
    witness = CondChannel(("y",), (ny,), "z", nz, w)
    return DegradednessCertificate(witness=witness, residual=residual)


def _direction_layout(direction: str):
    """Conditioning variable and (favored, disfavored) targets per direction."""
    if direction == DIRECTION_X_OVER_Z:
        return "y", ("x", "z")
    if direction == DIRECTION_Z_OVER_Y:
        return "x", ("z", "y")
    raise ValidationError(f"unknown direction {direction!r}")


def _mass_in_order(joint: JointTensor, labels: tuple) -> np.ndarray:
    """Marginal mass with axes transposed to exactly the requested order."""
    m = marginalize(joint, labels)
    return m.mass.transpose([m.labels.index(lab) for lab in labels])


def witness_gap(joint: JointTensor, witness: ClnWitness) -> float:
    """Re-evaluate a witness's gap from scratch on the augmented joint."""
    cond, (fav, dis) = _direction_layout(witness.direction)
    base = marginalize(joint, ("a", "xt", "x", "y", "z"))
    w = witness.l_channel.as_tensor()          # (a, xt, cond, l)
    if cond == "y":
        aug = np.einsum("atxyz,atyl->latxyz", base.mass, w)
    else:
        aug = np.einsum("atxyz,atxl->latxyz", base.mass, w)
    aug_joint = JointTensor(("l", "a", "xt", "x", "y", "z"), aug)
    return (conditional_mi(aug_joint, "l", fav, ("a", cond))
            - conditional_mi(aug_joint, "l", dis, ("a", cond)))


def _descend(m_fav, m_dis, w, iters=80, lr0=1.0):
    """Projected gradient descent on gap(w); rows of w live on the simplex.

    m_fav[s, x] and m_dis[s, z] are joint masses P(s, x) and P(s, z) over the
    conditioning states s = (a, x~, c). Only two entropy blocks of the gap
    depend on w; their gradient is

        d gap / d w[s, l] = sum_x m_fav[s,x] log2 P(l, g(s), x)
                          - sum_z m_dis[s,z] log2 P(l, g(s), z)

    where g(s) collapses s to (a, c) (the x~ axis is summed out inside P).
    """
    na, nxt, nc, nl = w.shape
    mf = m_fav.reshape(na, nxt, nc, -1)
    md = m_dis.reshape(na, nxt, nc, -1)

    def gap_and_grad(wm):
        p_f = np.einsum("atcx,atcl->lacx", mf, wm)
        p_d = np.einsum("atcz,atcl->lacz", md, wm)
        lf = np.log2(np.maximum(p_f, 1e-300))
        ld = np.log2(np.maximum(p_d, 1e-300))
        # gap = H(L,A,C,dis) - H(L,A,C,fav) + const(w)
        g = float(-(p_d * ld).sum() + (p_f * lf).sum())
        grad = (np.einsum("atcx,lacx->atcl", mf, lf)
                - np.einsum("atcz,lacz->atcl", md, ld))
        return g, grad

    def project(wm):
        wm = np.clip(wm, 0.0, None)
        s = wm.sum(axis=-1, keepdims=True)
        dead = s[..., 0] <= 0
        if dead.any():
            wm[dead] = 1.0 / nl
            s = wm.sum(axis=-1, keepdims=True)
        return wm / s

    w = project(w.copy())
    g, grad = gap_and_grad(w)
    lr = lr0
    best_w, best_g = w, g
    for _ in range(iters):
        stepped = False
        for _ in range(10):
            cand = project(w - lr * grad)
            gc, gradc = gap_and_grad(cand)
            if gc <= g:
                w, g, grad = cand, gc, gradc
                lr *= 1.25
                stepped = True
                break
            lr *= 0.4
        if not stepped:
            break
        if g < best_g:
            best_g, best_w = g, w
    return best_w, best_g


def cln_falsify(joint: JointTensor, direction: str = DIRECTION_X_OVER_Z,
                restarts: int = 50, l_size: int = None, seed: int = 0,
                iters: int = 80):
    """Search for an L-channel violating the requested CLN ordering.

    Minimizes I(L;fav|A,c) - I(L;dis|A,c) over P(L | A, X~, c) by multistart
    projected gradient descent (per-restart seeds derived from the master
    seed by counter). Returns a ClnWitness when a gap below -1e-9 is found,
    else None — which is *not* a proof that the ordering holds.
    """
    if restarts < 1:
        raise ValidationError(f"restarts must be >= 1, got {restarts}")
    cond, (fav, dis) = _direction_layout(direction)
    m_fav = _mass_in_order(joint, ("a", "xt", cond, fav))
    m_dis = _mass_in_order(joint, ("a", "xt", cond, dis))
    na, nxt, nc = m_fav.shape[:3]
    if l_size is None:
        l_size = na * nxt * nc
    if l_size < 2:
        raise ValidationError(f"l_size must be >= 2, got {l_size}")

    best = None
    for k in range(restarts):
        rng = np.random.default_rng([seed, k])
        init = -np.log(np.maximum(rng.random((na, nxt, nc, l_size)), 1e-12))
        w, gap = _descend(m_fav, m_dis, init, iters=iters)
        if best is None or gap < best[1]:
            best = (w, gap)
    w, _ = best
    rows = w.reshape(na * nxt * nc, l_size)
    rows = rows / rows.sum(axis=1, keepdims=True)
    candidate = ClnWitness(
        l_channel=CondChannel(("a", "xt", cond), (na, nxt, nc), "l", l_size, rows),
        gap=0.0, direction=direction)
    # report the gap the probability core reproduces, not the descent's value
    exact_gap = witness_gap(joint, candidate)
    if exact_gap < VIOLATION_TOL:
        return ClnWitness(l_channel=candidate.l_channel, gap=exact_gap,
                          direction=direction)
    return None
