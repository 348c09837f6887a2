"""Grid sweep of the binary example and cost-vs-key-rate frontiers.

The sweep walks the four generator parameters (alpha0, alpha1, p0, p1) of
the binary family, evaluates the bound terms at every vertex, filters by a
storage budget, and bins the survivors into a cost frontier.

Two evaluation paths exist and are tested against each other:

* ``evaluate_binary_point`` — the reference path: build the full joint and
  run the bound evaluators on it. Used for single points and spot checks.
* the block engine (``iter_sweep_blocks`` / ``compute_frontiers``) — a
  closed-form path that exploits the family's structure. Conditioned on
  the action A = a, the chain (X~, X, Y, Z, V) depends on the generator
  only through t_a = P(x~=0 | a) and the auxiliary crossover p_a, so every
  needed conditional term is a per-action table over (t, p) plus terms that
  depend on (alpha0, alpha1) alone. A full 0.01-step sweep (~26.5M
  vertices) then reduces to ~10k-row tables broadcast over alpha pairs.

The sweep's auxiliary U is constant, which collapses the second leakage
term onto the first; the block engine relies on that and is only valid for
configs built by ``build_binary_example``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator, NamedTuple, Sequence

import numpy as np

from .bounds import RatePoint, cs_inner, cs_outer, gs_inner, gs_outer
from .errors import DomainError, ValidationError
from .system import BinaryExampleConfig, build_binary_example, build_joint

#: slack when comparing a storage rate against a budget
BUDGET_TOL = 1e-12
#: default cost-bin resolution for frontiers
DEFAULT_BIN_WIDTH = 0.002
#: sweep() materializes RatePoints; refuse grids beyond this
MAX_MATERIALIZED = 300_000

MODELS = ("gs", "cs")
SIDES = ("inner", "outer")


def _hb(p):
    """Binary entropy in bits, elementwise, with 0 log 0 = 0."""
    p = np.asarray(p, dtype=float)
    q = 1.0 - p
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -np.where(p > 0, p * np.log2(np.maximum(p, 1e-300)), 0.0) \
              - np.where(q > 0, q * np.log2(np.maximum(q, 1e-300)), 0.0)
    return out


@dataclass(frozen=True)
class GridAxis:
    """Closed range [start, stop] walked in uniform steps."""

    start: float
    stop: float
    step: float

    def __post_init__(self):
        if self.step <= 0:
            raise ValidationError(f"step must be > 0, got {self.step}")
        if self.stop < self.start:
            raise ValidationError(
                f"empty axis: stop {self.stop} < start {self.start}")

    def values(self) -> np.ndarray:
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        vals = self.start + self.step * np.arange(n)
        # snap to the grid lattice so 0.01-step axes print cleanly
        return np.round(vals, 12)

    @property
    def count(self) -> int:
        return len(self.values())


@dataclass(frozen=True)
class SweepGrid:
    """Cartesian grid over (alpha0, alpha1, p0, p1) plus model/side tags."""

    alpha0: GridAxis
    alpha1: GridAxis
    p0: GridAxis
    p1: GridAxis
    model: str = "gs"
    side: str = "inner"

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValidationError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.side not in SIDES:
            raise ValidationError(f"side must be one of {SIDES}, got {self.side!r}")
        for name, axis, hi in (("alpha0", self.alpha0, 1.0),
                               ("alpha1", self.alpha1, 1.0),
                               ("p0", self.p0, 0.5), ("p1", self.p1, 0.5)):
            if axis.start < 0 or axis.stop > hi + 1e-12:
                raise ValidationError(
                    f"{name} range [{axis.start}, {axis.stop}] outside [0, {hi}]")

    @property
    def size(self) -> int:
        return (self.alpha0.count * self.alpha1.count
                * self.p0.count * self.p1.count)

    @classmethod
    def full(cls, step: float = 0.01, model: str = "gs", side: str = "inner"):
        """Production grid: 0.01 steps on all four axes (~26.5M vertices)."""
        return cls(GridAxis(0.0, 1.0, step), GridAxis(0.0, 1.0, step),
                   GridAxis(0.0, 0.5, step), GridAxis(0.0, 0.5, step),
                   model=model, side=side)

    @classmethod
    def coarse(cls, step: float = 0.05, model: str = "gs", side: str = "inner"):
        """Smoke-test preset with the same shape at 0.05 steps."""
        return cls.full(step=step, model=model, side=side)


class FrontierSummary(NamedTuple):
    c_star: float
    r_s_star: float


class GainReport(NamedTuple):
    key_rate_gain_pct: float
    cost_reduction_pct: float


@dataclass(frozen=True)
class FrontierPoint:
    """Best key rate among admissible points with cost <= this bin edge."""

    cost: float
    r_s: float
    achiever: tuple = None


_EVALUATORS = {("gs", "inner"): gs_inner, ("gs", "outer"): gs_outer,
               ("cs", "inner"): cs_inner, ("cs", "outer"): cs_outer}


def evaluate_binary_point(cfg: BinaryExampleConfig, alpha0: float, alpha1: float,
                          p0: float, p1: float, model: str = "gs",
                          side: str = "inner") -> RatePoint:
    """Reference evaluation of one grid vertex via the full joint."""
    try:
        evaluator = _EVALUATORS[(model, side)]
    except KeyError:
        raise ValidationError(f"unknown evaluator {(model, side)!r}") from None
    point_cfg = cfg.with_point(alpha0, alpha1, p0, p1)
    factors = build_binary_example(point_cfg)
    joint = build_joint(factors)
    return evaluator(joint, costs=point_cfg.cost_function,
                     params={"alpha0": alpha0, "alpha1": alpha1,
                             "p0": p0, "p1": p1})


# ---------------------------------------------------------------------------
# block engine
# ---------------------------------------------------------------------------

def _entropy_tail(mass: np.ndarray, batch_ndim: int) -> np.ndarray:
    """Entropy over all trailing axes; leading batch axes are preserved."""
    flat = mass.reshape(mass.shape[:batch_ndim] + (-1,))
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(flat > 0, flat * np.log2(np.maximum(flat, 1e-300)), 0.0)
    return -terms.sum(axis=-1)


def _bsc_matrix(p: float) -> np.ndarray:
    return np.array([[1.0 - p, p], [p, 1.0 - p]])


def _action_tables(cfg: BinaryExampleConfig, t_vals: np.ndarray,
                   p_vals: np.ndarray, action: int,
                   chunk: int = 512) -> dict:
    """Conditional bound terms given A = action, tabulated over (t, p).

    t is P(x~=0 | A=action); p is the auxiliary crossover for this action.
    Entries that do not involve V depend on t alone and come back as 1-D
    arrays; V-dependent entries are (len(t), len(p)).
    """
    txx = _bsc_matrix(cfg.p_enc)                       # (xt, x)
    yq = np.stack([_bsc_matrix(cfg.q[xt][action]) for xt in (0, 1)])  # (xt,x,y)
    ez = _bsc_matrix(cfg.eavesdropper_crossover)        # (y, z)
    vp = np.stack([_bsc_matrix(p) for p in p_vals])     # (p, xt, v)

    nt, npv = len(t_vals), len(p_vals)
    out2 = {name: np.empty((nt, npv)) for name in
            ("kdiff", "ivt_y", "ivx_z", "ivx_y", "ix_vy")}
    out1 = {name: np.empty(nt) for name in ("ix_y", "ix_z", "hx")}

    for lo in range(0, nt, chunk):
        hi = min(lo + chunk, nt)
        t = t_vals[lo:hi]
        t_row = np.stack([t, 1.0 - t], axis=1)          # (i, xt)
        core = np.einsum("it,tx,txy,yz->itxyz", t_row, txx, yq, ez,
                         optimize=True)                 # (i, xt, x, y, z)
        h_y = _entropy_tail(core.sum(axis=(1, 2, 4)), 1)
        h_z = _entropy_tail(core.sum(axis=(1, 2, 3)), 1)
        h_x = _entropy_tail(core.sum(axis=(1, 3, 4)), 1)
        h_xy = _entropy_tail(core.sum(axis=(1, 4)), 1)
        h_xz = _entropy_tail(core.sum(axis=(1, 3)), 1)
        h_ty = _entropy_tail(core.sum(axis=(2, 4)), 1)

        big = np.einsum("itxyz,ptv->iptxyzv", core, vp, optimize=True)
        h_v = _entropy_tail(big.sum(axis=(2, 3, 4, 5)), 2)
        h_vy = _entropy_tail(big.sum(axis=(2, 3, 5)), 2)
        h_vz = _entropy_tail(big.sum(axis=(2, 3, 4)), 2)
        h_vty = _entropy_tail(big.sum(axis=(3, 5)), 2)
        h_vx = _entropy_tail(big.sum(axis=(2, 4, 5)), 2)
        h_vxz = _entropy_tail(big.sum(axis=(2, 4)), 2)
        h_vxy = _entropy_tail(big.sum(axis=(2, 5)), 2)

        i_vy = h_v + h_y[:, None] - h_vy
        i_vz = h_v + h_z[:, None] - h_vz
        out2["kdiff"][lo:hi] = i_vy - i_vz
        out2["ivt_y"][lo:hi] = h_vy + h_ty[:, None] - h_vty - h_y[:, None]
        out2["ivx_z"][lo:hi] = h_vx + h_z[:, None] - h_vxz
        out2["ivx_y"][lo:hi] = h_vx + h_y[:, None] - h_vxy
        out2["ix_vy"][lo:hi] = h_x[:, None] + h_vy - h_vxy
        out1["ix_y"][lo:hi] = h_x + h_y - h_xy
        out1["ix_z"][lo:hi] = h_x + h_z - h_xz
        out1["hx"][lo:hi] = h_x
    return {**out2, **out1}


@dataclass(frozen=True)
class SweepBlock:
    """One chunk of alpha pairs with full (p0, p1) panels of bound terms.

    Array shapes: per-pair vectors are (B,), panels are (B, len(p0), len(p1)).
    Row order within a flattened block matches lexicographic
    (alpha0, alpha1, p0, p1) iteration of the parent grid.
    """

    alpha0: np.ndarray
    alpha1: np.ndarray
    cost: np.ndarray
    p0_values: np.ndarray
    p1_values: np.ndarray
    r_s_raw: np.ndarray
    gs_r_w: np.ndarray
    cs_r_w: np.ndarray
    l1: np.ndarray
    l3: np.ndarray
    outer_r_l: np.ndarray

    def storage(self, model: str) -> np.ndarray:
        return self.gs_r_w if model == "gs" else self.cs_r_w

    def leakage(self, side: str) -> np.ndarray:
        if side == "inner":
            return np.maximum(self.l1, self.l3)
        return np.maximum(self.outer_r_l, 0.0)    # match the evaluator's clamp


def _pair_arrays(grid: SweepGrid):
    a0 = grid.alpha0.values()
    a1 = grid.alpha1.values()
    a0g = np.repeat(a0, len(a1))
    a1g = np.tile(a1, len(a0))
    return a0g, a1g


def _block_for(cfg, grid, tab0, tab1, inv0, inv1, a0g, a1g, lo, hi) -> SweepBlock:
    a0c, a1c = a0g[lo:hi], a1g[lo:hi]
    i0, i1 = inv0[lo:hi], inv1[lo:hi]
    pa0 = 0.5 * (a0c + a1c)
    w0 = pa0[:, None, None]
    w1 = 1.0 - w0

    def comb(name):
        return w0 * tab0[name][i0][:, :, None] + w1 * tab1[name][i1][:, None, :]

    def comb_t(name):
        return pa0 * tab0[name][i0] + (1.0 - pa0) * tab1[name][i1]

    i_xt_a = _hb(pa0) - 0.5 * (_hb(a0c) + _hb(a1c))
    i_x_a = 1.0 - comb_t("hx")
    rs_raw = comb("kdiff")
    gs_rw = i_xt_a[:, None, None] + comb("ivt_y")
    l1 = comb("ivx_z") + i_x_a[:, None, None] + comb("ix_vy") - comb("ivx_y")
    l3 = i_x_a + comb_t("ix_z")
    outer_rl = (i_x_a[:, None, None] + comb("ix_vy")
                + (comb_t("ix_z") - comb_t("ix_y"))[:, None, None])
    gamma = cfg.cost_function.costs
    cost = pa0 * gamma[0] + (1.0 - pa0) * gamma[1]
    np0, np1 = rs_raw.shape[1:]
    return SweepBlock(alpha0=a0c, alpha1=a1c, cost=cost,
                      p0_values=grid.p0.values(), p1_values=grid.p1.values(),
                      r_s_raw=rs_raw, gs_r_w=gs_rw, cs_r_w=gs_rw + rs_raw,
                      l1=l1, l3=np.broadcast_to(l3[:, None, None],
                                                (len(a0c), np0, np1)),
                      outer_r_l=outer_rl)


def iter_sweep_blocks(cfg: BinaryExampleConfig, grid: SweepGrid,
                      pair_chunk: int = 512,
                      workers: int = 1) -> Iterator[SweepBlock]:
    """Yield SweepBlocks covering the grid in lexicographic pair order.

    With workers > 1, chunks are computed by a thread pool but still
    yielded in submission order, so output is deterministic.
    """
    if grid.size == 0:
        raise ValidationError("empty grid")
    a0g, a1g = _pair_arrays(grid)
    pa0 = 0.5 * (a0g + a1g)
    # t_a = P(x~=0 | A=a); placeholder 0.5 where the action has zero mass
    t0 = np.divide(0.5 * a0g, pa0, out=np.full_like(pa0, 0.5), where=pa0 > 0)
    t1 = np.divide(0.5 * (1.0 - a0g), 1.0 - pa0,
                   out=np.full_like(pa0, 0.5), where=pa0 < 1)
    ut0, inv0 = np.unique(t0, return_inverse=True)
    ut1, inv1 = np.unique(t1, return_inverse=True)
    tab0 = _action_tables(cfg, ut0, grid.p0.values(), action=0)
    tab1 = _action_tables(cfg, ut1, grid.p1.values(), action=1)

    spans = [(lo, min(lo + pair_chunk, len(a0g)))
             for lo in range(0, len(a0g), pair_chunk)]
    if workers <= 1:
        for lo, hi in spans:
            yield _block_for(cfg, grid, tab0, tab1, inv0, inv1, a0g, a1g, lo, hi)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_block_for, cfg, grid, tab0, tab1,
                               inv0, inv1, a0g, a1g, lo, hi)
                   for lo, hi in spans]
        for fut in futures:
            yield fut.result()


def sweep(cfg: BinaryExampleConfig, grid: SweepGrid,
          workers: int = 1) -> list:
    """Materialize one RatePoint per vertex, lexicographic grid order.

    Refuses grids larger than MAX_MATERIALIZED vertices — use
    compute_frontiers (streaming) for production-size grids.
    """
    if grid.size > MAX_MATERIALIZED:
        raise ValidationError(
            f"grid has {grid.size} vertices; sweep() materializes RatePoints "
            f"and is capped at {MAX_MATERIALIZED} — use compute_frontiers")
    points = []
    r_w_attr = "gs_r_w" if grid.model == "gs" else "cs_r_w"
    for block in iter_sweep_blocks(cfg, grid, workers=workers):
        r_w = getattr(block, r_w_attr)
        r_l = block.leakage(grid.side)
        np0, np1 = len(block.p0_values), len(block.p1_values)
        for b in range(len(block.alpha0)):
            for ip0 in range(np0):
                for ip1 in range(np1):
                    raw = block.r_s_raw[b, ip0, ip1]
                    points.append(RatePoint(
                        r_s=max(raw, 0.0), r_l=r_l[b, ip0, ip1],
                        r_w=r_w[b, ip0, ip1], cost=block.cost[b],
                        model=grid.model, side=grid.side,
                        params={"alpha0": float(block.alpha0[b]),
                                "alpha1": float(block.alpha1[b]),
                                "p0": float(block.p0_values[ip0]),
                                "p1": float(block.p1_values[ip1]),
                                "r_s_raw": float(raw)}))
    return points


# ---------------------------------------------------------------------------
# frontiers
# ---------------------------------------------------------------------------

def _frontier_from_arrays(cost: np.ndarray, r_s: np.ndarray,
                          achievers: np.ndarray,
                          bin_width: float) -> list:
    """Bin admissible candidates by cost and report running-max key rates."""
    if len(cost) == 0:
        return []
    order = np.argsort(cost, kind="stable")
    cost, r_s = cost[order], r_s[order]
    achievers = achievers[order] if achievers is not None else None
    cmin, cmax = float(cost[0]), float(cost[-1])
    nbins = max(int(math.ceil((cmax - cmin) / bin_width - 1e-12)), 0)
    edges = np.round(cmin + bin_width * np.arange(nbins + 1), 12)
    edges[-1] = cmax
    points = []
    idx = 0
    best = -np.inf
    best_ach = None
    for edge in edges:
        while idx < len(cost) and cost[idx] <= edge + 1e-12:
            if r_s[idx] > best:
                best = r_s[idx]
                if achievers is not None:
                    best_ach = tuple(float(v) for v in achievers[idx])
            idx += 1
        points.append(FrontierPoint(cost=float(edge), r_s=float(best),
                                    achiever=best_ach))
    return points


def frontier(points: Sequence[RatePoint], r_w_budget: float,
             bin_width: float = DEFAULT_BIN_WIDTH) -> list:
    """Cost frontier of the points whose storage rate fits the budget.

    Returns a list of FrontierPoints sorted by cost with nondecreasing
    r_s; an empty list is the explicit "no point satisfies the budget"
    marker.
    """
    if not points:
        raise ValidationError("frontier of an empty point list")
    keep = [p for p in points if p.r_w <= r_w_budget + BUDGET_TOL]
    if not keep:
        return []
    cost = np.array([p.cost for p in keep])
    r_s = np.array([p.r_s for p in keep])
    ach_keys = ("alpha0", "alpha1", "p0", "p1")
    have_ach = all(k in keep[0].params for k in ach_keys)
    ach = (np.array([[p.params[k] for k in ach_keys] for p in keep])
           if have_ach else None)
    return _frontier_from_arrays(cost, r_s, ach, bin_width)


def compute_frontiers(cfg: BinaryExampleConfig, grid: SweepGrid,
                      budgets: Sequence[float],
                      bin_width: float = DEFAULT_BIN_WIDTH,
                      workers: int = 1,
                      envelope: bool = False,
                      block_sink: Callable = None) -> dict:
    """Frontiers for several storage budgets in one streaming pass.

    Per block and budget, only the best admissible vertex of each alpha
    pair survives (cost is constant within a pair), so memory stays flat
    at any grid size. ``block_sink``, if given, receives every SweepBlock
    as it is produced (the CLI's CSV writer hooks in here).
    Returns {budget: list of FrontierPoint}.
    """
    budgets = list(budgets)
    if not budgets:
        raise ValidationError("no budgets given")
    if any(b <= 0 for b in budgets):
        raise ValidationError(f"budgets must be > 0, got {budgets}")
    cand = {b: [] for b in budgets}
    for block in iter_sweep_blocks(cfg, grid, workers=workers):
        if block_sink is not None:
            block_sink(block)
        r_w = block.storage(grid.model)
        nb = len(block.alpha0)
        rs_flat = np.maximum(block.r_s_raw, 0.0).reshape(nb, -1)
        np1 = len(block.p1_values)
        for b in budgets:
            ok = (r_w <= b + BUDGET_TOL).reshape(nb, -1)
            vals = np.where(ok, rs_flat, -np.inf)
            best = vals.max(axis=1)
            sel = best > -np.inf
            if not sel.any():
                continue
            arg = vals[sel].argmax(axis=1)
            cand[b].append((block.cost[sel], best[sel],
                            np.column_stack([
                                block.alpha0[sel], block.alpha1[sel],
                                block.p0_values[arg // np1],
                                block.p1_values[arg % np1]])))
    result = {}
    for b in budgets:
        if cand[b]:
            cost = np.concatenate([c[0] for c in cand[b]])
            r_s = np.concatenate([c[1] for c in cand[b]])
            ach = np.concatenate([c[2] for c in cand[b]])
            pts = _frontier_from_arrays(cost, r_s, ach, bin_width)
        else:
            pts = []
        result[b] = upper_envelope(pts) if envelope else pts
    return result


def upper_envelope(points: Sequence[FrontierPoint]) -> list:
    """Upper concave envelope over (cost, r_s) — the time-sharing closure.

    Envelope values at the original cost edges; points lifted by
    interpolation lose their achiever (no single grid vertex attains them).
    """
    if len(points) <= 2:
        return list(points)
    xs = np.array([p.cost for p in points])
    ys = np.array([p.r_s for p in points])
    hull = []                      # indices of upper-hull vertices
    for i in range(len(points)):
        while len(hull) >= 2:
            j, k = hull[-2], hull[-1]
            cross = ((xs[k] - xs[j]) * (ys[i] - ys[j])
                     - (ys[k] - ys[j]) * (xs[i] - xs[j]))
            if cross >= 0:          # middle vertex below the chord: drop it
                hull.pop()
            else:
                break
        hull.append(i)
    out = []
    seg = 0
    for i, p in enumerate(points):
        while seg + 1 < len(hull) and xs[hull[seg + 1]] <= xs[i]:
            seg += 1
        if i == hull[seg]:
            out.append(p)
            continue
        j, k = hull[seg], hull[min(seg + 1, len(hull) - 1)]
        if k == j or xs[k] == xs[j]:
            val = ys[j]
        else:
            frac = (xs[i] - xs[j]) / (xs[k] - xs[j])
            val = ys[j] + frac * (ys[k] - ys[j])
        out.append(FrontierPoint(cost=p.cost, r_s=float(max(val, p.r_s)),
                                 achiever=None))
    return out


def frontier_summary(points: Sequence[FrontierPoint]) -> FrontierSummary:
    """(C*, R_s*): the peak key rate and the cheapest cost attaining it."""
    if not points:
        raise DomainError("empty frontier has no summary")
    r_star = max(p.r_s for p in points)
    c_star = min(p.cost for p in points if p.r_s >= r_star - 1e-9)
    return FrontierSummary(c_star=float(c_star), r_s_star=float(r_star))


def gain_report(summary_low: FrontierSummary,
                summary_high: FrontierSummary) -> GainReport:
    """Relative improvement when the storage budget is relaxed.

    A baseline that is zero to numerical precision (clamp residue of the
    key-rate difference is ~1e-16) admits no meaningful ratio.
    """
    if summary_low.r_s_star <= 1e-12 or summary_low.c_star <= 1e-12:
        raise DomainError("gain undefined: zero baseline key rate or cost")
    key_gain = ((summary_high.r_s_star - summary_low.r_s_star)
                / summary_low.r_s_star * 100.0)
    cost_red = ((summary_low.c_star - summary_high.c_star)
                / summary_low.c_star * 100.0)
    return GainReport(key_rate_gain_pct=key_gain, cost_reduction_pct=cost_red)
