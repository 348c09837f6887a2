"""Command-line surface: evaluate, sweep, check-ordering, validate.

JSON config in, CSV/JSON out. Every output starts with a header comment
carrying the tool version and a sha256 hash of the *effective* config
(file contents after flag overrides), so artifacts are traceable to the
run that made them. Floats are formatted with %.12g everywhere, which
makes reruns byte-identical.

Exit codes are a stable contract: 0 success, 2 config/usage error,
3 model error (an invalid joint reached the evaluators), 4 output I/O
error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

import numpy as np

from . import __version__
from .errors import ConfigError, DomainError, KlscError, ModelError, ValidationError
from .montecarlo import plugin_cmi, sample_joint
from .ordering import (DIRECTION_X_OVER_Z, DIRECTION_Z_OVER_Y, check_degraded,
                       cln_falsify)
from .probability import conditional_mi
from .sweep import (DEFAULT_BIN_WIDTH, GridAxis, SweepGrid, compute_frontiers,
                    evaluate_binary_point, frontier_summary, gain_report)
from .system import BinaryExampleConfig, build_binary_example, build_joint

PAPER_BUDGETS = (0.001, 0.050, 0.250)

#: quantities reported by `validate`: every distinct information term in
#: the generated-secret achievability bound, queried as (name, g1, g2, cond)
VALIDATE_TERMS = (
    ("I(V;Y|A,U)", "v", "y", ("a", "u")),
    ("I(V;Z|A,U)", "v", "z", ("a", "u")),
    ("I(XT;A)", "xt", "a", ()),
    ("I(V;XT|A,Y)", "v", "xt", ("a", "y")),
    ("I(V,X;Z|A)", ("v", "x"), "z", ("a",)),
    ("I(X;A,V,Y)", "x", ("a", "v", "y"), ()),
    ("I(V,X;Y|A)", ("v", "x"), "y", ("a",)),
    ("I(X;A,U,Z)", "x", ("a", "u", "z"), ()),
)


def _fmt(x: float) -> str:
    return "%.12g" % float(x)


def _json_ready(obj):
    """Round floats through %.12g so JSON output is run-stable."""
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return float(_fmt(obj))
    if isinstance(obj, (int, np.integer, str, bool)) or obj is None:
        return obj
    raise TypeError(f"cannot serialize {type(obj)!r}")


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------

def _want(raw, path, kind, required=True, default=None):
    node = raw
    crumbs = []
    for part in path.split("."):
        crumbs.append(part)
        if not isinstance(node, dict):
            raise ConfigError(".".join(crumbs[:-1]), "expected an object")
        if part not in node:
            if required:
                raise ConfigError(".".join(crumbs), "missing required field")
            return default
        node = node[part]
    if kind is float:
        if isinstance(node, bool) or not isinstance(node, (int, float)):
            raise ConfigError(path, f"expected a number, got {type(node).__name__}")
        return float(node)
    if kind is int:
        if isinstance(node, bool) or not isinstance(node, int):
            raise ConfigError(path, f"expected an integer, got {type(node).__name__}")
        return node
    if kind is bool:
        if not isinstance(node, bool):
            raise ConfigError(path, f"expected a boolean, got {type(node).__name__}")
        return node
    if kind is str:
        if not isinstance(node, str):
            raise ConfigError(path, f"expected a string, got {type(node).__name__}")
        return node
    if kind is list:
        if not isinstance(node, list):
            raise ConfigError(path, f"expected a list, got {type(node).__name__}")
        return node
    raise AssertionError(kind)


def _parse_example(raw) -> BinaryExampleConfig:
    q = _want(raw, "example.q", list)
    if len(q) != 2 or any(not isinstance(r, list) or len(r) != 2 for r in q):
        raise ConfigError("example.q", "expected a 2x2 matrix of crossovers")
    for i in range(2):
        for j in range(2):
            if isinstance(q[i][j], bool) or not isinstance(q[i][j], (int, float)):
                raise ConfigError(f"example.q[{i}][{j}]", "expected a number")
    kwargs = dict(
        p_enc=_want(raw, "example.p_enc", float),
        q=((float(q[0][0]), float(q[0][1])), (float(q[1][0]), float(q[1][1]))),
        alpha0=_want(raw, "example.alpha0", float),
        alpha1=_want(raw, "example.alpha1", float),
        p0=_want(raw, "example.p0", float),
        p1=_want(raw, "example.p1", float),
        z_target=_want(raw, "example.z_target", float, required=False,
                       default=0.150),
        strict_ordering=_want(raw, "example.strict_ordering", bool,
                              required=False, default=False),
    )
    p_eve = _want(raw, "example.p_eve", float, required=False)
    if p_eve is not None:
        kwargs["p_eve"] = p_eve
    costs = _want(raw, "example.costs", list, required=False)
    if costs is not None:
        if len(costs) != 2:
            raise ConfigError("example.costs", "expected [gamma0, gamma1]")
        kwargs["costs"] = (float(costs[0]), float(costs[1]))
    try:
        return BinaryExampleConfig(**kwargs)
    except ValidationError as exc:
        raise ConfigError("example", str(exc)) from exc


def _parse_grid(raw, args) -> SweepGrid:
    grid = raw.get("grid", {})
    if not isinstance(grid, dict):
        raise ConfigError("grid", "expected an object")
    step = _want(raw, "grid.step", float, required=False, default=0.01)
    if args.grid_step is not None:
        step = args.grid_step
    model = _want(raw, "grid.model", str, required=False, default="gs")
    side = _want(raw, "grid.side", str, required=False, default="inner")
    if args.model:
        model = args.model
    if args.side:
        side = args.side

    def axis(name, stop_default):
        node = grid.get(name)
        if node is None:
            return GridAxis(0.0, stop_default, step)
        return GridAxis(_want(raw, f"grid.{name}.start", float),
                        _want(raw, f"grid.{name}.stop", float),
                        _want(raw, f"grid.{name}.step", float,
                              required=False, default=step))

    try:
        return SweepGrid(axis("alpha0", 1.0), axis("alpha1", 1.0),
                         axis("p0", 0.5), axis("p1", 0.5),
                         model=model, side=side)
    except ValidationError as exc:
        raise ConfigError("grid", str(exc)) from exc


class RunConfig:
    """Everything a subcommand needs, fully validated up front."""

    def __init__(self, raw: dict, args):
        self.example = _parse_example(raw)
        self.grid = _parse_grid(raw, args)
        budgets = _want(raw, "budgets", list, required=False,
                        default=list(PAPER_BUDGETS))
        if args.budgets is not None:
            budgets = args.budgets
        if not budgets:
            raise ConfigError("budgets", "at least one storage budget required")
        for i, b in enumerate(budgets):
            if isinstance(b, bool) or not isinstance(b, (int, float)) or b <= 0:
                raise ConfigError(f"budgets[{i}]", f"expected a positive number, got {b!r}")
        self.budgets = [float(b) for b in budgets]
        self.seed = args.seed if args.seed is not None else \
            _want(raw, "seed", int, required=False, default=0)
        workers = _want(raw, "workers", int, required=False)
        if args.workers is not None:
            workers = args.workers
        self.workers = workers if workers else (os.cpu_count() or 1)
        if self.workers < 1:
            raise ConfigError("workers", f"expected >= 1, got {self.workers}")
        self.envelope = bool(_want(raw, "envelope", bool, required=False,
                                   default=False) or args.envelope)
        self.out_dir = args.out or _want(raw, "out_dir", str, required=False,
                                         default="out")
        self.bin_width = _want(raw, "bin_width", float, required=False,
                               default=DEFAULT_BIN_WIDTH)
        # effective config: what the run actually used, flags folded in
        self.effective = {
            "example": {
                "p_enc": self.example.p_enc,
                "q": [list(r) for r in self.example.q],
                "alpha0": self.example.alpha0, "alpha1": self.example.alpha1,
                "p0": self.example.p0, "p1": self.example.p1,
                "z_target": self.example.z_target,
                "p_eve": self.example.eavesdropper_crossover,
                "costs": list(self.example.cost_function.costs),
            },
            "grid": {name: {"start": ax.start, "stop": ax.stop, "step": ax.step}
                     for name, ax in (("alpha0", self.grid.alpha0),
                                      ("alpha1", self.grid.alpha1),
                                      ("p0", self.grid.p0),
                                      ("p1", self.grid.p1))}
                    | {"model": self.grid.model, "side": self.grid.side},
            "budgets": self.budgets,
            "seed": self.seed,
            "envelope": self.envelope,
            "bin_width": self.bin_width,
        }

    @property
    def config_hash(self) -> str:
        blob = json.dumps(_json_ready(self.effective), sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def header(self) -> str:
        return f"# klsc {__version__} config sha256:{self.config_hash}"


def load_config(path: str, args) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(path, f"cannot read config: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(path, f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(path, "top-level JSON value must be an object")
    return RunConfig(raw, args)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_evaluate(cfg: RunConfig, args) -> int:
    model = args.model or "gs"
    side = args.side or "inner"
    ex = cfg.example
    point = evaluate_binary_point(ex, ex.alpha0, ex.alpha1, ex.p0, ex.p1,
                                  model=model, side=side)
    body = {
        "model": point.model, "side": point.side,
        "r_s": point.r_s, "r_s_raw": point.params["r_s_raw"],
        "r_l": point.r_l, "r_w": point.r_w, "cost": point.cost,
        "leakage_terms": {"l1": point.params["l1"], "l2": point.params["l2"],
                          "l3": point.params["l3"]},
        "params": {k: point.params[k]
                   for k in ("alpha0", "alpha1", "p0", "p1")},
    }
    print(cfg.header())
    print(json.dumps(_json_ready(body), indent=2, sort_keys=True))
    return 0


def _write_sweep_csv(fh, cfg: RunConfig):
    """Returns a block sink streaming `alpha0,...,side` rows into fh."""
    fh.write(cfg.header() + "\n")
    fh.write("alpha0,alpha1,p0,p1,r_s,r_l,r_w,cost,model,side\n")
    model, side = cfg.grid.model, cfg.grid.side
    fmt = ",".join(["%.12g"] * 8) + f",{model},{side}"

    def sink(block):
        r_w = block.storage(model)
        r_l = block.leakage(side)
        nb, np0, np1 = block.r_s_raw.shape
        rows = np.empty((nb * np0 * np1, 8))
        rows[:, 0] = np.repeat(block.alpha0, np0 * np1)
        rows[:, 1] = np.repeat(block.alpha1, np0 * np1)
        rows[:, 2] = np.tile(np.repeat(block.p0_values, np1), nb)
        rows[:, 3] = np.tile(block.p1_values, nb * np0)
        rows[:, 4] = np.maximum(block.r_s_raw, 0.0).reshape(-1)
        rows[:, 5] = r_l.reshape(-1)
        rows[:, 6] = r_w.reshape(-1)
        rows[:, 7] = np.repeat(block.cost, np0 * np1)
        np.savetxt(fh, rows, fmt=fmt)

    return sink


def cmd_sweep(cfg: RunConfig, args) -> int:
    os.makedirs(cfg.out_dir, exist_ok=True)
    sweep_path = os.path.join(cfg.out_dir, "sweep.csv")
    with open(sweep_path, "w", encoding="utf-8") as fh:
        sink = None if args.skip_points else _write_sweep_csv(fh, cfg)
        if args.skip_points:
            fh.write(cfg.header() + "\n")
            fh.write("# points skipped (--skip-points)\n")
        fronts = compute_frontiers(cfg.example, cfg.grid, cfg.budgets,
                                   bin_width=cfg.bin_width,
                                   workers=cfg.workers,
                                   envelope=cfg.envelope, block_sink=sink)
    summaries = {}
    for budget in cfg.budgets:
        pts = fronts[budget]
        fpath = os.path.join(cfg.out_dir, f"frontier_{_fmt(budget)}.csv")
        with open(fpath, "w", encoding="utf-8") as fh:
            fh.write(cfg.header() + "\n")
            fh.write("cost,r_s,alpha0,alpha1,p0,p1\n")
            if not pts:
                fh.write("# empty: no grid point satisfies this budget\n")
                continue
            for p in pts:
                ach = (",".join(_fmt(v) for v in p.achiever)
                       if p.achiever is not None else ",,,")
                fh.write(f"{_fmt(p.cost)},{_fmt(p.r_s)},{ach}\n")
        summaries[budget] = frontier_summary(pts) if pts else None
    report = {"budgets": {}, "grid_size": cfg.grid.size,
              "model": cfg.grid.model, "side": cfg.grid.side}
    for budget in cfg.budgets:
        s = summaries[budget]
        report["budgets"][_fmt(budget)] = (
            {"c_star": s.c_star, "r_s_star": s.r_s_star} if s else "empty")
    lo, hi = min(cfg.budgets), max(cfg.budgets)
    if lo != hi and summaries[lo] and summaries[hi]:
        try:
            g = gain_report(summaries[lo], summaries[hi])
        except DomainError:
            g = None    # zero-rate baseline (coarse grid): no ratio to report
        if g is not None:
            report["gains_low_to_high"] = {
                "key_rate_gain_pct": g.key_rate_gain_pct,
                "cost_reduction_pct": g.cost_reduction_pct,
                "budget_low": lo, "budget_high": hi}
    out = json.dumps(_json_ready(report), indent=2, sort_keys=True)
    with open(os.path.join(cfg.out_dir, "summary.json"), "w",
              encoding="utf-8") as fh:
        fh.write(cfg.header() + "\n")
        fh.write(out + "\n")
    print(cfg.header())
    print(out)
    return 0


def cmd_check_ordering(cfg: RunConfig, args) -> int:
    if args.restarts < 1:
        raise ConfigError("restarts", f"expected >= 1, got {args.restarts}")
    joint = build_joint(build_binary_example(cfg.example))
    report = {}
    cert = check_degraded(joint)
    if cert is None:
        report["degraded"] = {"certified": False}
    else:
        entry = {"certified": True, "residual": cert.residual,
                 "witness_rows": cert.witness.rows.tolist()}
        if cert.witness.rows.shape == (2, 2):
            entry["crossover"] = cert.crossover
        report["degraded"] = entry
    directions = ([DIRECTION_X_OVER_Z, DIRECTION_Z_OVER_Y]
                  if args.direction == "both" else [args.direction])
    report["cln"] = {}
    for direction in directions:
        witness = cln_falsify(joint, direction=direction,
                              restarts=args.restarts, seed=cfg.seed)
        if witness is None:
            report["cln"][direction] = {"violation_found": False,
                                        "restarts": args.restarts}
        else:
            report["cln"][direction] = {
                "violation_found": True, "gap": witness.gap,
                "l_size": witness.l_channel.output_size,
                "witness_rows": witness.l_channel.rows.tolist()}
    print(cfg.header())
    print(json.dumps(_json_ready(report), indent=2, sort_keys=True))
    return 0


def cmd_validate(cfg: RunConfig, args) -> int:
    if args.samples < 1:
        raise ConfigError("samples", f"expected >= 1, got {args.samples}")
    joint = build_joint(build_binary_example(cfg.example))
    batch = sample_joint(joint, args.samples, cfg.seed)
    lines = [cfg.header(), "quantity,exact,estimate,abs_err,n,seed"]
    for name, g1, g2, cond in VALIDATE_TERMS:
        exact = conditional_mi(joint, g1, g2, cond)
        est = plugin_cmi(batch, g1, g2, cond)
        # quantity names contain commas, so the field must be quoted
        lines.append(f'"{name}",{_fmt(exact)},{_fmt(est)},'
                     f"{_fmt(abs(exact - est))},{args.samples},{cfg.seed}")
    text = "\n".join(lines)
    print(text)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "validate.csv"), "w",
                  encoding="utf-8") as fh:
            fh.write(text + "\n")
    return 0


# ---------------------------------------------------------------------------
# argument plumbing
# ---------------------------------------------------------------------------

def _budget_list(text: str):
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad budget list {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="klsc",
        description="Key-leakage-storage-cost bounds for hidden identifier "
                    "sources with controllable measurements")
    parser.add_argument("--version", action="version",
                        version=f"klsc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_model=False):
        p.add_argument("--config", required=True, help="JSON config path")
        p.add_argument("--model", choices=("gs", "cs"),
                       help="generated-secret or chosen-secret model")
        p.add_argument("--side", choices=("inner", "outer"),
                       help="achievability (inner) or converse (outer)")
        p.add_argument("--budgets", type=_budget_list,
                       help="comma-separated storage budgets in bits")
        p.add_argument("--grid-step", type=float, dest="grid_step",
                       help="override step on all four grid axes")
        p.add_argument("--envelope", action="store_true",
                       help="apply the upper-concave-envelope post-pass")
        p.add_argument("--workers", type=int, help="worker thread count")
        p.add_argument("--seed", type=int, help="RNG seed override")
        p.add_argument("--out", help="output directory")

    p_eval = sub.add_parser("evaluate", help="rate point for one config")
    common(p_eval)
    p_sweep = sub.add_parser("sweep", help="grid sweep + frontiers + summary")
    common(p_sweep)
    p_sweep.add_argument("--skip-points", action="store_true",
                         help="do not write the (possibly huge) sweep.csv body")
    p_ord = sub.add_parser("check-ordering",
                           help="degradedness certificate + CLN falsifier")
    common(p_ord)
    p_ord.add_argument("--direction",
                       choices=(DIRECTION_X_OVER_Z, DIRECTION_Z_OVER_Y, "both"),
                       default=DIRECTION_X_OVER_Z)
    p_ord.add_argument("--restarts", type=int, default=50)
    p_val = sub.add_parser("validate",
                           help="Monte Carlo vs exact information terms")
    common(p_val)
    p_val.add_argument("--samples", "-n", type=int, default=10**6)
    return parser


_DISPATCH = {"evaluate": cmd_evaluate, "sweep": cmd_sweep,
             "check-ordering": cmd_check_ordering, "validate": cmd_validate}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, args)
        return _DISPATCH[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error at {exc.path}: {exc.message}", file=sys.stderr)
        return 2
    except (ValidationError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ModelError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return 3
    except KlscError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
