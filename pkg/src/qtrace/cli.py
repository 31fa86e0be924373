"""Batch front end: suite selection, parameter scans, reports, dumps.

``qtrace verify`` runs identity checks and writes a machine-readable
report (JSON or CSV); when a report path is given, a summary figure of
per-check errors against tolerances is rendered next to it.  ``qtrace
dump`` writes contour samples of the trace function (CSV plus a rendered
figure).  ``qtrace selftest`` runs the quadrature normalization test and
the convention gate.

Exit codes: 0 all checks passed, 1 at least one failed, 2 bad usage or
configuration.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import dataclass, field, asdict

import numpy as np

from . import verify
from .errors import QTraceError
from .qnum import QContext, gaussian_weight
from .quad import normalization_selftest
from .report import CheckReport
from .tracefn import F_closed, TraceFunctionParams

SUITE_NAMES = ["oracle", "orthogonality", "heat", "orthogonality-findim",
               "heat-findim", "resonance", "theta-kostant", "weyl",
               "residues", "mr", "transform"]

# suites that do not depend on m
_M_FREE = {"theta-kostant"}


@dataclass
class RunConfig:
    q: float = 0.5
    m_list: list = field(default_factory=lambda: [1])
    suites: list = field(default_factory=lambda: list(SUITE_NAMES))
    mu: float | None = None
    nu: float | None = None
    xi: float | None = None
    eta: float | None = None
    torus_n: int = 256
    line_n: int = 2048
    y_max: float | None = None
    real_n: int = 1201
    x_max: float | None = None
    verma_K: int = 300
    theta_B: int = 60
    out: str | None = None
    format: str = "json"
    tolerances: dict = field(default_factory=dict)
    scan: str | None = None
    allow_small_xi: bool = False
    figures: bool = True

    def validate(self):
        if not (0.0 < self.q < 1.0):
            raise ValueError(f"q must lie in (0, 1), got {self.q}")
        if self.format not in ("json", "csv"):
            raise ValueError(f"format must be json or csv, got {self.format}")
        unknown = [s for s in self.suites if s not in SUITE_NAMES]
        if unknown:
            raise ValueError(f"unknown suite(s) {unknown}; choose from {SUITE_NAMES}")
        for m in self.m_list:
            if m < 0 or m != int(m):
                raise ValueError(f"m must be an integer >= 0, got {m}")
            if self.xi is not None:
                if self.xi < m + 5 and not self.allow_small_xi:
                    raise ValueError(
                        f"xi={self.xi} below m+5={m + 5}; pass --allow-small-xi to override")
                for k in range(1, int(m) + 1):
                    if min(abs(self.xi - k), abs(self.xi + k)) < 0.5:
                        raise ValueError(
                            f"xi={self.xi} closer than 0.5 to the pole +-{k}")

    def tol(self, name: str, default: float) -> float:
        return float(self.tolerances.get(name, default))


def _suite_reports(ctx: QContext, m: int, suite: str, cfg: RunConfig) -> list[CheckReport]:
    mu, nu, xi = cfg.mu, cfg.nu, cfg.xi
    out: list[CheckReport] = []
    if suite == "oracle":
        out.append(verify.check_oracle_consistency(
            ctx, m, tolerance=cfg.tolerances.get("oracle"), K=cfg.verma_K))
    elif suite == "orthogonality":
        mu0 = 0.4 if mu is None else mu
        nu0 = mu0 + 2 if nu is None else nu
        tol = cfg.tol("orthogonality", 1e-9)
        out.append(verify.check_orthogonality(ctx, m, mu0, mu0, xi, cfg.torus_n, tol))
        if abs(nu0 - mu0) > 1e-12:
            out.append(verify.check_orthogonality(ctx, m, mu0, nu0, xi, cfg.torus_n, tol))
    elif suite == "heat":
        mu0 = 0.7 if mu is None else mu
        nu0 = -0.2 if nu is None else nu
        out.append(verify.check_heat(ctx, m, mu0, nu0, xi, cfg.line_n, cfg.y_max,
                                     cfg.tol("heat", 1e-7), witness_terms=(m >= 1)))
    elif suite == "orthogonality-findim":
        mu0 = int(mu) if mu is not None else m + 7
        nu0 = int(nu) if nu is not None else mu0 + 2
        tol = cfg.tol("orthogonality-findim", 1e-9)
        out.append(verify.check_orthogonality_findim(ctx, m, mu0, mu0, xi, cfg.torus_n, tol))
        if nu0 != mu0:
            out.append(verify.check_orthogonality_findim(ctx, m, mu0, nu0, xi, cfg.torus_n, tol))
    elif suite == "heat-findim":
        mu0 = int(mu) if mu is not None else m + 7
        nu0 = int(nu) if nu is not None else mu0 + 1
        out.append(verify.check_heat_findim(ctx, m, mu0, nu0, xi, cfg.line_n,
                                            cfg.tol("heat-findim", 1e-7)))
    elif suite == "resonance":
        out.append(verify.check_resonance(ctx, m, tolerance=cfg.tol("resonance", 1e-10)))
    elif suite == "theta-kostant":
        out.append(verify.check_theta_lemma(ctx, tolerance=cfg.tol("theta-lemma", 1e-9)))
        out.append(verify.check_kostant(ctx, truncation=cfg.theta_B,
                                        tolerance=cfg.tol("kostant", 1e-9)))
    elif suite == "weyl":
        mu0 = int(mu) if mu is not None and mu == int(mu) and mu < 0 else -(m + 9)
        out.append(verify.check_weyl_character_formula(
            ctx, m, mu0, tolerance=cfg.tol("weyl-character", 1e-8)))
    elif suite == "residues":
        mu0 = 0.4 if mu is None else mu
        nu0 = -0.3 if nu is None else nu
        out.append(verify.check_residues_and_chambers(
            ctx, m, mu0, nu0, xi, cfg.line_n, cfg.tol("residues-chambers", 1e-8)))
    elif suite == "mr":
        out.append(verify.check_mr_eigen_and_selfadjoint(
            ctx, m, tolerance=cfg.tol("mr-operators", 1e-8)))
    elif suite == "transform":
        out.append(verify.check_transform_roundtrip(
            ctx, m, xi, cfg.eta, line_n=cfg.line_n, real_n=cfg.real_n,
            tolerance=cfg.tol("transforms", 1e-5)))
    return out


def _scan_values(spec: str):
    key, _, rng = spec.partition("=")
    parts = rng.split(":")
    if len(parts) != 3:
        raise ValueError(f"scan spec must be key=start:stop:count, got {spec!r}")
    start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    if count < 1:
        raise ValueError("scan count must be >= 1")
    if key not in ("mu", "nu", "xi", "eta", "q"):
        raise ValueError(f"scan key must be one of mu, nu, xi, eta, q; got {key!r}")
    return key, list(np.linspace(start, stop, count))


def run(cfg: RunConfig) -> int:
    """Execute the selected suites; write the report; 0 iff all passed."""
    try:
        cfg.validate()
        scans = [(None, None)]
        if cfg.scan:
            key, values = _scan_values(cfg.scan)
            scans = [(key, v) for v in values]
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    t0 = time.perf_counter()
    reports: list[CheckReport] = []
    for key, value in scans:
        sub = RunConfig(**{**asdict(cfg), "scan": None})
        if key is not None:
            setattr(sub, key, float(value))
            try:
                sub.validate()
            except ValueError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return 2
        ctx = QContext(sub.q, theta_truncation=sub.theta_B)
        done_m_free = False
        for m in sub.m_list:
            for suite in sub.suites:
                if suite in _M_FREE:
                    if done_m_free:
                        continue
                try:
                    rs = _suite_reports(ctx, int(m), suite, sub)
                except QTraceError as exc:
                    print(f"error in suite {suite} (m={m}): {exc}", file=sys.stderr)
                    return 2
                if key is not None:
                    for r in rs:
                        r.params[key] = float(value)
                reports.extend(rs)
            done_m_free = True

    total_ms = (time.perf_counter() - t0) * 1e3
    for r in reports:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name:22s} {_fmt_params(r.params)}  "
              f"abs={r.abs_err:.2e} rel={r.rel_err:.2e} tol={r.tolerance:g}")
    n_pass = sum(r.passed for r in reports)
    print(f"{n_pass}/{len(reports)} checks passed in {total_ms / 1e3:.1f} s")

    if cfg.out:
        _write_report(cfg, reports, total_ms)
        if cfg.figures:
            _render_report_figure(cfg, reports)
    return 0 if n_pass == len(reports) else 1


def _fmt_params(params: dict) -> str:
    keep = {k: v for k, v in params.items() if k in ("q", "m", "mu", "nu", "xi", "eta")}
    return " ".join(f"{k}={v:g}" if isinstance(v, (int, float)) else f"{k}={v}"
                    for k, v in keep.items())


def _write_report(cfg: RunConfig, reports: list[CheckReport], total_ms: float):
    rows = [r.row() for r in reports]
    if cfg.format == "json":
        doc = {
            "config": {k: v for k, v in asdict(cfg).items() if k != "tolerances" or v},
            "all_passed": all(r.passed for r in reports),
            "runtime_ms": total_ms,
            "checks": rows,
        }
        with open(cfg.out, "w") as fh:
            json.dump(doc, fh, indent=2)
    else:
        keys = ["name", "params", "lhs_re", "lhs_im", "rhs_re", "rhs_im",
                "abs_err", "rel_err", "tolerance", "passed", "runtime_ms", "notes"]
        with open(cfg.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(keys)
            for row in rows:
                row = dict(row)
                row["params"] = json.dumps(row["params"])
                w.writerow([row[k] for k in keys])
    print(f"report written to {cfg.out}")


def _figure_path(out: str) -> str:
    stem = out.rsplit(".", 1)[0] if "." in out.split("/")[-1] else out
    return stem + ".png"


def _render_report_figure(cfg: RunConfig, reports: list[CheckReport]):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    labels = [f"{r.name} [{_fmt_params(r.params)}]" for r in reports]
    errs = [max(min(r.rel_err, r.abs_err), 1e-17) for r in reports]
    tols = [r.tolerance for r in reports]
    colors = ["tab:green" if r.passed else "tab:red" for r in reports]
    h = max(2.5, 0.32 * len(reports) + 1.2)
    fig, ax = plt.subplots(figsize=(9, h))
    ypos = np.arange(len(reports))
    ax.barh(ypos, errs, color=colors, alpha=0.8)
    ax.plot(tols, ypos, "k|", markersize=12, label="tolerance")
    ax.set_xscale("log")
    ax.set_yticks(ypos)
    ax.set_yticklabels(labels, fontsize=7)
    ax.invert_yaxis()
    ax.set_xlabel("check error (min of abs, rel)")
    ax.set_title(f"identity checks, q={cfg.q}")
    ax.legend(loc="lower right", fontsize=7)
    fig.tight_layout()
    path = _figure_path(cfg.out)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    print(f"figure written to {path}")


# ---------------------------------------------------------------------------
# contour dumps
# ---------------------------------------------------------------------------

DUMP_KINDS = ["F_on_torus", "F_on_line", "integrand_heat"]


def dump_contour(cfg: RunConfig, which: str, n: int | None = None) -> int:
    """Write contour samples (y, Re f, Im f) as CSV, plus a figure."""
    try:
        cfg.validate()
        if which not in DUMP_KINDS:
            raise ValueError(f"dump kind must be one of {DUMP_KINDS}, got {which!r}")
        if not cfg.out:
            raise ValueError("dump requires --out PATH")
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    ctx = QContext(cfg.q)
    m = int(cfg.m_list[0])
    par = TraceFunctionParams(ctx, m)
    mu = 0.7 if cfg.mu is None else cfg.mu
    nu = 0.4 if cfg.nu is None else cfg.nu
    xi = float(m + 7) if cfg.xi is None else cfg.xi

    if which == "F_on_torus":
        n = 128 if n is None else n
        y = ctx.torus_period * np.arange(n) / n
        lam = xi + 1j * y
        vals = F_closed(par, lam, nu)
        label = "F(lam, nu) on the torus"
    else:
        n = 512 if n is None else n
        y_max = cfg.y_max or math.sqrt(2 * 30.0 / ctx.L) + xi
        y = np.linspace(-y_max, y_max, n)
        lam = xi + 1j * y
        if which == "F_on_line":
            vals = F_closed(par, lam, nu) * gaussian_weight(ctx, lam)
            label = "F(lam, nu) q^-(lam,lam) on C_xi"
        else:
            vals = F_closed(par, mu, -lam) * F_closed(par, lam, nu) \
                * gaussian_weight(ctx, lam)
            label = "heat integrand on C_xi"

    with open(cfg.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["y", "re_f", "im_f"])
        for yi, v in zip(y, vals):
            w.writerow([f"{yi:.17g}", f"{v.real:.17e}", f"{v.imag:.17e}"])
    print(f"dump written to {cfg.out} ({n} rows)")

    if cfg.figures:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        fig, ax = plt.subplots(figsize=(7, 4))
        ax.plot(y, vals.real, label="Re f", lw=1.0)
        ax.plot(y, vals.imag, label="Im f", lw=1.0)
        ax.set_xlabel("y (imaginary offset along the contour)")
        ax.set_title(f"{label}  (q={cfg.q}, m={m}, xi={xi:g}, nu={nu:g})")
        ax.legend()
        fig.tight_layout()
        path = _figure_path(cfg.out)
        fig.savefig(path, dpi=150)
        plt.close(fig)
        print(f"figure written to {path}")
    return 0


def selftest(cfg: RunConfig) -> int:
    try:
        cfg.validate()
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    ctx = QContext(cfg.q, theta_truncation=cfg.theta_B)
    reports = [normalization_selftest(ctx)]
    for m in cfg.m_list:
        reports.append(verify.check_oracle_consistency(ctx, int(m)))
    ok = True
    for r in reports:
        status = "PASS" if r.passed else "FAIL"
        ok = ok and r.passed
        print(f"{status} {r.name:24s} abs={r.abs_err:.2e} rel={r.rel_err:.2e} "
              f"tol={r.tolerance:g}  {r.notes}")
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON config file; flags override its keys")
    p.add_argument("--q", type=float, default=None)
    p.add_argument("--m", type=int, nargs="+", default=None, dest="m_list")
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--nu", type=float, default=None)
    p.add_argument("--xi", type=float, default=None)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--torus-n", type=int, default=None)
    p.add_argument("--line-n", type=int, default=None)
    p.add_argument("--y-max", type=float, default=None)
    p.add_argument("--real-n", type=int, default=None)
    p.add_argument("--x-max", type=float, default=None)
    p.add_argument("--verma-K", type=int, default=None)
    p.add_argument("--theta-B", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=["json", "csv"], default=None)
    p.add_argument("--allow-small-xi", action="store_true", default=None)
    p.add_argument("--no-figures", action="store_true")


def _build_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
        for k, v in data.items():
            if not hasattr(cfg, k):
                raise ValueError(f"unknown config key {k!r}")
            setattr(cfg, k, v)
    for k in ("q", "m_list", "mu", "nu", "xi", "eta", "out", "format"):
        v = getattr(args, k, None)
        if v is not None:
            setattr(cfg, k, v)
    for flag, key in (("torus_n", "torus_n"), ("line_n", "line_n"),
                      ("y_max", "y_max"), ("real_n", "real_n"),
                      ("x_max", "x_max"), ("verma_K", "verma_K"),
                      ("theta_B", "theta_B")):
        v = getattr(args, flag, None)
        if v is not None:
            setattr(cfg, key, v)
    if getattr(args, "allow_small_xi", None):
        cfg.allow_small_xi = True
    if getattr(args, "no_figures", False):
        cfg.figures = False
    if getattr(args, "tolerance", None):
        for item in args.tolerance:
            name, _, val = item.partition("=")
            cfg.tolerances[name] = float(val)
    if getattr(args, "scan", None):
        cfg.scan = args.scan
    if getattr(args, "suite", None):
        cfg.suites = list(args.suite)
    elif getattr(args, "all", False):
        cfg.suites = list(SUITE_NAMES)
    return cfg


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qtrace",
        description="numerical verification of U_q(sl2) trace-function identities")
    sub = parser.add_subparsers(dest="command", required=True)

    pv = sub.add_parser("verify", help="run identity check suites")
    group = pv.add_mutually_exclusive_group()
    group.add_argument("--all", action="store_true", help="run every suite")
    group.add_argument("--suite", nargs="+", choices=SUITE_NAMES)
    pv.add_argument("--scan", help="key=start:stop:count over mu, nu, xi, eta or q")
    pv.add_argument("--tolerance", nargs="+", metavar="NAME=VAL",
                    help="per-check tolerance overrides")
    _add_common(pv)

    pd = sub.add_parser("dump", help="write contour samples as CSV")
    pd.add_argument("--which", choices=DUMP_KINDS, default="F_on_torus")
    pd.add_argument("--n", type=int, default=None)
    _add_common(pd)

    ps = sub.add_parser("selftest", help="quadrature normalization + convention gate")
    _add_common(ps)

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        cfg = _build_config(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.command == "verify":
        return run(cfg)
    if args.command == "dump":
        return dump_contour(cfg, args.which, args.n)
    return selftest(cfg)


if __name__ == "__main__":
    sys.exit(main())
