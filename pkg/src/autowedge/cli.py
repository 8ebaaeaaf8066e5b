"""Command-line front end: ``autowedge {check,solve,verify,sweep-eps,rh}``.

Exit status: 0 ok, 1 verification failure, 2 ellipticity gate, 3 singular
jump data, 4 numerical non-convergence, 64 configuration error.
"""
import argparse
import logging
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__, _accel
from .config import load_jump_input, load_run_config
from .elim import eliminate, to_jump_problem
from .errors import AutowedgeError, ConfigError
from .field import (convergence_slope, reconstruct, recover_traces, residuals, sample_field,
                    sweep_absorption)
from .green import assemble_green, make_equation, transform_profile
from .oracle import fd_solve
from .rh import boundary_values, half_line_problem, solve_jump
from .surface import OperatorSpec, build_chart, sample_v_plus, validate_ellipticity

log = logging.getLogger("autowedge")

TRACE_HEADER = "side,re_z,im_z,re_phi,im_phi"
FIELD_HEADER = "x1,x2,re_u,im_u"
REAL_AXIS_SAMPLES = np.linspace(-10.0, 10.0, 41)

# default tolerances of the verification battery (overridable per config)
TOLERANCES = {
    "compatibility": 1e-6,
    "automorphy_h1": 1e-7,
    "automorphy_h2": 1e-7,
    "jump_identity": 1e-6,
    "homogeneous_jump": 1e-6,
    "traces_exact": 1e-6,
    "field_exact": 1e-3,
    "fd_oracle": 1e-2,
    "residual_order": 0.2,
    "residual_baseline": 5.0,
    "zero_output": 0.0,
}


def fmt(v):
    """17 significant digits, lowercase exponent, no negative zero."""
    return f"{float(v) + 0.0:.16e}"


def _write(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _equation(cfg, op=None):
    gs = assemble_green(cfg.op if op is None else op, cfg.B1, cfg.B2)
    return make_equation(gs, cfg.f1, cfg.f2)


def _gate(cfg):
    return validate_ellipticity(cfg.op)


# ---------------------------------------------------------------------------
# check

def cmd_check(cfg, out=None):
    out = sys.stdout if out is None else out
    kappa = _gate(cfg)
    chart = build_chart(cfg.op)
    eq = _equation(cfg)
    print(f"kappa={fmt(kappa)}", file=out)
    for name in ("c1", "c2", "r1", "r2"):
        v = getattr(chart, name)
        print(f"chart.{name}={fmt(v.real)},{fmt(v.imag)}", file=out)
    for label, side_eq in _one_sided(eq):
        jp = to_jump_problem(eliminate(side_eq), cfg.numerics.rh_nodes)
        print(f"jump[{label}].q0={fmt(jp.q0.real)},{fmt(jp.q0.imag)}", file=out)
        print(f"jump[{label}].qinf={fmt(jp.qinf.real)},{fmt(jp.qinf.imag)}", file=out)
        print(f"jump[{label}].winding={jp.winding}", file=out)
        print(f"jump[{label}].pins={len(jp.pins)}", file=out)
    print("status=ok", file=out)
    return 0


def _one_sided(eq):
    parts = []
    if not eq.f1.is_zero:
        parts.append(("side1", make_equation(eq.gs, eq.f1, eq.f2.zero())))
    if not eq.f2.is_zero:
        parts.append(("side2", make_equation(eq.gs, eq.f1.zero(), eq.f2)))
    return parts


# ---------------------------------------------------------------------------
# solve

@dataclass
class Solution:
    cfg: object
    eq: object
    tt: object
    fg: object
    report: object


def run_solution(cfg):
    _gate(cfg)
    num = cfg.numerics
    eq = _equation(cfg)
    tt = recover_traces(eq, n_nodes=num.rh_nodes, tol=num.rh_tol)
    fg = reconstruct(tt, length=num.grid_L, hx=num.grid_h, radius=num.inversion_R)
    report = residuals(fg, cfg.op, cfg.B1, cfg.B2, cfg.f1, cfg.f2)
    return Solution(cfg, eq, tt, fg, report)


def _trace_points(cfg):
    return np.concatenate([np.asarray(cfg.numerics.probes, dtype=complex),
                           REAL_AXIS_SAMPLES.astype(complex)])


def write_solution(sol, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    z = _trace_points(sol.cfg)
    rows = []
    for side, fn in ((1, sol.tt.phi1), (2, sol.tt.phi2)):
        vals = fn(z)
        rows += [(str(side), fmt(zz.real), fmt(zz.imag), fmt(v.real), fmt(v.imag))
                 for zz, v in zip(z, vals)]
    _write(os.path.join(out_dir, "traces.csv"), TRACE_HEADER, rows)

    fg = sol.fg
    rows = [(fmt(a), fmt(b), fmt(fg.u[i, l].real), fmt(fg.u[i, l].imag))
            for i, a in enumerate(fg.x1) for l, b in enumerate(fg.x2)]
    _write(os.path.join(out_dir, "field.csv"), FIELD_HEADER, rows)

    r = sol.report
    rows = [("interior", fmt(r.interior)), ("boundary1", fmt(r.boundary1)),
            ("boundary2", fmt(r.boundary2)), ("hx", fmt(r.hx))]
    _write(os.path.join(out_dir, "residuals.csv"), "quantity,value", rows)

    manifest = {
        "version": __version__,
        "parts": len(sol.tt.parts),
        "rh_nodes": ";".join(str(p.sf.nodes.n) for p in sol.tt.parts),
        "rh_error_estimate": ";".join(fmt(p.sf.error_estimate) for p in sol.tt.parts),
        "inversion_R": fmt(fg.radius),
        "inversion_change": fmt(fg.change),
        "grid_L": fmt(fg.length),
        "grid_h": fmt(fg.hx),
        "taper_fraction": fmt(fg.taper_fraction),
        "node_spacing": fmt(fg.node_spacing),
    }
    with open(os.path.join(out_dir, "manifest.txt"), "w", encoding="utf-8", newline="\n") as fh:
        for k, v in manifest.items():
            fh.write(f"{k}={v}\n")


def cmd_solve(cfg, out_dir):
    write_solution(run_solution(cfg), out_dir)
    return 0


# ---------------------------------------------------------------------------
# verify

@dataclass
class Check:
    name: str
    value: float
    tol: float
    passed: bool


def _rel_max(a, b):
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


def _jump_checks(tt):
    """Jump identities of every solved part at 50 cut probes."""
    worst_jump, worst_T = 0.0, 0.0
    y = np.linspace(-6.0, 6.0, 50)
    for p in tt.parts:
        jp, sf = p.sf.jp, p.sf
        special = np.asarray(getattr(jp.T0, "singular_parameters", lambda: ())(), float)
        yy = y if special.size == 0 else y[np.min(np.abs(y[:, None] - special), axis=1) > 1e-2]
        h_scale = np.abs(jp.H(yy)) + np.abs(jp.R1(yy) * sf.minus(yy))
        worst_jump = max(worst_jump, float(np.max(np.abs(sf.jump_residual(yy)) / h_scale)))
        tp, tm = boundary_values(sf.T, yy)
        worst_T = max(worst_T, _rel_max(tp / tm, jp.q(yy)))
    return worst_jump, worst_T


def _h2_defect(tt, rng):
    """``psi2`` at the two region preimages ``w`` and ``pi - w`` of the same ``z2``."""
    worst = 0.0
    for p in tt.parts:
        ch = p.chart
        w = sample_v_plus(ch, 100, rng)
        w2 = ch._to_window(np.pi - w)
        ok = ch.in_region(w) & ch.in_region(w2)
        a = p.sf(np.exp(2j * w[ok]))
        b = p.sf(np.exp(2j * w2[ok]))
        worst = max(worst, _rel_max(b, a))
    return worst


def run_verify(cfg, out=None):
    out = sys.stdout if out is None else out
    tol = dict(TOLERANCES)
    tol.update(cfg.tolerances)
    unknown = set(cfg.tolerances) - set(TOLERANCES) - {"sweep_cauchy"}
    if unknown:
        raise ConfigError(f"tolerances.{sorted(unknown)[0]}: unknown invariant")
    checks = []

    def add(name, value, passed=None):
        t = tol.get(name, 0.0)
        ok = (value <= t) if passed is None else passed
        checks.append(Check(name, float(value), t, bool(ok)))

    sol = run_solution(cfg)
    tt, fg = sol.tt, sol.fg
    rng = np.random.default_rng(20240613)
    chart = tt.chart
    w = sample_v_plus(chart, 50, rng)
    add("compatibility", float(np.max(tt.compatibility(w))) if tt.parts else 0.0)
    s = np.linspace(-3.0, 3.0, 100) + 0.0123
    h1 = max((float(np.max(p.automorphy_defect(s))) for p in tt.parts), default=0.0)
    add("automorphy_h1", h1)
    add("automorphy_h2", _h2_defect(tt, rng))
    jump, hom = _jump_checks(tt)
    add("jump_identity", jump)
    add("homogeneous_jump", hom)

    zero_data = cfg.f1.is_zero and cfg.f2.is_zero
    if zero_data:
        z = _trace_points(cfg)
        peak = max(np.max(np.abs(tt.phi1(z))), np.max(np.abs(tt.phi2(z))),
                   np.max(np.abs(fg.u)), sol.report.interior, sol.report.boundary)
        add("zero_output", float(peak))
    else:
        num = cfg.numerics
        m = cfg.manufactured
        if m is not None:
            z = np.asarray(num.probes, dtype=complex)
            p1, p2 = m.unknown_trace(cfg.B1), m.unknown_trace(cfg.B2)
            add("traces_exact", max(_rel_max(tt.phi1(z), transform_profile(p1, z)),
                                    _rel_max(tt.phi2(z), transform_profile(p2, z))))
            add("field_exact", fg.exact_error(m, 0.5))
            hs = (0.2, 0.1, 0.05)
            errs = [residuals(sample_field(m, num.grid_L, h), cfg.op, cfg.B1, cfg.B2,
                              cfg.f1, cfg.f2, stride=0.2).interior for h in hs]
            slope = convergence_slope(hs, errs)
            add("residual_order", abs(slope - 2.0))
            base = residuals(sample_field(m, num.grid_L, num.grid_h), cfg.op, cfg.B1, cfg.B2,
                             cfg.f1, cfg.f2)
            ratio = max(sol.report.interior / base.interior,
                        sol.report.boundary / max(base.boundary, 1e-300))
            add("residual_baseline", ratio)
        decay = min(abs(cfg.f1.k.real) if not cfg.f1.is_zero else np.inf,
                    abs(cfg.f2.k.real) if not cfg.f2.is_zero else np.inf)
        length = float(np.ceil(max(12.0, 8.0 / decay) / 0.05) * 0.05)
        ref = fd_solve(cfg.op, cfg.B1, cfg.B2, cfg.f1, cfg.f2, length, 0.05)
        xi = fg.x1[1:-1]
        ref_v = ref.sample(xi, xi)
        add("fd_oracle", float(np.linalg.norm(fg.u[1:-1, 1:-1] - ref_v) / np.linalg.norm(ref_v)))

    if cfg.sweep is not None:
        rep = _run_sweep(cfg)
        checks.append(Check("sweep_cauchy", float(rep.differences[-1]) if rep.differences.size
                            else 0.0, 0.0, rep.cauchy))

    width = max(len(c.name) for c in checks)
    print(f"{'invariant':<{width}}  {'value':>24}  {'tolerance':>24}  result", file=out)
    for c in checks:
        print(f"{c.name:<{width}}  {fmt(c.value):>24}  {fmt(c.tol):>24}  "
              f"{'PASS' if c.passed else 'FAIL'}", file=out)
    failed = [c for c in checks if not c.passed]
    if failed:
        print(f"FAILED: {failed[0].name}", file=out)
        return 1
    print("all invariants passed", file=out)
    return 0


# ---------------------------------------------------------------------------
# sweep

def _run_sweep(cfg):
    sw = cfg.sweep
    num = cfg.numerics

    def make_problem(op):
        return _equation(cfg, op)

    return sweep_absorption(sw.omega0, sw.epsilons, make_problem, num.probes,
                            n_nodes=num.rh_nodes, tol=num.rh_tol)


def cmd_sweep(cfg, out_dir):
    if cfg.sweep is None:
        raise ConfigError("sweep: block required for sweep-eps")
    _gate(cfg)
    rep = _run_sweep(cfg)
    rows = []
    for i, e in enumerate(rep.eps):
        for j, v in enumerate(rep.values[i]):
            diff = "" if i == 0 else fmt(abs(v - rep.values[i - 1, j]))
            rows.append((fmt(e), str(j), fmt(v.real), fmt(v.imag), diff))
    os.makedirs(out_dir, exist_ok=True)
    _write(os.path.join(out_dir, "sweep.csv"), "epsilon,probe_id,re,im,successive_diff", rows)
    return 0


# ---------------------------------------------------------------------------
# standalone jump problem

def cmd_rh(job, out_dir):
    jp = half_line_problem(job.q, lambda s: np.ones(np.shape(s), complex), job.H,
                           n_nodes=job.nodes)
    sf = solve_jump(jp, tol=job.tol)
    y = jp.contour.y_of(np.asarray(job.samples))
    tp, tm = boundary_values(sf.T, y)
    pp, pm = boundary_values(sf, y)
    q = jp.q(y)
    t_res = np.abs(tp / tm - q)
    j_res = np.abs(sf.jump_residual(y))
    rows = [(fmt(s), fmt(a.real), fmt(a.imag), fmt(b.real), fmt(b.imag), fmt(c.real),
             fmt(c.imag), fmt(d.real), fmt(d.imag), fmt(e.real), fmt(e.imag), fmt(r1), fmt(r2))
            for s, a, b, c, d, e, r1, r2 in zip(job.samples, q, tp, tm, pp, pm, t_res, j_res)]
    os.makedirs(out_dir, exist_ok=True)
    _write(os.path.join(out_dir, "rh.csv"),
           "s,re_q,im_q,re_T_plus,im_T_plus,re_T_minus,im_T_minus,re_psi_plus,im_psi_plus,"
           "re_psi_minus,im_psi_minus,T_jump_residual,jump_residual", rows)
    return 0


# ---------------------------------------------------------------------------
# entry point

class _Parser(argparse.ArgumentParser):
    """Usage errors exit 64: status 2 is reserved for the ellipticity gate."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(64, f"error: CONFIG_PARSE_ERROR: {message}\n")


def build_parser():
    parser = _Parser(prog="autowedge", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, needs_out in (("check", False), ("solve", True), ("verify", False),
                            ("sweep-eps", True), ("rh", True)):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, metavar="PATH")
        if needs_out:
            p.add_argument("--out", required=True, metavar="DIR")
        p.add_argument("--nodes", type=int, metavar="N", help="initial jump-problem nodes")
        p.add_argument("--tol", type=float, metavar="X", help="node refinement tolerance")
        p.add_argument("--threads", type=int, metavar="N",
                       help="worker threads (default: AUTOWEDGE_THREADS)")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _accel.set_threads(args.threads)
        if args.nodes is not None and args.nodes < 1:
                raise ConfigError("--nodes: must be positive")
        if args.command == "rh":
            job = load_jump_input(args.config)
            if args.nodes or args.tol:
                job = type(job)(job.q, job.H, args.nodes or job.nodes,
                                  args.tol or job.tol, job.samples)
            return cmd_rh(job, args.out)
        cfg = load_run_config(args.config).with_numerics(rh_nodes=args.nodes, rh_tol=args.tol)
        if args.command == "check":
            return cmd_check(cfg)
        if args.command == "solve":
            return cmd_solve(cfg, args.out)
        if args.command == "verify":
            return run_verify(cfg)
        return cmd_sweep(cfg, args.out)
    except AutowedgeError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return exc.exit_status
    except ValueError as exc:
        print(f"error: CONFIG_PARSE_ERROR: {exc}", file=sys.stderr)
        return 64


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
