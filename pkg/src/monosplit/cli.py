"""Command-line front end: runs, tables, verification, figure data.

Exit codes: 0 on success, 2 on configuration errors, 3 on numeric failure
(non-finite diagnostics or norm-estimation breakdown). All CSV output uses
17-significant-digit decimals, comma delimiters, LF line endings and a
mandatory header row; files are written whole-file atomically.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import analysis, bench
from .numkit import NormEstimationError
from .operators import ConeKind, certificate_gap
from .primal_dual import (as_inclusion, pd_diagnostics, PDCertificates, unpack)
from .splitters import (METHODS, ParameterError, SolverConfig, default_c,
                        gamma_cap, run_solver, validate_params)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

PROBLEMS = ("chain-ineq", "chain-eq", "known")

_CONFIG_KEYS = {
    "problem", "n", "method", "alpha", "c", "gamma", "epsilon", "seeds",
    "max_iter", "out", "figure", "quick", "check",
}


def _fmt(x) -> str:
    if x is None:
        return "NaN"
    x = float(x)
    if math.isnan(x):
        return "NaN"
    return f"{x:.17g}"


def write_csv_atomic(path: str, header: Sequence[str], rows) -> None:
    """Write a CSV whole-file atomically (temp file + rename)."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as f:
            f.write(",".join(header) + "\n")
            for row in rows:
                f.write(",".join(v if isinstance(v, str) else _fmt(v) for v in row) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_config_file(path: str) -> Dict[str, str]:
    """Flat key=value configuration, one key per line, '#' comments."""
    values: Dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParameterError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, val = line.split("=", 1)
            key = key.strip()
            if key not in _CONFIG_KEYS:
                raise ParameterError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = val.strip()
    return values


def _parse_seeds(text: str) -> List[int]:
    return [int(t) for t in text.replace(",", " ").split()]


def _build_problem(args):
    if args.problem == "known":
        a = np.zeros(max(int(args.n), 2))
        a[0] = 2.0
        a[1] = -0.5
        return bench.build_known_solution_problem(a), None
    cone = ConeKind.NONNEG_ORTHANT if args.problem == "chain-ineq" else ConeKind.ZERO_CONE
    sp = bench.build_qp_problem(int(args.n), cone)
    return as_inclusion(sp), sp


def _solver_config(args, max_iter: int) -> SolverConfig:
    return SolverConfig(
        method=args.method,
        alpha=args.alpha,
        c=args.c,
        gamma=args.gamma,
        max_iter=max_iter,
    )


RUN_COLUMNS = ["k", "velocity", "tan_residual_upper", "fix_residual", "v_norm",
               "pd_gap", "obj_gap", "feasibility", "complementarity",
               "energy_E", "energy_G", "identity_residual", "time_s"]


def cmd_run(args) -> int:
    problem, sp = _build_problem(args)
    config = _solver_config(args, args.max_iter)
    validate_params(config, problem.lipschitz)
    z0 = y0 = w0 = None
    if args.seeds:
        z0, y0, w0 = bench.draw_initial_points(args.seeds[0], problem.dim)
    stop = bench.StoppingRule("kkt_norm", args.epsilon) if args.epsilon else None

    pd_rows: Dict[int, dict] = {}
    energy_rows: Dict[int, dict] = {}
    z_star = problem.solution
    if sp is not None:
        reference = bench.reference_solution(sp)
        z_star = np.concatenate(reference)

        def observe_pd(state):
            x, lam = unpack(state.z, sp.nx)
            u, v = unpack(state.xi, sp.nx)
            certs = PDCertificates(u=u, v=v)
            pd_rows[state.k] = pd_diagnostics((x, lam), certs, sp, reference)

        observer = observe_pd
    else:
        observer = None
    if config.method == "fast_rfb" and z_star is not None:
        params = validate_params(config, problem.lipschitz)
        tracker = analysis.LyapunovTracker(
            analysis.LyapunovParams(alpha=params.alpha, c=params.c, gamma=params.gamma,
                                    lipschitz=problem.lipschitz,
                                    lam=(params.alpha - 1.0) / 2.0, s=1.5),
            z_star, check_lower_bound=False)
        from .splitters import snapshot as _snapshot

        base_observer = observer

        def observe_energy(state):
            energy_rows[state.k] = tracker.update(_snapshot(state, problem))
            if base_observer is not None:
                base_observer(state)

        observer = observe_energy

    trace = run_solver(problem, config, stop=stop, z0=z0, y0=y0, w0=w0,
                       record_every=1, fix_residual=True, observer=observer)
    rows = []
    for i, k in enumerate(trace.k):
        k = int(k)
        pd = pd_rows.get(k, {})
        en = energy_rows.get(k, {})
        rows.append([
            float(k), trace.velocity[i], trace.resid_upper[i], trace.fix_residual[i],
            trace.v_norm[i], pd.get("lagrangian_gap"), pd.get("obj_gap"),
            pd.get("feasibility"), pd.get("complementarity"),
            en.get("E"), en.get("G"), en.get("identity_residual"), trace.time_s[i],
        ])
    if not np.all(np.isfinite(trace.resid_upper)) or not np.all(np.isfinite(trace.velocity)):
        print("numeric failure: non-finite diagnostics encountered", file=sys.stderr)
        return EXIT_NUMERIC
    write_csv_atomic(args.out, RUN_COLUMNS, rows)
    status = "hit tolerance" if trace.success else "ran to the iteration cap"
    print(f"{args.method} on {args.problem}: {trace.iterations} iterations ({status}); "
          f"trace -> {args.out}")
    return EXIT_OK


TABLE_COLUMNS = ["method", "success_rate", "avg_iters", "std_iters",
                 "avg_time_s", "std_time_s"]


def cmd_table(args) -> int:
    methods = list(args.methods) if args.methods else []
    if args.quick and args.epsilon < 1e-2:
        # eg dominates the runtime at high accuracy; its row is reproducible
        # separately, so quick mode drops it
        methods = [m for m in methods if m != "eg"]
    if not methods:
        print("empty method list", file=sys.stderr)
        return EXIT_CONFIG
    cone = ConeKind.NONNEG_ORTHANT if args.problem == "chain-ineq" else ConeKind.ZERO_CONE
    seeds = args.seeds if args.seeds else list(range(10))
    reports = bench.run_table_experiment(methods, [args.epsilon], int(args.n),
                                         seeds, max_iter=args.max_iter, cone=cone)
    report = reports[float(args.epsilon)]
    rows = []
    for name in methods:
        st = report.methods[name]
        rows.append([name, st.success_rate, st.mean_iters, st.std_iters,
                     st.mean_time, st.std_time])
    write_csv_atomic(args.out, TABLE_COLUMNS, rows)
    print(f"table (epsilon={args.epsilon:g}, n={args.n}, {len(seeds)} seeds) -> {args.out}")
    return EXIT_OK


VERIFY_CHECKS = ("equivalence", "identity", "membership", "ordering",
                 "omega_signs", "lambda_window", "mu_scan")


def _verify_problem(args):
    if args.problem in ("chain-eq", "chain-ineq"):
        problem, sp = _build_problem(args)
        z_star = None
        if sp.cone is ConeKind.ZERO_CONE:
            x_star, lam_star = bench.reference_solution(sp)
            z_star = np.concatenate([x_star, lam_star])
        return problem, z_star
    a = np.zeros(max(int(args.n), 2))
    a[0] = 2.0
    a[1] = -0.5
    problem = bench.build_known_solution_problem(a)
    return problem, problem.solution


def cmd_verify(args) -> int:
    checks = list(args.check) if args.check else list(VERIFY_CHECKS)
    unknown = [c for c in checks if c not in VERIFY_CHECKS]
    if unknown:
        print(f"unknown checks: {unknown}", file=sys.stderr)
        return EXIT_CONFIG
    problem, z_star = _verify_problem(args)
    alpha, c = args.alpha, args.c if args.c is not None else default_c(args.alpha)
    config = SolverConfig(method="fast_rfb", alpha=alpha, c=c, gamma=args.gamma,
                          max_iter=args.max_iter, form="both")
    params = validate_params(config, problem.lipschitz)
    k_max = min(args.max_iter, 1000)
    results: List[tuple] = []

    def report(name, ok, detail):
        results.append((name, ok))
        print(f"{'PASS' if ok else 'FAIL'}  {name:14s} {detail}")

    snaps = []
    from .splitters import iterate as _iterate, snapshot as _snapshot
    form_dev = 0.0
    for state in _iterate(problem, config, max_iter=k_max):
        snaps.append(_snapshot(state, problem))
        form_dev = max(form_dev, state.form_dev)
    if "equivalence" in checks:
        report("equivalence", form_dev <= 1e-10,
               f"max relative deviation between forms {form_dev:.3e} (tol 1e-10)")
    if "identity" in checks:
        lam = args.lam if args.lam is not None else (params.alpha - 1.0) / 2.0
        anchor = z_star if z_star is not None else np.zeros(problem.dim)
        p = analysis.LyapunovParams(alpha=params.alpha, c=params.c, gamma=params.gamma,
                                    lipschitz=problem.lipschitz, lam=lam, s=1.5)
        tracker = analysis.LyapunovTracker(p, anchor, check_lower_bound=False)
        worst = 0.0
        prev_E = None
        for sn in snaps:
            rec = tracker.update(sn)
            if prev_E is not None:
                dE = abs(rec["E"] - prev_E)
                worst = max(worst, rec["identity_residual"] / (1.0 + dE))
            prev_E = rec["E"]
        report("identity", worst <= 1e-8,
               f"worst relative residual {worst:.3e} at lambda={lam:g}, s=1.5 (tol 1e-8)")
    if "membership" in checks:
        worst = max(certificate_gap(problem.monotone, sn.z, sn.xi) for sn in snaps)
        report("membership", worst <= 1e-8, f"worst certificate gap {worst:.3e} (tol 1e-8)")
    if "ordering" in checks:
        worst = -np.inf
        for sn in snaps:
            upper = analysis.tangent_residual_upper(sn.xi, sn.F_z)
            fix = analysis.fixed_point_residual(sn.z, params.gamma, problem)
            worst = max(worst, fix - upper)
        report("ordering", worst <= 1e-12,
               f"max r_fix - r_tan_upper = {worst:.3e} (slack tol 1e-12)")
    if "omega_signs" in checks or "lambda_window" in checks or "mu_scan" in checks:
        try:
            pwin = analysis.default_window_params(params.alpha, params.c)
        except ParameterError as exc:
            for name in ("omega_signs", "lambda_window", "mu_scan"):
                if name in checks:
                    report(name, False, f"window parameters unavailable: {exc}")
            pwin = None
        if pwin is not None:
            p = analysis.LyapunovParams(alpha=params.alpha, c=params.c,
                                        gamma=params.gamma, lipschitz=problem.lipschitz,
                                        lam=pwin.lam, s=pwin.s, delta=pwin.delta)
            w = analysis.omega_constants(p)
            if "omega_signs" in checks:
                ok = (w.w0 > 0 and w.w3 <= 0 and w.w4 < 0 and w.w5 > 0
                      and w.w6 > 0 and w.w7 > 0)
                report("omega_signs", ok,
                       f"w0={w.w0:.3g} w3={w.w3:.3g} w4={w.w4:.3g} w5={w.w5:.3g} "
                       f"w6={w.w6:.3g} w7={w.w7:.3g}")
            if "lambda_window" in checks:
                lo, hi = analysis.lambda_window(params.alpha, params.c, pwin.s, pwin.delta)
                ok = 0.0 <= lo < hi <= pwin.s * params.alpha / 4.0
                report("lambda_window", ok, f"window ({lo:.6g}, {hi:.6g})")
            if "mu_scan" in checks:
                try:
                    k1 = analysis.first_nonneg_k(w, p)
                    report("mu_scan", True, f"mu_k nonnegative from k={k1}")
                except ParameterError as exc:
                    report("mu_scan", False, str(exc))
    return EXIT_OK if all(ok for _, ok in results) else 1


FIGURE_IDS = ("1", "2", "3", "4", "5", "7")
_PARAM_FIGS = {"1": 3.0, "2": 5.0, "3": 10.0, "4": 20.0}


def _ref_curve(ks, values):
    """O(1/k) guide normalized to pass through the first positive sample."""
    ks = np.asarray(ks, dtype=float)
    anchor = None
    for k, v in zip(ks, values):
        if v > 0:
            anchor = k * v
            break
    if anchor is None:
        anchor = 1.0
    return anchor / ks


def cmd_figure_data(args) -> int:
    fig = str(args.figure)
    if fig not in FIGURE_IDS:
        print(f"unknown figure id {fig!r} (known: {', '.join(FIGURE_IDS)})", file=sys.stderr)
        return EXIT_CONFIG
    outdir = args.out
    os.makedirs(outdir, exist_ok=True)
    if fig in _PARAM_FIGS:
        alpha = _PARAM_FIGS[fig]
        written = _figure_param_study(fig, alpha, args, outdir)
    elif fig == "5":
        written = _figure_comparison(args, outdir)
    else:
        written = _figure_residual_sizes(args, outdir)
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def _figure_param_study(fig, alpha, args, outdir):
    n = int(args.n)
    iters = args.max_iter
    sp = bench.build_qp_problem(n, ConeKind.NONNEG_ORTHANT)
    problem = as_inclusion(sp)
    reference = bench.reference_solution(sp)
    cs = bench.c_grid(alpha)
    series = {}
    for c in cs:
        config = SolverConfig(method="fast_rfb", alpha=alpha, c=c, max_iter=iters)
        rows = {}

        def observe(state, rows=rows):
            x, lam = unpack(state.z, sp.nx)
            u, v = unpack(state.xi, sp.nx)
            rows[state.k] = pd_diagnostics((x, lam), PDCertificates(u, v), sp, reference)

        trace = run_solver(problem, config, record_every=1, observer=observe)
        series[c] = (trace, rows)
    panels = {
        "velocity": lambda tr, rows, i, k: tr.velocity[i],
        "residual": lambda tr, rows, i, k: tr.resid_upper[i],
        "gap": lambda tr, rows, i, k: rows[k]["lagrangian_gap"],
        "funcval": lambda tr, rows, i, k: rows[k]["obj_gap"],
    }
    written = []
    for panel, getter in panels.items():
        header = ["k"] + [f"c={c:.6g}" for c in cs] + ["ref_1_over_k"]
        first = series[cs[0]][0]
        ks = [int(k) for k in first.k]
        cols = []
        for c in cs:
            tr, rows = series[c]
            cols.append([getter(tr, rows, i, int(k)) for i, k in enumerate(tr.k)])
        ref = _ref_curve(ks, cols[0])
        out_rows = [[float(k)] + [col[i] for col in cols] + [ref[i]]
                    for i, k in enumerate(ks)]
        path = os.path.join(outdir, f"figure{fig}_{panel}.csv")
        write_csv_atomic(path, header, out_rows)
        written.append(path)
    return written


# fbf and pfbf track eg and ogda so closely that the comparison figures
# leave them out; the series match the table rows
_FIG5_METHODS = ("eg", "ogda", "frb", "rfb", "arg",
                 "fast_rfb_a5", "fast_rfb_a10")


def _figure_comparison(args, outdir):
    n = int(args.n)
    iters = args.max_iter
    sp = bench.build_qp_problem(n, ConeKind.ZERO_CONE)
    problem = as_inclusion(sp)
    reference = bench.reference_solution(sp)
    configs = bench.table_method_configs(iters)
    panels = ("primal_velocity", "dual_velocity", "residual", "feasibility",
              "gap", "funcval")
    data = {p: {} for p in panels}
    ks = None
    for name in _FIG5_METHODS:
        rows = {}
        prev = {}

        def observe(state, rows=rows, prev=prev):
            x, lam = unpack(state.z, sp.nx)
            u, v = unpack(state.xi, sp.nx)
            d = pd_diagnostics((x, lam), PDCertificates(u, v), sp, reference)
            if "x" in prev:
                d["vx"] = float(np.linalg.norm(x - prev["x"]))
                d["vl"] = float(np.linalg.norm(lam - prev["lam"]))
            else:
                d["vx"] = d["vl"] = float("nan")
            prev["x"] = x.copy()
            prev["lam"] = lam.copy()
            rows[state.k] = d

        trace = run_solver(problem, configs[name], record_every=1, observer=observe)
        ks = [int(k) for k in trace.k]
        data["primal_velocity"][name] = [rows[k]["vx"] for k in ks]
        data["dual_velocity"][name] = [rows[k]["vl"] for k in ks]
        data["residual"][name] = list(trace.resid_upper)
        data["feasibility"][name] = [rows[k]["feasibility"] for k in ks]
        data["gap"][name] = [rows[k]["lagrangian_gap"] for k in ks]
        data["funcval"][name] = [rows[k]["obj_gap"] for k in ks]
    written = []
    for panel in panels:
        header = ["k"] + list(_FIG5_METHODS) + ["ref_1_over_k"]
        first = data[panel][_FIG5_METHODS[0]]
        ref = _ref_curve(ks, first)
        rows_out = [[float(k)] + [data[panel][m][i] for m in _FIG5_METHODS] + [ref[i]]
                    for i, k in enumerate(ks)]
        path = os.path.join(outdir, f"figure5_{panel}.csv")
        write_csv_atomic(path, header, rows_out)
        written.append(path)
    return written


def _figure_residual_sizes(args, outdir):
    iters = args.max_iter
    sizes = (200, 500, 800, 1000) if args.n is None else (int(args.n),)
    configs = bench.table_method_configs(iters)
    written = []
    for n in sizes:
        sp = bench.build_qp_problem(n, ConeKind.ZERO_CONE)
        problem = as_inclusion(sp)
        cols = {}
        ks = None
        for name in _FIG5_METHODS:
            trace = run_solver(problem, configs[name], record_every=1)
            ks = [int(k) for k in trace.k]
            cols[name] = list(trace.resid_upper)
        header = ["k"] + list(_FIG5_METHODS) + ["ref_1_over_k"]
        ref = _ref_curve(ks, cols[_FIG5_METHODS[0]])
        rows_out = [[float(k)] + [cols[m][i] for m in _FIG5_METHODS] + [ref[i]]
                    for i, k in enumerate(ks)]
        path = os.path.join(outdir, f"figure7_n{n}_residual.csv")
        write_csv_atomic(path, header, rows_out)
        written.append(path)
    return written


def cmd_params(args) -> int:
    problem, _sp = _build_problem(args)
    L = problem.lipschitz
    print(f"problem {args.problem} (n={args.n}): Lipschitz bound L = {L:.17g}")
    print("step caps (gamma = 0.99 * cap used by default):")
    for m in METHODS:
        print(f"  {m:9s} cap = {gamma_cap(m, L):.17g}")
    alpha = args.alpha
    c = args.c if args.c is not None else default_c(alpha)
    config = SolverConfig(method="fast_rfb", alpha=alpha, c=c, gamma=args.gamma)
    params = validate_params(config, L)
    print(f"fast_rfb parameters: alpha={params.alpha:g} c={params.c:.17g} "
          f"gamma={params.gamma:.17g}")
    pwin = analysis.default_window_params(params.alpha, params.c)
    p = analysis.LyapunovParams(alpha=params.alpha, c=params.c, gamma=params.gamma,
                                lipschitz=L, lam=pwin.lam, s=pwin.s, delta=pwin.delta)
    w = analysis.omega_constants(p)
    print(f"energy constants at lambda={pwin.lam:.6g}, s={pwin.s:.6g}:")
    for i, val in enumerate((w.w0, w.w1, w.w2, w.w3, w.w4, w.w5, w.w6, w.w7)):
        print(f"  omega_{i} = {val:.17g}")
    lo, hi = analysis.lambda_window(params.alpha, params.c, pwin.s, pwin.delta)
    print(f"lambda window at s={pwin.s:.6g}, delta={pwin.delta:.6g}: "
          f"({lo:.17g}, {hi:.17g}), upper clip s*alpha/4 = {pwin.s * params.alpha / 4.0:.17g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="monosplit",
        description="Splitting solvers and benchmarks for monotone inclusions. "
                    "Exit codes: 0 ok, 2 configuration error, 3 numeric failure.")
    parser.add_argument("--config", help="key=value configuration file; flags override it")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, default_iters):
        p.add_argument("--problem", choices=PROBLEMS, default="chain-eq")
        p.add_argument("--n", type=int, default=None,
                       help="problem size (default 200; figure-data 7 sweeps "
                            "200/500/800/1000 when omitted)")
        p.add_argument("--method", choices=METHODS, default="fast_rfb")
        p.add_argument("--alpha", type=float, default=5.0)
        p.add_argument("--c", type=float, default=None)
        p.add_argument("--gamma", type=float, default=None)
        p.add_argument("--epsilon", type=float, default=None)
        p.add_argument("--seeds", type=_parse_seeds, default=None,
                       help="comma-separated seed list")
        p.add_argument("--max-iter", dest="max_iter", type=int, default=default_iters)

    p_run = sub.add_parser("run", help="single run, per-iteration trace CSV")
    common(p_run, 10000)
    p_run.add_argument("--out", default="trace.csv")
    p_run.set_defaults(func=cmd_run)

    p_table = sub.add_parser("table", help="method x seed comparison table CSV")
    common(p_table, 1_000_000)
    p_table.add_argument("--methods", type=lambda s: s.split(","),
                         default=list(bench.TABLE_METHOD_ORDER))
    p_table.add_argument("--out", default="table.csv")
    p_table.set_defaults(func=cmd_table, epsilon=0.1)
    p_table.add_argument("--quick", action="store_true",
                         help="drop the eg row at epsilon < 1e-2 (it dominates runtime)")

    p_verify = sub.add_parser("verify", help="run the invariant suite, print pass/fail")
    common(p_verify, 1000)
    p_verify.add_argument("--check", action="append", choices=VERIFY_CHECKS,
                          help="restrict to specific checks (repeatable)")
    p_verify.add_argument("--lambda", dest="lam", type=float, default=None,
                          help="anchor weight for the identity check")
    p_verify.set_defaults(func=cmd_verify, problem="known")

    p_fig = sub.add_parser("figure-data", help="emit per-figure CSV bundles")
    common(p_fig, 10000)
    p_fig.add_argument("--figure", required=True)
    p_fig.add_argument("--out", default="figures_data")
    p_fig.set_defaults(func=cmd_figure_data)

    p_par = sub.add_parser("params", help="print resolved gamma, L, energy constants")
    common(p_par, 10000)
    p_par.set_defaults(func=cmd_params)
    return parser


def _apply_config_file(parser, argv):
    # pre-scan for --config so file values become defaults that flags override
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config")
    known, _ = probe.parse_known_args(argv)
    if not known.config:
        return argv
    values = read_config_file(known.config)
    extra = []
    for key, val in values.items():
        flag = "--" + key.replace("_", "-")
        if key == "quick":
            if val.lower() in ("1", "true", "yes"):
                extra.append(flag)
            continue
        extra.extend([flag, val])
    # insert after the subcommand so argparse attributes them to it
    for i, tok in enumerate(argv):
        if not tok.startswith("-") and tok in ("run", "table", "verify",
                                               "figure-data", "params"):
            return argv[: i + 1] + extra + argv[i + 1:]
    return argv + extra


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
    except ParameterError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if getattr(args, "n", None) is None and not (args.command == "figure-data"
                                                 and str(args.figure) == "7"):
        args.n = 200
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NormEstimationError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except FloatingPointError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
