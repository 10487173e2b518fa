"""Command-line interface: problem ingestion, dispatch, artifact emission.

Every command reads one TOML problem configuration, writes CSV/JSON
artifacts plus a manifest next to it (or into --out), and exits nonzero
with a machine-readable error record on stderr when a computation fails:
2 config, 3 domain, 4 accuracy, 5 regime.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .birkhoff import successive_approximation_report
from .config import load_config, task_lambdas
from .errors import (
    AccuracyError,
    ConfigError,
    DomainError,
    MatslError,
    RegimeError,
)
from .grids import build_grid
from .matrixfss import solve_S, solve_S_star, volterra_residual, wronskian
from .potential import matnorm
from .report import (
    fmt,
    manifest_payload,
    spectral_rows,
    weight_columns,
    write_csv,
    write_json,
)
from .scalar import eval_c, jost_solution
from .spectral import (
    eigenvalue_decay_report,
    group_weights,
    locate_eigenvalues,
    locate_low,
    phi,
    recover_nu,
    rho0_center,
    sigma_forms,
    spectral_classes,
    verify_weight_asymptotics,
)
from .stokes import compute_B, reconstruction_residual, verify_stokes_asymptotics
from .oracle import direct_integrate


def _entry_columns(m, prefix=""):
    cols = ["x"]
    for d in ("", "d"):
        for i in range(m):
            for j in range(m):
                cols += [f"{prefix}{d}v{i}{j}_re", f"{prefix}{d}v{i}{j}_im"]
    return cols


def _family_rows(ev):
    rows = []
    m = ev.values.shape[1]
    for i in range(len(ev.grid.x)):
        row = [ev.grid.x[i]]
        for arr in (ev.values, ev.derivs):
            for a in range(m):
                for b in range(m):
                    row += [arr[i, a, b].real, arr[i, a, b].imag]
        rows.append(row)
    return rows


def cmd_fss(cfg, out, jobs):
    problem = cfg.problem
    task = cfg.tasks.get("fss", {})
    lambdas = task_lambdas(cfg.tasks, "fss")
    families = task.get("families", ["S1", "S2", "Y1", "Y2"])
    meta = {"families": {}}
    from .birkhoff import solve_Y
    for lam in lambdas:
        rho = complex(np.sqrt(lam))
        grid = build_grid(problem.T, problem.order.nu, rho=rho,
                          quad_tol=problem.opts.quad_tol,
                          n_graded=problem.opts.n_graded,
                          n_uniform_min=problem.opts.n_uniform_min)
        tag = f"{lam.real:g}_{lam.imag:g}"
        for fam in families:
            if fam in ("S1", "S2"):
                ev = solve_S(problem.order, problem.Q, lam, grid, int(fam[1]))
            elif fam in ("S1*", "S2*"):
                ev = solve_S_star(problem.order, problem.Q, lam, grid, int(fam[1]))
            elif fam in ("Y1", "Y2"):
                ev = solve_Y(problem.order, problem.Q, grid, int(fam[1]), rho).Y
            else:
                raise DomainError(f"unknown family {fam!r} in tasks.fss")
            path = out / f"fss_{fam.replace('*', 's')}_{tag}.csv"
            write_csv(path, _entry_columns(problem.order.m), _family_rows(ev))
            meta["families"].setdefault(tag, {})[fam] = {
                "iterations": ev.iterations,
                "final_delta": ev.final_delta,
                "contraction": ev.contraction,
                "file": path.name,
            }
    write_json(out / "fss.json", meta)


def _stokes_ladder(task, problem):
    start = float(task.get("rho_start", 4.0))
    factor = float(task.get("rho_factor", 1.6))
    count = int(task.get("rho_count", 6))
    return [start * factor**i for i in range(count)]


def cmd_stokes(cfg, out, jobs):
    problem = cfg.problem
    task = cfg.tasks.get("stokes", {})
    ladder = _stokes_ladder(task, problem)
    rows = []
    m = problem.order.m
    for rho in ladder:
        grid = build_grid(problem.T, problem.order.nu, rho=rho,
                          quad_tol=problem.opts.quad_tol,
                          n_graded=problem.opts.n_graded,
                          n_uniform_min=problem.opts.n_uniform_min)
        st = compute_B(problem.order, problem.Q, grid, rho)
        for (k, j), B in sorted(st.B.items()):
            for a in range(m):
                for b in range(m):
                    rows.append([rho, k, j, a, b, B[a, b].real, B[a, b].imag,
                                 st.deviation(problem.order, k, j)])
    write_csv(out / "stokes.csv",
              ["rho", "k", "j", "row", "col", "B_re", "B_im", "deviation"],
              rows)
    rep = verify_stokes_asymptotics(problem.order, problem.Q, problem.T,
                                    ladder, quad_tol=problem.opts.quad_tol)
    write_json(out / "stokes.json", rep.as_dict())


def cmd_eigs(cfg, out, jobs):
    problem = cfg.problem
    task = cfg.tasks.get("eigs", {})
    n_min = int(task.get("n_min", 1))
    n_max = int(task.get("n_max", 15))
    include_low = bool(task.get("include_low", False))
    classes = spectral_classes(problem.order)
    pairs = [(n, cl) for n in range(n_min, n_max + 1) for cl in classes]

    def work(pair):
        n, (frac, qs) = pair
        from .spectral import locate_contour
        return locate_contour(problem, n, frac, qs)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            data = list(pool.map(work, pairs))
    else:
        data = [work(p) for p in pairs]
    if include_low:
        from .spectral import default_radius
        fr = min(f for f, _ in classes)
        gap0 = min(f for f, _ in classes) + 1.0 - max(f for f, _ in classes)
        rho_split = rho0_center(problem, n_min, fr) - gap0 / 2 * np.pi / problem.T
        if rho_split > 0.3:
            data = locate_low(problem, rho_split) + data
    rows = spectral_rows(data, with_weights=False)
    write_csv(out / "eigs.csv", ["n", "q", "rho_re", "rho_im", "multiplicity"],
              rows)
    payload = {
        "contours": [{"n": d.n, "qs": list(d.qs),
                      "center": complex(d.center), "radius": d.radius,
                      "count": d.count,
                      "roots": [{"rho": r, "multiplicity": mlt}
                                for r, mlt in d.roots]}
                     for d in data],
    }
    asym = [d for d in data if d.n is not None]
    ns = sorted({d.n for d in asym})
    if len(ns) >= 3:
        payload["decay_fit"] = eigenvalue_decay_report(problem, asym).as_dict()
    write_json(out / "eigs.json", payload)


def cmd_weights(cfg, out, jobs):
    problem = cfg.problem
    task = cfg.tasks.get("weights", {})
    n_values = [int(n) for n in task.get("n_values", range(8, 17))]
    classes = spectral_classes(problem.order)
    pairs = [(n, cl) for n in n_values for cl in classes]

    def work(pair):
        n, (frac, qs) = pair
        from .spectral import locate_contour
        d = locate_contour(problem, n, frac, qs)
        return group_weights(problem, d)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            data = list(pool.map(work, pairs))
    else:
        data = [work(p) for p in pairs]
    rows = spectral_rows(data, with_weights=True)
    write_csv(out / "weights.csv",
              ["n", "q", "rho_re", "rho_im", "multiplicity"]
              + weight_columns(problem.order.m), rows)
    rep = verify_weight_asymptotics(problem, n_values, data=data)
    payload = rep.as_dict()
    payload["extra"].pop("_measured_A_arrays", None)
    write_json(out / "weights.json", payload)
    return data


def cmd_recover_nu(cfg, out, jobs):
    problem = cfg.problem
    task = cfg.tasks.get("recover-nu", {})
    n_values = [int(n) for n in task.get("n_values", range(10, 41, 6))]
    est = recover_nu(problem, n_values)
    rows = [[q, est[q], problem.order.nu[q], abs(est[q] - problem.order.nu[q])]
            for q in sorted(est)]
    write_csv(out / "recover_nu.csv",
              ["q", "nu_estimate", "nu_configured", "abs_error"], rows)
    write_json(out / "recover_nu.json",
               {"estimates": {str(q): est[q] for q in est},
                "n_values": n_values})


def cmd_verify(cfg, out, jobs):
    problem = cfg.problem
    order = problem.order
    checks = []

    def check(name, value, tol):
        checks.append({"check": name, "value": float(value), "tol": tol,
                       "pass": bool(value <= tol)})

    for q, basis in enumerate(order.bases):
        check(f"series-recursion-q{q}", basis.s1.recursion_residual(), 1e-14)
        v1, d1 = eval_c(basis.s1, 0.9, 1.1)
        v2, d2 = eval_c(basis.s2, 0.9, 1.1)
        check(f"wronskian-c-q{q}", abs(v1 * d2 - d1 * v2 - 1.0), 1e-10)
        js1 = jost_solution(basis.order, 1, np.linspace(1.2, 8.0, 12), 1.0)
        js2 = jost_solution(basis.order, 2, np.linspace(1.2, 8.0, 12), 1.0)
        we = js1.values * js2.derivatives - js1.derivatives * js2.values
        check(f"wronskian-e-q{q}", float(np.max(np.abs(we + 2j))), 1e-10)
        check(f"beta-det-q{q}", abs(basis.betas.det + 2j), 1e-9)
        b = basis.betas.beta
        rel = max(abs(b[1, 0] - np.exp(1j * np.pi * basis.order.mu1) * b[0, 0]),
                  abs(b[1, 1] - np.exp(1j * np.pi * basis.order.mu2) * b[0, 1]))
        check(f"beta-phase-q{q}", rel, 1e-9)

    lambdas = task_lambdas(cfg.tasks, "verify", default=((2.0, 0.4), (16.0, 0.0)))
    m = order.m
    eye = np.eye(m)
    for lam in lambdas:
        rho = complex(np.sqrt(lam))
        grid = build_grid(problem.T, order.nu, rho=rho,
                          quad_tol=problem.opts.quad_tol,
                          n_graded=problem.opts.n_graded,
                          n_uniform_min=problem.opts.n_uniform_min)
        tag = f"{lam.real:g}{lam.imag:+g}j"
        S = {j: solve_S(order, problem.Q, lam, grid, j) for j in (1, 2)}
        Ss = {j: solve_S_star(order, problem.Q, lam, grid, j) for j in (1, 2)}
        sl = slice(grid.na // 2, None)
        blocks = [
            matnorm(wronskian(Ss[1].values, Ss[1].derivs,
                              S[2].values, S[2].derivs)[sl] - eye).max(),
            matnorm(wronskian(Ss[2].values, Ss[2].derivs,
                              S[1].values, S[1].derivs)[sl] + eye).max(),
            matnorm(wronskian(Ss[1].values, Ss[1].derivs,
                              S[1].values, S[1].derivs)[sl]).max(),
            matnorm(wronskian(Ss[2].values, Ss[2].derivs,
                              S[2].values, S[2].derivs)[sl]).max(),
        ]
        check(f"wronskian-S-block-{tag}", max(blocks), 1e-8)
        check(f"volterra-residual-{tag}",
              max(volterra_residual(order, problem.Q, S[j]) for j in (1, 2)),
              10 * problem.opts.picard_tol)
        ph = phi(problem, lam, grid)
        s1f, s2f = sigma_forms(problem, ph)
        check(f"phi-sigma1-{tag}", float(matnorm(s1f - eye)), 1e-8)
        check(f"phi-sigma2-{tag}", float(matnorm(s2f - problem.h)), 1e-8)

    if not problem.Q.is_zero:
        rho_probe = float(cfg.tasks.get("verify", {}).get("rho_probe", 8.0))
        rep = successive_approximation_report(
            order, problem.Q,
            build_grid(problem.T, order.nu, rho=rho_probe,
                       quad_tol=problem.opts.quad_tol),
            1, rho_probe)
        check("birkhoff-contraction", rep["contraction_bound"], 0.5)
        if rep["ratios"]:
            check("birkhoff-geometric-decay",
                  max(rep["ratios"][:-1], default=0.0),
                  max(rep["contraction_bound"] * 1.5, 1e-3))
        grid = build_grid(problem.T, order.nu, rho=rho_probe,
                          quad_tol=problem.opts.quad_tol)
        st = compute_B(order, problem.Q, grid, rho_probe)
        rec = max(reconstruction_residual(order, problem.Q, grid, st, k)
                  for k in (1, 2))
        check("stokes-reconstruction", rec, 1e-8)

    write_json(out / "verify.json", {"checks": checks,
                                     "all_pass": all(c["pass"] for c in checks)})
    for c in checks:
        status = "PASS" if c["pass"] else "FAIL"
        print(f"{status} {c['check']}: {fmt(c['value'])} (tol {fmt(c['tol'])})")
    if not all(c["pass"] for c in checks):
        raise AccuracyError("verification suite has failing checks")


def cmd_oracle_diff(cfg, out, jobs):
    problem = cfg.problem
    lambdas = task_lambdas(cfg.tasks, "oracle-diff", default=((2.0, 0.4),))
    rows = []
    for lam in lambdas:
        rho = complex(np.sqrt(lam))
        grid = build_grid(problem.T, problem.order.nu, rho=rho,
                          quad_tol=problem.opts.quad_tol,
                          n_graded=problem.opts.n_graded,
                          n_uniform_min=problem.opts.n_uniform_min)
        i0 = grid.index_at(problem.T / 100)
        for j in (1, 2):
            ev = solve_S(problem.order, problem.Q, lam, grid, j)
            vals, ders = direct_integrate(problem.order, problem.Q, lam,
                                          f"S{j}", grid.x[i0:])
            dv = float(np.max(matnorm(vals - ev.values[i0:])
                              / (1 + matnorm(vals))))
            dd = float(np.max(matnorm(ders - ev.derivs[i0:])
                              / (1 + matnorm(ders))))
            rows.append([lam.real, lam.imag, j, dv, dd])
    write_csv(out / "oracle_diff.csv",
              ["lam_re", "lam_im", "family_j", "value_dev", "deriv_dev"],
              rows)


COMMANDS = {
    "fss": cmd_fss,
    "stokes": cmd_stokes,
    "eigs": cmd_eigs,
    "weights": cmd_weights,
    "recover-nu": cmd_recover_nu,
    "verify": cmd_verify,
    "oracle-diff": cmd_oracle_diff,
}

_EXIT_CODES = [
    (ConfigError, 2),
    (DomainError, 3),
    (AccuracyError, 4),
    (RegimeError, 5),
]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="matsl",
        description="Matrix Sturm-Liouville solver with a Bessel-type "
                    "singularity: FSS construction and spectral data.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="TOML problem file")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--jobs", type=int, default=1,
                        help="parallel contour workers")
    parser.add_argument("--tol-scale", type=float, default=1.0,
                        help="multiply all tolerances by this factor")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config, tol_scale=args.tol_scale)
        out = Path(args.out) if args.out else Path(args.config).parent
        out.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](cfg, out, max(1, args.jobs))
        tolerances = {
            "quad_tol": cfg.problem.opts.quad_tol,
            "picard_tol": cfg.problem.opts.picard_tol,
            "newton_tol": cfg.problem.opts.newton_tol,
            "contour_tol": cfg.problem.opts.contour_tol,
        }
        write_json(out / f"manifest_{args.command}.json",
                   manifest_payload(args.command, args.config, cfg.problem,
                                    tolerances))
        return 0
    except MatslError as exc:
        code = 4
        for etype, ecode in _EXIT_CODES:
            if isinstance(exc, etype):
                code = ecode
                break
        record = {"error_type": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, ConfigError):
            record["field"] = exc.field
        print(json.dumps(record, sort_keys=True), file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
