"""Command-line front end: solve, certify, sweep, and compare commands.

Exit codes: 0 success, 2 iteration budget exhausted or divergence, 3 invalid
problem or flags, 4 projector or dual-representation failure, 5 certificate
verdict fail.  All file output is deterministic: rerunning with identical
flags reproduces identical bytes.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .certificate import CertificateTolerances, certify, dual_adjoint_fit
from .dynamics import LtiSystem, propagate_state
from .errors import (
    ControllabilityError,
    DivergenceError,
    DrControlError,
    DualRepresentationError,
    ProblemValidationError,
    ProjectorUnavailableError,
)
from .problems import build, catalog_names, load_problem
from .projections import build_shooting
from .signals import Signal, TimeGrid
from .solver import DrConfig, DrRun, gamma_sweep, solve

__all__ = ["main", "console_main"]

EXIT_OK = 0
EXIT_NO_CONVERGENCE = 2
EXIT_INVALID = 3
EXIT_PROJECTOR = 4
EXIT_CERTIFICATE = 5


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _resolve_problem(args) -> tuple[LtiSystem, str]:
    if args.builtin is not None:
        overrides = {} if args.tf is None else {"t_final": args.tf}
        return build(args.builtin, **overrides), args.builtin
    sys_ = load_problem(args.problem)
    if args.tf is not None:
        sys_ = dataclasses.replace(sys_, t_final=args.tf)
    return sys_, Path(args.problem).stem


def _add_problem_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--builtin", choices=catalog_names(), help="catalog problem name")
    group.add_argument("--problem", help="path to a problem JSON file")
    parser.add_argument("--tf", type=float, default=None, help="override the horizon")


def _problem_payload(sys_: LtiSystem, name: str) -> dict:
    return {
        "name": name,
        "n": sys_.n,
        "A": [[float(v) for v in row] for row in sys_.A],
        "b": [float(v) for v in sys_.b],
        "r": float(sys_.r),
        "lower": float(sys_.lower),
        "upper": float(sys_.upper),
        "x0": [float(v) for v in sys_.x0],
        "xf": [float(v) for v in sys_.xf],
        "t_final": float(sys_.t_final),
    }


def _write_solution_csv(path: Path, name: str, sys_: LtiSystem, grid: TimeGrid,
                        run: DrRun, config_eps: float, projector) -> None:
    fit = dual_adjoint_fit(sys_, run.dual, projector.cache)
    p_nodes = fit.adjoint_trajectory(sys_, projector.cache)
    lam = -p_nodes
    x_nodes = propagate_state(sys_, run.u_affine, cache=projector.cache).values

    cols = [grid.nodes, run.u_affine.values, run.dual.values,
            run.fixed_point.values, run.u_box.values]
    header = ["t", "u", "w", "phi", "u_tilde"]
    for i in range(sys_.n):
        cols.append(x_nodes[:, i])
        header.append(f"x_{i + 1}")
    for i in range(sys_.n):
        cols.append(lam[:, i])
        header.append(f"lambda_{i + 1}")

    lines = [
        f"# problem={name}",
        f"# gamma={_fmt(run.gamma)}",
        f"# eps={_fmt(config_eps)}",
        f"# N={grid.n_intervals}",
        f"# iterations={run.iterations}",
        ",".join(header),
    ]
    for row in zip(*cols):
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_history_csv(path: Path, run: DrRun) -> None:
    lines = ["k,residual_linf,primal_objective,dual_objective"]
    for rec in run.records:
        lines.append(
            f"{rec.k},{_fmt(rec.residual_linf)},{_fmt(rec.primal_objective)},{_fmt(rec.dual_objective)}"
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_run_json(path: Path, name: str, sys_: LtiSystem, grid: TimeGrid,
                    run: DrRun, config: DrConfig) -> None:
    payload = {
        "problem": _problem_payload(sys_, name),
        "grid": {"n_intervals": grid.n_intervals, "t_final": grid.t_final},
        "solver": {
            "gamma": run.gamma,
            "epsilon": config.epsilon,
            "max_iterations": config.max_iterations,
            "snapshot_stride": config.snapshot_stride,
            "initial_iterate": "zero",
            "gamma_overrides_r": run.gamma_overrides_r,
        },
        "result": {
            "converged": run.converged,
            "iterations": run.iterations,
            "final_residual": run.final_residual,
            "primal_objective": run.records[-1].primal_objective,
            "dual_objective": run.records[-1].dual_objective,
            "duality_gap": run.records[-1].primal_objective + run.records[-1].dual_objective,
        },
    }
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def cmd_solve(args) -> int:
    sys_, name = _resolve_problem(args)
    grid = TimeGrid(args.grid, t_final=sys_.t_final)
    projector = build_shooting(sys_, grid)
    config = DrConfig(gamma=args.gamma, epsilon=args.eps, max_iterations=args.max_iter)
    run = solve(sys_, projector, config)

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    _write_solution_csv(outdir / "solution.csv", name, sys_, grid, run, args.eps, projector)
    _write_history_csv(outdir / "history.csv", run)
    _write_run_json(outdir / "run.json", name, sys_, grid, run, config)

    last = run.records[-1]
    status = "converged" if run.converged else "max-iter"
    print(
        f"{status} k={run.iterations} residual={_fmt(last.residual_linf)} "
        f"primal={_fmt(last.primal_objective)} dual={_fmt(last.dual_objective)} "
        f"gap={_fmt(last.primal_objective + last.dual_objective)}"
    )
    return EXIT_OK if run.converged else EXIT_NO_CONVERGENCE


def _read_solution_csv(path: Path) -> dict[str, np.ndarray]:
    with path.open(encoding="utf-8") as fh:
        rows = [line.strip() for line in fh if line.strip() and not line.startswith("#")]
    if not rows:
        raise ProblemValidationError(f"{path}: empty solution file")
    header = rows[0].split(",")
    data = np.array([[float(v) for v in line.split(",")] for line in rows[1:]])
    if data.ndim != 2 or data.shape[1] != len(header):
        raise ProblemValidationError(f"{path}: malformed csv body")
    return {name: data[:, i] for i, name in enumerate(header)}


def cmd_certify(args) -> int:
    if args.run is not None:
        rundir = Path(args.run)
        run_json = json.loads((rundir / "run.json").read_text(encoding="utf-8"))
        prob = run_json["problem"]
        sys_ = LtiSystem(
            A=prob["A"], b=prob["b"], r=prob["r"], lower=prob["lower"],
            upper=prob["upper"], x0=prob["x0"], xf=prob["xf"], t_final=prob["t_final"],
        )
        solution_path = rundir / "solution.csv"
        out_path = rundir / "certificate.json"
    else:
        if args.problem is None:
            raise ProblemValidationError("--solution mode requires --problem")
        sys_ = load_problem(args.problem)
        solution_path = Path(args.solution)
        out_path = solution_path.with_name("certificate.json")

    table = _read_solution_csv(solution_path)
    for col in ("t", "u", "w", "phi"):
        if col not in table:
            raise ProblemValidationError(f"{solution_path}: missing column {col}")
    n_nodes = len(table["t"])
    grid = TimeGrid(n_nodes - 1, t_final=sys_.t_final)
    u = Signal(grid, table["u"])
    w = Signal(grid, table["w"])
    phi = Signal(grid, table["phi"])

    projector = build_shooting(sys_, grid)
    report = certify(sys_, projector, u, w, phi, CertificateTolerances())
    out_path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")
    print(report.to_text())
    return EXIT_OK if report.verdict else EXIT_CERTIFICATE


def _parse_gammas(args) -> list[float]:
    if args.gammas is not None:
        try:
            gammas = [float(tok) for tok in args.gammas.split(",") if tok.strip()]
        except ValueError as exc:
            raise ProblemValidationError(f"invalid --gammas list: {args.gammas}") from exc
    else:
        try:
            lo_s, hi_s, steps_s = args.gamma_range.split(":")
            lo, hi, steps = float(lo_s), float(hi_s), int(steps_s)
        except ValueError as exc:
            raise ProblemValidationError(f"invalid --gamma-range: {args.gamma_range}") from exc
        if steps < 1:
            raise ProblemValidationError("gamma range needs at least one step")
        gammas = [float(g) for g in np.linspace(lo, hi, steps)]
    for g in gammas:
        if not (0.0 < g < 1.0):
            raise ProblemValidationError(f"gamma {g} outside (0, 1)")
    return gammas


def cmd_sweep(args) -> int:
    sys_, _ = _resolve_problem(args)
    gammas = _parse_gammas(args)
    grid = TimeGrid(args.grid, t_final=sys_.t_final)
    projector = build_shooting(sys_, grid)
    config = DrConfig(epsilon=args.eps, max_iterations=args.max_iter)
    rows = gamma_sweep(sys_, projector, gammas, config)

    lines = ["gamma,iterations,converged,final_residual"]
    for row in rows:
        conv = "true" if row.converged else "false"
        lines.append(f"{_fmt(row.gamma)},{row.iterations},{conv},{_fmt(row.final_residual)}")
        print(f"gamma={_fmt(row.gamma)} iterations={row.iterations} converged={conv}")
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_compare(args) -> int:
    from .oracle import projected_gradient_solve

    sys_, _ = _resolve_problem(args)
    grid = TimeGrid(args.grid, t_final=sys_.t_final)
    projector = build_shooting(sys_, grid)
    run = solve(sys_, projector, DrConfig(epsilon=args.eps, max_iterations=args.max_iter))
    oracle = projected_gradient_solve(sys_, grid, iters=args.oracle_iters, projector=projector)
    dr_obj = run.records[-1].primal_objective
    rel = abs(dr_obj - oracle.objective) / (1.0 + abs(oracle.objective))
    print(
        f"dr_objective={_fmt(dr_obj)} oracle_objective={_fmt(oracle.objective)} "
        f"rel_diff={_fmt(rel)} dr_converged={str(run.converged).lower()} "
        f"oracle_converged={str(oracle.converged).lower()}"
    )
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drcontrol",
        description="Constrained minimum-energy LQ control via Douglas-Rachford splitting",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run the splitting iteration and write outputs")
    _add_problem_args(p_solve)
    p_solve.add_argument("--gamma", type=float, default=None, help="default 1/(1+r)")
    p_solve.add_argument("--eps", type=float, default=1e-8, help="stopping tolerance")
    p_solve.add_argument("--max-iter", type=int, default=10000)
    p_solve.add_argument("--grid", type=int, default=1000, help="number of grid intervals")
    p_solve.add_argument("--out", required=True, help="output directory")
    p_solve.set_defaults(func=cmd_solve)

    p_cert = sub.add_parser("certify", help="verify optimality of a written solution")
    group = p_cert.add_mutually_exclusive_group(required=True)
    group.add_argument("--run", help="directory written by solve")
    group.add_argument("--solution", help="solution.csv path (needs --problem)")
    p_cert.add_argument("--problem", help="problem file for --solution mode")
    p_cert.set_defaults(func=cmd_certify)

    p_sweep = sub.add_parser("sweep", help="iteration counts over a list of gammas")
    _add_problem_args(p_sweep)
    gg = p_sweep.add_mutually_exclusive_group(required=True)
    gg.add_argument("--gammas", help="comma-separated gamma values")
    gg.add_argument("--gamma-range", help="lo:hi:steps")
    p_sweep.add_argument("--eps", type=float, default=1e-8)
    p_sweep.add_argument("--max-iter", type=int, default=10000)
    p_sweep.add_argument("--grid", type=int, default=1000)
    p_sweep.add_argument("--out", default="sweep.csv")
    p_sweep.set_defaults(func=cmd_sweep)

    p_cmp = sub.add_parser("compare", help="splitting solve vs projected-gradient oracle")
    _add_problem_args(p_cmp)
    p_cmp.add_argument("--eps", type=float, default=1e-8)
    p_cmp.add_argument("--max-iter", type=int, default=10000)
    p_cmp.add_argument("--grid", type=int, default=200)
    p_cmp.add_argument("--oracle-iters", type=int, default=200)
    p_cmp.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ProblemValidationError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ControllabilityError, DualRepresentationError, ProjectorUnavailableError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PROJECTOR
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except DrControlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def console_main() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    console_main()
