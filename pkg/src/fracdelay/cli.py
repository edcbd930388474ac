"""Command-line interface: ``fracdelay <command> ...``.

Exit codes: 0 success, 1 numerical failure, 2 invalid input, 3 check not
applicable to the problem.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .delayed_ml import build_kernel_for, y_eval_grid
from .errors import ApplicabilityError, DimensionError, DomainError, FracDelayError
from .io import ProblemFileError, default_grid, dump_problem, format_float, load_problem, write_csv
from .kernel import kernel_build
from .oracles import compare_with_steps, laplace_check, laplace_margin, residual_check_caputo
from .quadrature import QuadParams
from .solver import solve, uh_constant

CHECKS = ("laplace", "steps", "residual")
LAPLACE_POINTS = 800
RESIDUAL_DT_POINTS = 300
TAIL_EXPONENT = 20.0


class UsageError(Exception):
    pass


def _parse_grid(spec):
    try:
        a, b, n = spec.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError:
        raise UsageError(f"--grid expects a:b:n, got {spec!r}") from None
    if n < 1 or (n > 1 and not b > a):
        raise UsageError(f"--grid needs n >= 1 and b > a, got {spec!r}")
    return np.linspace(a, b, n)


def _parse_times(spec):
    try:
        return np.array(sorted(float(x) for x in spec.split(",") if x.strip()))
    except ValueError:
        raise UsageError(f"--t expects comma-separated numbers, got {spec!r}") from None


def _quad(loaded):
    q = loaded.quad
    return QuadParams(qtol=q.qtol, max_levels=q.max_levels, chunk_nodes=q.chunk_nodes)


def cmd_eval_y(args):
    loaded = load_problem(args.problem)
    prob = loaded.problem
    if not args.gamma > 0:
        raise UsageError(f"--gamma must be positive, got {args.gamma}")
    if args.t is not None:
        t = _parse_times(args.t)
    elif args.grid is not None:
        t = _parse_grid(args.grid)
    else:
        t = default_grid(loaded)
    table = build_kernel_for(prob.a, prob.omega, prob.mu, [args.gamma], prob.h, float(t.max(initial=0.0)),
                             loaded.series)
    ys = y_eval_grid(table, prob.mu, args.gamma, prob.h, t, loaded.series)
    d = prob.dim
    header = ["t"] + [f"Y_{i + 1}{j + 1}" for i in range(d) for j in range(d)]
    write_csv(args.out, header, ([ti] + list(y.reshape(-1)) for ti, y in zip(t, ys)))
    return 0


def cmd_solve(args):
    loaded = load_problem(args.problem)
    prob = loaded.problem
    grid = default_grid(loaded)
    traj = solve(prob, grid, loaded.series, _quad(loaded))
    header = ["t"] + [f"z_{i + 1}" for i in range(prob.dim)]
    write_csv(args.out, header, ([t] + list(z) for t, z in zip(traj.grid, traj.values)))
    if args.uh:
        print(f"C = {format_float(uh_constant(prob, loaded.series, _quad(loaded)))}")
    return 0


def applicable_checks(prob):
    out = ["laplace"]
    if prob.mu == 2.0:
        out.append("steps")
    if prob.nu == 1.0 and prob.mu < 2.0:
        out.append("residual")
    return out


def _run_check(name, loaded):
    prob = loaded.problem
    sp, qp = loaded.series, _quad(loaded)
    if name == "laplace":
        # past the margin, and far enough that e^{-(s - g) T} (g = margin / 2) is negligible
        margin = laplace_margin(prob)
        s_min = max(1.5 * margin, 0.5 * margin + TAIL_EXPONENT / prob.T)
        s_values = [s_min * k for k in (1.0, 1.5, 2.0, 3.0, 4.0)]
        grid = np.linspace(0.0, prob.T, LAPLACE_POINTS + 1)[1:]
        return laplace_check(prob, solve(prob, grid, sp, qp), s_values)
    if name == "steps":
        if prob.mu != 2.0:
            raise ApplicabilityError(f"check 'steps' needs mu = 2, problem has mu = {prob.mu}")
        return compare_with_steps(prob, default_grid(loaded), sp=sp, qp=qp)
    if prob.nu != 1.0 or not prob.mu < 2.0:
        raise ApplicabilityError(
            f"check 'residual' needs nu = 1 and mu < 2, problem has mu = {prob.mu}, nu = {prob.nu}"
        )
    dt = prob.T / RESIDUAL_DT_POINTS
    grid = np.arange(1, RESIDUAL_DT_POINTS + 1) * dt
    return residual_check_caputo(prob, solve(prob, grid, sp, qp), dt, sp=sp, qp=qp)


def cmd_verify(args):
    loaded = load_problem(args.problem)
    if args.checks:
        names = [c.strip() for c in args.checks.split(",") if c.strip()]
        unknown = [c for c in names if c not in CHECKS]
        if unknown:
            raise UsageError(f"unknown checks {unknown}; choose from {list(CHECKS)}")
    else:
        names = applicable_checks(loaded.problem)
    # applicability is settled before any expensive work
    for name in names:
        if name not in applicable_checks(loaded.problem):
            prob = loaded.problem
            raise ApplicabilityError(
                f"check '{name}' does not apply to mu = {prob.mu}, nu = {prob.nu}"
                + (" (steps needs mu = 2)" if name == "steps" else " (residual needs nu = 1, mu < 2)")
            )
    reports = [_run_check(name, loaded) for name in names]
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump([r.to_dict() for r in reports], fh, indent=2)
            fh.write("\n")
    print(f"{'check':<10}{'max residual':>16}{'threshold':>14}  result")
    for r in reports:
        print(f"{r.check:<10}{r.max_residual:>16.4e}{r.threshold:>14.4e}  {'pass' if r.passed else 'FAIL'}")
    return 0 if all(r.passed for r in reports) else 1


def cmd_kernel_dump(args):
    loaded = load_problem(args.problem)
    if args.kmax < 0:
        raise UsageError("--kmax must be non-negative")
    table = kernel_build(loaded.problem.a, loaded.problem.omega, args.kmax)
    d = table.dim
    rows = []
    for k in range(args.kmax + 1):
        for m in range(k + 1):
            q = table.rows[k][m]
            rows += [[str(k), str(m), str(i), str(j), q[i, j]] for i in range(d) for j in range(d)]
    write_csv(args.out, ["k", "m", "i", "j", "value"], rows)
    return 0


def cmd_echo_config(args):
    text = dump_problem(load_problem(args.problem))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="fracdelay", description="Delayed Hilfer-type fractional systems.")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval-y", help="evaluate the delayed Mittag-Leffler matrix function")
    e.add_argument("--problem", required=True)
    e.add_argument("--gamma", type=float, required=True)
    grp = e.add_mutually_exclusive_group()
    grp.add_argument("--grid", help="a:b:n uniform grid")
    grp.add_argument("--t", help="comma-separated times")
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_eval_y)

    s = sub.add_parser("solve", help="evaluate the solution on the problem grid")
    s.add_argument("--problem", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--uh", action="store_true", help="also print the Ulam-Hyers constant")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="run oracle checks")
    v.add_argument("--problem", required=True)
    v.add_argument("--checks", help="comma-separated subset of laplace,steps,residual (default: all applicable)")
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    k = sub.add_parser("kernel-dump", help="write the kernel table as CSV")
    k.add_argument("--problem", required=True)
    k.add_argument("--kmax", type=int, required=True)
    k.add_argument("--out", required=True)
    k.set_defaults(func=cmd_kernel_dump)

    c = sub.add_parser("echo-config", help="re-serialize a problem file")
    c.add_argument("--problem", required=True)
    c.add_argument("--out")
    c.set_defaults(func=cmd_echo_config)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ApplicabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (UsageError, ProblemFileError, DomainError, DimensionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FracDelayError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
