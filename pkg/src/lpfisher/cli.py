"""Command-line front end: geodesic solvers that write plot-ready CSV.

Exit codes: 0 success, 1 usage error, 2 solver failure, 3 positivity loss
(the path left the space; the partial path is still written).
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import dens, parametric, prob_alpha, prob_lp, tensors
from .errors import PositivityError, SolverError
from .families import load_density, load_velocity
from .grid import GridSpec, TangentField, fp_norm

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_POSITIVITY = 0, 1, 2, 3
FIGURE_P = (2.0, 3.0, 5.0, 10.0)
FIG2_MU0, FIG2_MU1 = "bump(0.3,0.1)", "bump(0.7,0.1)"
FIG3_THETA0, FIG3_THETA1 = (-2.0, 1.0), (2.0, 1.0)

log = logging.getLogger("lpfisher")


class UsageError(Exception):
    pass


def _exponents(args):
    if args.p is None and args.alpha is None:
        raise UsageError("one of --p or --alpha is required")
    if args.alpha is not None:
        if not -1 < args.alpha < 1:
            raise UsageError("--alpha must lie in (-1, 1)")
        return 2.0 / (1.0 - args.alpha), args.alpha
    if not args.p > 1:
        raise UsageError("--p must exceed 1")
    return args.p, 1.0 - 2.0 / args.p


def _header(command, p, alpha, **extra):
    parts = [f"p={p!r}", f"alpha={alpha!r}"] + [f"{k}={v}" for k, v in extra.items()]
    return f"# lpfisher {command} " + " ".join(parts)


def _fmt(v):
    # repr round-trips floats exactly, which keeps outputs byte-identical
    return str(int(v)) if isinstance(v, (int, np.integer)) else repr(float(v))


def _write_rows(out, header, columns, rows):
    lines = [header, ",".join(columns)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _write_path(out, header, path):
    cols = ["t"] + [f"f{i}" for i in range(path.grid.n)]
    rows = np.column_stack([path.times, path.values])
    _write_rows(out, header, cols, rows)


def _grid(args):
    return GridSpec.uniform(args.grid_n)


def _need(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required for {args.command}")


def _times(args, default):
    steps = args.steps or default
    if steps < 2:
        raise UsageError("--steps must be at least 2")
    return np.linspace(0.0, 1.0, steps)


def cmd_dens_geodesic(args):
    _need(args, "mu0", "mu1")
    p, alpha = _exponents(args)
    grid = _grid(args)
    mu0, mu1 = load_density(args.mu0, grid), load_density(args.mu1, grid)
    path = dens.geodesic_bvp_dens(mu0, mu1, p, _times(args, 30))
    _write_path(args.out, _header(args.command, p, alpha, mu0=args.mu0, mu1=args.mu1), path)
    return EXIT_OK


def cmd_dens_exp(args):
    _need(args, "mu0", "velocity")
    p, alpha = _exponents(args)
    grid = _grid(args)
    mu0, a = load_density(args.mu0, grid), load_velocity(args.velocity, grid)
    res = dens.geodesic_ivp_dens(mu0, a, p, _times(args, 30) * args.t_end)
    header = _header(args.command, p, alpha, mu0=args.mu0, velocity=args.velocity, blowup_time=repr(res.blowup_time))
    _write_path(args.out, header, res.path)
    if res.left_space:
        print(f"geodesic leaves the space at t={res.blowup_time!r}", file=sys.stderr)
        return EXIT_POSITIVITY
    return EXIT_OK


def cmd_distance(args):
    _need(args, "mu0", "mu1")
    p, alpha = _exponents(args)
    grid = _grid(args)
    d = dens.distance_dens(load_density(args.mu0, grid), load_density(args.mu1, grid), p)
    _write_rows(args.out, _header(args.command, p, alpha, mu0=args.mu0, mu1=args.mu1), ["distance"], [[d]])
    return EXIT_OK


def cmd_prob_alpha(args):
    p, alpha = _exponents(args)
    grid = _grid(args)
    times = _times(args, 30)
    if args.mode == "bvp":
        _need(args, "mu0", "mu1")
        mu0, mu1 = load_density(args.mu0, grid), load_density(args.mu1, grid)
        res = prob_alpha.alpha_geodesic_prob(mu0, mu1, p, "bvp", times * 1.0)
        header = _header(args.command, p, alpha, mode="bvp", mu0=args.mu0, mu1=args.mu1)
    else:
        _need(args, "mu0", "velocity")
        mu0 = load_density(args.mu0, grid)
        a = load_velocity(args.velocity, grid)
        if not a.is_prob_tangent(1e-10):
            log.warning("velocity has mass %.3g; removing its mean", a.mass)
            a = a.mean_free()
        res = prob_alpha.alpha_geodesic_prob(mu0, a, p, "ivp", times * args.t_end)
        header = _header(
            args.command, p, alpha, mode="ivp", mu0=args.mu0, velocity=args.velocity, exit_time=repr(res.blowup_time)
        )
    _write_path(args.out, header, res.path)
    if args.tau_out:
        tau = res.tau
        _write_rows(args.tau_out, header, ["t", "tau", "tau_dot"], np.column_stack([tau.times, tau.tau, tau.tau_dot]))
    if res.left_space:
        print(f"geodesic leaves Prob at t={res.blowup_time!r}", file=sys.stderr)
        return EXIT_POSITIVITY
    return EXIT_OK


def cmd_prob_lp(args):
    _need(args, "mu0", "mu1")
    p, alpha = _exponents(args)
    grid = _grid(args)
    mu0, mu1 = load_density(args.mu0, grid), load_density(args.mu1, grid)
    res = prob_lp.lp_geodesic_prob_bvp(
        mu0, mu1, p, T=args.steps or 30, max_iter=args.max_iter or 20000, tol=args.tol or 1e-8
    )
    header = _header(
        args.command, p, alpha, mu0=args.mu0, mu1=args.mu1, iterations=res.iterations, converged=res.converged
    )
    _write_path(args.out, header, res.path)
    if args.energy_out:
        _write_rows(args.energy_out, header, ["iteration", "energy"], enumerate(res.energy_trace))
    if not res.converged:
        print(f"minimizer did not converge: {res.message}", file=sys.stderr)
        return EXIT_SOLVER
    if res.flagged_frames.size:
        print(f"frames {res.flagged_frames.tolist()} have nonpositive nodes", file=sys.stderr)
        return EXIT_POSITIVITY
    return EXIT_OK


def _theta(text, flag):
    try:
        m, s = (float(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"{flag} expects 'm,s'") from None
    if not s > 0:
        raise UsageError(f"{flag}: sigma must be positive")
    return m, s


def _normal_path(kind, p, alpha, theta0, theta1, steps, tol, model=None):
    if kind == "lp":
        model = model or parametric.NormalModel()
        rhs = lambda s: parametric.lp_geodesic_rhs(model, s, p)
    else:
        rhs = lambda s: parametric.alpha_normal_rhs(s, alpha)
    return parametric.shoot_bvp(rhs, theta0, theta1, steps, tol=tol)


def cmd_normal(args):
    p, alpha = _exponents(args)
    theta0, theta1 = _theta(args.theta0, "--theta0"), _theta(args.theta1, "--theta1")
    kind = args.kind or ("alpha" if args.alpha is not None else "lp")
    steps = args.steps or 50
    traj = _normal_path(kind, p, alpha, theta0, theta1, steps, args.tol or 1e-10)
    t = np.linspace(0.0, 1.0, steps)
    header = _header(args.command, p, alpha, kind=kind, theta0=args.theta0, theta1=args.theta1)
    _write_rows(args.out, header, ["t", "m", "sigma", "m_dot", "sigma_dot"], np.column_stack([t, traj]))
    return EXIT_OK


def tensor_check_table(ps=(1.5, 2.0, 3.0, 5.0), n=100, seed=0, trials=5):
    """Rows (tensor, p, max relative oracle error) on random smooth directions."""
    rng = np.random.default_rng(seed)
    grid = GridSpec.uniform(n)
    x = grid.nodes
    mu = load_density("bump(0.5,0.4)", grid)
    nu = TangentField(grid, 1.0 + 0.3 * np.cos(3 * x))

    def rand():
        return TangentField(grid, sum(rng.normal() * np.cos(math.pi * k * x) for k in range(4)))

    rows = []
    for p in ps:
        ctx = tensors.TensorContext(mu, nu, p)
        scale = fp_norm(mu, nu, p)
        h_err = c_err = 0.0
        for _ in range(trials):
            a, b, c = rand(), rand(), rand()
            h = tensors.hessian_g(ctx, a, b)
            h_err = max(h_err, abs(h - tensors.hessian_fd(ctx, a, b)) / max(abs(h), scale**2 * 1e-12))
            C = tensors.cartan_C(ctx, a, b, c)
            # at p=2 C vanishes and the error is reported relative to F_p^2
            denom = abs(C) if p != 2 else scale**2
            c_err = max(c_err, abs(C - tensors.cartan_fd(ctx, a, b, c)) / denom)
        rows.append(("hessian_g", p, h_err))
        rows.append(("cartan_C", p, c_err))
    return rows


def cmd_check_tensors(args):
    ps = (_exponents(args)[0],) if (args.p is not None or args.alpha is not None) else (1.5, 2.0, 3.0, 5.0)
    rows = tensor_check_table(ps, n=args.grid_n)
    text = "tensor,p,max_rel_error\n" + "".join(f"{name},{p!r},{err:.3e}\n" for name, p, err in rows)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def run_figure(args):
    """Write every geodesic notion of a figure preset into the --out directory."""
    outdir = Path(args.out or ".")
    outdir.mkdir(parents=True, exist_ok=True)
    status = EXIT_OK
    if args.figure == 2:
        grid = _grid(args)
        src0, src1 = args.mu0 or FIG2_MU0, args.mu1 or FIG2_MU1
        mu0, mu1 = load_density(src0, grid), load_density(src1, grid)
        T = args.steps or 30
        times = np.linspace(0.0, 1.0, T)
        for p in FIGURE_P:
            alpha = 1.0 - 2.0 / p
            header = _header("figure-2", p, alpha, mu0=src0, mu1=src1)
            tag = f"p{p:g}"
            _write_path(outdir / f"dens_{tag}.csv", header, dens.geodesic_bvp_dens(mu0, mu1, p, times))
            res_a = prob_alpha.alpha_geodesic_prob(mu0, mu1, p, "bvp", times)
            _write_path(outdir / f"prob_alpha_{tag}.csv", header, res_a.path)
            res_l = prob_lp.lp_geodesic_prob_bvp(mu0, mu1, p, T=T, max_iter=args.max_iter or 20000, tol=args.tol or 1e-8)
            _write_path(outdir / f"prob_lp_{tag}.csv", header, res_l.path)
            if not res_l.converged:
                print(f"p={p:g}: minimizer did not converge: {res_l.message}", file=sys.stderr)
                status = EXIT_SOLVER
    else:
        theta0 = _theta(args.theta0, "--theta0") if args.theta0 else FIG3_THETA0
        theta1 = _theta(args.theta1, "--theta1") if args.theta1 else FIG3_THETA1
        steps = args.steps or 50
        t = np.linspace(0.0, 1.0, steps)
        model = parametric.NormalModel()
        for p in FIGURE_P:
            alpha = 1.0 - 2.0 / p
            for kind in ("lp", "alpha"):
                traj = _normal_path(kind, p, alpha, theta0, theta1, steps, args.tol or 1e-10, model)
                header = _header("figure-3", p, alpha, kind=kind)
                _write_rows(
                    outdir / f"normal_{kind}_p{p:g}.csv",
                    header,
                    ["t", "m", "sigma", "m_dot", "sigma_dot"],
                    np.column_stack([t, traj]),
                )
    return status


COMMANDS = {
    "dens-geodesic": cmd_dens_geodesic,
    "dens-exp": cmd_dens_exp,
    "distance": cmd_distance,
    "prob-alpha-geodesic": cmd_prob_alpha,
    "prob-lp-geodesic": cmd_prob_lp,
    "normal-geodesic": cmd_normal,
    "check-tensors": cmd_check_tensors,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    exp = common.add_mutually_exclusive_group()
    exp.add_argument("--p", type=float, help="L^p exponent, p > 1")
    exp.add_argument("--alpha", type=float, help="alpha in (-1, 1); sets p = 2/(1 - alpha)")
    common.add_argument("--grid-n", type=int, default=100, help="grid nodes (default 100)")
    common.add_argument("--steps", type=int, help="time points (default 30, or 50 for normal-geodesic)")
    common.add_argument("--tol", type=float, help="solver tolerance")
    common.add_argument("--max-iter", type=int, help="iteration cap for the energy minimizer")
    common.add_argument("--out", help="output CSV path (directory for --figure); stdout if omitted")
    common.add_argument("--mu0", help="start density: family call like bump(0.3,0.1) or CSV path")
    common.add_argument("--mu1", help="end density: family call or CSV path")
    common.add_argument("--velocity", help="initial velocity: sin(k,amp), cos(k,amp), const(c) or CSV path")
    common.add_argument("--t-end", type=float, default=1.0, help="final time for initial value problems")
    common.add_argument("--theta0", help="normal start point 'm,s'")
    common.add_argument("--theta1", help="normal end point 'm,s'")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="lpfisher", description=__doc__.splitlines()[0], parents=[common])
    parser.add_argument("--figure", type=int, choices=(2, 3), help="write a figure preset into --out")
    sub = parser.add_subparsers(dest="command")
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "prob-alpha-geodesic":
            sp.add_argument("--mode", choices=("bvp", "ivp"), default="bvp")
            sp.add_argument("--tau-out", help="CSV for the time change (t, tau, tau_dot)")
        if name == "prob-lp-geodesic":
            sp.add_argument("--energy-out", help="CSV for the energy trace (iteration, energy)")
        if name == "normal-geodesic":
            sp.add_argument("--kind", choices=("lp", "alpha"), help="geodesic notion (default follows --p/--alpha)")
    return parser


def _join_negative_values(argv):
    # let "--theta0 -2,1" through; argparse would read "-2,1" as an option
    out = []
    for item in argv:
        if out and out[-1] in ("--theta0", "--theta1") and item.startswith("-"):
            out[-1] = f"{out[-1]}={item}"
        else:
            out.append(item)
    return out


def main(argv=None):
    parser = build_parser()
    argv = _join_negative_values(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors; map to the documented code
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        if args.figure is not None:
            return run_figure(args)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, ValueError) as exc:
        if isinstance(exc, PositivityError):
            print(f"positivity error: {exc}", file=sys.stderr)
            return EXIT_POSITIVITY
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
