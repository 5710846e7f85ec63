"""Command-line front end.

Every data command writes a CSV file (one header line, floats with 17
significant digits) and a JSON manifest next to it (``<out>.json``) that
echoes the configuration and records diagnostics. Without ``--out`` the CSV
goes to stdout and no manifest is written.

Physical parameters ``--m --hbar --L --zeta`` enter only here; the library
works in dimensionless units.

Exit codes: 0 success, 2 invalid input, 3 numerical non-convergence.
"""
from __future__ import annotations

import argparse
import io
import json
import os
import platform
import sys
from importlib import metadata

import numpy as np

from .exceptions import ConvergenceError
from .params import PhysicalParams

EXIT_OK, EXIT_INPUT, EXIT_CONVERGENCE = 0, 2, 3
THREADS_ENV = "PSEUDOHERM_THREADS"

# figure number -> (manifest quantity, what is tabulated)
FIGURES = {
    1: ("fig1", "Re omega_0, Re omega_2"),
    2: ("fig2", "Im omega_1, Im omega_3"),
    3: ("fig3", "Re omega_4, Im omega_5"),
    4: ("fig4", "a_0, a_1, a_2"),
    5: ("fig5", "m_eff and w"),
    6: ("fig6", "phase-space trajectories of H_c"),
}


# -- formatting ----------------------------------------------------------------


def fmt(v) -> str:
    """17 significant digits, round-trip exact; integers and labels as is."""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    return "0" if v == 0 else format(v, ".17g")


def fmt_complex(z) -> str:
    z = complex(z)
    return f"{fmt(z.real)}{'-' if np.signbit(z.imag) else '+'}{fmt(abs(z.imag))}i"


def write_csv(path, header, rows):
    """Write rows (iterables of numbers or labels); ``path=None`` prints."""
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    if path is None:
        sys.stdout.write(buf.getvalue())
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(buf.getvalue())


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _versions():
    import scipy

    try:
        own = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        own = "unknown"
    return {"artifact": own, "python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__}


def write_manifest(out, quantity, args, diagnostics=None, files=None):
    if out is None:
        return
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "config")}
    manifest = {
        "quantity": quantity,
        "command": args.command,
        "config": config,
        "versions": _versions(),
        "threads": os.environ.get(THREADS_ENV),
        "files": files or [os.path.basename(out)],
        "diagnostics": diagnostics or {},
    }
    with open(out + ".json", "w") as fh:
        json.dump(_jsonable(manifest), fh, indent=2, sort_keys=True)
        fh.write("\n")


# -- argument helpers ----------------------------------------------------------


def grid_spec(text):
    """``lo,hi,n`` -> uniform grid."""
    try:
        lo, hi, n = text.split(",")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo,hi,n, got {text!r}") from None
    if n < 2 or not hi > lo:
        raise argparse.ArgumentTypeError("grid needs hi > lo and n >= 2")
    return [lo, hi, n]


def float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _grid(spec):
    lo, hi, n = spec
    return np.linspace(lo, hi, int(n))


def _params(args) -> PhysicalParams:
    return PhysicalParams(m=args.m, hbar=args.hbar, L=args.L, zeta=args.zeta)


# -- commands ----------------------------------------------------------------


def _kernel_function(name, params, physical):
    from .hequiv import h2_kernel
    from .metric import eta1_kernel
    from .observables import (
        p_kernel,
        p_kernel_physical,
        x_kernel,
        x_kernel_physical,
        xi_kernel,
        xi_kernel_physical,
    )

    if not physical:
        return {"eta1": eta1_kernel, "X": x_kernel, "P": p_kernel, "xi": xi_kernel, "h2": h2_kernel}[name]
    Z = params.scale().Z
    s = params.to_dimless_x
    if name == "eta1":
        return lambda x, y: Z * params.kernel_to_physical(eta1_kernel(s(x), s(y)))
    if name == "h2":
        # h = E_scale h~; the O(zeta^2) part is E_scale Z^2 h2 with the kernel factor
        return lambda x, y: params.energy_scale * Z**2 * params.kernel_to_physical(h2_kernel(s(x), s(y)))
    return {
        "X": lambda x, y: x_kernel_physical(x, y, params),
        "P": lambda x, y: p_kernel_physical(x, y, params),
        "xi": lambda x, y: xi_kernel_physical(x, y, params),
    }[name]


def cmd_kernel(args):
    params = _params(args)
    f = _kernel_function(args.operator, params, args.physical)
    if args.grid is None:
        if args.x is None or args.y is None:
            raise ValueError("give --x and --y, or --grid")
        print(fmt_complex(complex(np.asarray(f(args.x, args.y)))))
        return
    g = _grid(args.grid)
    X, Y = np.meshgrid(g, g, indexing="ij")
    K = np.asarray(f(X, Y), dtype=complex)
    rows = zip(X.ravel(), Y.ravel(), K.real.ravel(), K.imag.ravel())
    write_csv(args.out, ("x", "y", "re", "im"), rows)
    write_manifest(args.out, args.operator, args, {"units": "physical" if args.physical else "dimensionless"})


def _coeff_table(args):
    from .hequiv import extract_coeffs

    return extract_coeffs(np.linspace(-4.0, 4.0, args.n_grid), convention=args.convention)


def _table_diagnostics(table):
    meta = table.metadata
    return {
        "convention": table.convention,
        "max_imag_even_omega": meta["max_imag_even"],
        "max_real_odd_omega": meta["max_real_odd"],
        "max_parity_defect_a": meta["max_parity_defect"],
        "pole_residue_rule": "-i nu(x)/4",
        "max_abs_pole_residue": float(np.max(np.abs(table.pole_residues))),
        "a_delta_weights": table.delta_weights,
    }


def cmd_coeffs(args):
    table = _coeff_table(args)
    params = _params(args)
    _, alpha = table.alpha(params)
    header = ["x"]
    for n in range(table.omega.shape[0]):
        header += [f"re_w{n}", f"im_w{n}"]
    header += [f"a{n}" for n in range(table.a.shape[0])] + [f"alpha{n}" for n in range(alpha.shape[0])]
    rows = []
    for i, x in enumerate(table.grid):
        row = [x]
        for w in table.omega[:, i]:
            row += [w.real, w.imag]
        rows.append(row + list(table.a[:, i]) + list(alpha[:, i]))
    write_csv(args.out, header, rows)
    diag = _table_diagnostics(table)
    diag["alpha_sampled_at"] = "x_phys = x L / 2"
    write_manifest(args.out, "coeffs", args, diag)


def _omega_figure(table, columns):
    rows = []
    for i, x in enumerate(table.grid):
        row = [x]
        for n, part in columns:
            w = table.omega[n, i]
            row.append(w.real if part == "re" else w.imag)
        rows.append(row)
    header = ["x"] + [f"{part}_w{n}" for n, part in columns]
    return header, rows


def _meff_rows(args, params, table):
    from .hequiv import effective_mass, w_potential

    x = _grid(args.x_grid) if args.x_grid is not None else np.linspace(-4.0, 4.0, 801) * params.length_scale
    m_eff = effective_mass(x, params, table)
    w = w_potential(x, params, table)
    return ("x", "m_eff", "w"), list(zip(x, m_eff, w))


def _portrait(args, params, table):
    from .classical import DEFAULT_P0, ClassicalHamiltonian, phase_portrait

    H = ClassicalHamiltonian(params, table)
    p0s = args.p0 if args.p0 else DEFAULT_P0
    initial = [(args.x0, p) for p in p0s]
    portrait = phase_portrait(H, initial, t_end=args.t_end, dt=args.dt, record_every=args.record_every)
    rows = []
    for j, (traj, label) in enumerate(zip(portrait.trajectories, portrait.classes)):
        for t, x, p, E in zip(traj.t, traj.x, traj.p, traj.energy):
            rows.append((j, t, x, p, E, label))
    diag = {
        "initial": portrait.initial,
        "classes": portrait.classes,
        "max_relative_energy_drift": max(t.energy_drift for t in portrait.trajectories),
    }
    return ("traj_id", "t", "x", "p", "E", "class"), rows, diag


def cmd_classical(args):
    params = _params(args)
    table = _coeff_table(args)
    if args.what == "meff":
        header, rows = _meff_rows(args, params, table)
        write_csv(args.out, header, rows)
        write_manifest(args.out, "meff", args, _table_diagnostics(table))
    else:
        header, rows, diag = _portrait(args, params, table)
        write_csv(args.out, header, rows)
        write_manifest(args.out, "portrait", args, diag)


def cmd_figures(args):
    quantity, _ = FIGURES[args.fig]
    table = _coeff_table(args)
    diag = _table_diagnostics(table)
    if args.fig in (1, 2, 3):
        cols = {1: [(0, "re"), (2, "re")], 2: [(1, "im"), (3, "im")], 3: [(4, "re"), (5, "im")]}[args.fig]
        header, rows = _omega_figure(table, cols)
    elif args.fig == 4:
        header = ["x"] + [f"a{n}" for n in range(3)]
        rows = [[x, *table.a[:3, i]] for i, x in enumerate(table.grid)]
    elif args.fig == 5:
        header, rows = _meff_rows(args, _params(args), table)
    else:
        header, rows, extra = _portrait(args, _params(args), table)
        diag.update(extra)
    write_csv(args.out, header, rows)
    write_manifest(args.out, quantity, args, diag)


def cmd_evolve(args):
    from .dynamics import EvolutionRun, evolve, gaussian_packet

    params = _params(args)
    x0, p0, sigma = args.packet
    ls = params.length_scale
    Z = params.scale().Z
    n = int(round(2 * args.box / args.h))
    grid = np.linspace(-args.box, args.box, n + 1)
    psi = gaussian_packet(grid, x0 / ls, params.to_dimless_p(p0), sigma / ls)
    # exp(-i H t / hbar) = exp(-i H~ t~) with t~ = t E_scale / hbar
    tscale = params.energy_scale / params.hbar
    run = EvolutionRun(grid, psi, Z)
    evolve(run, args.t_end * tscale, args.dt * tscale, args.record_every)
    rows = [(t / tscale, l2, eta, xm * ls) for t, l2, eta, xm in run.norm_log]
    write_csv(args.out, ("t", "l2_norm", "eta_norm", "x_mean"), rows)
    log = np.array(run.norm_log)
    diag = {
        "Z": Z,
        "l2_change": float(np.max(np.abs(log[:, 1] - log[0, 1]))),
        "eta_drift": float(np.max(np.abs(log[:, 2] - log[0, 2]))),
    }
    write_manifest(args.out, "evolve", args, diag)


def cmd_localized(args):
    from .observables import localized_state

    params = _params(args)
    Z = params.scale().Z
    g = _grid(args.grid)
    ls = params.length_scale
    state = localized_state(args.y / ls, Z)
    vals = params.kernel_to_physical(state(g / ls))
    write_csv(args.out, ("x", "re", "im"), zip(g, vals.real, vals.imag))
    write_manifest(args.out, "xi", args, {"Z": Z, "delta_part": "delta(x - y), not sampled"})


def cmd_density(args):
    from .observables import physical_density

    params = _params(args)
    try:
        data = np.loadtxt(args.state, delimiter=",", skiprows=1, ndmin=2)
    except OSError as exc:
        raise ValueError(str(exc)) from None
    if data.shape[1] != 3:
        raise ValueError("state file needs columns x, re, im")
    x, psi = data[:, 0], data[:, 1] + 1j * data[:, 2]
    ls = params.length_scale
    rho = physical_density(psi, x / ls, params.scale().Z) / ls
    write_csv(args.out, ("x", "rho"), zip(x, rho))
    write_manifest(args.out, "density", args, {"Z": params.scale().Z})


def cmd_spectral_check(args):
    from .metric import BLOCK_LABELS, INTERVALS, ORACLE_PAIRS, eta1_kernel, eta1_spectral_oracle

    pairs = list(ORACLE_PAIRS[: args.pairs])
    rng = np.random.default_rng(args.seed)
    while len(pairs) < args.pairs:
        # extra pairs: random block, points inside it (half-lines cut at 4)
        mu, nu = rng.choice(BLOCK_LABELS, size=2)
        pt = []
        for label in (mu, nu):
            lo, hi = INTERVALS[label]
            pt.append(float(rng.uniform(max(lo, -4.0), min(hi, 4.0))))
        pairs.append(tuple(pt))
    rows, worst = [], 0.0
    for x, y in pairs:
        est = eta1_spectral_oracle(x, y)
        exact = complex(eta1_kernel(x, y))
        err = abs(est.value - exact)
        worst = max(worst, err)
        rows.append((x, y, est.value.real, est.value.imag, exact.imag, err, est.extrapolation_error))
    write_csv(args.out, ("x", "y", "re_oracle", "im_oracle", "im_closed", "abs_error", "extrap_error"), rows)
    write_manifest(args.out, "eta1", args, {"max_abs_error": worst, "tol": args.tol})
    if worst > args.tol:
        raise ConvergenceError(f"oracle and closed form differ by {worst:.3e} > {args.tol:.1e}")


# -- parser ----------------------------------------------------------------


def _add_params(p):
    g = p.add_argument_group("physical parameters")
    g.add_argument("--m", type=float, default=0.5)
    g.add_argument("--hbar", type=float, default=1.0)
    g.add_argument("--L", type=float, default=2.0)
    g.add_argument("--zeta", type=float, default=1.0 / 3.0)
    p.add_argument("--out", default=None, help="CSV path; a manifest <out>.json is written beside it")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", default=None, help="JSON file with option defaults (flag names as keys)")


def _add_table_opts(p):
    p.add_argument("--n-grid", type=int, default=801, help="points of the coefficient grid on [-4, 4]")
    p.add_argument("--convention", choices=("origin", "symbol"), default="origin")


def _add_portrait_opts(p):
    p.add_argument("--x0", type=float, default=0.0)
    p.add_argument("--p0", type=float_list, default=None, help="comma-separated initial momenta")
    p.add_argument("--t-end", type=float, default=40.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--record-every", type=int, default=10)
    p.add_argument("--x-grid", type=grid_spec, default=None, help="lo,hi,n in physical x (m_eff data)")


def build_parser():
    parser = argparse.ArgumentParser(prog="pseudoherm", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    p = sub.add_parser("kernel", help="sample an O(Z) operator kernel")
    p.add_argument("operator", choices=("eta1", "X", "P", "xi", "h2"))
    p.add_argument("--x", type=float)
    p.add_argument("--y", type=float)
    p.add_argument("--grid", type=grid_spec, default=None, help="lo,hi,n; samples all pairs")
    p.add_argument("--physical", action="store_true", help="physical units (kernel times its zeta power)")
    p.set_defaults(func=cmd_kernel)
    subs["kernel"] = p

    p = sub.add_parser("coeffs", help="omega_n, a_n and alpha_n table")
    _add_table_opts(p)
    p.set_defaults(func=cmd_coeffs)
    subs["coeffs"] = p

    p = sub.add_parser("classical", help="phase portrait or effective mass")
    p.add_argument("what", choices=("portrait", "meff"))
    _add_table_opts(p)
    _add_portrait_opts(p)
    p.set_defaults(func=cmd_classical)
    subs["classical"] = p

    p = sub.add_parser("evolve", help="wave-packet run with both norms")
    p.add_argument("--packet", type=float_list, default=[-8.0, 2.0, 2.0], help="x0,p0,sigma (physical)")
    p.add_argument("--t-end", type=float, default=4.0)
    p.add_argument("--dt", type=float, default=2e-3)
    p.add_argument("--box", type=float, default=40.0, help="half-width, dimensionless")
    p.add_argument("--h", type=float, default=0.02, help="grid step, dimensionless")
    p.add_argument("--record-every", type=int, default=20)
    p.set_defaults(func=cmd_evolve)
    subs["evolve"] = p

    p = sub.add_parser("localized", help="O(zeta) part of a localized state")
    p.add_argument("--y", type=float, required=False, default=0.0)
    p.add_argument("--grid", type=grid_spec, default=[-4.0, 4.0, 401])
    p.set_defaults(func=cmd_localized)
    subs["localized"] = p

    p = sub.add_parser("density", help="physical position density of a sampled state")
    p.add_argument("--state", required=False, default=None, help="CSV with columns x, re, im")
    p.set_defaults(func=cmd_density)
    subs["density"] = p

    p = sub.add_parser("spectral-check", help="spectral oracle against the closed-form metric")
    p.add_argument("--pairs", type=int, default=20)
    p.add_argument("--tol", type=float, default=1e-3)
    p.set_defaults(func=cmd_spectral_check)
    subs["spectral-check"] = p

    p = sub.add_parser("figures", help="figure data sets 1-6")
    p.add_argument("--fig", type=int, choices=sorted(FIGURES), required=False, default=None)
    _add_table_opts(p)
    _add_portrait_opts(p)
    p.set_defaults(func=cmd_figures)
    subs["figures"] = p

    for p in subs.values():
        _add_params(p)
    return parser, subs


def _load_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"cannot read config {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise ValueError("config must be a JSON object")
    return {k.replace("-", "_"): v for k, v in cfg.items()}


def _validate(args):
    if args.command == "density" and args.state is None:
        raise ValueError("density needs --state")
    if args.command == "figures" and args.fig is None:
        raise ValueError("figures needs --fig")
    if args.command == "evolve" and len(args.packet) != 3:
        raise ValueError("--packet takes x0,p0,sigma")
    if args.command == "spectral-check" and args.pairs < 1:
        raise ValueError("--pairs must be positive")


def run(argv=None) -> int:
    """Parse ``argv`` and run one command; returns the exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subs = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        if args.config:
            # config values become defaults; explicit flags still win
            cfg = _load_config(args.config)
            sp = subs[args.command]
            known = {a.dest for a in sp._actions}
            unknown = sorted(set(cfg) - known)
            if unknown:
                raise ValueError(f"unknown config keys: {unknown}")
            sp.set_defaults(**cfg)
            args = parser.parse_args(argv)
        _validate(args)
        _params(args)
        args.func(args)
    except (ConvergenceError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
