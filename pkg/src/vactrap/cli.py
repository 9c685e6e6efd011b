"""Command-line interface.

Subcommands: analytic | optimize | ground | decay | trap | sweep.  Every run
writes its outputs plus ``resolved.cfg`` (canonical config) and
``manifest.json`` into the output directory; reruns with the same config and
seed are byte-identical except for the manifest wall-time field.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import csv
import json
import math
import sys
import time

import numpy as np

from . import __version__, analytic
from .config import emit_resolved, resolve
from .errors import (ConfigError, DegenerateDenominator, DegenerateInput,
                     EmptyChannel, InvalidGrid, NoConvergence, StepTooLarge,
                     Timeout, Unbounded, VacTrapError)
from .evolution import ground_state, no_jump_decay_time
from .grid import (CH_E0, CH_G0, CH_G1, gaussian_state, make_grid,
                   save_state_csv, validate_grid)
from .montecarlo import run_ensemble
from .params import Severity, validate
from .units import parse_frequency

NUMERICAL_ERRORS = (DegenerateDenominator, DegenerateInput, Unbounded,
                    StepTooLarge, NoConvergence, Timeout, EmptyChannel)

FMT = "{:.12e}".format


def _fail(code, message):
    print(f"error: {message}", file=sys.stderr)
    sys.exit(code)


class _Run:
    """Collects outputs and writes resolved config + manifest at the end."""

    def __init__(self, outdir, command, setup):
        import os
        self.outdir = outdir
        self.command = command
        self.setup = setup
        self.outputs = []
        self.t0 = time.monotonic()
        os.makedirs(outdir, exist_ok=True)

    def path(self, name):
        import os
        self.outputs.append(name)
        return os.path.join(self.outdir, name)

    def write_csv(self, name, header, rows):
        with open(self.path(name), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in rows:
                w.writerow([FMT(v) if isinstance(v, float) else v
                            for v in row])

    def finish(self, seeds=()):
        import os
        cfg_text = emit_resolved(self.setup)
        with open(os.path.join(self.outdir, "resolved.cfg"), "w") as fh:
            fh.write(cfg_text)
        manifest = {
            "command": self.command,
            "version": __version__,
            "resolved_config": cfg_text,
            "seeds": list(seeds),
            "outputs": sorted(self.outputs) + ["resolved.cfg"],
            "wall_time_s": time.monotonic() - self.t0,
        }
        with open(os.path.join(self.outdir, "manifest.json"), "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _load_setup(args):
    config_text = None
    if args.config:
        try:
            with open(args.config) as fh:
                config_text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
    return resolve(preset=args.preset, config_text=config_text,
                   overrides=args.set or ())


def _report_diagnostics(diags):
    errors = [d for d in diags if d.severity is Severity.ERROR]
    for d in diags:
        print(f"{d.severity.value}: [{d.code}] {d.message}")
    return errors


def _require_trapping(setup):
    errors = _report_diagnostics(validate(setup.params, trapping=True))
    if errors:
        raise ConfigError("configuration cannot trap; fix the laser detuning")


def _build_grid(setup):
    grid = make_grid(setup.numerics.n, setup.resolved_half_extent())
    diags = validate_grid(grid, setup.params.cavity_width)
    errors = _report_diagnostics(diags)
    if errors:
        raise ConfigError("grid violates the discretization contract")
    return grid


def _parse_value(text, g0):
    """Frequency with units, or a multiple of g0 like '1.9g0' / '-1.9 g0'."""
    t = text.strip()
    if t.endswith("g0"):
        return float(t[:-2].strip()) * g0
    return parse_frequency(t)


def cmd_analytic(args):
    setup = _load_setup(args)
    p = setup.params
    run = _Run(args.out, "analytic", setup)
    _report_diagnostics(validate(p, trapping=False))

    v0 = analytic.potential_depth_exact(p)
    v0a = analytic.potential_depth_approx(p)
    geff = analytic.gamma_eff(p)
    teff = analytic.tau_eff(p)
    tau_est = analytic.lifetime_estimate(p)
    margin = analytic.bound_state_margin(
        max(v0, 0.0), setup.resolved_criterion_length(), p.recoil_energy)

    print(f"trap depth (exact)      V0      = {v0:.6g} rad/s")
    print(f"trap depth (approx)     V0~     = {v0a:.6g} rad/s")
    print(f"effective loss rate     G_eff   = {geff:.6g} rad/s")
    print(f"effective decay time    tau_eff = {teff:.6g} s")
    print(f"regime lifetime est.    tau     = {tau_est:.6g} s")
    print(f"3D bound-state margin           = {margin:.6g} "
          f"(L = {setup.resolved_criterion_length():.6g}/k)")

    run.write_csv("analytic.csv",
                  ["v0_exact", "v0_approx", "gamma_eff", "tau_eff",
                   "lifetime_estimate", "bound_state_margin"],
                  [[v0, v0a, geff, teff, tau_est, margin]])

    if args.sweep:
        lo = _parse_value(args.start, p.g0)
        hi = _parse_value(args.stop, p.g0)
        values = np.linspace(lo, hi, args.points)
        rows = []
        for v in values:
            q = p.replace(delta=v) if args.sweep == "delta" else p.replace(omega=v)
            rows.append([v, analytic.potential_depth_exact(q),
                         analytic.potential_depth_approx(q),
                         analytic.gamma_eff(q), analytic.tau_eff(q)])
        run.write_csv(f"sweep_{args.sweep}.csv",
                      [args.sweep, "v0_exact", "v0_approx", "gamma_eff",
                       "tau_eff"], rows)
        print(f"swept {args.sweep} over {args.points} points")
    run.finish()


def cmd_optimize(args):
    setup = _load_setup(args)
    p = setup.params
    run = _Run(args.out, "optimize", setup)
    v0_target = parse_frequency(args.v0_target)
    design = analytic.optimize_laser(p, v0_target)
    print(f"optimal Rabi frequency  omega   = {design.omega:.6g} rad/s "
          f"({design.omega / (2 * math.pi * 1e6):.4g} x2pi MHz)")
    print(f"optimal detuning        delta   = {design.delta:.6g} rad/s "
          f"(|delta|/g0 = {abs(design.delta) / p.g0:.5g})")
    print(f"trap depth              V0      = {design.v0:.6g} rad/s")
    print(f"effective decay time    tau_eff = {design.tau_eff:.6g} s")

    # verification sweep around the optimum
    ds = abs(design.delta) / p.g0 * np.linspace(0.8, 1.25, 41)
    rows = []
    for d in ds:
        rows.append([d, analytic.tau_eff_at_depth(p, v0_target, d)])
    run.write_csv("optimize_scan.csv", ["abs_delta_over_g0", "tau_eff"], rows)
    run.write_csv("design.csv", ["omega", "delta", "v0", "tau_eff"],
                  [[design.omega, design.delta, design.v0, design.tau_eff]])
    run.finish()


def cmd_ground(args):
    setup = _load_setup(args)
    p = setup.params
    run = _Run(args.out, "ground", setup)
    grid = _build_grid(setup)
    _report_diagnostics(validate(p, trapping=False))
    v0 = analytic.potential_depth_exact(p) if p.delta < 0 else 0.0
    if p.omega == 0 or v0 <= 0:
        print("no laser trap (V0 <= 0): imaginary time relaxes toward the "
              "box ground state")
    state, energy = ground_state(p, grid)
    save_state_csv(state, run.path("state.csv"))

    dens = np.abs(state.data) ** 2
    j0 = int(np.argmin(np.abs(grid.x)))
    peak_g0 = dens[CH_G0, j0]
    ratio_e0 = dens[CH_E0, j0] / peak_g0
    ratio_g1 = dens[CH_G1, j0] / peak_g0
    total = dens.sum(axis=0)
    half = 0.5 * total[j0]
    above = np.abs(grid.x[total >= half])
    half_radius = float(above.max()) if above.size else 0.0

    print(f"ground-state energy             = {energy:.8g} rad/s")
    print(f"peak density ratio e0/g0        = {ratio_e0:.4g}")
    print(f"peak density ratio g1/g0        = {ratio_g1:.4g}")
    print(f"half-density radius             = {half_radius:.4g} /k "
          f"({half_radius / p.cavity_width:.4g} sigma)")
    run.write_csv("ground_summary.csv",
                  ["energy", "ratio_e0", "ratio_g1", "half_radius"],
                  [[energy, ratio_e0, ratio_g1, half_radius]])
    run.finish()


def _initial_state(args, setup, grid):
    p = setup.params
    if args.init == "ground":
        state, _ = ground_state(p, grid)
        return state
    if args.init == "kicked-ground":
        from .grid import apply_momentum_kick
        state, _ = ground_state(p, grid)
        return apply_momentum_kick(state, 1.0)
    if args.init == "g1packet":
        # placed outside the coupling envelope so its no-jump norm decays
        # at the bare cavity rate exp(-2 kappa t)
        return gaussian_state(grid, p.cavity_width / 8.0,
                              center=3.0 * p.cavity_width, channel=CH_G1)
    raise ConfigError(f"unknown initial state {args.init!r}")


def cmd_decay(args):
    setup = _load_setup(args)
    p = setup.params
    run = _Run(args.out, "decay", setup)
    grid = _build_grid(setup)
    if args.init != "g1packet":
        _require_trapping(setup)
    state = _initial_state(args, setup, grid)
    dt = setup.resolved_dt()

    rows = []
    t_dec = no_jump_decay_time(state, p, grid, dt=dt,
                               t_max=setup.numerics.t_max,
                               recorder=rows.append)
    teff = analytic.tau_eff(p)
    print(f"no-jump 1/e time (norm^2)       = {t_dec:.6g} s")
    print(f"analytic tau_eff                = {teff:.6g} s")
    print(f"ratio numeric/analytic          = {t_dec / teff:.4g}")
    run.write_csv("history.csv",
                  ["t", "norm2", "p_g0", "p_g1", "p_e0", "mean_x", "e_kin"],
                  rows)
    run.write_csv("decay_summary.csv", ["t_decay", "tau_eff", "ratio"],
                  [[t_dec, teff, t_dec / teff]])
    run.finish()


def _long_gate(setup, args):
    teff = analytic.tau_eff(setup.params)
    if teff > 0.01 and not args.long:
        raise ConfigError(
            f"tau_eff = {teff:.3g} s implies very long trapping runs; "
            "pass --long to confirm")


def cmd_trap(args):
    setup = _load_setup(args)
    p = setup.params
    run = _Run(args.out, "trap", setup)
    _require_trapping(setup)
    _long_gate(setup, args)
    grid = _build_grid(setup)
    num = setup.numerics

    from .grid import apply_momentum_kick
    state, _ = ground_state(p, grid)
    init = apply_momentum_kick(state, 1.0)

    stats, records = run_ensemble(
        p, grid, init, num.t_max, num.trajectories, num.seed,
        workers=num.workers or None, dt=setup.resolved_dt(),
        sample_interval=num.sample_interval, absorb=num.absorb)

    for rec in records:
        rows = [[ev.t, ev.channel, "" if ev.u is None else FMT(ev.u)]
                for ev in rec.events]
        run.write_csv(f"events-{rec.seed}.csv", ["t", "channel", "u"], rows)
    run.write_csv("ensemble.csv",
                  ["seed", "trap_time", "n_events", "censored"],
                  [[r.seed,
                    math.inf if r.trap_time is None else r.trap_time,
                    r.n_events, int(r.trap_time is None)]
                   for r in records])

    q1, q3 = stats.quartiles
    print(f"trajectories                    = {num.trajectories}")
    print(f"escaped / censored              = {stats.n_escaped} / {stats.n_censored}")
    print(f"median trap time                = {stats.median:.6g} s")
    print(f"quartiles                       = [{q1:.6g}, {q3:.6g}] s")
    run.finish(seeds=stats.seeds)


def cmd_sweep(args):
    setup = _load_setup(args)
    p = setup.params
    run = _Run(args.out, "sweep", setup)
    _long_gate(setup, args)
    num = setup.numerics

    lo = _parse_value(args.start, p.g0)
    hi = _parse_value(args.stop, p.g0)
    values = np.linspace(lo, hi, args.points)
    rows = []
    for v in values:
        q = p.replace(delta=v) if args.param == "delta" else p.replace(omega=v)
        sub = setup.__class__(params=q, numerics=num, preset=setup.preset)
        _require_trapping(sub)
        grid = _build_grid(sub)
        from .grid import apply_momentum_kick
        state, _ = ground_state(q, grid)
        init = apply_momentum_kick(state, 1.0)
        stats, _records = run_ensemble(
            q, grid, init, num.t_max, num.trajectories, num.seed,
            workers=num.workers or None, dt=sub.resolved_dt(),
            sample_interval=num.sample_interval, absorb=num.absorb)
        q1, q3 = stats.quartiles
        rows.append([v, stats.median, q1, q3,
                     stats.n_escaped, stats.n_censored])
        print(f"{args.param} = {v:.6g} rad/s: median trap time "
              f"{stats.median:.6g} s ({stats.n_censored} censored)")
    run.write_csv(f"trap_sweep_{args.param}.csv",
                  [args.param, "median_trap_time", "q1", "q3",
                   "n_escaped", "n_censored"], rows)
    run.finish(seeds=[num.seed])


def build_parser():
    ap = argparse.ArgumentParser(
        prog="vactrap",
        description="Vacuum-field cavity trap: analytics and quantum-jump "
                    "simulation")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--preset", default="optical",
                        choices=("optical", "microwave"))
        sp.add_argument("--config", help="config file (INI)")
        sp.add_argument("--set", action="append", metavar="SEC.KEY=VAL",
                        help="override a config value (repeatable)")
        sp.add_argument("--out", default="runs/latest",
                        help="output directory")

    sp = sub.add_parser("analytic", help="closed-form design report")
    common(sp)
    sp.add_argument("--sweep", choices=("delta", "omega"))
    sp.add_argument("--start", help="sweep start (e.g. '-3g0' or '-30 2pi.MHz')")
    sp.add_argument("--stop", help="sweep stop")
    sp.add_argument("--points", type=int, default=41)
    sp.set_defaults(func=cmd_analytic)

    sp = sub.add_parser("optimize", help="depth-constrained lifetime optimum")
    common(sp)
    sp.add_argument("--v0-target", required=True,
                    help="target trap depth (e.g. '1.02e4' or '10 krad/s')")
    sp.set_defaults(func=cmd_optimize)

    sp = sub.add_parser("ground", help="imaginary-time ground state")
    common(sp)
    sp.set_defaults(func=cmd_ground)

    sp = sub.add_parser("decay", help="no-jump norm decay time")
    common(sp)
    sp.add_argument("--init", default="ground",
                    choices=("ground", "kicked-ground", "g1packet"))
    sp.set_defaults(func=cmd_decay)

    sp = sub.add_parser("trap", help="trapping-time ensemble")
    common(sp)
    sp.add_argument("--long", action="store_true",
                    help="allow very long (e.g. microwave) runs")
    sp.set_defaults(func=cmd_trap)

    sp = sub.add_parser("sweep", help="trap-time sweep over delta or omega")
    common(sp)
    sp.add_argument("--param", required=True, choices=("delta", "omega"))
    sp.add_argument("--start", required=True)
    sp.add_argument("--stop", required=True)
    sp.add_argument("--points", type=int, default=5)
    sp.add_argument("--long", action="store_true")
    sp.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "analytic" and args.sweep:
        if not (args.start and args.stop):
            _fail(2, "--sweep requires --start and --stop")
    try:
        args.func(args)
    except (ConfigError, InvalidGrid, ValueError) as exc:
        _fail(2, str(exc))
    except NUMERICAL_ERRORS as exc:
        _fail(3, f"{type(exc).__name__}: {exc}")
    except VacTrapError as exc:
        _fail(3, f"{type(exc).__name__}: {exc}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
