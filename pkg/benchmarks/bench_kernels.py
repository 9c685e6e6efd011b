"""Compare the compiled (Cython + FFTW) and numpy kernel backends.

Usage:  python benchmarks/bench_kernels.py [--sizes 128,1024,4096]

Times one fused split step (FFT pair + kinetic phase + pointwise 3x3
propagator + channel norms + renormalization) per backend and grid size,
plus a short end-to-end no-jump decay run, and reports the speedup.
"""

import argparse
import time

import numpy as np

from vactrap._kernels import get_backend
from vactrap.evolution import Propagator, StepMode, default_dt
from vactrap.grid import gaussian_state, make_grid
from vactrap.params import optical_preset


def time_steps(mod, prop, state, nsteps):
    core = mod.FusedCore(prop.grid.n)
    core.configure(prop.m6, prop.ph_full, prop.grid.dx,
                   2 * prop.params.kappa * prop.dt,
                   2 * prop.params.gamma * prop.dt, None)
    core.load(state.data)
    core.advance_renorm(min(nsteps // 10 + 1, 200))  # warm-up
    t0 = time.perf_counter()
    core.advance_renorm(nsteps)
    return (time.perf_counter() - t0) / nsteps


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="128,512,2048,4096")
    ap.add_argument("--steps", type=int, default=2000)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    backends = [get_backend("python")]
    try:
        backends.append(get_backend("compiled"))
    except ImportError:
        print("note: compiled backend not built; showing python only")

    p = optical_preset()
    print(f"{'n':>6} " + " ".join(f"{m.NAME:>14}" for m in backends)
          + ("   speedup" if len(backends) == 2 else ""))
    for n in sizes:
        half = n * 0.2  # dx = 0.4
        grid = make_grid(n, half)
        ps = p.replace(cavity_width=half / 4)
        prop = Propagator(ps, grid, default_dt(p), StepMode.REAL_EFFECTIVE)
        st = gaussian_state(grid, half / 16)
        nsteps = max(200, min(args.steps, 400000 // n))
        times = [time_steps(m, prop, st, nsteps) for m in backends]
        row = f"{n:>6} " + " ".join(f"{t * 1e6:>11.2f} us" for t in times)
        if len(times) == 2:
            row += f"   {times[0] / times[1]:>6.1f}x"
        print(row)

    # end-to-end: evolve the trapped ground state to its 1/e no-jump time
    grid = make_grid(1024, 200.0)
    ps = p.replace(cavity_width=50.0)
    from vactrap.evolution import Engine, ground_state
    gs, _ = ground_state(ps, grid)
    dt = default_dt(ps)
    prop = Propagator(ps, grid, dt, StepMode.REAL_EFFECTIVE)
    print("\nno-jump decay to 1/e at n=1024:")
    for m in backends:
        eng = Engine(prop, core_cls=m.FusedCore)
        eng.enter(gs)
        totals = np.empty(1 << 16)
        done = 0
        t0 = time.perf_counter()
        while True:
            status, used = eng.core.advance_decay(len(totals), totals,
                                                  1.0 / np.e)
            done += used
            if status != 0:
                break
        dt_wall = time.perf_counter() - t0
        print(f"  {m.NAME:>9}: {dt_wall:7.2f} s wall "
              f"(decay time {done * dt * 1e3:.4f} ms, {done} steps)")


if __name__ == "__main__":
    main()
