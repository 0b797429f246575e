"""Time the compiled trajectory kernel against the pure-numpy fallback.

Both paths consume the same counter-based noise stream, so the run also
cross-checks that they produce the same ensemble means. Compile time is
excluded by a short warmup pass on each backend before timing.

Usage:
    python3 benchmarks/benchmark_kernels.py [--n-traj N] [--t-final T]
                                            [--dt DT] [--repeat R]
"""

import argparse
import time

import numpy as np

from tripletdc.accel import HAVE_NUMBA
from tripletdc.ensemble import EnsembleConfig, run_ensemble
from tripletdc.semiclassical import DriveSchedule, SystemParams

PARAMS = SystemParams(kappa=0.001, gamma_a=1.0, gamma_b=2.0, epsilon_b=200.0)
SCHEDULE = DriveSchedule(epsilon_a=5.0, t_off=5.0)


def run_once(backend: str, args) -> tuple[float, dict]:
    cfg = EnsembleConfig(n_traj=args.n_traj, t_final=args.t_final, dt=args.dt,
                         sample_stride=max(1, int(round(1.0 / args.dt))),
                         master_seed=11, batch_size=1024, backend=backend)
    t0 = time.perf_counter()
    series = run_ensemble(PARAMS, SCHEDULE, cfg)
    elapsed = time.perf_counter() - t0
    finals = {name: series.real_mean(name)[-1] for name in ("na", "nb")}
    return elapsed, finals


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-traj", type=int, default=2000)
    ap.add_argument("--t-final", type=float, default=10.0)
    ap.add_argument("--dt", type=float, default=1e-3)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    if not HAVE_NUMBA:
        print("numba not importable; timing the numpy path only")

    warm = argparse.Namespace(n_traj=64, t_final=0.5, dt=args.dt, repeat=1)
    results = {}
    for backend in backends:
        run_once(backend, warm)
        times = []
        for _ in range(args.repeat):
            elapsed, finals = run_once(backend, args)
            times.append(elapsed)
        results[backend] = (min(times), finals)
        steps = args.n_traj * int(round(args.t_final / args.dt))
        print(f"{backend:>6}: best {min(times):8.3f} s over {args.repeat} runs   "
              f"({steps / min(times):.3e} trajectory-steps/s)")

    if len(results) == 2:
        t_np, f_np = results["numpy"]
        t_nb, f_nb = results["numba"]
        print(f"speedup: {t_np / t_nb:.2f}x")
        worst = max(abs(f_np[k] - f_nb[k]) / max(abs(f_np[k]), 1e-12) for k in f_np)
        print(f"final-mean agreement across backends: {worst:.3e} relative")
        if worst > 1e-9:
            print("WARNING: backends disagree beyond rounding")
            return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
