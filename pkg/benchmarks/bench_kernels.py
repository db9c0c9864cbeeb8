"""Time the compiled and numpy kernels on the workloads the solvers run.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Workloads: one p-energy gradient sweep on a 30 x 100 path, a full
tau-ODE march of 1000 RK4 steps, and a complete energy minimization.
"""

import argparse
import os
import time

import numpy as np

from lpfisher import kernels
from lpfisher.families import bump
from lpfisher.grid import GridSpec


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def workloads(k, p=3.0, n=100, T=30):
    grid = GridSpec.uniform(n)
    w = grid.weights
    f = bump(grid, 0.3, 0.1).values ** (1 / p)
    g = bump(grid, 0.7, 0.1).values ** (1 / p)
    t = np.linspace(0, 1, T)[:, None]
    G = np.ascontiguousarray(f + t * (g - f))
    xi = np.ascontiguousarray(g - f)

    def grad_sweep():
        for _ in range(100):
            d = k.tangent_project(G, k.p_energy_grad(G, w, 1 / (T - 1), p), w, p)
            k.sphere_step(G, d, 1e-3, w, p)

    def tau_march():
        k.tau_march(f, xi, w, p, 0.0, 1.0, 1e-3, 1000, False)

    return {f"energy+grad x100 p={p:g}": grad_sweep, f"tau march 1000 p={p:g}": tau_march}


def all_workloads(k):
    # integer exponents take a multiply-out fast path in the compiled kernels
    return {**workloads(k, p=3.0), **workloads(k, p=2.5)}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)}", flush=True)
    results = {}
    for name in backends:
        k = kernels.get_backend(name)
        for label, fn in all_workloads(k).items():
            results[label, name] = best_of(fn, args.repeat)
    print(f"{'workload':<28}" + "".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) > 1 else ""), flush=True)
    for label in all_workloads(kernels.get_backend("python")):
        row = [results[label, b] for b in backends]
        line = f"{label:<28}" + "".join(f"{1e3 * r:>10.2f}ms" for r in row)
        if len(row) > 1:
            line += f"{row[1] / row[0]:>11.1f}x"
        print(line, flush=True)

    # end-to-end solve with each backend selected at import time
    import subprocess
    import sys

    code = (
        "import time;from lpfisher import GridSpec,lp_geodesic_prob_bvp,BACKEND;"
        "from lpfisher.families import bump;g=GridSpec.uniform(100);"
        "t=time.perf_counter();r=lp_geodesic_prob_bvp(bump(g,.3,.1),bump(g,.7,.1),5.0);"
        "print(f'{BACKEND:<8} minimizer p=5: {time.perf_counter()-t:.2f}s, {r.iterations} iterations')"
    )
    for name in backends:
        env = dict(os.environ)
        env.pop("LPFISHER_PURE_PYTHON", None)
        if name == "python":
            env["LPFISHER_PURE_PYTHON"] = "1"
        subprocess.run([sys.executable, "-c", code], env=env, check=True)


if __name__ == "__main__":
    main()
