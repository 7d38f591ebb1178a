"""Compare the compiled kernels with the numpy fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--n 64] [--repeat 20]

Each kernel is timed on arrays the size of a padded ``(2n)**3`` grid (the
spectral kernels on an ``n**3`` spectrum). A full IMEX step is then timed
under each backend in a subprocess, since the backend is fixed at import.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from nschlab import kernels

STEP_SNIPPET = """
import timeit
from nschlab.spectral import make_grid
from nschlab.initial import generate_ic
from nschlab.integrator import imex_step
g = make_grid(3, {n})
s = generate_ic("random-divfree", g, 1e-2, seed=0)
s = imex_step(s, 1e-3)
print(min(timeit.repeat(lambda: imex_step(s, 1e-3), number=1, repeat={repeat})))
"""


def kernel_cases(n, rng):
    m = (2 * n) ** 3
    ms = n * n * (n // 2 + 1)
    u = rng.standard_normal((3, m))
    a = rng.standard_normal(m)
    b = rng.standard_normal(m)
    chat = rng.standard_normal(ms) + 1j * rng.standard_normal(ms)
    w = rng.random(ms)
    vhat = rng.standard_normal((3, ms)) + 1j * rng.standard_normal((3, ms))
    k = rng.standard_normal((3, ms))
    inv_k2 = 1.0 / np.maximum(np.sum(k * k, axis=0), 1e-3)
    return {
        "sym_outer": lambda mod: mod.sym_outer(u, np.empty((6, m))),
        "korteweg": lambda mod: mod.korteweg(a, u, 1.0, np.empty((3, m))),
        "dot_pointwise": lambda mod: mod.dot_pointwise(u, u, np.empty(m)),
        "phi_source": lambda mod: mod.phi_source(a, 1.0, 1.0, 2.0, np.empty(m)),
        "double_well_sum": lambda mod: mod.double_well_sum(b, 1.0),
        "weighted_sq_sum": lambda mod: mod.weighted_sq_sum(chat, w),
        "imex_update": lambda mod: mod.imex_update(chat, chat, 1e-3, w, np.empty_like(chat)),
        "leray_inplace": lambda mod: mod.leray_inplace(vhat.copy(), k, inv_k2),
    }


def bench_kernels(n, repeat):
    rng = np.random.default_rng(0)
    cases = kernel_cases(n, rng)
    backends = kernels.available_backends()
    print(f"kernels, n={n} (padded {2 * n}^3)")
    print(f"{'kernel':<18}" + "".join(f"{b:>14}" for b in backends) + f"{'speedup':>10}")
    for name, fn in cases.items():
        times = []
        for b in backends:
            mod = kernels.backend_module(b)
            times.append(min(timeit.repeat(lambda: fn(mod), number=1, repeat=repeat)))
        speed = times[0] / times[-1] if len(times) > 1 else float("nan")
        print(f"{name:<18}" + "".join(f"{t * 1e3:>12.3f}ms" for t in times) + f"{speed:>9.2f}x")


def bench_step(n, repeat):
    print(f"\nfull IMEX step, n={n}")
    for backend in kernels.available_backends():
        env = dict(os.environ)
        env["NSCHLAB_PURE_PYTHON"] = "1" if backend == "python" else "0"
        out = subprocess.run(
            [sys.executable, "-c", STEP_SNIPPET.format(n=n, repeat=repeat)],
            env=env, capture_output=True, text=True, check=True,
        )
        print(f"{backend:<10}{float(out.stdout) * 1e3:>10.1f} ms")


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=32)
    parser.add_argument("--repeat", type=int, default=10)
    args = parser.parse_args(argv)
    bench_kernels(args.n, args.repeat)
    bench_step(args.n, max(3, args.repeat // 2))


if __name__ == "__main__":
    main()
