"""Compiled core vs NumPy fallback on the two hot kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Times the RK4 master-equation loop (10 cm at step 1e-3, the default
lindblad-compare workload) and a stack of 3x3 permanents.
"""

import argparse
import timeit

import numpy as np

from bathsynth import _kernels
from bathsynth.lindblad import FockDensityMatrix, build_generators
from bathsynth.network import DimerSpec


def workloads():
    gen = build_generators(DimerSpec(0.3, 0.25))
    rho = FockDensityMatrix.pure(gen.basis, (2, 0)).rho
    rng = np.random.default_rng(0)
    mats = rng.normal(size=(20000, 3, 3)) + 1j * rng.normal(size=(20000, 3, 3))
    return {
        "lindblad_rk4 (10k steps, d=6)":
            lambda k: k.lindblad_rk4(rho, gen.h_eff, gen.jump, gen.rate, 1e-3, 10000, 10, 1e-6),
        "permanents (20k x 3x3)": lambda k: k.permanents(mats),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    backends = sorted(_kernels.BACKENDS)
    if "cython" not in backends:
        print("compiled core not built; only the fallback is timed")
    print(f"{'kernel':32s}" + "".join(f"{b:>12s}" for b in backends) + "     speedup")
    for name, fn in workloads().items():
        best = {}
        for b in backends:
            kern = _kernels.get(b)
            fn(kern)  # warm up
            best[b] = min(timeit.repeat(lambda: fn(kern), number=1, repeat=args.repeat))
        speed = f"{best['python'] / best['cython']:10.1f}x" if "cython" in best else ""
        print(f"{name:32s}" + "".join(f"{best[b] * 1e3:10.2f}ms" for b in backends) + speed)


if __name__ == "__main__":
    main()
