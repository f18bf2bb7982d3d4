#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times the two flavors of each hot stepper on the reference workload and
reports the deviation between their results.  Run from the repo root:

    python3 benchmarks/bench_kernels.py [--steps N] [--cutoff N]
"""

import argparse
import time

import numpy as np

from phonon_blockade import (
    LindbladSpec,
    annihilation,
    build_effective_hamiltonian,
    default_params,
    derive,
    thermal_state,
)
from phonon_blockade import _kernels
from phonon_blockade.dynamics import _banded_real_parts, _generator_norm_bound, _prepare_padded


def bench_lindblad(backend: str, cutoff: int, nsteps: int, repeat: int):
    d = derive(default_params(cutoff=cutoff))
    h = build_effective_hamiltonian(d, cutoff, drive_on=True)
    spec = LindbladSpec(h, annihilation(cutoff), gamma=d.g_nl / 8, n_th=0.1)
    coeffs = _prepare_padded(spec, *_banded_real_parts(h.entries))
    dt = 0.05 / _generator_norm_bound(spec)
    best = float("inf")
    rho = None
    for _ in range(repeat):
        rho = np.zeros((cutoff + 3, cutoff + 3), dtype=complex)
        rho[1:cutoff + 2, 1:cutoff + 2] = thermal_state(0.1, cutoff).entries
        t0 = time.perf_counter()
        drift = _kernels.lindblad_rk4(backend, rho, *coeffs, dt, nsteps, 1e-8)
        best = min(best, time.perf_counter() - t0)
        assert drift >= 0.0
    return best, rho


def bench_sweep(backend: str, nsteps: int, repeat: int):
    d = derive(default_params())
    p = d.params
    two_pi = 2 * np.pi
    v = d.g13_tilde / 5
    # production-scale step: bounded by the spectral spread at the largest
    # control value of the reference ramp
    w_end = p.omega_d * np.exp(5.0)
    h_end = two_pi * np.array([[0.0, w_end, 0.0], [w_end, p.epsilon, d.g13_tilde],
                               [0.0, d.g13_tilde, 0.0]])
    ev = np.linalg.eigvalsh(h_end)
    dt = 0.05 / float(ev[-1] - ev[0])
    b = d.bright_coupling
    best = float("inf")
    psi = None
    for _ in range(repeat):
        psi = np.array([d.g13_tilde / b, 0.0, -p.omega_d / b], dtype=complex)
        t0 = time.perf_counter()
        drift = _kernels.sweep_rk4(backend, psi, two_pi * p.epsilon, two_pi * d.g13_tilde,
                                   two_pi * p.omega_d, v, 0.0, 0.0, dt, nsteps, 1e-6)
        best = min(best, time.perf_counter() - t0)
        assert drift >= 0.0
    return best, psi


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=20000, help="RK4 steps per timing run")
    ap.add_argument("--cutoff", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    if not _kernels.HAVE_NUMBA:
        print("numba unavailable (missing or disabled); only the numpy flavor can run")

    print(f"workload: lindblad rk4, cutoff={args.cutoff}, {args.steps} steps; "
          f"sweep rk4, {args.steps} steps")
    results = {}
    for backend in ("numba", "numpy"):
        if backend == "numba" and not _kernels.HAVE_NUMBA:
            continue
        if backend == "numba":
            bench_lindblad(backend, args.cutoff, 10, 1)   # warm the JIT
            bench_sweep(backend, 10, 1)
        tl, rho = bench_lindblad(backend, args.cutoff, args.steps, args.repeat)
        ts, psi = bench_sweep(backend, args.steps, args.repeat)
        results[backend] = (tl, ts, rho, psi)
        print(f"{backend:6s} lindblad {tl:8.3f} s ({1e6 * tl / args.steps:7.2f} us/step)   "
              f"sweep {ts:8.3f} s ({1e6 * ts / args.steps:7.2f} us/step)")

    if len(results) == 2:
        tl_nb, ts_nb, rho_nb, psi_nb = results["numba"]
        tl_np, ts_np, rho_np, psi_np = results["numpy"]
        dev_l = float(np.abs(rho_nb - rho_np).max())
        dev_s = float(np.abs(psi_nb - psi_np).max())
        print(f"speedup: lindblad {tl_np / tl_nb:.1f}x, sweep {ts_np / ts_nb:.1f}x")
        print(f"max deviation between flavors: lindblad {dev_l:.2e}, sweep {dev_s:.2e}")


if __name__ == "__main__":
    main()
