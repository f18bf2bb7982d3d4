"""Hot inner loops: fixed-step RK4 steppers in numba and pure-numpy flavors.

The numba kernels are the default; set the environment variable
PHONON_BLOCKADE_NO_NUMBA=1 (or install without numba) to select the
pure-numpy fallback.  Both flavors implement the same arithmetic; they agree
to floating-point rounding and each is bitwise deterministic.
``benchmarks/bench_kernels.py`` times one against the other.

Density matrices are passed in a zero-padded layout, shape (d+2, d+2) with
the physical block at [1:d+1, 1:d+1], so the stencil loops need no boundary
branches.  Coefficient arrays are prepared by ``dynamics``:

  hd    (d+2,)      Hamiltonian diagonal
  hoR   (d+2,)      upper off-diagonal, hoR[i] couples row i to i+1
  hoL   (d+2,)      lower off-diagonal, hoL[i] couples row i to i-1
  sds   (d+2, d+2)  gamma_down * s_i s_j prefactor of a rho a+
  sus   (d+2, d+2)  gamma_up * s_{i-1} s_{j-1} prefactor of a+ rho a
  cdec  (d+2, d+2)  anticommutator decay prefactor

Return convention of the steppers: the max per-step pre-renormalization
trace (or norm) drift, or -1.0 when the drift tolerance was exceeded.
"""

from __future__ import annotations

import os

import numpy as np

_ENV_FLAG = "PHONON_BLOCKADE_NO_NUMBA"

try:
    if os.environ.get(_ENV_FLAG, "").strip().lower() in ("1", "true", "yes"):
        raise ImportError(f"{_ENV_FLAG} set")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via the env flag
    njit = None
    HAVE_NUMBA = False

BACKENDS = ("numba", "numpy")


def default_backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"


def resolve_backend(name: str | None) -> str:
    if name is None:
        return default_backend()
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}; choose from {BACKENDS}")
    if name == "numba" and not HAVE_NUMBA:
        raise ValueError("numba backend requested but numba is unavailable "
                         f"(missing or disabled via {_ENV_FLAG})")
    return name


# ---------------------------------------------------------------------------
# Lindblad RK4 stepper (thermal single-mode dissipator, banded Hamiltonian)
# ---------------------------------------------------------------------------

def _lindblad_rhs_numpy(r, out, hd, hoR, hoL, sds, sus, cdec, d):
    i0, i1 = 1, d + 1
    blk = r[i0:i1, i0:i1]
    h = (hd[i0:i1, None] - hd[None, i0:i1]) * blk
    h += hoR[i0:i1, None] * r[2:i1 + 1, i0:i1] + hoL[i0:i1, None] * r[0:i1 - 1, i0:i1]
    h -= hoR[None, i0:i1] * r[i0:i1, 2:i1 + 1] + hoL[None, i0:i1] * r[i0:i1, 0:i1 - 1]
    out[i0:i1, i0:i1] = (-1j) * h \
        + sds[i0:i1, i0:i1] * r[2:i1 + 1, 2:i1 + 1] \
        + sus[i0:i1, i0:i1] * r[0:i1 - 1, 0:i1 - 1] \
        - cdec[i0:i1, i0:i1] * blk


def lindblad_rk4_numpy(rho, hd, hoR, hoL, sds, sus, cdec, dt, nsteps, trace_tol):
    d = rho.shape[0] - 2
    i0, i1 = 1, d + 1
    k1 = np.zeros_like(rho)
    k2 = np.zeros_like(rho)
    k3 = np.zeros_like(rho)
    k4 = np.zeros_like(rho)
    tmp = np.zeros_like(rho)
    max_drift = 0.0
    for _ in range(nsteps):
        _lindblad_rhs_numpy(rho, k1, hd, hoR, hoL, sds, sus, cdec, d)
        tmp[i0:i1, i0:i1] = rho[i0:i1, i0:i1] + (0.5 * dt) * k1[i0:i1, i0:i1]
        _lindblad_rhs_numpy(tmp, k2, hd, hoR, hoL, sds, sus, cdec, d)
        tmp[i0:i1, i0:i1] = rho[i0:i1, i0:i1] + (0.5 * dt) * k2[i0:i1, i0:i1]
        _lindblad_rhs_numpy(tmp, k3, hd, hoR, hoL, sds, sus, cdec, d)
        tmp[i0:i1, i0:i1] = rho[i0:i1, i0:i1] + dt * k3[i0:i1, i0:i1]
        _lindblad_rhs_numpy(tmp, k4, hd, hoR, hoL, sds, sus, cdec, d)
        rho[i0:i1, i0:i1] += (dt / 6.0) * (
            k1[i0:i1, i0:i1] + 2.0 * (k2[i0:i1, i0:i1] + k3[i0:i1, i0:i1]) + k4[i0:i1, i0:i1]
        )
        blk = rho[i0:i1, i0:i1]
        blk[...] = 0.5 * (blk + blk.conj().T)
        tr = blk.diagonal().real.sum()
        drift = abs(tr - 1.0)
        if drift > max_drift:
            max_drift = drift
        if drift > trace_tol:
            return -1.0
        blk *= 1.0 / tr
    return max_drift


if HAVE_NUMBA:

    @njit(cache=True, fastmath=True)
    def _lindblad_rhs_numba(r, out, hd, hoR, hoL, sds, sus, cdec, d):
        for i in range(1, d + 1):
            for j in range(1, d + 1):
                h = (hd[i] - hd[j]) * r[i, j]
                h += hoR[i] * r[i + 1, j] + hoL[i] * r[i - 1, j]
                h -= hoR[j] * r[i, j + 1] + hoL[j] * r[i, j - 1]
                out[i, j] = (-1j) * h + sds[i, j] * r[i + 1, j + 1] \
                    + sus[i, j] * r[i - 1, j - 1] - cdec[i, j] * r[i, j]

    @njit(cache=True, fastmath=True)
    def lindblad_rk4_numba(rho, hd, hoR, hoL, sds, sus, cdec, dt, nsteps, trace_tol):
        d = rho.shape[0] - 2
        k1 = np.zeros_like(rho)
        k2 = np.zeros_like(rho)
        k3 = np.zeros_like(rho)
        k4 = np.zeros_like(rho)
        tmp = np.zeros_like(rho)
        max_drift = 0.0
        for _ in range(nsteps):
            _lindblad_rhs_numba(rho, k1, hd, hoR, hoL, sds, sus, cdec, d)
            for i in range(1, d + 1):
                for j in range(1, d + 1):
                    tmp[i, j] = rho[i, j] + (0.5 * dt) * k1[i, j]
            _lindblad_rhs_numba(tmp, k2, hd, hoR, hoL, sds, sus, cdec, d)
            for i in range(1, d + 1):
                for j in range(1, d + 1):
                    tmp[i, j] = rho[i, j] + (0.5 * dt) * k2[i, j]
            _lindblad_rhs_numba(tmp, k3, hd, hoR, hoL, sds, sus, cdec, d)
            for i in range(1, d + 1):
                for j in range(1, d + 1):
                    tmp[i, j] = rho[i, j] + dt * k3[i, j]
            _lindblad_rhs_numba(tmp, k4, hd, hoR, hoL, sds, sus, cdec, d)
            for i in range(1, d + 1):
                for j in range(1, d + 1):
                    rho[i, j] += (dt / 6.0) * (k1[i, j] + 2.0 * (k2[i, j] + k3[i, j]) + k4[i, j])
            tr = 0.0
            for i in range(1, d + 1):
                for j in range(i, d + 1):
                    v = 0.5 * (rho[i, j] + np.conj(rho[j, i]))
                    rho[i, j] = v
                    rho[j, i] = np.conj(v)
                tr += rho[i, i].real
            drift = abs(tr - 1.0)
            if drift > max_drift:
                max_drift = drift
            if drift > trace_tol:
                return -1.0
            inv = 1.0 / tr
            for i in range(1, d + 1):
                for j in range(1, d + 1):
                    rho[i, j] *= inv
        return max_drift


def lindblad_rk4(backend, rho, hd, hoR, hoL, sds, sus, cdec, dt, nsteps, trace_tol):
    if backend == "numba":
        return lindblad_rk4_numba(rho, hd, hoR, hoL, sds, sus, cdec, dt, nsteps, trace_tol)
    return lindblad_rk4_numpy(rho, hd, hoR, hoL, sds, sus, cdec, dt, nsteps, trace_tol)


# ---------------------------------------------------------------------------
# Single-excitation sweep stepper: 3-vector (d, f, b), exponential control
#   H(t)/hbar = [[0, w(t), 0], [w(t), eps, g], [0, g, 0]],  w(t) = w0 e^{v t}
# with optional amplitude damping damp/2 on the phonon component.
# ---------------------------------------------------------------------------

def _sweep_step_python(psi, eps, g, w0, v, damp, t, dt):
    def rhs(p, w):
        return np.array([
            -1j * (w * p[1]),
            -1j * (w * p[0] + eps * p[1] + g * p[2]),
            -1j * (g * p[1]) - 0.5 * damp * p[2],
        ])

    w1 = w0 * np.exp(v * t)
    wh = w0 * np.exp(v * (t + 0.5 * dt))
    w2 = w0 * np.exp(v * (t + dt))
    k1 = rhs(psi, w1)
    k2 = rhs(psi + (0.5 * dt) * k1, wh)
    k3 = rhs(psi + (0.5 * dt) * k2, wh)
    k4 = rhs(psi + dt * k3, w2)
    return psi + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)


def sweep_rk4_numpy(psi, eps, g, w0, v, damp, t0, dt, nsteps, norm_tol):
    renorm = damp == 0.0
    max_drift = 0.0
    t = t0
    for _ in range(nsteps):
        psi[...] = _sweep_step_python(psi, eps, g, w0, v, damp, t, dt)
        t += dt
        nrm = np.sqrt(np.vdot(psi, psi).real)
        if renorm:
            drift = abs(nrm - 1.0)
            if drift > max_drift:
                max_drift = drift
            if drift > norm_tol:
                return -1.0
            psi *= 1.0 / nrm
    return max_drift


if HAVE_NUMBA:

    @njit(cache=True, fastmath=True)
    def sweep_rk4_numba(psi, eps, g, w0, v, damp, t0, dt, nsteps, norm_tol):
        renorm = damp == 0.0
        max_drift = 0.0
        t = t0
        k = np.empty((4, 3), dtype=np.complex128)
        stage = np.empty(3, dtype=np.complex128)
        for _ in range(nsteps):
            w1 = w0 * np.exp(v * t)
            wh = w0 * np.exp(v * (t + 0.5 * dt))
            w2 = w0 * np.exp(v * (t + dt))
            ws = (w1, wh, wh, w2)
            coef = (0.0, 0.5 * dt, 0.5 * dt, dt)
            for s in range(4):
                if s == 0:
                    for m in range(3):
                        stage[m] = psi[m]
                else:
                    for m in range(3):
                        stage[m] = psi[m] + coef[s] * k[s - 1, m]
                w = ws[s]
                k[s, 0] = -1j * (w * stage[1])
                k[s, 1] = -1j * (w * stage[0] + eps * stage[1] + g * stage[2])
                k[s, 2] = -1j * (g * stage[1]) - 0.5 * damp * stage[2]
            for m in range(3):
                psi[m] += (dt / 6.0) * (k[0, m] + 2.0 * (k[1, m] + k[2, m]) + k[3, m])
            t += dt
            nrm = np.sqrt((psi[0] * np.conj(psi[0]) + psi[1] * np.conj(psi[1])
                           + psi[2] * np.conj(psi[2])).real)
            if renorm:
                drift = abs(nrm - 1.0)
                if drift > max_drift:
                    max_drift = drift
                if drift > norm_tol:
                    return -1.0
                inv = 1.0 / nrm
                for m in range(3):
                    psi[m] *= inv
        return max_drift


def sweep_rk4(backend, psi, eps, g, w0, v, damp, t0, dt, nsteps, norm_tol):
    if backend == "numba":
        return sweep_rk4_numba(psi, eps, g, w0, v, damp, t0, dt, nsteps, norm_tol)
    return sweep_rk4_numpy(psi, eps, g, w0, v, damp, t0, dt, nsteps, norm_tol)
