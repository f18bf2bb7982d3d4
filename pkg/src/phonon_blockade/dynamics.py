"""Lindblad master-equation integration and single-excitation sweep dynamics.

Fixed-step RK4 throughout.  The step size is chosen so that
dt * (spectral-norm bound of the generator) <= safety (default 0.05); with a
21-dimensional state this is deliberately conservative and keeps the
integrator far inside its stability region.  After every step the density
matrix is re-hermitized and renormalized; a trace drift beyond the tolerance
aborts with a diagnostic instead of silently corrupting the run.

Rates entering ``LindbladSpec`` are linear kHz; the generator itself (and
``lindblad_rhs``) works in angular units, rad/ms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .fock import DensityMatrix, Operator, annihilation
from .model import TWO_PI
from .observables import g2_zero_from_moments

UNDEFINED_MEAN_THRESHOLD = 1e-12


class IntegratorAbort(RuntimeError):
    """Trace or norm drift exceeded tolerance (dt too large or cutoff too small)."""


@dataclass(frozen=True)
class LindbladSpec:
    """Thermal-bath Lindblad generator.

    d rho/dt = -i[H, rho] + (gamma/2)(1+n_th) L[A] rho + (gamma/2) n_th L[A+] rho
    with L[o] rho = 2 o rho o+ - o+o rho - rho o+o and A = jump_down.
    The Hamiltonian operator is already in angular units (rad/ms), as the
    model builders produce it; gamma is a linear kHz rate and is converted
    to angular inside the generator.
    """

    hamiltonian: Operator
    jump_down: Operator
    gamma: float
    n_th: float

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.n_th < 0:
            raise ValueError(f"n_th must be >= 0, got {self.n_th}")
        if self.hamiltonian.dim != self.jump_down.dim:
            raise ValueError(
                f"dimension mismatch: H is {self.hamiltonian.dim}, jump operator is {self.jump_down.dim}"
            )
        if not self.hamiltonian.is_hermitian(1e-9 * max(1.0, float(np.abs(self.hamiltonian.entries).max()))):
            raise ValueError("hamiltonian must be hermitian")

    @property
    def jump_up(self) -> Operator:
        return self.jump_down.adjoint()

    @property
    def dim(self) -> int:
        return self.hamiltonian.dim


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float | None = None           # ms; None selects the safety bound below
    safety: float = 0.05              # dt * generator-norm bound
    hermitize_every_step: bool = True
    trace_tolerance: float = 1e-8
    positivity_tolerance: float = 1e-9

    def __post_init__(self):
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be > 0")
        if not 0 < self.safety:
            raise ValueError("safety must be > 0")


@dataclass
class Trajectory:
    """Sampled observables of an evolve() run.

    g2 holds NaN at samples where the mean occupation is below the
    undefined threshold; trace_err is the max pre-renormalization trace
    drift over the preceding sample interval.
    """

    times_ms: np.ndarray
    times_scaled: np.ndarray | None
    g2: np.ndarray
    p0: np.ndarray
    p1: np.ndarray
    mean_n: np.ndarray
    purity: np.ndarray
    trace_err: np.ndarray
    min_eig: np.ndarray
    top_pop: np.ndarray
    extra: dict[str, np.ndarray]
    final_state: DensityMatrix
    warnings: list[str]

    def __post_init__(self):
        if np.any(np.diff(self.times_ms) <= 0):
            raise ValueError("trajectory times must be strictly increasing")

    @property
    def n_samples(self) -> int:
        return len(self.times_ms) - 1


def lindblad_rhs(rho, spec: LindbladSpec) -> np.ndarray:
    """d rho/dt in angular units (rad/ms); the result is traceless.

    General dense implementation used for contract checks and the
    non-accelerated path; the hot loop lives in ``_kernels``.
    """
    r = rho.entries if isinstance(rho, (DensityMatrix, Operator)) else np.asarray(rho, dtype=complex)
    if r.shape != (spec.dim, spec.dim):
        raise ValueError(f"state shape {r.shape} does not match generator dimension {spec.dim}")
    h = spec.hamiltonian.entries
    out = -1j * (h @ r - r @ h)
    gd = TWO_PI * spec.gamma * (1.0 + spec.n_th)
    gu = TWO_PI * spec.gamma * spec.n_th
    if gd != 0.0:
        l = spec.jump_down.entries
        ld = l.conj().T
        ll = ld @ l
        out += gd * (l @ r @ ld) - 0.5 * gd * (ll @ r + r @ ll)
    if gu != 0.0:
        u = spec.jump_down.entries.conj().T
        ud = spec.jump_down.entries
        uu = ud @ u
        out += gu * (u @ r @ ud) - 0.5 * gu * (uu @ r + r @ uu)
    return out


def _generator_norm_bound(spec: LindbladSpec) -> float:
    """Spectral-norm bound of the generator, rad/ms.

    The commutator part is bounded by the spread of the Hamiltonian
    spectrum; each dissipator term (gamma/2) L[o] by 2 gamma ||o||^2.
    """
    evals = np.linalg.eigvalsh(spec.hamiltonian.entries)
    spread = float(evals[-1] - evals[0])
    lnorm = float(np.linalg.norm(spec.jump_down.entries, 2))
    unorm = float(np.linalg.norm(spec.jump_down.entries.conj().T, 2))
    gd = TWO_PI * spec.gamma * (1.0 + spec.n_th)
    gu = TWO_PI * spec.gamma * spec.n_th
    return spread + 2.0 * gd * lnorm ** 2 + 2.0 * gu * unorm ** 2


def _is_canonical_annihilation(op: Operator) -> bool:
    return np.array_equal(op.entries, annihilation(op.dim - 1).entries)


def _banded_real_parts(h: np.ndarray):
    """(diag, superdiag) if H is real symmetric tridiagonal, else None."""
    if np.any(h.imag != 0.0):
        return None
    hr = h.real
    if not np.array_equal(hr, hr.T):
        return None
    band = np.triu(hr, 2)
    if np.any(band != 0.0):
        return None
    return np.ascontiguousarray(np.diag(hr)), np.ascontiguousarray(np.diag(hr, 1))


def _prepare_padded(spec: LindbladSpec, diag: np.ndarray, off: np.ndarray):
    d = spec.dim
    n = np.arange(d, dtype=float)
    s = np.sqrt(n[1:])
    gd = TWO_PI * spec.gamma * (1.0 + spec.n_th)
    gu = TWO_PI * spec.gamma * spec.n_th
    hd = np.zeros(d + 2)
    hd[1:d + 1] = diag
    hoR = np.zeros(d + 2)
    hoR[1:d] = off
    hoL = np.zeros(d + 2)
    hoL[2:d + 1] = off
    sds = np.zeros((d + 2, d + 2))
    sds[1:d, 1:d] = gd * np.outer(s, s)
    sus = np.zeros((d + 2, d + 2))
    sus[2:d + 1, 2:d + 1] = gu * np.outer(s, s)
    ntop = np.zeros(d)
    ntop[:-1] = n[:-1] + 1.0   # diagonal of the truncated a a+
    cdec = np.zeros((d + 2, d + 2))
    cdec[1:d + 1, 1:d + 1] = 0.5 * gd * (n[:, None] + n[None, :]) \
        + 0.5 * gu * (ntop[:, None] + ntop[None, :])
    return hd, hoR, hoL, sds, sus, cdec


def _general_rk4_segment(rho: np.ndarray, spec: LindbladSpec, dt: float, nsteps: int,
                         trace_tol: float, hermitize: bool) -> float:
    """Dense fallback stepper for generators outside the accelerated form."""
    max_drift = 0.0
    for _ in range(nsteps):
        k1 = lindblad_rhs(rho, spec)
        k2 = lindblad_rhs(rho + (0.5 * dt) * k1, spec)
        k3 = lindblad_rhs(rho + (0.5 * dt) * k2, spec)
        k4 = lindblad_rhs(rho + dt * k3, spec)
        rho += (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        if hermitize:
            rho[...] = 0.5 * (rho + rho.conj().T)
        tr = rho.diagonal().real.sum()
        drift = abs(tr - 1.0)
        max_drift = max(max_drift, drift)
        if drift > trace_tol:
            return -1.0
        rho *= 1.0 / tr
    return max_drift


def evolve(rho0: DensityMatrix, spec: LindbladSpec, t_max: float, n_samples: int = 400,
           config: IntegratorConfig | None = None, observers=None,
           time_scale: float | None = None, backend: str | None = None) -> Trajectory:
    """Integrate the master equation and sample observables.

    t_max is in ms and is divided into n_samples equal sample intervals
    (n_samples + 1 records including t = 0).  Standard observables assume
    the state lives in a single-mode Fock basis.  ``observers`` may add
    named pure callbacks evaluated on the raw state matrix at each sample.
    ``time_scale`` (kHz) additionally reports a dimensionless time column
    scale * t.  ``backend`` selects the accelerated kernel flavor.

    Generators with the canonical lowering operator as jump_down and a
    real tridiagonal Hamiltonian take the accelerated stencil kernel
    (which always re-hermitizes); anything else falls back to the dense
    stepper, where hermitize_every_step is honored.
    """
    if rho0.dim != spec.dim:
        raise ValueError(f"initial state dimension {rho0.dim} does not match generator {spec.dim}")
    if t_max <= 0 or n_samples < 1:
        raise ValueError("t_max must be > 0 and n_samples >= 1")
    config = config or IntegratorConfig()
    backend = _kernels.resolve_backend(backend)
    observers = dict(observers or {})

    sample_dt = t_max / n_samples
    dt_cap = config.dt if config.dt is not None else config.safety / _generator_norm_bound(spec)
    m = max(1, int(math.ceil(sample_dt / dt_cap)))
    dt = sample_dt / m

    d = spec.dim
    banded = _banded_real_parts(spec.hamiltonian.entries)
    fast = banded is not None and _is_canonical_annihilation(spec.jump_down)
    if fast:
        coeffs = _prepare_padded(spec, *banded)
        state = np.zeros((d + 2, d + 2), dtype=complex)
        state[1:d + 1, 1:d + 1] = rho0.entries
        view = state[1:d + 1, 1:d + 1]
    else:
        state = rho0.entries.copy()
        view = state

    n = np.arange(d, dtype=float)
    times = np.linspace(0.0, t_max, n_samples + 1)
    cols = {name: np.empty(n_samples + 1) for name in
            ("g2", "p0", "p1", "mean_n", "purity", "trace_err", "min_eig", "top_pop")}
    extra = {name: np.empty(n_samples + 1) for name in observers}
    warnings_log: list[str] = []

    for k in range(n_samples + 1):
        pops = view.diagonal().real
        mean = float(pops @ n)
        nn1 = float(pops @ (n * (n - 1.0)))
        cols["g2"][k] = g2_zero_from_moments(mean, nn1, UNDEFINED_MEAN_THRESHOLD)
        cols["p0"][k] = pops[0]
        cols["p1"][k] = pops[1] if d > 1 else 0.0
        cols["mean_n"][k] = mean
        cols["purity"][k] = float(np.sum(np.abs(view) ** 2))
        emin = float(np.linalg.eigvalsh(view)[0])
        cols["min_eig"][k] = emin
        cols["top_pop"][k] = pops[-1]
        if emin < -config.positivity_tolerance:
            warnings_log.append(
                f"negative eigenvalue {emin:.3e} below -{config.positivity_tolerance} at t={times[k]:.6g} ms")
        for name, fn in observers.items():
            extra[name][k] = fn(view)
        if k == 0:
            cols["trace_err"][0] = 0.0
        if k == n_samples:
            break
        if fast:
            drift = _kernels.lindblad_rk4(backend, state, *coeffs, dt, m, config.trace_tolerance)
        else:
            drift = _general_rk4_segment(state, spec, dt, m, config.trace_tolerance,
                                         config.hermitize_every_step)
        if drift < 0.0:
            raise IntegratorAbort(
                f"trace drift exceeded {config.trace_tolerance} near t={times[k + 1]:.6g} ms "
                f"(dt={dt:.3e}); decrease dt or increase the cutoff")
        cols["trace_err"][k + 1] = drift

    final = DensityMatrix(Operator(view.copy(), rho0.op.basis_label))
    return Trajectory(
        times_ms=times,
        times_scaled=times * time_scale if time_scale is not None else None,
        final_state=final,
        extra=extra,
        warnings=warnings_log,
        **cols,
    )


def schrodinger_evolve_td(psi0: np.ndarray, h_schedule, t_max: float, n_samples: int = 200,
                          safety: float = 0.05, norm_tolerance: float = 1e-6):
    """Norm-preserving RK4 for a time-dependent Hamiltonian schedule.

    h_schedule(t) must return a hermitian matrix in angular units (rad/ms)
    of fixed dimension.  The state is renormalized each step; a per-step
    norm drift beyond norm_tolerance aborts.  Returns (times, states,
    max_drift) with states of shape (n_samples + 1, dim).
    """
    psi = np.asarray(psi0, dtype=complex).copy()
    nrm = math.sqrt(float(np.vdot(psi, psi).real))
    if abs(nrm - 1.0) > 1e-9:
        raise ValueError("initial state must be normalized")
    times = np.linspace(0.0, t_max, n_samples + 1)
    spread = 0.0
    for t in times:
        ev = np.linalg.eigvalsh(h_schedule(t))
        spread = max(spread, float(ev[-1] - ev[0]))
    sample_dt = t_max / n_samples
    m = max(1, int(math.ceil(sample_dt * spread / safety)))
    dt = sample_dt / m
    out = np.empty((n_samples + 1, psi.size), dtype=complex)
    out[0] = psi
    max_drift = 0.0
    for k in range(n_samples):
        t = times[k]
        for i in range(m):
            t0 = t + i * dt
            h1 = h_schedule(t0)
            hh = h_schedule(t0 + 0.5 * dt)
            h2 = h_schedule(t0 + dt)
            k1 = -1j * (h1 @ psi)
            k2 = -1j * (hh @ (psi + (0.5 * dt) * k1))
            k3 = -1j * (hh @ (psi + (0.5 * dt) * k2))
            k4 = -1j * (h2 @ (psi + dt * k3))
            psi += (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
            nrm = math.sqrt(float(np.vdot(psi, psi).real))
            drift = abs(nrm - 1.0)
            max_drift = max(max_drift, drift)
            if drift > norm_tolerance:
                raise IntegratorAbort(
                    f"norm drift {drift:.3e} exceeded {norm_tolerance} at t={t0 + dt:.6g} ms")
            psi /= nrm
        out[k + 1] = psi
    return times, out, max_drift


# ---------------------------------------------------------------------------
# Adiabatic conversion sweep in the single-excitation sector (d, f, b)
# ---------------------------------------------------------------------------

@dataclass
class SweepResult:
    """Exponential control-field sweep starting from the dark state.

    phonon_fraction is the closed-form phonon weight of the instantaneous
    dark state, omega_d(t)^2 / (omega_d(t)^2 + g13_tilde^2); dark_pop and
    bright_leak are populations of the evolved state in the instantaneous
    polariton basis; state_phonon_prob is |<b|psi>|^2 of the evolved state.
    """

    times_ms: np.ndarray
    omega_d_t: np.ndarray
    phonon_fraction: np.ndarray
    dark_pop: np.ndarray
    bright_leak: np.ndarray
    psi_final: np.ndarray
    state_phonon_prob: float
    survival: float           # final norm^2 (1 unless phonon damping is on)
    max_norm_drift: float


def _dark_vector(g13_tilde: float, omega_d: float) -> np.ndarray:
    b = math.hypot(omega_d, g13_tilde)
    return np.array([g13_tilde / b, 0.0, -omega_d / b])


def run_adiabatic_sweep(derived, velocity: float, t_end: float, n_samples: int = 250,
                        phonon_damping: float = 0.0, dwell: float = 0.0,
                        safety: float = 0.05, norm_tolerance: float = 1e-6,
                        backend: str | None = None) -> SweepResult:
    """Integrate the dark state through omega_d(t) = omega_d exp(v t).

    velocity is in 1/ms against the linear-kHz convention (v = g13_tilde/5
    reproduces the reference protocol with t_end = 25/g13_tilde ms); dwell
    holds the control constant for dwell ms before the ramp starts.
    phonon_damping (kHz) adds amplitude damping at rate gamma_p/2 on the
    phonon component; the survival then drops below one and per-step
    renormalization is disabled.
    """
    if velocity <= 0 or t_end <= 0:
        raise ValueError("velocity and t_end must be > 0")
    if dwell < 0 or phonon_damping < 0:
        raise ValueError("dwell and phonon_damping must be >= 0")
    backend = _kernels.resolve_backend(backend)
    p = derived.params
    eps_ang = TWO_PI * p.epsilon
    g_ang = TWO_PI * derived.g13_tilde
    w0_ang = TWO_PI * p.omega_d
    damp_ang = TWO_PI * phonon_damping

    total = dwell + t_end
    times = np.linspace(0.0, total, n_samples + 1)

    # step cap: spectral spread at the largest control value, plus sweep rate
    w_end = p.omega_d * math.exp(velocity * t_end)
    h_end = TWO_PI * np.array([[0.0, w_end, 0.0], [w_end, p.epsilon, derived.g13_tilde],
                               [0.0, derived.g13_tilde, 0.0]])
    ev = np.linalg.eigvalsh(h_end)
    bound = float(ev[-1] - ev[0]) + velocity + damp_ang
    dt_cap = safety / bound

    psi = _dark_vector(derived.g13_tilde, p.omega_d).astype(complex)
    omega_d_t = np.empty(n_samples + 1)
    frac = np.empty(n_samples + 1)
    dark_pop = np.empty(n_samples + 1)
    bright = np.empty(n_samples + 1)
    max_drift = 0.0

    def control(t: float) -> float:
        return p.omega_d * math.exp(velocity * max(t - dwell, 0.0))

    for k in range(n_samples + 1):
        w = control(times[k])
        omega_d_t[k] = w
        frac[k] = w ** 2 / (w ** 2 + derived.g13_tilde ** 2)
        dk = _dark_vector(derived.g13_tilde, w)
        nrm2 = float(np.vdot(psi, psi).real)
        pop = abs(np.vdot(dk, psi)) ** 2
        dark_pop[k] = pop
        bright[k] = nrm2 - pop
        if k == n_samples:
            break
        ta, tb = times[k], times[k + 1]
        # split the interval at the dwell boundary; each piece has a single
        # exponential law for the control
        pieces = []
        if tb <= dwell:
            pieces.append((0.0, 0.0, tb - ta))          # (local t0, v, duration)
        elif ta >= dwell:
            pieces.append((ta - dwell, velocity, tb - ta))
        else:
            pieces.append((0.0, 0.0, dwell - ta))
            pieces.append((0.0, velocity, tb - dwell))
        for t0, v, dur in pieces:
            nst = max(1, int(math.ceil(dur / dt_cap)))
            drift = _kernels.sweep_rk4(backend, psi, eps_ang, g_ang, w0_ang, v,
                                       damp_ang, t0, dur / nst, nst, norm_tolerance)
            if drift < 0.0:
                raise IntegratorAbort(
                    f"norm drift exceeded {norm_tolerance} in sweep near t={tb:.6g} ms")
            max_drift = max(max_drift, drift)

    survival = float(np.vdot(psi, psi).real)
    return SweepResult(
        times_ms=times,
        omega_d_t=omega_d_t,
        phonon_fraction=frac,
        dark_pop=dark_pop,
        bright_leak=bright,
        psi_final=psi,
        state_phonon_prob=float(abs(psi[2]) ** 2),
        survival=survival,
        max_norm_drift=max_drift,
    )
