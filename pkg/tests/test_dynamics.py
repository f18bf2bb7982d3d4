import math

import numpy as np
import pytest

from phonon_blockade import (
    IntegratorAbort,
    IntegratorConfig,
    LindbladSpec,
    Operator,
    annihilation,
    build_effective_hamiltonian,
    evolve,
    fock_state,
    lindblad_rhs,
    run_adiabatic_sweep,
    schrodinger_evolve_td,
    thermal_state,
)
from phonon_blockade.dynamics import _general_rk4_segment, _prepare_padded, _banded_real_parts
from phonon_blockade import _kernels
from phonon_blockade.model import TWO_PI

CUT = 8


def zero_h(cut=CUT):
    return Operator(np.zeros((cut + 1, cut + 1), dtype=complex))


def test_rhs_amplitude_damping_entries():
    spec = LindbladSpec(zero_h(), annihilation(CUT), gamma=2.0, n_th=0.0)
    r = lindblad_rhs(fock_state(1, CUT), spec)
    gamma_ang = TWO_PI * 2.0
    assert r[1, 1].real == pytest.approx(-gamma_ang, abs=1e-12)
    assert r[0, 0].real == pytest.approx(gamma_ang, abs=1e-12)


def test_rhs_thermal_fixed_point():
    spec = LindbladSpec(zero_h(), annihilation(CUT), gamma=3.0, n_th=0.3)
    r = lindblad_rhs(thermal_state(0.3, CUT), spec)
    assert np.abs(r).max() < 1e-10


def test_rhs_traceless():
    rng = np.random.default_rng(5)
    m = rng.normal(size=(CUT + 1, CUT + 1)) + 1j * rng.normal(size=(CUT + 1, CUT + 1))
    rho = m @ m.conj().T
    rho /= np.trace(rho)
    h = Operator(np.diag(np.arange(CUT + 1.0)).astype(complex))
    spec = LindbladSpec(h, annihilation(CUT), gamma=1.5, n_th=0.4)
    assert abs(np.trace(lindblad_rhs(rho, spec))) < 1e-10


def test_rhs_dimension_mismatch():
    spec = LindbladSpec(zero_h(), annihilation(CUT), gamma=1.0, n_th=0.0)
    with pytest.raises(ValueError):
        lindblad_rhs(fock_state(0, CUT + 1), spec)


def test_relaxation_to_bath_occupation():
    gamma = 3.125
    spec = LindbladSpec(zero_h(20), annihilation(20), gamma=gamma, n_th=0.3)
    t = 10.0 / (TWO_PI * gamma)
    traj = evolve(fock_state(0, 20), spec, t, 40)
    assert traj.mean_n[-1] == pytest.approx(0.3, abs=1e-4)


def test_kerr_leaves_fock_projector_invariant(ref_derived):
    h = build_effective_hamiltonian(ref_derived, CUT, drive_on=False)
    spec = LindbladSpec(h, annihilation(CUT), gamma=0.0, n_th=0.0)
    rho0 = fock_state(2, CUT)
    traj = evolve(rho0, spec, 0.05, 10)
    np.testing.assert_allclose(traj.final_state.entries, rho0.entries, atol=1e-12)


def test_energy_conservation_without_damping(ref_derived):
    h = build_effective_hamiltonian(ref_derived, 12, drive_on=True)
    spec = LindbladSpec(h, annihilation(12), gamma=0.0, n_th=0.0)
    rho0 = thermal_state(0.2, 12)
    energy = {}

    def track(r):
        return float(np.trace(h.entries @ r).real)

    traj = evolve(rho0, spec, 0.05, 20, observers={"energy": track})
    e = traj.extra["energy"]
    scale = max(abs(e[0]), 1.0)
    assert np.abs(e - e[0]).max() / scale < 1e-8


def test_trace_and_positivity_bookkeeping(fig2_runs):
    traj = fig2_runs[0.1]
    assert np.all(np.diff(traj.times_ms) > 0)
    assert traj.trace_err.max() < 1e-8
    assert traj.min_eig.min() >= -1e-9
    assert traj.warnings == []


def test_integrator_abort_on_oversized_step(ref_derived):
    h = build_effective_hamiltonian(ref_derived, 20, drive_on=True)
    spec = LindbladSpec(h, annihilation(20), gamma=ref_derived.g_nl / 8, n_th=0.1)
    cfg = IntegratorConfig(dt=1e-3)   # far beyond the RK4 stability limit
    with pytest.raises(IntegratorAbort):
        evolve(thermal_state(0.1, 20), spec, 0.1, 10, config=cfg)


def test_backend_equivalence_lindblad(ref_derived):
    if not _kernels.HAVE_NUMBA:
        pytest.skip("numba unavailable")
    h = build_effective_hamiltonian(ref_derived, CUT, drive_on=True)
    spec = LindbladSpec(h, annihilation(CUT), gamma=ref_derived.g_nl / 8, n_th=0.1)
    rho0 = thermal_state(0.1, CUT)
    ta = evolve(rho0, spec, 0.004, 4, backend="numba")
    tb = evolve(rho0, spec, 0.004, 4, backend="numpy")
    assert np.abs(ta.final_state.entries - tb.final_state.entries).max() < 1e-12


def test_general_path_matches_kernel(ref_derived):
    # same generator through the dense fallback and the banded kernel
    h = build_effective_hamiltonian(ref_derived, CUT, drive_on=True)
    spec = LindbladSpec(h, annihilation(CUT), gamma=ref_derived.g_nl / 8, n_th=0.2)
    rho = thermal_state(0.2, CUT).entries.copy()
    nsteps, dt = 200, 2e-6
    drift_dense = _general_rk4_segment(rho, spec, dt, nsteps, 1e-8, True)
    assert drift_dense >= 0.0

    banded = _banded_real_parts(h.entries)
    coeffs = _prepare_padded(spec, *banded)
    pad = np.zeros((CUT + 3, CUT + 3), dtype=complex)
    pad[1:CUT + 2, 1:CUT + 2] = thermal_state(0.2, CUT).entries
    drift_kernel = _kernels.lindblad_rk4(_kernels.default_backend(), pad, *coeffs, dt, nsteps, 1e-8)
    assert drift_kernel >= 0.0
    np.testing.assert_allclose(pad[1:CUT + 2, 1:CUT + 2], rho, atol=1e-12)


def test_dt_halving_convergence(ref_derived):
    # 4th-order scheme at a conservative step: halving dt must not move g2
    h = build_effective_hamiltonian(ref_derived, 12, drive_on=True)
    spec = LindbladSpec(h, annihilation(12), gamma=ref_derived.g_nl / 8, n_th=0.1)
    rho0 = thermal_state(0.1, 12)
    g2 = []
    for safety in (0.05, 0.025):
        traj = evolve(rho0, spec, 0.02, 10, config=IntegratorConfig(safety=safety))
        g2.append(traj.g2[-1])
    assert abs(g2[0] - g2[1]) < 1e-6


def test_schrodinger_stationary_state():
    h = TWO_PI * np.array([[0.0, 20.0, 0.0], [20.0, 200.0, 200.0], [0.0, 200.0, 0.0]])
    vals, vecs = np.linalg.eigh(h)
    psi0 = vecs[:, 0].astype(complex)
    times, psis, drift = schrodinger_evolve_td(psi0, lambda t: h, 0.02, 40)
    overlaps = np.abs(psis @ psi0.conj())
    np.testing.assert_allclose(overlaps, 1.0, atol=1e-9)
    assert drift < 1e-9


def test_schrodinger_rejects_unnormalized():
    h = np.zeros((2, 2))
    with pytest.raises(ValueError):
        schrodinger_evolve_td(np.array([1.0, 1.0]), lambda t: h, 1.0, 5)


def test_adiabatic_sweep_reference(ref_derived):
    d = ref_derived
    res = run_adiabatic_sweep(d, velocity=d.g13_tilde / 5, t_end=25.0 / d.g13_tilde)
    assert res.dark_pop[-1] > 0.99
    # closed-form phonon weight of the instantaneous dark state at v t = 5
    w = d.params.omega_d * math.exp(5.0)
    expected = w ** 2 / (w ** 2 + d.g13_tilde ** 2)
    assert res.phonon_fraction[-1] == pytest.approx(expected, abs=1e-12)
    assert res.phonon_fraction[-1] == pytest.approx(0.9955, abs=1e-3)
    assert res.state_phonon_prob > 0.99
    assert res.survival == pytest.approx(1.0, abs=1e-9)


def test_adiabatic_sweep_diabatic_limit(ref_derived):
    d = ref_derived
    res = run_adiabatic_sweep(d, velocity=100.0 * d.g13_tilde, t_end=5.0 / (100.0 * d.g13_tilde))
    assert res.dark_pop[-1] < 0.9


def test_sweep_matches_general_integrator(ref_derived):
    # the specialized kernel against the generic schedule integrator
    d = ref_derived
    v = d.g13_tilde / 5
    t_end = 5.0 / d.g13_tilde
    res = run_adiabatic_sweep(d, velocity=v, t_end=t_end, n_samples=50)

    def schedule(t):
        w = d.params.omega_d * math.exp(v * t)
        return TWO_PI * np.array([
            [0.0, w, 0.0],
            [w, d.params.epsilon, d.g13_tilde],
            [0.0, d.g13_tilde, 0.0],
        ])

    b = d.bright_coupling
    psi0 = np.array([d.g13_tilde / b, 0.0, -d.params.omega_d / b], dtype=complex)
    _, psis, _ = schrodinger_evolve_td(psi0, schedule, t_end, 50)
    np.testing.assert_allclose(np.abs(res.psi_final), np.abs(psis[-1]), atol=1e-8)


def test_sweep_dwell_holds_control(ref_derived):
    d = ref_derived
    res = run_adiabatic_sweep(d, velocity=d.g13_tilde / 5, t_end=25.0 / d.g13_tilde,
                              n_samples=100, dwell=0.05)
    in_dwell = res.times_ms <= 0.05
    assert np.all(res.omega_d_t[in_dwell] == d.params.omega_d)
    assert res.dark_pop[-1] > 0.99


def test_sweep_phonon_damping_reduces_survival(ref_derived):
    d = ref_derived
    res = run_adiabatic_sweep(d, velocity=d.g13_tilde / 5, t_end=25.0 / d.g13_tilde,
                              phonon_damping=d.gamma_p)
    assert res.survival < 1.0
    # loss is bounded by full-strength damping over the whole window
    assert res.survival > math.exp(-TWO_PI * d.gamma_p * 0.125)


def test_sweep_rejects_bad_arguments(ref_derived):
    with pytest.raises(ValueError):
        run_adiabatic_sweep(ref_derived, velocity=-1.0, t_end=0.1)
    with pytest.raises(ValueError):
        run_adiabatic_sweep(ref_derived, velocity=1.0, t_end=0.1, dwell=-0.1)
