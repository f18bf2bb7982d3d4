import os
import subprocess
import sys

import numpy as np
import pytest

from phonon_blockade import _kernels


def test_default_backend_prefers_numba():
    if _kernels.HAVE_NUMBA:
        assert _kernels.default_backend() == "numba"
    else:
        assert _kernels.default_backend() == "numpy"


def test_resolve_backend_validation():
    assert _kernels.resolve_backend(None) == _kernels.default_backend()
    assert _kernels.resolve_backend("numpy") == "numpy"
    with pytest.raises(ValueError):
        _kernels.resolve_backend("fortran")


def test_env_flag_forces_numpy_fallback():
    env = dict(os.environ, PHONON_BLOCKADE_NO_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c",
         "from phonon_blockade import _kernels; "
         "print(_kernels.HAVE_NUMBA, _kernels.default_backend())"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.split() == ["False", "numpy"]


def test_env_flag_full_stack_matches_numba(tmp_path):
    # the same tiny run through the CLI on both kernel flavors; fastmath
    # keeps the files from being byte-identical, so compare values
    if not _kernels.HAVE_NUMBA:
        pytest.skip("numba unavailable")
    args = ["-m", "phonon_blockade.cli", "--cutoff", "6", "--tmax", "2",
            "--samples", "20"]
    outs = {}
    for name, env in (("numba", dict(os.environ)),
                      ("numpy", dict(os.environ, PHONON_BLOCKADE_NO_NUMBA="1"))):
        out = tmp_path / name
        subprocess.run([sys.executable, *args, "--out", str(out), "simulate"],
                       env=env, capture_output=True, text=True, check=True)
        rows = [l.split(",") for l in (out / "sim_nth0.1_drive0.2.csv").read_text().splitlines()
                if l and not l.startswith("#")]
        outs[name] = rows
    assert outs["numba"][0] == outs["numpy"][0]          # header
    for ra, rb in zip(outs["numba"][1:], outs["numpy"][1:]):
        for a, b in zip(ra, rb):
            assert float(a) == pytest.approx(float(b), abs=1e-9)


def _toy_problem(d=6, seed=0):
    rng = np.random.default_rng(seed)
    n = np.arange(d, dtype=float)
    s = np.sqrt(n[1:])
    hd = np.zeros(d + 2)
    hd[1:d + 1] = rng.normal(size=d)
    hoR = np.zeros(d + 2)
    hoR[1:d] = rng.normal(size=d - 1)
    hoL = np.zeros(d + 2)
    hoL[2:d + 1] = hoR[1:d]
    gd, gu = 3.0, 0.7
    sds = np.zeros((d + 2, d + 2))
    sds[1:d, 1:d] = gd * np.outer(s, s)
    sus = np.zeros((d + 2, d + 2))
    sus[2:d + 1, 2:d + 1] = gu * np.outer(s, s)
    ntop = np.zeros(d)
    ntop[:-1] = n[:-1] + 1.0
    cdec = np.zeros((d + 2, d + 2))
    cdec[1:d + 1, 1:d + 1] = 0.5 * gd * (n[:, None] + n[None, :]) \
        + 0.5 * gu * (ntop[:, None] + ntop[None, :])
    p = rng.uniform(0.1, 1.0, size=d)
    p /= p.sum()
    rho = np.zeros((d + 2, d + 2), dtype=complex)
    rho[1:d + 1, 1:d + 1] = np.diag(p)
    return rho, (hd, hoR, hoL, sds, sus, cdec)


def test_lindblad_kernel_backends_agree():
    if not _kernels.HAVE_NUMBA:
        pytest.skip("numba unavailable")
    rho_a, coeffs = _toy_problem()
    rho_b = rho_a.copy()
    drift_a = _kernels.lindblad_rk4("numba", rho_a, *coeffs, 1e-4, 500, 1e-8)
    drift_b = _kernels.lindblad_rk4("numpy", rho_b, *coeffs, 1e-4, 500, 1e-8)
    assert drift_a >= 0 and drift_b >= 0
    np.testing.assert_allclose(rho_a, rho_b, atol=1e-13)


def test_lindblad_kernel_reports_drift_abort():
    rho, coeffs = _toy_problem()
    # absurd step: RK4 blows up and the kernel must signal, not continue
    drift = _kernels.lindblad_rk4("numpy", rho, *coeffs, 50.0, 100, 1e-8)
    assert drift == -1.0


def test_sweep_kernel_backends_agree():
    if not _kernels.HAVE_NUMBA:
        pytest.skip("numba unavailable")
    psi_a = np.array([0.8, 0.0, -0.6], dtype=complex)
    psi_b = psi_a.copy()
    args = (1256.6, 1256.6, 125.66, 40.0, 0.0, 0.0, 1e-5, 2000, 1e-6)
    da = _kernels.sweep_rk4("numba", psi_a, *args)
    db = _kernels.sweep_rk4("numpy", psi_b, *args)
    assert da >= 0 and db >= 0
    np.testing.assert_allclose(psi_a, psi_b, atol=1e-12)


def test_sweep_kernel_damping_decays_norm():
    psi = np.array([0.0, 0.0, 1.0], dtype=complex)
    # pure phonon amplitude with damping: norm^2 decays as exp(-damp t)
    damp, dt, nsteps = 10.0, 1e-4, 1000
    _kernels.sweep_rk4("numpy", psi, 0.0, 0.0, 0.0, 0.0, damp, 0.0, dt, nsteps, 1e-6)
    expected = np.exp(-damp * dt * nsteps)
    assert float(np.vdot(psi, psi).real) == pytest.approx(expected, rel=1e-9)
