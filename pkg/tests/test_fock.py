import math

import numpy as np
import pytest

from phonon_blockade import (
    DensityMatrix,
    Operator,
    TruncationWarning,
    annihilation,
    coherent_state,
    creation,
    expectation,
    fock_state,
    identity,
    kron,
    number_operator,
    thermal_state,
)


def test_annihilation_entries():
    a = annihilation(2).entries
    assert a[0, 1] == 1.0
    assert a[1, 2] == pytest.approx(math.sqrt(2), abs=0)
    assert np.all(a[:, 0] == 0.0)


def test_annihilation_rejects_cutoff_zero():
    with pytest.raises(ValueError):
        annihilation(0)


def test_number_operator_diagonal_and_trace():
    n = number_operator(3)
    assert np.array_equal(n.entries, np.diag([0.0, 1.0, 2.0, 3.0]))
    assert np.trace(number_operator(7).entries).real == 7 * 8 / 2


def test_number_operator_matches_ladder_product():
    for cutoff in (1, 2, 5, 20):
        prod = (creation(cutoff) @ annihilation(cutoff)).entries
        np.testing.assert_allclose(prod, number_operator(cutoff).entries, atol=1e-13)


def test_commutator_truncated():
    # [a, a+] = I on levels 0..cutoff-1; the top diagonal entry is a
    # truncation artifact and is excluded
    for cutoff in (1, 3, 8, 20):
        a = annihilation(cutoff).entries
        comm = a @ a.conj().T - a.conj().T @ a
        np.testing.assert_allclose(comm[:cutoff, :cutoff], np.eye(cutoff), atol=1e-13)


def test_adjoint_involution_exact():
    rng = np.random.default_rng(7)
    m = Operator(rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5)))
    assert np.array_equal(m.adjoint().adjoint().entries, m.entries)


def test_operator_entries_immutable():
    a = annihilation(3)
    with pytest.raises(ValueError):
        a.entries[0, 0] = 1.0


def test_operator_rejects_non_square():
    with pytest.raises(ValueError):
        Operator(np.zeros((2, 3)))


def test_thermal_zero_temperature_is_vacuum():
    rho = thermal_state(0.0, 10)
    expected = np.zeros((11, 11))
    expected[0, 0] = 1.0
    np.testing.assert_allclose(rho.entries, expected, atol=0)


def test_thermal_ground_population():
    rho = thermal_state(0.1, 20)
    # truncated mass is ~(1/11)^21, invisible at this tolerance
    assert rho.entries[0, 0].real == pytest.approx(1.0 / 1.1, abs=1e-12)


def test_thermal_population_ratio():
    rho = thermal_state(0.5, 20)
    p = rho.populations()
    assert p[1] / p[0] == pytest.approx(1.0 / 3.0, abs=1e-14)


def test_thermal_populations_strictly_decreasing():
    for n_th in (0.05, 0.3, 1.0, 4.0):
        p = thermal_state(n_th, 15).populations()
        assert np.all(np.diff(p) < 0)


def test_thermal_rejects_negative():
    with pytest.raises(ValueError):
        thermal_state(-0.1, 10)


def test_thermal_truncation_warning():
    with pytest.warns(TruncationWarning):
        thermal_state(2.0, 4)


def test_fock_state_population():
    rho = fock_state(1, 5)
    assert rho.entries[1, 1].real == 1.0
    assert np.trace(rho.entries).real == 1.0


def test_fock_state_rejects_out_of_range():
    with pytest.raises(ValueError):
        fock_state(6, 5)


def test_coherent_vacuum_limit():
    np.testing.assert_allclose(coherent_state(0.0, 8).entries, fock_state(0, 8).entries, atol=0)


def test_coherent_mean_number():
    rho = coherent_state(1.0, 20)
    n = number_operator(20)
    assert expectation(n, rho).real == pytest.approx(1.0, abs=1e-9)


def test_coherent_rejects_large_amplitude():
    with pytest.raises(ValueError):
        coherent_state(3.0, 20)  # |alpha|^2 = 9 > 5


def test_kron_identities():
    assert np.array_equal(kron(identity(2, ), identity(3)).entries, np.eye(6))


def test_expectation_number_in_fock():
    assert expectation(number_operator(5), fock_state(3, 5)) == pytest.approx(3.0, abs=0)


def test_expectation_real_for_hermitian():
    rng = np.random.default_rng(11)
    for _ in range(20):
        m = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        x = Operator(m + m.conj().T)
        rho = thermal_state(0.4, 5)
        assert abs(expectation(x, rho).imag) < 1e-12


def test_expectation_conjugate_symmetry_and_linearity():
    rng = np.random.default_rng(13)
    rho = coherent_state(0.8, 12)
    for _ in range(20):
        x = Operator(rng.normal(size=(13, 13)) + 1j * rng.normal(size=(13, 13)))
        y = Operator(rng.normal(size=(13, 13)) + 1j * rng.normal(size=(13, 13)))
        a, b = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
        assert expectation(x.adjoint(), rho) == pytest.approx(
            expectation(x, rho).conjugate(), abs=1e-10)
        assert expectation(a * x + b * y, rho) == pytest.approx(
            a * expectation(x, rho) + b * expectation(y, rho), abs=1e-10)


def test_expectation_dimension_mismatch():
    with pytest.raises(ValueError):
        expectation(number_operator(4), fock_state(0, 3))


def test_density_matrix_rejects_non_hermitian():
    m = np.diag([0.5, 0.5]).astype(complex)
    m[0, 1] = 0.1
    with pytest.raises(ValueError):
        DensityMatrix.from_entries(m)


def test_density_matrix_rejects_bad_trace():
    with pytest.raises(ValueError):
        DensityMatrix.from_entries(np.diag([0.6, 0.6]).astype(complex))


def test_density_matrix_rejects_negative_eigenvalue():
    with pytest.raises(ValueError):
        DensityMatrix.from_entries(np.diag([1.1, -0.1]).astype(complex))


def test_matmul_dimension_mismatch():
    with pytest.raises(ValueError):
        annihilation(3) @ annihilation(4)
