import math

import numpy as np
import pytest

from phonon_blockade import (
    ObservableRecord,
    Operator,
    annihilation,
    coherent_state,
    find_g2_minimum,
    fock_state,
    g2_zero,
    mean_number,
    population,
    purity,
    record_from_state,
    thermal_state,
)


class FakeTraj:
    def __init__(self, times, g2, p1):
        self.times_ms = np.asarray(times, dtype=float)
        self.g2 = np.asarray(g2, dtype=float)
        self.p1 = np.asarray(p1, dtype=float)


def test_g2_thermal():
    for n_th in (0.1, 0.3, 0.5):
        assert g2_zero(thermal_state(n_th, 20)) == pytest.approx(2.0, abs=1e-6)


def test_g2_fock_states():
    assert g2_zero(fock_state(1, 10)) == 0.0
    assert g2_zero(fock_state(2, 10)) == 0.5


def test_g2_coherent():
    assert g2_zero(coherent_state(1.0, 20)) == pytest.approx(1.0, abs=1e-6)


def test_g2_undefined_for_vacuum():
    assert g2_zero(fock_state(0, 10)) is None


def test_g2_phase_invariance():
    rng = np.random.default_rng(17)
    rho = coherent_state(0.9 + 0.4j, 16)
    base = g2_zero(rho)
    for _ in range(10):
        phi = rng.uniform(0, 2 * math.pi)
        a_rot = Operator(np.exp(1j * phi) * annihilation(16).entries)
        assert g2_zero(rho, a_rot) == pytest.approx(base, rel=1e-12)


def test_g2_diagonal_matches_trace_formula():
    rng = np.random.default_rng(19)
    for _ in range(10):
        p = rng.uniform(0.0, 1.0, size=13)
        p /= p.sum()
        rho = np.diag(p).astype(complex)
        n = np.arange(13.0)
        from_pops = float(p @ (n * (n - 1))) / float(p @ n) ** 2
        assert g2_zero(rho) == pytest.approx(from_pops, abs=1e-12)


def test_population_mean_purity():
    assert population(fock_state(1, 6), 1) == 1.0
    with pytest.raises(ValueError):
        population(fock_state(1, 6), 7)
    th = thermal_state(0.5, 20)
    assert mean_number(th) == pytest.approx(0.5, abs=1e-6)
    assert mean_number(th, annihilation(20)) == pytest.approx(0.5, abs=1e-6)
    assert purity(th) == pytest.approx(1.0 / (2 * 0.5 + 1), abs=1e-6)
    assert purity(fock_state(3, 8)) == pytest.approx(1.0, abs=0)


def test_record_from_state():
    rec = record_from_state(thermal_state(0.3, 15))
    assert abs(sum(rec.populations) - 1.0) < 1e-10
    assert rec.g2_zero == pytest.approx(2.0, abs=1e-5)
    rec_vac = record_from_state(fock_state(0, 5))
    assert rec_vac.g2_zero is None


def test_observable_record_invariants():
    with pytest.raises(ValueError):
        ObservableRecord(None, (0.5, 0.4), 0.4, 0.9, 0.0)   # populations sum 0.9
    with pytest.raises(ValueError):
        ObservableRecord(None, (1.0,), 0.0, 1.1, 0.0)       # purity > 1


def test_find_g2_minimum_monotone():
    traj = FakeTraj([0, 1, 2, 3], [2.0, 1.5, 1.0, 0.5], [0.1, 0.2, 0.3, 0.4])
    res = find_g2_minimum(traj)
    assert res.index == 3 and res.g2_min == 0.5 and res.p1_at_tmin == 0.4


def test_find_g2_minimum_tie_breaks_earliest():
    traj = FakeTraj([0, 1, 2], [1.0, 1.0, 1.0], [0.1, 0.2, 0.3])
    assert find_g2_minimum(traj).index == 0


def test_find_g2_minimum_skips_undefined():
    traj = FakeTraj([0, 1, 2, 3], [math.nan, 2.0, 0.7, 0.9], [0.0, 0.1, 0.5, 0.4])
    res = find_g2_minimum(traj)
    assert res.index == 2 and res.t_min == 2.0


def test_find_g2_minimum_needs_samples():
    with pytest.raises(ValueError):
        find_g2_minimum(FakeTraj([0, 1, 2], [math.nan, math.nan, 1.0], [0, 0, 0]))
