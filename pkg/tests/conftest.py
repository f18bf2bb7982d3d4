import pytest

from phonon_blockade import (
    IntegratorConfig,
    LindbladSpec,
    annihilation,
    default_params,
    derive,
    evolve,
    thermal_state,
)
from phonon_blockade.cli import _hamiltonian_with_drive

# reference figure runs: omega_tilde = g/5 unless swept, gamma = g/8,
# cutoff 20, t_max = 20/g_nl with 400 sample intervals
FIG_GAMMA_RATIO = 1.0 / 8.0
FIG_TMAX_UNITS = 20.0
FIG_SAMPLES = 400


@pytest.fixture(scope="session")
def ref_params():
    return default_params()


@pytest.fixture(scope="session")
def ref_derived(ref_params):
    return derive(ref_params)


def figure_run(d, n_th, drive_ratio, safety=0.05):
    """One blockade run at the reference operating point."""
    cutoff = d.params.cutoff
    h = _hamiltonian_with_drive(d, cutoff, drive_ratio * d.g_nl)
    spec = LindbladSpec(hamiltonian=h, jump_down=annihilation(cutoff),
                        gamma=FIG_GAMMA_RATIO * d.g_nl, n_th=n_th)
    return evolve(
        thermal_state(n_th, cutoff), spec, FIG_TMAX_UNITS / d.g_nl, FIG_SAMPLES,
        config=IntegratorConfig(safety=safety), time_scale=d.g_nl,
    )


@pytest.fixture(scope="session")
def fig2_runs(ref_derived):
    return {n_th: figure_run(ref_derived, n_th, 0.2) for n_th in (0.1, 0.3, 0.5)}


@pytest.fixture(scope="session")
def fig3_runs(ref_derived, fig2_runs):
    runs = {0.2: fig2_runs[0.1]}
    for ratio in (0.125, 0.5):
        runs[ratio] = figure_run(ref_derived, 0.1, ratio)
    return runs
