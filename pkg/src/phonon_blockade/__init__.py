"""Driven dark-polariton blockade simulator.

A dark spin-phonon polariton with an effective Kerr nonlinearity is driven
and damped by a thermal bath; antibunched (g2(0) < 1) single-quantum states
are prepared and then converted into phonons by an exponential control-field
ramp.  The package also carries an exact-diagonalization oracle for the
four-mode model behind the effective picture.
"""

from ._kernels import HAVE_NUMBA, default_backend
from .config import ConfigError, RunConfig, config_hash, emit_config, parse_config
from .dynamics import (
    IntegratorAbort,
    IntegratorConfig,
    LindbladSpec,
    SweepResult,
    Trajectory,
    evolve,
    lindblad_rhs,
    run_adiabatic_sweep,
    schrodinger_evolve_td,
)
from .fock import (
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
from .model import (
    DerivedParams,
    PhysicalParams,
    PolaritonBasis,
    RegimeCondition,
    RegimeReport,
    bose_einstein_occupation,
    build_bosonized_h0,
    build_bosonized_h1,
    build_effective_hamiltonian,
    check_regime,
    default_params,
    derive,
    g24_tilde_from_microscopic,
    mode_annihilators,
    omega_drive_for_ratio,
    polariton_basis,
    single_excitation_matrix,
    thermal_polariton_occupation,
    total_excitation_operator,
)
from .observables import (
    G2Minimum,
    ObservableRecord,
    find_g2_minimum,
    g2_zero,
    mean_number,
    population,
    purity,
    record_from_state,
)
from .oracle import (
    OracleReport,
    dark_mode_check,
    effective_vs_full_dynamics,
    single_excitation_spectrum,
    two_excitation_shift,
)

__version__ = "0.1.0"
