"""Physical parameters, derived quantities, regime checks and Hamiltonians.

Unit convention used throughout the package: every stored rate or frequency
is a *linear* frequency in kHz (the value commonly quoted as "x/2pi").
Hamiltonian/dissipator assembly multiplies by 2*pi, so matrices are in
angular units of rad/ms and the integrator's time unit is ms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import Operator, annihilation, identity, kron, number_operator

TWO_PI = 2.0 * math.pi

# SI constants (exact, 2019 redefinition)
PLANCK_H = 6.62607015e-34  # J s
BOLTZMANN_K = 1.380649e-23  # J / K

# default threshold for "much smaller than" regime conditions
MUCH_LESS_THRESHOLD = 0.1

MAX_MULTIMODE_DIM = 4096

# mode ordering for the four-mode bosonized model:
#   d - collective spin excitation on level 2
#   f - collective spin excitation on level 3
#   b - phonon
#   e - level-4 excitation (counts twice in the excitation number)
MODE_NAMES = ("d", "f", "b", "e")


@dataclass(frozen=True)
class PhysicalParams:
    """Input rates (linear kHz) and counts.

    g13            single-center strain coupling
    n_centers      number of emitters in the ensemble
    omega_d        Rabi frequency of the control field on the 2-3 leg
    g24_tilde      sideband-engineered phonon coupling on the 2-4 leg
    epsilon        detuning of level 3
    delta          detuning of level 4
    gamma4         level-4 decay rate
    omega_m        phonon frequency
    quality_factor mechanical quality factor
    omega_drive    Rabi frequency of the state-preparation drive on 1-2
    n_th           bath occupation seen by the dark mode
    cutoff         Fock truncation of the dark mode
    """

    g13: float
    n_centers: int
    omega_d: float
    g24_tilde: float
    epsilon: float
    delta: float
    gamma4: float
    omega_m: float
    quality_factor: float
    omega_drive: float
    n_th: float
    cutoff: int

    def __post_init__(self):
        for name in ("g13", "omega_d", "g24_tilde", "epsilon", "delta",
                     "gamma4", "omega_m", "quality_factor"):
            v = getattr(self, name)
            if not v > 0:
                raise ValueError(f"{name} must be > 0, got {v}")
        if self.omega_drive < 0:
            raise ValueError(f"omega_drive must be >= 0, got {self.omega_drive}")
        if self.n_th < 0:
            raise ValueError(f"n_th must be >= 0, got {self.n_th}")
        if self.n_centers < 1:
            raise ValueError(f"n_centers must be >= 1, got {self.n_centers}")
        if self.cutoff < 1:
            raise ValueError(f"cutoff must be >= 1, got {self.cutoff}")


def default_params(drive_ratio: float = 0.2, n_th: float = 0.1, cutoff: int = 20) -> PhysicalParams:
    """Reference parameter set of the scheme.

    drive_ratio fixes the effective dark-mode drive as a fraction of the
    Kerr rate; the corresponding bare drive omega_drive is solved for.
    """
    base = dict(
        g13=1.0,
        n_centers=40000,
        omega_d=20.0,
        g24_tilde=200.0,
        epsilon=200.0,
        delta=40000.0,       # 40 MHz
        gamma4=10000.0,      # 10 MHz
        omega_m=800000.0,    # 800 MHz
        quality_factor=1e6,
    )
    g13_tilde = math.sqrt(base["n_centers"]) * base["g13"]
    b = math.hypot(base["omega_d"], g13_tilde)
    g_nl = base["g24_tilde"] ** 2 * g13_tilde ** 2 / (4.0 * base["delta"] * base["omega_d"] ** 2)
    omega_drive = drive_ratio * g_nl * b / g13_tilde
    return PhysicalParams(omega_drive=omega_drive, n_th=n_th, cutoff=cutoff, **base)


def omega_drive_for_ratio(params: PhysicalParams, drive_ratio: float) -> float:
    """Bare 1-2 drive that yields an effective dark-mode drive ratio*g_nl."""
    d = derive(params)
    return drive_ratio * d.g_nl * d.bright_coupling / d.g13_tilde


@dataclass(frozen=True)
class DerivedParams:
    """Quantities computed from PhysicalParams (linear kHz unless unitless).

    mu_coeff/nu_coeff are the mixing amplitudes of the excited-spin and
    bright components inside the +/- polaritons; phonon_fraction is the
    phonon weight of the dark polariton.
    """

    params: PhysicalParams
    g13_tilde: float          # sqrt(N) * g13
    bright_coupling: float    # B = sqrt(omega_d^2 + g13_tilde^2)
    polariton_splitting: float  # A = sqrt(epsilon^2 + 4 B^2) = mu_plus - mu_minus
    mu_plus: float
    mu_minus: float
    mu_coeff: float
    nu_coeff: float
    g_nl: float               # effective Kerr rate
    omega_tilde: float        # effective drive on the dark mode
    gamma_a: float            # decay inherited from level 4
    gamma_p: float            # phonon decay omega_m / Q
    gamma_total: float
    phonon_fraction: float    # omega_d^2 / B^2


def derive(p: PhysicalParams) -> DerivedParams:
    g13_tilde = math.sqrt(p.n_centers) * p.g13
    b = math.hypot(p.omega_d, g13_tilde)
    a = math.sqrt(p.epsilon ** 2 + 4.0 * b ** 2)
    mu_plus = (p.epsilon + a) / 2.0
    mu_minus = (p.epsilon - a) / 2.0
    norm = math.sqrt(mu_plus ** 2 + b ** 2)
    g_nl = p.g24_tilde ** 2 * g13_tilde ** 2 / (4.0 * p.delta * p.omega_d ** 2)
    gamma_a = (p.gamma4 / (2.0 * p.delta)) * g_nl
    gamma_p = p.omega_m / p.quality_factor
    return DerivedParams(
        params=p,
        g13_tilde=g13_tilde,
        bright_coupling=b,
        polariton_splitting=a,
        mu_plus=mu_plus,
        mu_minus=mu_minus,
        mu_coeff=mu_plus / norm,
        nu_coeff=b / norm,
        g_nl=g_nl,
        omega_tilde=p.omega_drive * g13_tilde / b,
        gamma_a=gamma_a,
        gamma_p=gamma_p,
        gamma_total=gamma_a + gamma_p,
        phonon_fraction=p.omega_d ** 2 / b ** 2,
    )


@dataclass(frozen=True)
class RegimeCondition:
    name: str
    lhs: float
    rhs: float
    threshold: float

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs

    @property
    def passed(self) -> bool:
        # boundary counts as a pass: ratio == threshold is acceptable
        return self.ratio <= self.threshold


@dataclass(frozen=True)
class RegimeReport:
    rows: tuple[RegimeCondition, ...]

    @property
    def all_pass(self) -> bool:
        return all(r.passed for r in self.rows)

    def __iter__(self):
        return iter(self.rows)


def check_regime(d: DerivedParams, p: PhysicalParams | None = None) -> RegimeReport:
    """Validity-regime report.

    "Much smaller than" conditions use threshold 0.1; conditions that are
    plain inequalities in the scheme (drive below the Kerr rate) use
    threshold 1.  Failures are reported, never raised.
    """
    p = p or d.params
    lvl4_mix = d.params.g24_tilde * p.omega_d / (4.0 * d.g13_tilde)
    kerr_elim = d.params.g24_tilde * d.g13_tilde / (2.0 * p.omega_d)
    rows = (
        RegimeCondition("level4_mixing_vs_2mu_plus", lvl4_mix, 2.0 * d.mu_plus, MUCH_LESS_THRESHOLD),
        RegimeCondition("level4_mixing_vs_2mu_minus", lvl4_mix, 2.0 * abs(d.mu_minus), MUCH_LESS_THRESHOLD),
        RegimeCondition("level4_mixing_vs_mu_sum", lvl4_mix, abs(d.mu_plus + d.mu_minus), MUCH_LESS_THRESHOLD),
        RegimeCondition("kerr_elimination_vs_delta", kerr_elim, p.delta, MUCH_LESS_THRESHOLD),
        RegimeCondition("control_vs_collective", p.omega_d, d.g13_tilde, MUCH_LESS_THRESHOLD),
        RegimeCondition("drive_vs_kerr", d.omega_tilde, d.g_nl, 1.0),
        RegimeCondition("bare_drive_vs_kerr", p.omega_drive, d.g_nl, 1.0),
        RegimeCondition("kerr_vs_polariton_gap", d.g_nl, min(d.mu_plus, abs(d.mu_minus)), MUCH_LESS_THRESHOLD),
    )
    return RegimeReport(rows)


def build_effective_hamiltonian(d: DerivedParams, cutoff: int, drive_on: bool = True) -> Operator:
    """Single-mode dark-polariton Hamiltonian, angular units (rad/ms).

    H = -g_nl a+a+aa + [drive_on] omega_tilde (a+ + a)
    """
    n = np.arange(cutoff + 1, dtype=float)
    h = np.diag(-TWO_PI * d.g_nl * n * (n - 1.0)).astype(complex)
    if drive_on:
        s = TWO_PI * d.omega_tilde * np.sqrt(n[1:])
        h[np.arange(cutoff), np.arange(1, cutoff + 1)] += s
        h[np.arange(1, cutoff + 1), np.arange(cutoff)] += s
    return Operator(h, f"fock(n_max={cutoff})")


def _check_multimode_dims(cutoffs) -> tuple[int, ...]:
    cuts = tuple(int(c) for c in cutoffs)
    if len(cuts) != 4:
        raise ValueError(f"need four per-mode cutoffs (d, f, b, e), got {cutoffs!r}")
    if any(c < 1 for c in cuts):
        raise ValueError(f"per-mode cutoffs must be >= 1, got {cuts}")
    dim = 1
    for c in cuts:
        dim *= c + 1
    if dim > MAX_MULTIMODE_DIM:
        raise ValueError(f"multimode dimension {dim} exceeds limit {MAX_MULTIMODE_DIM}")
    return cuts


def mode_annihilators(cutoffs) -> tuple[Operator, Operator, Operator, Operator]:
    """Annihilation operators (d, f, b, e) on the tensor-product space."""
    cuts = _check_multimode_dims(cutoffs)
    singles = [annihilation(c) for c in cuts]
    eyes = [identity(c + 1) for c in cuts]
    ops = []
    for k in range(4):
        factors = [singles[i] if i == k else eyes[i] for i in range(4)]
        m = factors[0]
        for f_ in factors[1:]:
            m = kron(m, f_)
        ops.append(Operator(m.entries, "modes d(x)f(x)b(x)e"))
    return tuple(ops)


def build_bosonized_h0(d: DerivedParams, cutoffs) -> Operator:
    """H0 = eps f+f + omega_d (f+d + d+f) + g13_tilde (b f+ + b+ f), angular."""
    p = d.params
    ad, af, ab, _ = mode_annihilators(cutoffs)
    fd = af.adjoint() @ ad
    fb = af.adjoint() @ ab
    h = (TWO_PI * p.epsilon) * (af.adjoint() @ af) \
        + (TWO_PI * p.omega_d) * (fd + fd.adjoint()) \
        + (TWO_PI * d.g13_tilde) * (fb + fb.adjoint())
    return Operator(h.entries, "modes d(x)f(x)b(x)e")


def build_bosonized_h1(d: DerivedParams, cutoffs) -> Operator:
    """H1 = delta e+e - g24_tilde (b e+d + d+e b+), angular."""
    p = d.params
    ad, _, ab, ae = mode_annihilators(cutoffs)
    edb = ae.adjoint() @ ad @ ab
    h = (TWO_PI * p.delta) * (ae.adjoint() @ ae) \
        - (TWO_PI * p.g24_tilde) * (edb + edb.adjoint())
    return Operator(h.entries, "modes d(x)f(x)b(x)e")


def total_excitation_operator(cutoffs) -> Operator:
    """N_ex = n_d + n_f + n_b + 2 n_e; commutes with H0 + H1."""
    cuts = _check_multimode_dims(cutoffs)
    nums = [number_operator(c) for c in cuts]
    eyes = [identity(c + 1) for c in cuts]
    total = None
    for k, weight in enumerate((1.0, 1.0, 1.0, 2.0)):
        factors = [nums[i] if i == k else eyes[i] for i in range(4)]
        m = factors[0]
        for f_ in factors[1:]:
            m = kron(m, f_)
        total = weight * m if total is None else total + weight * m
    return Operator(total.entries, "modes d(x)f(x)b(x)e")


@dataclass(frozen=True)
class PolaritonBasis:
    """Orthonormal coefficient vectors over (d, f, b) creation operators."""

    p0: np.ndarray
    p_plus: np.ndarray
    p_minus: np.ndarray

    def __post_init__(self):
        for name in ("p0", "p_plus", "p_minus"):
            v = np.asarray(getattr(self, name), dtype=float)
            v.flags.writeable = False
            object.__setattr__(self, name, v)


def polariton_basis(d: DerivedParams) -> PolaritonBasis:
    """Dark/bright polariton composition.

    p0 has weight g13_tilde/B on the spin wave d and -omega_d/B on the
    phonon b; the +/- polaritons mix the excited spin f with the bright
    combination (omega_d d + g13_tilde b)/B through (mu_coeff, nu_coeff).
    """
    p = d.params
    b = d.bright_coupling
    bright = np.array([p.omega_d / b, 0.0, d.g13_tilde / b])
    f_axis = np.array([0.0, 1.0, 0.0])
    return PolaritonBasis(
        p0=np.array([d.g13_tilde / b, 0.0, -p.omega_d / b]),
        p_plus=d.mu_coeff * f_axis + d.nu_coeff * bright,
        p_minus=-d.nu_coeff * f_axis + d.mu_coeff * bright,
    )


def single_excitation_matrix(d: DerivedParams) -> np.ndarray:
    """3x3 single-excitation block over (d, f, b), in kHz (linear)."""
    p = d.params
    return np.array([
        [0.0, p.omega_d, 0.0],
        [p.omega_d, p.epsilon, d.g13_tilde],
        [0.0, d.g13_tilde, 0.0],
    ])


def bose_einstein_occupation(freq_kHz: float, temperature_K: float) -> float:
    """Mean thermal occupation of a mode at linear frequency freq_kHz."""
    if temperature_K <= 0:
        raise ValueError(f"temperature must be > 0 K, got {temperature_K}")
    if freq_kHz <= 0:
        raise ValueError(f"frequency must be > 0, got {freq_kHz}")
    x = PLANCK_H * freq_kHz * 1e3 / (BOLTZMANN_K * temperature_K)
    return 1.0 / math.expm1(x)


def thermal_polariton_occupation(p: PhysicalParams, temperature_K: float) -> float:
    """Bath occupation of the dark mode: phonon_fraction * n_bar(omega_m, T).

    Only the phonon component of the dark polariton couples to the thermal
    bath when all emitters start in the ground level.
    """
    d = derive(p)
    return d.phonon_fraction * bose_einstein_occupation(p.omega_m, temperature_K)


def g24_tilde_from_microscopic(g24: float, omega_c_rabi: float, omega_m: float) -> float:
    """Sideband-engineered coupling g24 * Omega_c / omega_m."""
    if omega_m <= 0:
        raise ValueError("omega_m must be > 0")
    return g24 * omega_c_rabi / omega_m
