"""Equal-time statistics of a mode: g2(0), populations, mean occupation, purity."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import DensityMatrix, Operator, annihilation

# below this mean occupation g2(0) is reported as undefined, never 0/0
G2_UNDEFINED_THRESHOLD = 1e-12


def _entries(rho) -> np.ndarray:
    if isinstance(rho, (DensityMatrix, Operator)):
        return rho.entries
    return np.asarray(rho, dtype=complex)


def g2_zero_from_moments(mean: float, nn1: float, threshold: float = G2_UNDEFINED_THRESHOLD) -> float:
    """g2(0) from <n> and <n(n-1)>; NaN when the mean is below threshold."""
    if mean <= threshold:
        return math.nan
    return nn1 / mean ** 2


def _is_canonical(a: Operator, dim: int) -> bool:
    return a.dim == dim and np.array_equal(a.entries, annihilation(dim - 1).entries)


def g2_zero(rho, a: Operator | None = None):
    """Second-order correlation tr(a+a+aa rho) / tr(a+a rho)^2.

    Returns None for a vacuum-dominated state (mean occupation below
    G2_UNDEFINED_THRESHOLD) where the ratio is meaningless.  For the
    canonical lowering operator both moments are diagonal, so they are
    taken straight from the populations (exact for fock states); an
    explicit non-canonical operator goes through the trace formula.
    """
    r = _entries(rho)
    if a is not None and a.dim != r.shape[0]:
        raise ValueError(f"dimension mismatch: {a.dim} vs {r.shape[0]}")
    if a is None or _is_canonical(a, r.shape[0]):
        ns = np.arange(r.shape[0], dtype=float)
        pops = r.diagonal().real
        mean = float(pops @ ns)
        if mean <= G2_UNDEFINED_THRESHOLD:
            return None
        return float(pops @ (ns * (ns - 1.0))) / mean ** 2
    am = a.entries
    num_op = am.conj().T @ am
    mean = float(np.trace(num_op @ r).real)
    if mean <= G2_UNDEFINED_THRESHOLD:
        return None
    pair_op = am.conj().T @ am.conj().T @ am @ am
    return float(np.trace(pair_op @ r).real) / mean ** 2


def population(rho, n: int) -> float:
    r = _entries(rho)
    if not 0 <= n < r.shape[0]:
        raise ValueError(f"fock level {n} outside basis of dimension {r.shape[0]}")
    return float(r[n, n].real)


def mean_number(rho, a: Operator | None = None) -> float:
    r = _entries(rho)
    if a is None:
        ns = np.arange(r.shape[0], dtype=float)
        return float(r.diagonal().real @ ns)
    am = a.entries
    return float(np.trace(am.conj().T @ am @ r).real)


def purity(rho) -> float:
    r = _entries(rho)
    return float(np.sum(np.abs(r) ** 2))


@dataclass(frozen=True)
class ObservableRecord:
    g2_zero: float | None
    populations: tuple[float, ...]
    mean_n: float
    purity: float
    trace_error: float

    def __post_init__(self):
        total = sum(self.populations)
        if abs(total - 1.0) > 1e-8:
            raise ValueError(f"populations sum to {total}, not 1")
        if self.purity > 1.0 + 1e-10:
            raise ValueError(f"purity {self.purity} exceeds 1")


def record_from_state(rho, trace_error: float = 0.0) -> ObservableRecord:
    r = _entries(rho)
    pops = r.diagonal().real
    ns = np.arange(r.shape[0], dtype=float)
    mean = float(pops @ ns)
    nn1 = float(pops @ (ns * (ns - 1.0)))
    g2 = g2_zero_from_moments(mean, nn1)
    return ObservableRecord(
        g2_zero=None if math.isnan(g2) else g2,
        populations=tuple(pops),
        mean_n=mean,
        purity=purity(r),
        trace_error=trace_error,
    )


@dataclass(frozen=True)
class G2Minimum:
    index: int
    t_min: float
    g2_min: float
    p1_at_tmin: float


def find_g2_minimum(traj) -> G2Minimum:
    """Grid minimum of g2 over a trajectory; ties break to the earliest time.

    Undefined samples (NaN) are skipped; at least three defined samples are
    required.
    """
    g2 = np.asarray(traj.g2, dtype=float)
    defined = ~np.isnan(g2)
    if defined.sum() < 3:
        raise ValueError(f"need at least 3 defined g2 samples, have {int(defined.sum())}")
    masked = np.where(defined, g2, np.inf)
    idx = int(np.argmin(masked))   # argmin returns the first minimum -> earliest time
    return G2Minimum(
        index=idx,
        t_min=float(traj.times_ms[idx]),
        g2_min=float(g2[idx]),
        p1_at_tmin=float(traj.p1[idx]),
    )
