"""Operator and state algebra on truncated Fock spaces.

All operators are dense complex matrices.  A truncation ``cutoff`` means the
basis {|0>, ..., |cutoff>}, i.e. dimension cutoff + 1.  Operators and states
are immutable after construction and safe to share between workers.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-9
# probability mass allowed to fall above the truncation before we warn
TRUNCATION_MASS_TOL = 1e-9


class TruncationWarning(UserWarning):
    """A state lost non-negligible probability mass to the Fock cutoff."""


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=complex)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class Operator:
    """Square complex matrix over a truncated (possibly multimode) basis."""

    entries: np.ndarray
    basis_label: str = ""

    def __post_init__(self):
        ent = np.asarray(self.entries)
        if ent.ndim != 2 or ent.shape[0] != ent.shape[1]:
            raise ValueError(f"operator entries must be square, got shape {ent.shape}")
        object.__setattr__(self, "entries", _freeze(ent))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def adjoint(self) -> "Operator":
        return Operator(self.entries.conj().T.copy(), self.basis_label)

    def is_hermitian(self, tol: float = HERMITICITY_TOL) -> bool:
        return bool(np.max(np.abs(self.entries - self.entries.conj().T)) <= tol)

    def _check_dim(self, other: "Operator"):
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __matmul__(self, other: "Operator") -> "Operator":
        self._check_dim(other)
        return Operator(self.entries @ other.entries, self.basis_label)

    def __add__(self, other: "Operator") -> "Operator":
        self._check_dim(other)
        return Operator(self.entries + other.entries, self.basis_label)

    def __sub__(self, other: "Operator") -> "Operator":
        self._check_dim(other)
        return Operator(self.entries - other.entries, self.basis_label)

    def __mul__(self, scalar: complex) -> "Operator":
        return Operator(self.entries * scalar, self.basis_label)

    __rmul__ = __mul__

    def __neg__(self) -> "Operator":
        return Operator(-self.entries, self.basis_label)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, positive-semidefinite, unit-trace operator.

    Invariants are checked on construction: hermiticity to 1e-12 (max
    elementwise deviation), trace to 1e-10, smallest eigenvalue >= -1e-9.
    """

    op: Operator

    def __post_init__(self):
        m = self.op.entries
        herm = np.max(np.abs(m - m.conj().T))
        if herm > HERMITICITY_TOL:
            raise ValueError(f"density matrix not hermitian: max deviation {herm:.3e}")
        tr = np.trace(m)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"density matrix trace {tr} differs from 1 beyond {TRACE_TOL}")
        emin = float(np.linalg.eigvalsh(m)[0])
        if emin < -POSITIVITY_TOL:
            raise ValueError(f"density matrix has eigenvalue {emin:.3e} < -{POSITIVITY_TOL}")

    @classmethod
    def from_entries(cls, entries: np.ndarray, basis_label: str = "") -> "DensityMatrix":
        return cls(Operator(entries, basis_label))

    @property
    def entries(self) -> np.ndarray:
        return self.op.entries

    @property
    def dim(self) -> int:
        return self.op.dim

    def populations(self) -> np.ndarray:
        return self.entries.diagonal().real.copy()


def _require_cutoff(cutoff: int):
    if int(cutoff) != cutoff or cutoff < 1:
        raise ValueError(f"cutoff must be an integer >= 1, got {cutoff!r} (cutoff=0 has no dynamics)")


def annihilation(cutoff: int) -> Operator:
    """Lowering operator on {|0>, ..., |cutoff>}: <n-1|a|n> = sqrt(n)."""
    _require_cutoff(cutoff)
    d = cutoff + 1
    m = np.zeros((d, d), dtype=complex)
    ns = np.arange(1, d)
    m[ns - 1, ns] = np.sqrt(ns)
    return Operator(m, f"fock(n_max={cutoff})")


def creation(cutoff: int) -> Operator:
    return annihilation(cutoff).adjoint()


def number_operator(cutoff: int) -> Operator:
    """diag(0, 1, ..., cutoff).  Coincides with creation @ annihilation."""
    _require_cutoff(cutoff)
    return Operator(np.diag(np.arange(cutoff + 1, dtype=float)).astype(complex),
                    f"fock(n_max={cutoff})")


def identity(dim: int) -> Operator:
    if dim < 1:
        raise ValueError("dimension must be >= 1")
    return Operator(np.eye(dim, dtype=complex))


def thermal_state(n_th: float, cutoff: int) -> DensityMatrix:
    """Truncated thermal state, p_n ~ n_th^n / (1 + n_th)^(n+1), renormalized.

    The geometric ratio p_{n+1}/p_n = n_th/(1+n_th) is preserved by the
    renormalization, so the truncated state remains an exact fixed point of a
    thermal dissipator at the same occupation.
    """
    _require_cutoff(cutoff)
    if n_th < 0:
        raise ValueError(f"thermal occupation must be >= 0, got {n_th}")
    n = np.arange(cutoff + 1, dtype=float)
    if n_th == 0:
        p = np.zeros(cutoff + 1)
        p[0] = 1.0
    else:
        ratio = n_th / (1.0 + n_th)
        p = ratio ** n / (1.0 + n_th)
    mass = p.sum()
    if 1.0 - mass > TRUNCATION_MASS_TOL:
        warnings.warn(
            f"thermal_state(n_th={n_th}, cutoff={cutoff}) truncates mass "
            f"{1.0 - mass:.3e}; renormalizing by 1/{mass:.12f}",
            TruncationWarning,
            stacklevel=2,
        )
    p = p / mass
    return DensityMatrix(Operator(np.diag(p).astype(complex), f"fock(n_max={cutoff})"))


def fock_state(n: int, cutoff: int) -> DensityMatrix:
    """Projector |n><n| on the truncated basis."""
    _require_cutoff(cutoff)
    if not 0 <= n <= cutoff:
        raise ValueError(f"fock level n={n} outside truncation 0..{cutoff}")
    m = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
    m[n, n] = 1.0
    return DensityMatrix(Operator(m, f"fock(n_max={cutoff})"))


def coherent_state(alpha: complex, cutoff: int) -> DensityMatrix:
    """Normalized truncated coherent state |alpha><alpha|.

    Rejects |alpha|^2 > cutoff/4 so the Poisson tail above the cutoff stays
    negligible.
    """
    _require_cutoff(cutoff)
    if abs(alpha) ** 2 > cutoff / 4.0:
        raise ValueError(
            f"|alpha|^2 = {abs(alpha) ** 2:.4g} exceeds cutoff/4 = {cutoff / 4.0}; "
            "truncation would distort the state"
        )
    n = np.arange(cutoff + 1)
    log_fact = np.cumsum(np.concatenate(([0.0], np.log(np.arange(1, cutoff + 1)))))
    amps = np.exp(-0.5 * abs(alpha) ** 2 - 0.5 * log_fact) * np.power(complex(alpha), n)
    mass = float(np.vdot(amps, amps).real)
    if 1.0 - mass > TRUNCATION_MASS_TOL:
        warnings.warn(
            f"coherent_state(alpha={alpha}, cutoff={cutoff}) truncates mass {1.0 - mass:.3e}",
            TruncationWarning,
            stacklevel=2,
        )
    amps = amps / math.sqrt(mass)
    return DensityMatrix(Operator(np.outer(amps, amps.conj()), f"fock(n_max={cutoff})"))


def kron(a: Operator, b: Operator) -> Operator:
    label = f"{a.basis_label}(x){b.basis_label}" if a.basis_label or b.basis_label else ""
    return Operator(np.kron(a.entries, b.entries), label)


def expectation(x: Operator, rho: DensityMatrix | Operator | np.ndarray) -> complex:
    """Tr(X rho)."""
    if isinstance(rho, DensityMatrix):
        r = rho.entries
    elif isinstance(rho, Operator):
        r = rho.entries
    else:
        r = np.asarray(rho)
    if x.dim != r.shape[0]:
        raise ValueError(f"dimension mismatch: {x.dim} vs {r.shape[0]}")
    # trace(X @ rho) without forming the product
    return complex(np.sum(x.entries * r.T))
