"""Exact 6x6 operator algebra of the photon spinor formalism.

The fixed operators are

    Gamma0 = diag(I3, -I3)
    Gamma_i = offdiag(Sigma_i, Sigma_i)      (Sigma_k)_ij = -i eps_ijk
    Omega_i = diag(Sigma_i, Sigma_i) = -i (Gamma x Gamma)_i

with the block convention that rows/columns 1-3 form the upper block.  All
entries are Gaussian integers {0, +-1, +-i}, so every product of the fixed
operators is computed exactly in double precision: the real and imaginary
parts stay small integers, which IEEE arithmetic represents and adds without
rounding.  Identity checks on these operators are therefore exact equality
tests, not tolerance tests.

The cross-product convention on matrix vectors is fixed here once:
(A x B)_i = eps_ijk A_j B_k with summation over j, k.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import IdentityViolation, NotUnitVector, ZeroWavevector

_UNIT_TOL = 1e-12

# Levi-Civita symbol, eps[i, j, k]
LEVI_CIVITA = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    LEVI_CIVITA[_i, _j, _k] = 1.0
    LEVI_CIVITA[_j, _i, _k] = -1.0


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def _is_gaussian_integer(a: np.ndarray) -> bool:
    return bool(np.all(a.real == np.round(a.real)) and np.all(a.imag == np.round(a.imag)))


@dataclass(frozen=True)
class Matrix6:
    """A 6x6 complex matrix with an exactness marker.

    ``exact`` is True when the entries are Gaussian integers, in which case
    sums and products with other exact matrices are free of rounding.
    Derived k-dependent matrices (Hamiltonians, boosts) carry exact=False.
    """

    entries: np.ndarray
    exact: bool = False

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=complex)
        if e.shape != (6, 6):
            raise ValueError(f"Matrix6 requires shape (6, 6), got {e.shape}")
        object.__setattr__(self, "entries", _readonly(e))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    def __matmul__(self, other: "Matrix6") -> "Matrix6":
        o = _as_matrix6(other)
        return Matrix6(self.entries @ o.entries, exact=self.exact and o.exact)

    def __add__(self, other: "Matrix6") -> "Matrix6":
        o = _as_matrix6(other)
        return Matrix6(self.entries + o.entries, exact=self.exact and o.exact)

    def __sub__(self, other: "Matrix6") -> "Matrix6":
        o = _as_matrix6(other)
        return Matrix6(self.entries - o.entries, exact=self.exact and o.exact)

    def __neg__(self) -> "Matrix6":
        return Matrix6(-self.entries, exact=self.exact)

    def __mul__(self, z) -> "Matrix6":
        z = complex(z)
        zint = z.real == round(z.real) and z.imag == round(z.imag)
        return Matrix6(self.entries * z, exact=self.exact and zint)

    __rmul__ = __mul__

    @property
    def H(self) -> "Matrix6":
        """Conjugate transpose."""
        return Matrix6(self.entries.conj().T, exact=self.exact)

    def is_hermitian(self, tol: float = 0.0) -> bool:
        return bool(np.max(np.abs(self.entries - self.entries.conj().T)) <= tol)


def _as_matrix6(m) -> Matrix6:
    if isinstance(m, Matrix6):
        return m
    a = np.asarray(m, dtype=complex)
    return Matrix6(a, exact=_is_gaussian_integer(a))


@dataclass(frozen=True)
class OperatorSet:
    """The fixed operators: Gamma0, the three Gamma_i, Sigma_i, Omega_i."""

    gamma0: Matrix6
    gamma: tuple
    sigma: tuple
    omega: tuple


def build_operators() -> OperatorSet:
    """Construct the exact operator set.  Deterministic and idempotent."""
    sigma = tuple(_readonly(-1j * LEVI_CIVITA[:, :, k]) for k in range(3))
    i3, z3 = np.eye(3), np.zeros((3, 3))
    gamma0 = Matrix6(np.block([[i3, z3], [z3, -i3]]), exact=True)
    gamma = tuple(
        Matrix6(np.block([[z3, sigma[i]], [sigma[i], z3]]), exact=True) for i in range(3)
    )
    omega = tuple(
        Matrix6(np.block([[sigma[i], z3], [z3, sigma[i]]]), exact=True) for i in range(3)
    )
    return OperatorSet(gamma0=gamma0, gamma=gamma, sigma=sigma, omega=omega)


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    passed: bool
    max_abs_deviation: float


@dataclass(frozen=True)
class IdentityReport:
    checks: tuple = field(default_factory=tuple)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dicts(self) -> list:
        return [
            {"name": c.name, "passed": c.passed, "max_abs_deviation": c.max_abs_deviation}
            for c in self.checks
        ]


def _dev(lhs: np.ndarray, rhs: np.ndarray) -> float:
    return float(np.max(np.abs(np.asarray(lhs) - np.asarray(rhs))))


def verify_identities(ops: OperatorSet, raise_on_failure: bool = True) -> IdentityReport:
    """Check every algebraic identity stated for the fixed operators.

    All checks are exact: the report records the max absolute deviation and a
    pass requires it to be exactly zero.  With raise_on_failure (the default)
    an IdentityViolation names the first failed check; a failure can only be
    produced by a corrupted operator set and signals an implementation bug.
    """
    g0 = ops.gamma0.entries
    g = [m.entries for m in ops.gamma]
    om = [m.entries for m in ops.omega]
    sg = list(ops.sigma)
    i6 = np.eye(6)
    checks = []

    checks.append(("gamma0_squared_is_identity", _dev(g0 @ g0, i6)))

    d = max(_dev(g0 @ g[i] + g[i] @ g0, 0.0 * i6) for i in range(3))
    checks.append(("gamma0_gamma_anticommute", d))

    d = 0.0
    for i in range(3):
        for j in range(3):
            for k in range(3):
                lhs = g[i] @ g[j] @ g[k] + g[k] @ g[j] @ g[i]
                rhs = g[i] * (j == k) + g[k] * (i == j)
                d = max(d, _dev(lhs, rhs))
    checks.append(("gamma_triple_product", d))

    d = 0.0
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        d = max(d, _dev(sg[i] @ sg[j] - sg[j] @ sg[i], 1j * sg[k]))
    checks.append(("sigma_commutation", d))

    d = 0.0
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        d = max(d, _dev(om[i] @ om[j] - om[j] @ om[i], 1j * om[k]))
    checks.append(("omega_commutation", d))

    checks.append(("omega_squared_is_two", _dev(sum(m @ m for m in om), 2 * i6)))

    d = 0.0
    for i in range(3):
        acc = np.zeros((6, 6), dtype=complex)
        for j in range(3):
            for k in range(3):
                if LEVI_CIVITA[i, j, k]:
                    acc += LEVI_CIVITA[i, j, k] * (g[j] @ g[k])
        d = max(d, _dev(-1j * acc, om[i]))
    checks.append(("omega_is_minus_i_gamma_cross_gamma", d))

    report = IdentityReport(
        checks=tuple(IdentityCheck(n, dev == 0.0, dev) for n, dev in checks)
    )
    if raise_on_failure and not report.all_passed:
        bad = next(c for c in report.checks if not c.passed)
        raise IdentityViolation(bad.name, report)
    return report


def spin_component_along(ops: OperatorSet, n) -> tuple:
    """Omega . n for a unit vector n, plus its eigenvalues sorted descending."""
    n = np.asarray(n, dtype=float)
    if abs(np.linalg.norm(n) - 1.0) > _UNIT_TOL:
        raise NotUnitVector(f"|n| = {np.linalg.norm(n)} deviates from 1 beyond {_UNIT_TOL}")
    m = sum(n[i] * ops.omega[i].entries for i in range(3))
    evals = np.linalg.eigvalsh(m)[::-1]
    return Matrix6(m, exact=_is_gaussian_integer(m)), evals


def hamiltonian_matrix(ops: OperatorSet, k, hbar: float = 1.0, c: float = 1.0) -> Matrix6:
    """H(k) = i hbar c Gamma0 (Gamma . k).

    Hermitian with eigenvalues {+hbar c |k| x2, 0 x2, -hbar c |k| x2}.  As a
    matrix H^2 equals (hbar c k)^2 times the transverse projector; the scalar
    relation H^2 = (hbar c k)^2 holds on the constraint-satisfying subspace.
    """
    k = np.asarray(k, dtype=float)
    if np.linalg.norm(k) == 0.0:
        raise ZeroWavevector("no photon can have vanishing energy or momentum")
    gk = sum(k[i] * ops.gamma[i].entries for i in range(3))
    return Matrix6(1j * hbar * c * (ops.gamma0.entries @ gk), exact=False)


def reduced_spin_along(ops: OperatorSet, w) -> tuple:
    """Components S_i = (Omega . w) w_i of the reduced spin operator."""
    w = np.asarray(w, dtype=float)
    if abs(np.linalg.norm(w) - 1.0) > _UNIT_TOL:
        raise NotUnitVector(f"|w| = {np.linalg.norm(w)} deviates from 1 beyond {_UNIT_TOL}")
    ow = sum(w[i] * ops.omega[i].entries for i in range(3))
    return tuple(Matrix6(ow * w[i], exact=False) for i in range(3))


def commutator(a, b) -> Matrix6:
    """AB - BA."""
    am, bm = _as_matrix6(a), _as_matrix6(b)
    return am @ bm - bm @ am


OPERATORS = build_operators()
